#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tnce {

enum class OptKind { sgd_momentum, adam };
enum class LrSchedule { constant, onecycle };

struct OptimizerConfig {
  OptKind kind = OptKind::sgd_momentum;
  double learning_rate = 0.25;  // peak rate under onecycle
  double momentum = 0.9;        // sgd_momentum only, in [0, 1)
  double weight_decay = 1e-4;

  LrSchedule schedule = LrSchedule::constant;
  std::size_t total_steps = 0;          // required for onecycle
  double onecycle_peak_fraction = 0.3;  // where the peak lands
  double onecycle_div = 25.0;           // initial lr = peak / div
  double onecycle_final_div = 1e4;      // final lr = peak / final_div

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Owns the per-tensor state buffers; buffer shapes are captured on the first
// step and enforced afterwards.
class OptimizerState {
 public:
  explicit OptimizerState(const OptimizerConfig& cfg);

  // Applies one update in place. params[i] and grads[i] must be views over
  // the same tensor layout on every call.
  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads);

  // Learning rate the next step() call will use.
  double current_lr() const;

  std::size_t step_count() const { return step_count_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  std::size_t step_count_ = 0;
  std::vector<std::vector<double>> moment1_;  // sgd velocity / adam m
  std::vector<std::vector<double>> moment2_;  // adam v
};

// Schedule value at `step` of `cfg.total_steps` (exposed for testing).
double schedule_lr(const OptimizerConfig& cfg, std::size_t step);

}  // namespace tnce
