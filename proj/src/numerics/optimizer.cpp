#include "tnce/numerics/optimizer.h"

#include <cmath>
#include <string>

#include "tnce/error.h"

namespace tnce {

namespace {
constexpr double kPi = 3.14159265358979323846;

double cosine_ramp(double from, double to, double progress) {
  // progress 0 -> from, progress 1 -> to, cosine-shaped.
  return to + (from - to) * 0.5 * (1.0 + std::cos(kPi * progress));
}
}  // namespace

double schedule_lr(const OptimizerConfig& cfg, std::size_t step) {
  if (cfg.schedule == LrSchedule::constant) return cfg.learning_rate;
  if (cfg.total_steps < 2)
    throw ConfigError("onecycle schedule requires total_steps >= 2");
  const double peak = cfg.learning_rate;
  const double initial = peak / cfg.onecycle_div;
  const double final_lr = peak / cfg.onecycle_final_div;
  const std::size_t last = cfg.total_steps - 1;
  const std::size_t peak_step = static_cast<std::size_t>(
      std::llround(cfg.onecycle_peak_fraction * static_cast<double>(last)));
  if (step >= last) return final_lr;
  if (step <= peak_step) {
    if (peak_step == 0) return peak;
    double progress = static_cast<double>(step) / static_cast<double>(peak_step);
    return cosine_ramp(initial, peak, progress);
  }
  double progress = static_cast<double>(step - peak_step) /
                    static_cast<double>(last - peak_step);
  return cosine_ramp(peak, final_lr, progress);
}

OptimizerState::OptimizerState(const OptimizerConfig& cfg) : cfg_(cfg) {
  if (cfg.learning_rate <= 0.0) throw ConfigError("optimizer: learning_rate must be > 0");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw ConfigError("optimizer: momentum must lie in [0, 1)");
  if (cfg.weight_decay < 0.0) throw ConfigError("optimizer: weight_decay must be >= 0");
  if (cfg.schedule == LrSchedule::onecycle && cfg.total_steps < 2)
    throw ConfigError("optimizer: onecycle needs total_steps >= 2");
}

double OptimizerState::current_lr() const { return schedule_lr(cfg_, step_count_); }

void OptimizerState::step(const std::vector<std::span<double>>& params,
                          const std::vector<std::span<const double>>& grads) {
  if (params.size() != grads.size())
    throw ShapeError("optimizer_step: " + std::to_string(params.size()) +
                     " param tensors vs " + std::to_string(grads.size()) + " grads");
  if (moment1_.empty()) {
    for (const auto& p : params) moment1_.emplace_back(p.size(), 0.0);
    if (cfg_.kind == OptKind::adam)
      for (const auto& p : params) moment2_.emplace_back(p.size(), 0.0);
  }
  if (moment1_.size() != params.size())
    throw ShapeError("optimizer_step: tensor count changed across steps");

  const double lr = current_lr();
  ++step_count_;

  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    if (p.size() != g.size() || p.size() != moment1_[t].size())
      throw ShapeError("optimizer_step: tensor " + std::to_string(t) +
                       " shape mismatch (" + std::to_string(p.size()) + " vs " +
                       std::to_string(g.size()) + ")");
    auto& m1 = moment1_[t];
    if (cfg_.kind == OptKind::sgd_momentum) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double grad = g[i] + cfg_.weight_decay * p[i];
        m1[i] = cfg_.momentum * m1[i] + grad;
        p[i] -= lr * m1[i];
      }
    } else {
      auto& m2 = moment2_[t];
      const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
      const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
      const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double grad = g[i] + cfg_.weight_decay * p[i];
        m1[i] = b1 * m1[i] + (1.0 - b1) * grad;
        m2[i] = b2 * m2[i] + (1.0 - b2) * grad * grad;
        const double mhat = m1[i] / bc1;
        const double vhat = m2[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
      }
    }
  }
}

}  // namespace tnce
