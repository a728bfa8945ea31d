#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnce/contrast/train.h"
#include "tnce/mi/oracles.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

// One trained-bound vs oracle comparison. The estimate comes from a critic
// evaluated on fresh samples; the right-hand side comes from exact oracles.
struct MiReport {
  std::size_t trial = 0;
  std::string mode;                // "discrete" | "gaussian"
  double bound_estimate = 0.0;     // ln(n_softmax) - evaluated loss
  double rhs_exact = 0.0;          // I(t2;t1) + sum_k alpha_k I(v^k; vbar^k)
  double margin = 0.0;             // rhs_exact - bound_estimate
  std::size_t n_softmax = 0;
  std::vector<double> alpha;
  bool converged = true;           // critic reached its loss plateau
  bool holds = true;               // margin >= -eps_stat
  std::uint64_t seed = 0;
  std::string notes;
};

enum class BoundDataMode { discrete, gaussian_pair };

struct BoundVerifyConfig {
  BoundDataMode mode = BoundDataMode::discrete;

  // discrete mode: every (joint, alpha) pair becomes one trial. Positives are
  // identity-augmented, so I(t2;t1) is the joint entropy, exactly computable.
  // When `alphas` is empty each joint gets a generated schedule of
  // `alphas_per_joint` proposals: pure InfoNCE, uniform, disturbed-uniform,
  // then Dirichlet(1,...,1) draws.
  std::vector<DiscreteJoint> joints;
  std::vector<NegativeProposal> alphas;
  std::size_t alphas_per_joint = 5;

  // gaussian mode: two 1-D views of a shared 1-D latent with correlation rho.
  // The anchor sees only modality 0 and candidates only modality 1, so the
  // trained estimate bounds the analytic I(x; y). Requires alpha_0 = 1.
  double rho = 0.8;
  std::size_t gaussian_trials = 1;

  std::size_t n_softmax = 16;        // softmax size used for the estimate
  std::size_t train_samples = 4096;
  std::size_t eval_samples = 8192;   // fresh pool backing the evaluation
  std::size_t eval_anchors = 10000;
  double eps_stat = 0.05;            // statistical slack in nats

  TrainSettings inner;               // critic training; plateau fields used
  std::uint64_t seed = 1;
  std::size_t jobs = 1;

  // Harness self-check hook: subtracted from the evaluated loss so tests can
  // prove a broken estimator is caught. Zero in real runs.
  double selfcheck_loss_offset = 0.0;
};

struct BoundVerifyResult {
  std::vector<MiReport> reports;
  bool all_hold = true;      // over converged trials only
  std::size_t flagged = 0;   // non-converged trials, excluded with a warning
};

// Critic-training defaults sized for alphabet <= 4, K <= 3 joints.
TrainSettings default_bound_inner_settings();

BoundVerifyResult verify_tnce_bound(const BoundVerifyConfig& cfg);

std::string mi_reports_csv(const std::vector<MiReport>& reports);
std::string verdict_block(const BoundVerifyResult& result, double eps_stat);

}  // namespace tnce
