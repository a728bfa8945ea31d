#include "tnce/mi/verify.h"

#include <cmath>

#include "tnce/error.h"
#include "tnce/util/kv.h"
#include "tnce/util/parallel.h"

namespace tnce {

TrainSettings default_bound_inner_settings() {
  TrainSettings s;
  s.modality_hidden = 32;
  s.modality_out = 16;
  s.fusion_hidden = 32;
  s.embedding_dim = 16;
  s.critic.score = CriticScore::cosine;
  s.critic.temperature = 0.1;
  s.optimizer.kind = OptKind::adam;
  s.optimizer.learning_rate = 3e-3;
  s.optimizer.momentum = 0.9;
  s.optimizer.weight_decay = 0.0;
  s.optimizer.schedule = LrSchedule::constant;
  s.batch_size = 32;
  s.negatives_per_anchor = 15;
  s.steps = 1600;          // cap; plateau detection usually stops earlier
  s.plateau_window = 200;  // relative change < 1e-4 across windows
  s.plateau_rel_tol = 1e-4;
  s.min_steps = 400;
  return s;
}

namespace {

struct TrialSpec {
  BoundDataMode mode;
  const DiscreteJoint* joint = nullptr;
  NegativeProposal alpha;
  double rho = 0.0;
};

MiReport run_trial(const BoundVerifyConfig& cfg, const TrialSpec& spec,
                   std::size_t trial_index) {
  RngState trial_rng = RngState(cfg.seed).fork(1000 + trial_index);
  const std::uint64_t train_seed = trial_rng.next_u64();
  const std::uint64_t eval_data_seed = trial_rng.next_u64();
  const std::uint64_t eval_draw_seed = trial_rng.next_u64();

  MiReport report;
  report.trial = trial_index;
  report.n_softmax = cfg.n_softmax;
  report.alpha = spec.alpha.alpha;
  report.seed = train_seed;

  MultiModalDataset train_ds, eval_ds;
  double rhs = 0.0;
  TrainSettings inner = cfg.inner;
  inner.seed = train_seed;
  inner.policy = AugmentationPolicy();  // identity; keeps I(t2;t1) exact
  inner.dropout_prob = 0.0;

  if (spec.mode == BoundDataMode::discrete) {
    report.mode = "discrete";
    train_ds = gen_discrete_tuples(*spec.joint, cfg.train_samples, train_seed);
    eval_ds = gen_discrete_tuples(*spec.joint, cfg.eval_samples, eval_data_seed);
    inner.proposal = spec.alpha;
    // Identity positives make (anchor, positive) a diagonal joint, so
    // I(t2;t1) is the table entropy; the sum terms are exact MIs.
    rhs = discrete_entropy(*spec.joint);
    for (std::size_t k = 0; k < spec.joint->num_modalities(); ++k) {
      const double a_k = spec.alpha.alpha[k + 1];
      if (a_k == 0.0) continue;
      std::vector<std::size_t> rest;
      for (std::size_t j = 0; j < spec.joint->num_modalities(); ++j)
        if (j != k) rest.push_back(j);
      rhs += a_k * exact_discrete_mi(*spec.joint, {k}, rest);
    }
  } else {
    report.mode = "gaussian";
    if (std::abs(spec.alpha.alpha[0] - 1.0) > 1e-12)
      throw ConfigError("verify_tnce_bound: gaussian mode requires alpha_0 = 1");
    const double snr = snr_for_pair_correlation(spec.rho);
    std::vector<ModalitySpec> specs(2);
    specs[0] = {"x", 1, ViewKind::gaussian_view, snr, 0};
    specs[1] = {"y", 1, ViewKind::gaussian_view, snr, 0};
    LatentFactorConfig lf;
    lf.latent_dim = 1;
    lf.n_classes = 2;
    train_ds = gen_latent_factor(specs, cfg.train_samples, train_seed, lf);
    eval_ds = gen_latent_factor(specs, cfg.eval_samples, eval_data_seed, lf);
    inner.proposal = spec.alpha;
    inner.anchor_mask_override = {0, 1};     // anchor sees only x
    inner.candidate_mask_override = {1, 0};  // candidates see only y
    rhs = gaussian_mi(spec.rho);
  }

  TrainResult trained = train_contrastive(train_ds, inner);
  report.converged = trained.plateau_converged;
  if (!report.converged)
    report.notes = "flagged: no loss plateau within " +
                   std::to_string(inner.steps) + " steps";

  // Bound estimate on fresh data at the configured softmax size.
  TrainSettings eval_cfg = inner;
  eval_cfg.negatives_per_anchor = cfg.n_softmax - 1;
  RngState eval_rng(eval_draw_seed);
  double eval_loss = evaluate_mean_loss(trained.encoder, eval_ds, eval_cfg,
                                        cfg.eval_anchors, eval_rng);
  eval_loss -= cfg.selfcheck_loss_offset;

  report.bound_estimate = nce_bound_estimate(eval_loss, cfg.n_softmax);
  report.rhs_exact = rhs;
  report.margin = report.rhs_exact - report.bound_estimate;
  report.holds = report.margin >= -cfg.eps_stat;
  return report;
}

}  // namespace

BoundVerifyResult verify_tnce_bound(const BoundVerifyConfig& cfg) {
  if (cfg.n_softmax < 2)
    throw ConfigError("verify_tnce_bound: n_softmax must be >= 2");

  std::vector<TrialSpec> trials;
  if (cfg.mode == BoundDataMode::discrete) {
    if (cfg.joints.empty())
      throw ConfigError("verify_tnce_bound: discrete mode needs joints");
    if (cfg.alphas.empty() && cfg.alphas_per_joint == 0)
      throw ConfigError("verify_tnce_bound: need alphas or alphas_per_joint >= 1");
    for (std::size_t j = 0; j < cfg.joints.size(); ++j) {
      const auto& joint = cfg.joints[j];
      joint.validate();
      std::vector<NegativeProposal> alphas = cfg.alphas;
      if (alphas.empty()) {
        const std::size_t k = joint.num_modalities();
        alphas.push_back(NegativeProposal::infonce(k));
        if (cfg.alphas_per_joint > 1) alphas.push_back(NegativeProposal::uniform(k));
        if (cfg.alphas_per_joint > 2)
          alphas.push_back(NegativeProposal::disturbed_uniform(k));
        RngState alpha_rng = RngState(cfg.seed).fork(500 + j);
        while (alphas.size() < cfg.alphas_per_joint) {
          // Dirichlet(1,...,1) via normalized exponentials.
          NegativeProposal p;
          double sum = 0.0;
          p.alpha.resize(k + 1);
          for (auto& value : p.alpha) {
            value = -std::log(1.0 - alpha_rng.uniform() + 1e-300);
            sum += value;
          }
          for (auto& value : p.alpha) value /= sum;
          double s2 = 0.0;
          for (double value : p.alpha) s2 += value;
          for (auto& value : p.alpha) value /= s2;
          alphas.push_back(std::move(p));
        }
      }
      for (const auto& alpha : alphas) {
        alpha.validate();
        if (alpha.num_modalities() != joint.num_modalities())
          throw ConfigError("verify_tnce_bound: alpha does not match joint modality count");
        TrialSpec t;
        t.mode = BoundDataMode::discrete;
        t.joint = &joint;
        t.alpha = alpha;
        trials.push_back(std::move(t));
      }
    }
  } else {
    for (std::size_t i = 0; i < cfg.gaussian_trials; ++i) {
      TrialSpec t;
      t.mode = BoundDataMode::gaussian_pair;
      t.alpha = NegativeProposal::infonce(2);
      t.rho = cfg.rho;
      trials.push_back(std::move(t));
    }
  }

  BoundVerifyResult result;
  result.reports.resize(trials.size());
  parallel_for_indexed(trials.size(), cfg.jobs, [&](std::size_t i) {
    result.reports[i] = run_trial(cfg, trials[i], i);
  });

  for (const auto& r : result.reports) {
    if (!r.converged) {
      ++result.flagged;
      continue;
    }
    if (!r.holds) result.all_hold = false;
  }
  return result;
}

std::string mi_reports_csv(const std::vector<MiReport>& reports) {
  std::string out =
      "trial,mode,n_softmax,alpha,bound_estimate,rhs_exact,margin,converged,"
      "holds,seed,notes\n";
  for (const auto& r : reports) {
    std::string alpha;
    for (std::size_t i = 0; i < r.alpha.size(); ++i) {
      if (i) alpha += ";";
      alpha += format_double(r.alpha[i]);
    }
    out += std::to_string(r.trial) + "," + r.mode + "," +
           std::to_string(r.n_softmax) + "," + alpha + "," +
           format_double(r.bound_estimate) + "," + format_double(r.rhs_exact) +
           "," + format_double(r.margin) + "," + (r.converged ? "1" : "0") +
           "," + (r.holds ? "1" : "0") + "," + std::to_string(r.seed) + "," +
           r.notes + "\n";
  }
  return out;
}

std::string verdict_block(const BoundVerifyResult& result, double eps_stat) {
  std::size_t converged = 0, held = 0;
  double worst_margin = 0.0;
  bool first = true;
  for (const auto& r : result.reports) {
    if (!r.converged) continue;
    ++converged;
    if (r.holds) ++held;
    if (first || r.margin < worst_margin) worst_margin = r.margin;
    first = false;
  }
  std::string out;
  out += "trials:          " + std::to_string(result.reports.size()) + "\n";
  out += "converged:       " + std::to_string(converged) + "\n";
  out += "flagged:         " + std::to_string(result.flagged) +
         (result.flagged ? "  (excluded from verdict; see notes column)" : "") + "\n";
  out += "held:            " + std::to_string(held) + " of " +
         std::to_string(converged) + " (eps_stat = " + format_double(eps_stat) +
         " nats)\n";
  if (!first) out += "worst margin:    " + format_double(worst_margin) + " nats\n";
  out += "verdict:         " + std::string(result.all_hold ? "ALL HOLD" : "VIOLATED") +
         "\n";
  return out;
}

}  // namespace tnce
