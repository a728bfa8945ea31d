#include "tnce/cli/config.h"

#include <cmath>

#include "tnce/error.h"
#include "tnce/eval/presets.h"
#include "tnce/synthdata/io.h"

namespace tnce {

MultiModalDataset dataset_from_config(KeyValueConfig& cfg) {
  if (cfg.has("data.path")) return load_dataset(cfg.get_string("data.path"));

  const std::string kind = cfg.get_string("data.kind", "strong_weak");
  const std::size_t n = cfg.get_size("data.n", 2048);
  const std::uint64_t seed = cfg.get_u64("data.seed", 7);

  if (kind == "strong_weak") return standard_strong_weak_dataset(n, seed);
  if (kind == "nuisance") return nuisance_modality_dataset(n, seed);
  if (kind == "complementary")
    return complementary_dataset(cfg.get_size("data.num_modalities", 4), n, seed);
  if (kind == "xor_triple")
    return gen_discrete_tuples(DiscreteJoint::xor_triple(), n, seed);
  if (kind == "discrete_random") {
    RngState rng(cfg.get_u64("data.joint_seed", seed ^ 0xabcdefULL));
    DiscreteJoint joint = DiscreteJoint::random(
        cfg.get_size_list("data.alphabets"),
        cfg.get_double("data.concentration", 0.5), rng);
    return gen_discrete_tuples(joint, n, seed);
  }
  if (kind == "latent_factor") {
    LatentFactorConfig lf;
    lf.latent_dim = cfg.get_size("data.latent_dim", 4);
    lf.n_classes = cfg.get_size("data.n_classes", 4);
    lf.label_latent_coord = cfg.get_size("data.label_coord", 0);
    const std::size_t k = cfg.count_indexed("data.modality");
    if (k == 0)
      throw ConfigError("data.kind = latent_factor needs data.modality.<i> blocks");
    std::vector<ModalitySpec> specs;
    for (std::size_t i = 0; i < k; ++i) {
      const std::string p = "data.modality." + std::to_string(i) + ".";
      ModalitySpec s;
      s.name = cfg.get_string(p + "name", "m" + std::to_string(i));
      s.kind = view_kind_from_name(cfg.get_string(p + "kind", "gaussian"));
      s.dim = cfg.get_size(p + "dim", 8);
      s.snr = cfg.get_double(p + "snr", 1.0);
      s.alphabet_size = cfg.get_size(p + "alphabet_size", 0);
      specs.push_back(std::move(s));
    }
    return gen_latent_factor(specs, n, seed, lf);
  }
  throw ConfigError("unknown data.kind: " + kind);
}

namespace {

AugmentationPolicy policy_from_config(KeyValueConfig& cfg, std::size_t k) {
  AugmentationPolicy policy;
  if (cfg.count_indexed("policy") == 0) return policy;  // identity
  policy = AugmentationPolicy::identity(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::string p = "policy." + std::to_string(i) + ".";
    auto& m = policy.per_modality[i];
    m.noise_variance = cfg.get_double(p + "noise_variance", 0.0);
    m.mask_fraction = cfg.get_double(p + "mask_fraction", 0.0);
    m.rotation_deg = cfg.get_double(p + "rotation_deg", 0.0);
    m.enabled = cfg.get_bool(p + "enabled", true);
  }
  policy.validate();
  return policy;
}

OptimizerConfig optimizer_from_config(KeyValueConfig& cfg) {
  OptimizerConfig opt;
  const std::string kind = cfg.get_string("optimizer.kind", "adam");
  if (kind == "adam") {
    opt.kind = OptKind::adam;
    opt.learning_rate = cfg.get_double("optimizer.learning_rate", 2e-3);
    opt.weight_decay = cfg.get_double("optimizer.weight_decay", 0.0);
  } else if (kind == "sgd_momentum") {
    opt.kind = OptKind::sgd_momentum;
    // Paper-fidelity defaults for sgd runs.
    opt.learning_rate = cfg.get_double("optimizer.learning_rate", 0.25);
    opt.weight_decay = cfg.get_double("optimizer.weight_decay", 1e-4);
  } else {
    throw ConfigError("optimizer.kind must be adam or sgd_momentum");
  }
  opt.momentum = cfg.get_double("optimizer.momentum", 0.9);
  const std::string schedule = cfg.get_string("optimizer.schedule", "constant");
  if (schedule == "onecycle") {
    opt.schedule = LrSchedule::onecycle;
    opt.total_steps = cfg.get_size("optimizer.total_steps", 0);
    opt.onecycle_peak_fraction = cfg.get_double("optimizer.peak_fraction", 0.3);
  } else if (schedule != "constant") {
    throw ConfigError("optimizer.schedule must be constant or onecycle");
  }
  return opt;
}

CriticConfig critic_from_config(KeyValueConfig& cfg) {
  CriticConfig critic;
  const std::string score = cfg.get_string("critic.score", "cosine");
  if (score == "cosine")
    critic.score = CriticScore::cosine;
  else if (score == "dot")
    critic.score = CriticScore::dot;
  else
    throw ConfigError("critic.score must be cosine or dot");
  critic.temperature = cfg.get_double("critic.temperature", 0.1);
  critic.validate();
  return critic;
}

}  // namespace

TrainSettings train_settings_from_config(KeyValueConfig& cfg,
                                         std::size_t num_modalities) {
  TrainSettings s;
  if (cfg.has("proposal.alpha")) {
    s.proposal.alpha = cfg.get_double_list("proposal.alpha");
    s.proposal.validate();
    if (s.proposal.num_modalities() != num_modalities)
      throw ConfigError("proposal.alpha has " +
                        std::to_string(s.proposal.alpha.size()) +
                        " weights; need modality count + 1");
  } else {
    s.proposal = NegativeProposal::uniform(num_modalities);
  }
  s.policy = policy_from_config(cfg, num_modalities);
  const std::string strategy = cfg.get_string("train.strategy", "proposal");
  if (strategy == "proposal")
    s.strategy = NegStrategy::proposal;
  else if (strategy == "naive")
    s.strategy = NegStrategy::naive_product;
  else
    throw ConfigError("train.strategy must be proposal or naive");

  s.critic = critic_from_config(cfg);
  s.optimizer = optimizer_from_config(cfg);

  s.modality_hidden = cfg.get_size("arch.modality_hidden", 64);
  s.modality_out = cfg.get_size("arch.modality_out", 32);
  s.fusion_hidden = cfg.get_size("arch.fusion_hidden", 64);
  s.embedding_dim = cfg.get_size("arch.embedding_dim", 32);
  const std::string act = cfg.get_string("arch.activation", "relu");
  if (act == "relu")
    s.activation = Activation::relu;
  else if (act == "tanh")
    s.activation = Activation::tanh_act;
  else
    throw ConfigError("arch.activation must be relu or tanh");

  s.batch_size = cfg.get_size("train.batch_size", 32);
  s.negatives_per_anchor = cfg.get_size("train.negatives", 15);
  s.steps = cfg.get_size("train.steps", 500);
  s.dropout_prob = cfg.get_double("train.dropout_prob", 0.0);
  s.seed = cfg.get_u64("train.seed", 1);
  s.plateau_window = cfg.get_size("train.plateau_window", 0);
  s.plateau_rel_tol = cfg.get_double("train.plateau_rel_tol", 1e-4);
  s.min_steps = cfg.get_size("train.min_steps", 0);
  return s;
}

BoundVerifyConfig bound_config_from_config(KeyValueConfig& cfg) {
  BoundVerifyConfig v;
  const std::string mode = cfg.get_string("verify.mode", "discrete");
  v.seed = cfg.get_u64("verify.seed", 1);
  v.n_softmax = cfg.get_size("verify.n_softmax", 16);
  v.train_samples = cfg.get_size("verify.train_samples", 4096);
  v.eval_samples = cfg.get_size("verify.eval_samples", 8192);
  v.eval_anchors = cfg.get_size("verify.eval_anchors", 10000);
  v.eps_stat = cfg.get_double("verify.eps_stat", 0.05);

  v.inner = default_bound_inner_settings();
  v.inner.steps = cfg.get_size("verify.max_steps", v.inner.steps);
  v.inner.batch_size = cfg.get_size("verify.batch_size", v.inner.batch_size);
  v.inner.negatives_per_anchor =
      cfg.get_size("verify.train_negatives", v.inner.negatives_per_anchor);
  v.inner.optimizer.learning_rate =
      cfg.get_double("verify.learning_rate", v.inner.optimizer.learning_rate);

  if (mode == "discrete") {
    v.mode = BoundDataMode::discrete;
    const std::size_t num_joints = cfg.get_size("verify.num_joints", 20);
    v.alphas_per_joint = cfg.get_size("verify.alphas_per_joint", 5);
    const std::size_t max_k = cfg.get_size("verify.max_modalities", 3);
    const std::size_t max_alphabet = cfg.get_size("verify.max_alphabet", 4);
    if (max_k < 2) throw ConfigError("verify.max_modalities must be >= 2");
    RngState rng(cfg.get_u64("verify.joint_seed", v.seed ^ 0x777ULL));
    for (std::size_t j = 0; j < num_joints; ++j) {
      const std::size_t k = 2 + rng.uniform_index(max_k - 1);
      std::vector<std::size_t> alphabets(k);
      for (auto& a : alphabets) a = 2 + rng.uniform_index(max_alphabet - 1);
      // Log-uniform concentration spans near-deterministic to near-uniform
      // tables, which is where the bound is informative vs loose.
      const double conc = std::exp(rng.uniform(std::log(0.05), std::log(2.0)));
      v.joints.push_back(DiscreteJoint::random(alphabets, conc, rng));
    }
  } else if (mode == "gaussian") {
    v.mode = BoundDataMode::gaussian_pair;
    v.rho = cfg.get_double("verify.rho", 0.8);
    v.gaussian_trials = cfg.get_size("verify.trials", 1);
  } else {
    throw ConfigError("verify.mode must be discrete or gaussian");
  }
  return v;
}

SearchSpec search_spec_from_config(KeyValueConfig& cfg,
                                   const MultiModalDataset& ds) {
  SearchSpec spec;
  const std::size_t k = ds.num_modalities();

  // Alpha candidates: explicit rows, else the built-in schedule (pure
  // InfoNCE, uniform, disturbed-uniform, and one peak per modality).
  const std::size_t alpha_rows = cfg.count_indexed("search.alpha");
  if (alpha_rows > 0) {
    for (std::size_t i = 0; i < alpha_rows; ++i) {
      NegativeProposal p;
      p.alpha = cfg.get_double_list("search.alpha." + std::to_string(i) + ".weights");
      p.validate();
      spec.alpha_candidates.push_back(std::move(p));
    }
  } else {
    spec.alpha_candidates.push_back(NegativeProposal::infonce(k));
    spec.alpha_candidates.push_back(NegativeProposal::uniform(k));
    spec.alpha_candidates.push_back(NegativeProposal::disturbed_uniform(k));
    for (std::size_t peak = 0; peak < k; ++peak) {
      std::vector<double> raw(k + 1, 1.0);
      raw[0] = 1.0;
      raw[peak + 1] = 2.0 * static_cast<double>(k);
      spec.alpha_candidates.push_back(simplex_normalize(raw));
    }
    const std::size_t random_draws = cfg.get_size("search.random_alphas", 0);
    RngState rng(cfg.get_u64("search.alpha_seed", 99));
    for (std::size_t i = 0; i < random_draws; ++i) {
      // Dirichlet(1,...,1) via normalized exponentials.
      std::vector<double> raw(k + 1);
      for (auto& value : raw) value = -std::log(1.0 - rng.uniform() + 1e-300);
      spec.alpha_candidates.push_back(simplex_normalize(raw));
    }
  }

  // Beta candidates: per-modality grids.
  PolicySpace space;
  space.per_modality.assign(k, ModalityGrid{});
  const std::size_t grid_rows = cfg.count_indexed("search.beta_grid");
  for (std::size_t i = 0; i < grid_rows && i < k; ++i) {
    const std::string p = "search.beta_grid." + std::to_string(i) + ".";
    if (cfg.has(p + "noise_variances"))
      space.per_modality[i].noise_variances = cfg.get_double_list(p + "noise_variances");
    if (cfg.has(p + "mask_fractions"))
      space.per_modality[i].mask_fractions = cfg.get_double_list(p + "mask_fractions");
    if (cfg.has(p + "rotation_degs"))
      space.per_modality[i].rotation_degs = cfg.get_double_list(p + "rotation_degs");
  }
  spec.beta_candidates =
      enumerate_policies(space, cfg.get_size("search.policy_cap", 4096));

  spec.budget = cfg.get_size("search.budget", 64);
  spec.rounds = cfg.get_size("search.rounds", 2);
  spec.seed = cfg.get_u64("search.seed", 1);
  spec.probe_epochs = cfg.get_size("search.probe_epochs", 120);
  spec.probe_split.train_fraction = cfg.get_double("search.probe_train_fraction", 0.7);
  spec.reward.distractors = cfg.get_size("search.distractors", 9);
  spec.reward.queries_per_modality = cfg.get_size("search.queries", 256);

  spec.inner = train_settings_from_config(cfg, k);
  spec.reward.critic = spec.inner.critic;
  return spec;
}

}  // namespace tnce
