#include "tnce/eval/presets.h"

#include <cmath>

#include "tnce/error.h"
#include "tnce/util/kv.h"

namespace tnce {

MultiModalDataset standard_strong_weak_dataset(std::size_t n, std::uint64_t seed) {
  std::vector<ModalitySpec> specs = {
      {"strong", 8, ViewKind::gaussian_view, 3.0, 0},
      {"mid", 8, ViewKind::gaussian_view, 1.2, 0},
      {"weak", 8, ViewKind::gaussian_view, 0.55, 0},
  };
  LatentFactorConfig cfg;
  cfg.latent_dim = 3;
  cfg.n_classes = 4;
  return gen_latent_factor(specs, n, seed, cfg);
}

MultiModalDataset complementary_dataset(std::size_t num_modalities, std::size_t n,
                                        std::uint64_t seed) {
  if (num_modalities < 1)
    throw ConfigError("complementary_dataset: need at least one modality");
  std::vector<ModalitySpec> specs;
  for (std::size_t k = 0; k < num_modalities; ++k)
    specs.push_back({"m" + std::to_string(k), 6, ViewKind::gaussian_view, 0.9, 0});
  LatentFactorConfig cfg;
  cfg.latent_dim = 2;
  cfg.n_classes = 4;
  return gen_latent_factor(specs, n, seed, cfg);
}

MultiModalDataset nuisance_modality_dataset(std::size_t n, std::uint64_t seed) {
  std::vector<ModalitySpec> specs = {
      {"noisy", 8, ViewKind::gaussian_view, 2.5, 0},
      {"clean_a", 8, ViewKind::gaussian_view, 1.1, 0},
      {"clean_b", 8, ViewKind::gaussian_view, 0.9, 0},
  };
  LatentFactorConfig cfg;
  cfg.latent_dim = 3;
  cfg.n_classes = 4;
  MultiModalDataset ds = gen_latent_factor(specs, n, seed, cfg);

  // Replace the back half of modality 0 with per-sample nuisance: pure noise
  // at a variance comparable to the signal block, no latent content.
  RngState rng = RngState(seed).fork(40);
  const std::size_t dim = ds.specs[0].dim;
  const std::size_t nuisance_from = dim / 2;
  const double nuisance_std = 2.5;
  for (auto& t : ds.samples)
    for (std::size_t c = nuisance_from; c < dim; ++c)
      t[0][c] = rng.normal(0.0, nuisance_std);

  KeyValueWriter w;
  w.raw_block(ds.provenance);
  w.set("planted_nuisance.modality", std::size_t(0));
  w.set("planted_nuisance.from_coord", nuisance_from);
  w.set("planted_nuisance.std", nuisance_std);
  ds.provenance = w.str();
  return ds;
}

double rescaled_noise_variance(const MultiModalDataset& ds, std::size_t modality,
                               double grid_value) {
  if (modality >= ds.num_modalities())
    throw ConfigError("rescaled_noise_variance: modality out of range");
  if (grid_value == 0.0) return 0.0;
  double mean = 0.0, mean_sq = 0.0;
  std::size_t count = 0;
  for (const auto& t : ds.samples)
    for (double v : t[modality]) {
      mean += v;
      mean_sq += v * v;
      ++count;
    }
  mean /= static_cast<double>(count);
  mean_sq /= static_cast<double>(count);
  const double variance = std::max(1e-12, mean_sq - mean * mean);
  return grid_value / 50.0 * variance;
}

TrainSettings default_experiment_train_settings() {
  TrainSettings s;
  s.modality_hidden = 32;
  s.modality_out = 16;
  s.fusion_hidden = 48;
  s.embedding_dim = 16;
  s.critic.score = CriticScore::cosine;
  s.critic.temperature = 0.1;
  s.optimizer.kind = OptKind::adam;
  s.optimizer.learning_rate = 2e-3;
  s.optimizer.weight_decay = 0.0;
  s.optimizer.schedule = LrSchedule::constant;
  s.batch_size = 24;
  s.negatives_per_anchor = 15;
  s.steps = 400;
  s.dropout_prob = 0.6;
  return s;
}

}  // namespace tnce
