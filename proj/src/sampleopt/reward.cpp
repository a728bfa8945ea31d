#include "tnce/sampleopt/reward.h"

#include <cmath>

#include "tnce/error.h"
#include "tnce/eval/probe.h"

namespace tnce {

namespace {

double critic_score(const CriticConfig& critic, std::span<const double> a,
                    std::span<const double> b) {
  const double ab = dot(a, b);
  if (critic.score == CriticScore::dot) return ab;
  const double na = std::max(1e-12, l2_norm(a));
  const double nb = std::max(1e-12, l2_norm(b));
  return ab / (na * nb);
}

}  // namespace

double crossmodal_reward(const FusionEncoder& enc, const MultiModalDataset& ds,
                         const RewardConfig& cfg, RngState& rng) {
  const std::size_t k = ds.num_modalities();
  if (k < 2)
    throw ConfigError("crossmodal_reward: task undefined for a single modality");
  if (cfg.distractors < 1)
    throw ConfigError("crossmodal_reward: need at least one distractor");
  if (ds.size() < cfg.distractors + 2)
    throw PoolError("crossmodal_reward: dataset smaller than one candidate set");
  cfg.critic.validate();

  std::size_t correct = 0, total = 0;
  for (std::size_t mod = 0; mod < k; ++mod) {
    ModalityMask query_mask(k, 1);
    query_mask[mod] = 0;  // only modality `mod` present
    ModalityMask key_mask(k, 0);
    key_mask[mod] = 1;    // exactly modality `mod` missing

    Matrix queries = embed_dataset(enc, ds, query_mask);
    Matrix keys = embed_dataset(enc, ds, key_mask);

    const std::size_t q_count = std::min(cfg.queries_per_modality, ds.size());
    std::vector<std::size_t> q_idx =
        q_count == ds.size() ? [&] {
          std::vector<std::size_t> all(ds.size());
          for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
          return all;
        }()
                             : rng.sample_without_replacement(ds.size(), q_count);

    for (std::size_t q : q_idx) {
      const double true_score =
          critic_score(cfg.critic, queries.row(q), keys.row(q));
      bool top = true;
      for (std::size_t d = 0; d < cfg.distractors; ++d) {
        std::size_t other = rng.uniform_index(ds.size() - 1);
        if (other >= q) ++other;
        const double s = critic_score(cfg.critic, queries.row(q), keys.row(other));
        if (s >= true_score) {
          top = false;
          break;
        }
      }
      if (top) ++correct;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace tnce
