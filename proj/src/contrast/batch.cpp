#include "tnce/contrast/batch.h"

#include "tnce/error.h"

namespace tnce {

namespace {

// Uniform over subsets encoded as bit patterns in [lo, hi]; proper subsets
// of K modalities are patterns in [0, 2^K - 2], non-empty proper in
// [1, 2^K - 2].
ModalityMask mask_from_bits(std::size_t bits, std::size_t k) {
  ModalityMask m(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    if (bits & (std::size_t(1) << i)) m[i] = 1;
  return m;
}

}  // namespace

void apply_dropout(ContrastiveBatch& batch, double drop_probability,
                   RngState& rng) {
  if (drop_probability < 0.0 || drop_probability > 1.0)
    throw ConfigError("apply_dropout: drop_probability outside [0,1]");
  const std::size_t k = batch.num_modalities;
  if (k == 0) throw ConfigError("apply_dropout: batch has no modalities");
  if (drop_probability > 0.0 && k == 1)
    throw ConfigError("apply_dropout: K = 1 has no proper modality subset to drop");

  batch.shared_mask = empty_mask(k);
  batch.anchor_masks.assign(batch.size(), empty_mask(k));
  if (drop_probability == 0.0) return;
  if (rng.uniform() >= drop_probability) return;

  const std::size_t full = (std::size_t(1) << k) - 1;
  // Shared mask: non-empty proper subset, bits in [1, full - 1].
  std::size_t bits = 1 + rng.uniform_index(full - 1);
  batch.shared_mask = mask_from_bits(bits, k);
  // Anchors: independent proper subsets (empty allowed), bits in [0, full - 1].
  for (auto& m : batch.anchor_masks)
    m = mask_from_bits(rng.uniform_index(full), k);
}

}  // namespace tnce
