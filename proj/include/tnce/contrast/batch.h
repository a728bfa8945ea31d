#pragma once

#include <vector>

#include "tnce/augment/policy.h"
#include "tnce/contrast/proposal.h"
#include "tnce/numerics/rng.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

// One training batch. Positive i derives from the same underlying sample as
// anchor i; the shared mask applies identically to the positive and every
// negative, while each anchor carries its own mask.
struct ContrastiveBatch {
  std::size_t num_modalities = 0;
  std::vector<std::size_t> anchor_indices;
  std::vector<Tuple> anchors;
  std::vector<Tuple> positives;
  std::vector<std::vector<NegativeSample>> negatives;  // per anchor
  ModalityMask shared_mask;                            // positives + negatives
  std::vector<ModalityMask> anchor_masks;              // one per anchor

  std::size_t size() const { return anchors.size(); }
  std::size_t negs_per_anchor() const {
    return negatives.empty() ? 0 : negatives.front().size();
  }
};

// With probability drop_probability the whole batch goes masked: positives
// and negatives share one uniformly drawn non-empty proper modality subset,
// and each anchor draws its own proper subset independently (possibly
// empty). Otherwise every mask is empty. K = 1 with dropout active has no
// proper subset and is a config error.
void apply_dropout(ContrastiveBatch& batch, double drop_probability,
                   RngState& rng);

}  // namespace tnce
