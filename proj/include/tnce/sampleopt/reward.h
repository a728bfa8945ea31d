#pragma once

#include <cstdint>

#include "tnce/contrast/encoder.h"
#include "tnce/contrast/loss.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

struct RewardConfig {
  std::size_t distractors = 9;             // candidates per query = this + 1
  std::size_t queries_per_modality = 256;  // capped at the dataset size
  CriticConfig critic;
};

// Crossmodal discrimination as retrieval: for each modality k, embed a query
// with only modality k present, then the true sample and D distractors with
// modality k missing (complementary masks, identical across candidates).
// Correct iff the true sample ranks strictly first under the critic score.
// Returns mean accuracy over modalities and queries.
double crossmodal_reward(const FusionEncoder& enc, const MultiModalDataset& ds,
                         const RewardConfig& cfg, RngState& rng);

}  // namespace tnce
