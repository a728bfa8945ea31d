#pragma once

#include <cstdint>

#include "tnce/contrast/train.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

// Standard synthetic configurations shared by the experiments, the CLI
// defaults and the acceptance suite.

// Three gaussian modalities over a shared latent with strictly ordered snr
// (strong > mid > weak). Labels from latent coordinate 0.
MultiModalDataset standard_strong_weak_dataset(std::size_t n, std::uint64_t seed);

// K modalities with complementary information: each modality projects the
// same latent through its own random map, so adding modalities adds signal.
MultiModalDataset complementary_dataset(std::size_t num_modalities, std::size_t n,
                                        std::uint64_t seed);

// Strong/weak data with a planted per-sample nuisance on modality 0: half of
// its coordinates are replaced by pure noise carrying no latent information.
// Augmenting modality 0 decorrelates the nuisance between anchor and
// positive; the other modalities are clean and prefer identity.
MultiModalDataset nuisance_modality_dataset(std::size_t n, std::uint64_t seed);

// Per-view noise-variance rescaling used by policy grids: a grid value v maps
// to effective variance v / 50 * mean per-coordinate view variance, so the
// pixel-scaled grid {0, 10, 30, 50} spans "off" to "as strong as the view".
double rescaled_noise_variance(const MultiModalDataset& ds, std::size_t modality,
                               double grid_value);

// Inner-training defaults for desk-scale experiment cells.
TrainSettings default_experiment_train_settings();

}  // namespace tnce
