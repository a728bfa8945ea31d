#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnce/numerics/rng.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

// Per-modality positive-sample transform parameters. A disabled entry is the
// identity. Transform order per view: mask -> rotate (coords2d) -> noise.
struct ModalityAugment {
  double noise_variance = 0.0;  // gaussian noise added to every coordinate
  double mask_fraction = 0.0;   // fraction of coordinates zeroed, in [0,1]
  double rotation_deg = 0.0;    // coords2d views only, in [-180, 180]
  bool enabled = true;

  bool is_identity() const;
  void validate(const std::string& modality_name) const;
};

struct AugmentationPolicy {
  std::vector<ModalityAugment> per_modality;

  static AugmentationPolicy identity(std::size_t num_modalities);
  bool is_identity() const;
  void validate() const;
  std::string describe() const;  // compact "m0:noise=..,mask=..,rot=.." form
};

// Per-modality candidate grids. The identity value must be present in every
// grid so the identity policy is always enumerable.
struct ModalityGrid {
  std::vector<double> noise_variances = {0.0};
  std::vector<double> mask_fractions = {0.0};
  std::vector<double> rotation_degs = {0.0};
};

struct PolicySpace {
  std::vector<ModalityGrid> per_modality;

  void validate() const;
  // Number of policies enumerate_policies would produce.
  std::size_t total_policies() const;
};

// Missing-modality mask: missing[k] != 0 means modality k is absent.
using ModalityMask = std::vector<std::uint8_t>;

inline ModalityMask empty_mask(std::size_t k) { return ModalityMask(k, 0); }
bool mask_any(const ModalityMask& m);
bool mask_all(const ModalityMask& m);

// Applies the policy view by view. Views flagged missing pass through
// untouched. Gaussian/discrete views mask a uniform random coordinate subset;
// coords2d views keep a contiguous center block of points (crop analogue)
// and rotate each (x, y) pair by exactly rotation_deg.
Tuple apply_policy(const AugmentationPolicy& policy,
                   const std::vector<ModalitySpec>& specs, const Tuple& tuple,
                   const ModalityMask& missing, RngState& rng);

Tuple apply_policy(const AugmentationPolicy& policy,
                   const std::vector<ModalitySpec>& specs, const Tuple& tuple,
                   RngState& rng);

// Full per-modality Cartesian product in deterministic order. Throws
// BudgetError when the product exceeds `cap` (caller must coarsen the grid).
std::vector<AugmentationPolicy> enumerate_policies(const PolicySpace& space,
                                                   std::size_t cap = 4096);

}  // namespace tnce
