#include "tnce/augment/policy.h"

#include <algorithm>
#include <cmath>

#include "tnce/error.h"
#include "tnce/util/kv.h"

namespace tnce {

bool ModalityAugment::is_identity() const {
  return !enabled ||
         (noise_variance == 0.0 && mask_fraction == 0.0 && rotation_deg == 0.0);
}

void ModalityAugment::validate(const std::string& modality_name) const {
  if (noise_variance < 0.0)
    throw PolicyError("policy for '" + modality_name + "': negative noise variance");
  if (mask_fraction < 0.0 || mask_fraction > 1.0)
    throw PolicyError("policy for '" + modality_name + "': mask_fraction outside [0,1]");
  if (rotation_deg < -180.0 || rotation_deg > 180.0)
    throw PolicyError("policy for '" + modality_name + "': rotation outside [-180,180]");
}

AugmentationPolicy AugmentationPolicy::identity(std::size_t num_modalities) {
  AugmentationPolicy p;
  p.per_modality.assign(num_modalities, ModalityAugment{});
  return p;
}

bool AugmentationPolicy::is_identity() const {
  return std::all_of(per_modality.begin(), per_modality.end(),
                     [](const ModalityAugment& m) { return m.is_identity(); });
}

void AugmentationPolicy::validate() const {
  for (std::size_t k = 0; k < per_modality.size(); ++k)
    per_modality[k].validate("modality " + std::to_string(k));
}

std::string AugmentationPolicy::describe() const {
  std::string s;
  for (std::size_t k = 0; k < per_modality.size(); ++k) {
    const auto& m = per_modality[k];
    if (k) s += " ";
    s += "m" + std::to_string(k) + ":";
    if (m.is_identity()) {
      s += "identity";
    } else {
      s += "noise=" + format_double(m.noise_variance) +
           ",mask=" + format_double(m.mask_fraction) +
           ",rot=" + format_double(m.rotation_deg);
    }
  }
  return s;
}

void PolicySpace::validate() const {
  if (per_modality.empty()) throw PolicyError("PolicySpace: no modalities");
  for (std::size_t k = 0; k < per_modality.size(); ++k) {
    const auto& g = per_modality[k];
    auto has = [](const std::vector<double>& v, double x) {
      return std::find(v.begin(), v.end(), x) != v.end();
    };
    if (g.noise_variances.empty() || g.mask_fractions.empty() ||
        g.rotation_degs.empty())
      throw PolicyError("PolicySpace: empty grid for modality " + std::to_string(k));
    if (!has(g.noise_variances, 0.0) || !has(g.mask_fractions, 0.0) ||
        !has(g.rotation_degs, 0.0))
      throw PolicyError("PolicySpace: identity value missing from a grid for modality " +
                        std::to_string(k));
  }
}

std::size_t PolicySpace::total_policies() const {
  std::size_t total = 1;
  for (const auto& g : per_modality)
    total *= g.noise_variances.size() * g.mask_fractions.size() *
             g.rotation_degs.size();
  return total;
}

bool mask_any(const ModalityMask& m) {
  return std::any_of(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; });
}

bool mask_all(const ModalityMask& m) {
  return !m.empty() &&
         std::all_of(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; });
}

namespace {

void mask_view(std::vector<double>& view, const ModalitySpec& spec,
               double fraction, RngState& rng) {
  if (fraction <= 0.0) return;
  if (spec.kind == ViewKind::coords2d_view) {
    // Crop analogue: keep a contiguous center block of points, zero the rest.
    const std::size_t points = view.size() / 2;
    const std::size_t masked = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(points)));
    const std::size_t front = masked / 2;
    const std::size_t back = masked - front;
    for (std::size_t p = 0; p < front; ++p) view[2 * p] = view[2 * p + 1] = 0.0;
    for (std::size_t p = points - back; p < points; ++p)
      view[2 * p] = view[2 * p + 1] = 0.0;
  } else {
    const std::size_t masked = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(view.size())));
    auto idx = rng.sample_without_replacement(view.size(), masked);
    for (std::size_t i : idx) view[i] = 0.0;
  }
}

void rotate_view(std::vector<double>& view, double degrees) {
  const double rad = degrees * 3.14159265358979323846 / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  for (std::size_t p = 0; 2 * p + 1 < view.size(); ++p) {
    const double x = view[2 * p], y = view[2 * p + 1];
    view[2 * p] = c * x - s * y;
    view[2 * p + 1] = s * x + c * y;
  }
}

}  // namespace

Tuple apply_policy(const AugmentationPolicy& policy,
                   const std::vector<ModalitySpec>& specs, const Tuple& tuple,
                   const ModalityMask& missing, RngState& rng) {
  if (policy.per_modality.size() != tuple.size())
    throw PolicyError("apply_policy: policy has " +
                      std::to_string(policy.per_modality.size()) +
                      " modalities, tuple has " + std::to_string(tuple.size()));
  if (specs.size() != tuple.size())
    throw ShapeError("apply_policy: spec count != tuple views");
  policy.validate();

  Tuple out = tuple;
  for (std::size_t k = 0; k < tuple.size(); ++k) {
    const auto& aug = policy.per_modality[k];
    if (aug.rotation_deg != 0.0 && aug.enabled &&
        specs[k].kind != ViewKind::coords2d_view)
      throw PolicyError("apply_policy: rotation requested on non-coords2d view '" +
                        specs[k].name + "'");
    if (!missing.empty() && missing[k]) continue;  // missing views untouched
    if (aug.is_identity()) continue;
    auto& view = out[k];
    mask_view(view, specs[k], aug.mask_fraction, rng);
    if (specs[k].kind == ViewKind::coords2d_view && aug.rotation_deg != 0.0)
      rotate_view(view, aug.rotation_deg);
    if (aug.noise_variance > 0.0) {
      const double stddev = std::sqrt(aug.noise_variance);
      for (double& v : view) v += rng.normal(0.0, stddev);
    }
  }
  return out;
}

Tuple apply_policy(const AugmentationPolicy& policy,
                   const std::vector<ModalitySpec>& specs, const Tuple& tuple,
                   RngState& rng) {
  return apply_policy(policy, specs, tuple, ModalityMask{}, rng);
}

std::vector<AugmentationPolicy> enumerate_policies(const PolicySpace& space,
                                                   std::size_t cap) {
  space.validate();
  const std::size_t total = space.total_policies();
  if (total > cap)
    throw BudgetError("enumerate_policies: " + std::to_string(total) +
                      " policies exceed cap " + std::to_string(cap));

  // Per-modality option lists first, then their Cartesian product. Order is
  // deterministic: noise outermost, then mask, then rotation.
  std::vector<std::vector<ModalityAugment>> options;
  for (const auto& g : space.per_modality) {
    std::vector<ModalityAugment> opts;
    for (double nv : g.noise_variances)
      for (double mf : g.mask_fractions)
        for (double rot : g.rotation_degs) {
          ModalityAugment m;
          m.noise_variance = nv;
          m.mask_fraction = mf;
          m.rotation_deg = rot;
          opts.push_back(m);
        }
    options.push_back(std::move(opts));
  }

  std::vector<AugmentationPolicy> result;
  result.reserve(total);
  std::vector<std::size_t> cursor(options.size(), 0);
  while (true) {
    AugmentationPolicy p;
    for (std::size_t k = 0; k < options.size(); ++k)
      p.per_modality.push_back(options[k][cursor[k]]);
    result.push_back(std::move(p));
    std::size_t k = options.size();
    while (k-- > 0) {
      if (++cursor[k] < options[k].size()) break;
      cursor[k] = 0;
      if (k == 0) return result;
    }
  }
}

}  // namespace tnce
