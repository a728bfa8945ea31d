#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tnce/augment/policy.h"
#include "tnce/error.h"

using namespace tnce;

namespace {

std::vector<ModalitySpec> two_modality_specs() {
  return {{"g", 6, ViewKind::gaussian_view, 1.0, 0},
          {"c", 8, ViewKind::coords2d_view, 1.0, 0}};
}

Tuple sample_tuple(RngState& rng, const std::vector<ModalitySpec>& specs) {
  Tuple t;
  for (const auto& s : specs) {
    std::vector<double> view(s.dim);
    for (double& v : view) v = rng.normal();
    t.push_back(std::move(view));
  }
  return t;
}

}  // namespace

TEST_CASE("apply_policy: identity policy returns the input unchanged") {
  auto specs = two_modality_specs();
  RngState rng(1);
  Tuple t = sample_tuple(rng, specs);
  auto policy = AugmentationPolicy::identity(2);
  Tuple out = apply_policy(policy, specs, t, rng);
  CHECK(out == t);
  CHECK(policy.is_identity());

  // Disabled entries are the identity regardless of their parameters.
  policy.per_modality[0].noise_variance = 5.0;
  policy.per_modality[0].enabled = false;
  Tuple out2 = apply_policy(policy, specs, t, rng);
  CHECK(out2 == t);
}

TEST_CASE("apply_policy: full mask zeroes the view before noise") {
  auto specs = two_modality_specs();
  RngState rng(2);
  Tuple t = sample_tuple(rng, specs);
  AugmentationPolicy policy = AugmentationPolicy::identity(2);
  policy.per_modality[0].mask_fraction = 1.0;
  Tuple out = apply_policy(policy, specs, t, rng);
  for (double v : out[0]) CHECK(v == 0.0);
  CHECK(out[1] == t[1]);
}

TEST_CASE("apply_policy: rotation by 90 degrees maps (1,0) to (0,1)") {
  std::vector<ModalitySpec> specs = {{"c", 2, ViewKind::coords2d_view, 1.0, 0}};
  Tuple t = {{1.0, 0.0}};
  AugmentationPolicy policy = AugmentationPolicy::identity(1);
  policy.per_modality[0].rotation_deg = 90.0;
  RngState rng(3);
  Tuple out = apply_policy(policy, specs, t, rng);
  CHECK(out[0][0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(out[0][1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("apply_policy: rotation composes additively") {
  std::vector<ModalitySpec> specs = {{"c", 4, ViewKind::coords2d_view, 1.0, 0}};
  RngState rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Tuple t = sample_tuple(rng, specs);
    const double a = rng.uniform(-90.0, 90.0);
    const double b = rng.uniform(-90.0, 90.0);

    auto rot = [&](const Tuple& in, double deg) {
      AugmentationPolicy p = AugmentationPolicy::identity(1);
      p.per_modality[0].rotation_deg = deg;
      RngState r(0);
      return apply_policy(p, specs, in, r);
    };
    Tuple via_two = rot(rot(t, b), a);
    Tuple direct = rot(t, a + b);
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(via_two[0][i] == doctest::Approx(direct[0][i]).epsilon(1e-10));
  }
}

TEST_CASE("apply_policy: rotation on a non-coords view is a policy error") {
  auto specs = two_modality_specs();
  RngState rng(5);
  Tuple t = sample_tuple(rng, specs);
  AugmentationPolicy policy = AugmentationPolicy::identity(2);
  policy.per_modality[0].rotation_deg = 30.0;  // modality 0 is gaussian
  CHECK_THROWS_AS(apply_policy(policy, specs, t, rng), PolicyError);
}

TEST_CASE("apply_policy: missing views pass through untouched") {
  auto specs = two_modality_specs();
  RngState rng(6);
  Tuple t = sample_tuple(rng, specs);
  AugmentationPolicy policy = AugmentationPolicy::identity(2);
  policy.per_modality[0].noise_variance = 10.0;
  policy.per_modality[1].noise_variance = 10.0;
  ModalityMask missing = {1, 0};
  Tuple out = apply_policy(policy, specs, t, missing, rng);
  CHECK(out[0] == t[0]);       // missing: untouched
  CHECK(out[1] != t[1]);       // present: noised
  CHECK(out[1].size() == t[1].size());
}

TEST_CASE("apply_policy: never changes view dimensionality") {
  auto specs = two_modality_specs();
  RngState rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    Tuple t = sample_tuple(rng, specs);
    AugmentationPolicy policy = AugmentationPolicy::identity(2);
    policy.per_modality[0].noise_variance = rng.uniform(0.0, 4.0);
    policy.per_modality[0].mask_fraction = rng.uniform(0.0, 1.0);
    policy.per_modality[1].mask_fraction = rng.uniform(0.0, 1.0);
    policy.per_modality[1].rotation_deg = rng.uniform(-180.0, 180.0);
    Tuple out = apply_policy(policy, specs, t, rng);
    REQUIRE(out.size() == t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
      CHECK(out[k].size() == t[k].size());
  }
}

TEST_CASE("apply_policy: masked coordinate count is floor(fraction * dim)") {
  std::vector<ModalitySpec> specs = {{"g", 10, ViewKind::gaussian_view, 1.0, 0}};
  RngState rng(8);
  Tuple t;
  t.push_back(std::vector<double>(10, 1.0));
  AugmentationPolicy policy = AugmentationPolicy::identity(1);
  policy.per_modality[0].mask_fraction = 0.37;  // floor(3.7) = 3 zeros
  Tuple out = apply_policy(policy, specs, t, rng);
  std::size_t zeros = 0;
  for (double v : out[0])
    if (v == 0.0) ++zeros;
  CHECK(zeros == 3);
}

TEST_CASE("apply_policy: coords2d mask keeps a contiguous center block") {
  std::vector<ModalitySpec> specs = {{"c", 12, ViewKind::coords2d_view, 1.0, 0}};
  Tuple t;
  t.push_back(std::vector<double>(12, 1.0));  // 6 points
  AugmentationPolicy policy = AugmentationPolicy::identity(1);
  policy.per_modality[0].mask_fraction = 0.5;  // 3 of 6 points zeroed
  RngState rng(9);
  Tuple out = apply_policy(policy, specs, t, rng);
  // floor(0.5*6)=3 masked: 1 from the front, 2 from the back.
  CHECK(out[0][0] == 0.0);
  CHECK(out[0][1] == 0.0);
  for (std::size_t p = 1; p < 4; ++p) {
    CHECK(out[0][2 * p] == 1.0);
    CHECK(out[0][2 * p + 1] == 1.0);
  }
  CHECK(out[0][8] == 0.0);
  CHECK(out[0][10] == 0.0);
}

TEST_CASE("enumerate_policies: counting and determinism") {
  // Single grid point per parameter: exactly the identity policy.
  PolicySpace trivial;
  trivial.per_modality.assign(1, ModalityGrid{});
  auto single = enumerate_policies(trivial);
  REQUIRE(single.size() == 1);
  CHECK(single[0].is_identity());

  // 2 noise x 2 mask levels on one modality: 4 policies.
  PolicySpace small;
  small.per_modality.assign(1, ModalityGrid{});
  small.per_modality[0].noise_variances = {0.0, 1.0};
  small.per_modality[0].mask_fractions = {0.0, 0.5};
  CHECK(enumerate_policies(small).size() == 4);

  // 3 x 2 x 2 per modality over 2 modalities: (3*2*2)^2 = 144.
  PolicySpace big;
  big.per_modality.assign(2, ModalityGrid{});
  for (auto& g : big.per_modality) {
    g.noise_variances = {0.0, 1.0, 2.0};
    g.mask_fractions = {0.0, 0.25};
    g.rotation_degs = {0.0, 40.0};
  }
  auto policies = enumerate_policies(big, 4096);
  CHECK(policies.size() == 144);
  CHECK(big.total_policies() == 144);

  // Deterministic ordering: two enumerations agree elementwise.
  auto again = enumerate_policies(big, 4096);
  for (std::size_t i = 0; i < policies.size(); ++i)
    CHECK(policies[i].describe() == again[i].describe());

  // The identity policy is always a member.
  bool has_identity = false;
  for (const auto& p : policies) has_identity |= p.is_identity();
  CHECK(has_identity);
}

TEST_CASE("enumerate_policies: cap overflow is a budget error") {
  PolicySpace big;
  big.per_modality.assign(2, ModalityGrid{});
  for (auto& g : big.per_modality) {
    g.noise_variances = {0.0, 1.0, 2.0};
    g.mask_fractions = {0.0, 0.25};
    g.rotation_degs = {0.0, 40.0};
  }
  CHECK_THROWS_AS(enumerate_policies(big, 100), BudgetError);
}

TEST_CASE("PolicySpace: grids must contain the identity value") {
  PolicySpace space;
  space.per_modality.assign(1, ModalityGrid{});
  space.per_modality[0].noise_variances = {1.0, 2.0};  // no 0.0
  CHECK_THROWS_AS(space.validate(), PolicyError);
}

TEST_CASE("policy parameter validation") {
  AugmentationPolicy p = AugmentationPolicy::identity(1);
  p.per_modality[0].mask_fraction = 1.5;
  CHECK_THROWS_AS(p.validate(), PolicyError);
  p.per_modality[0].mask_fraction = 0.0;
  p.per_modality[0].rotation_deg = 200.0;
  CHECK_THROWS_AS(p.validate(), PolicyError);
  p.per_modality[0].rotation_deg = 0.0;
  p.per_modality[0].noise_variance = -1.0;
  CHECK_THROWS_AS(p.validate(), PolicyError);
}
