#pragma once

#include <functional>
#include <span>

#include "tnce/numerics/rng.h"

namespace tnce {

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t coords_checked = 0;
};

// Central finite differences against an analytic gradient on a random subset
// of coordinates (all of them when the vector is small). loss_fn must be
// deterministic; two evaluations at the base point are compared and a
// DeterminismError is thrown if they differ.
GradCheckReport gradcheck(
    const std::function<double(std::span<const double>)>& loss_fn,
    std::span<const double> params, std::span<const double> analytic_grad,
    double tolerance, RngState& rng, std::size_t max_coords = 64,
    double fd_step = 1e-5);

}  // namespace tnce
