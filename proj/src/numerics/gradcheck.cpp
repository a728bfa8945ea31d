#include "tnce/numerics/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tnce/error.h"

namespace tnce {

GradCheckReport gradcheck(
    const std::function<double(std::span<const double>)>& loss_fn,
    std::span<const double> params, std::span<const double> analytic_grad,
    double tolerance, RngState& rng, std::size_t max_coords, double fd_step) {
  if (params.size() != analytic_grad.size())
    throw ShapeError("gradcheck: gradient length != parameter length");

  const double l0 = loss_fn(params);
  const double l0_again = loss_fn(params);
  if (!(l0 == l0_again))
    throw DeterminismError("gradcheck: loss_fn returned different values for "
                           "identical inputs");

  std::vector<std::size_t> coords;
  if (params.size() <= max_coords) {
    coords.resize(params.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  } else {
    coords = rng.sample_without_replacement(params.size(), max_coords);
  }

  std::vector<double> work(params.begin(), params.end());
  GradCheckReport report;
  report.coords_checked = coords.size();
  for (std::size_t c : coords) {
    const double saved = work[c];
    work[c] = saved + fd_step;
    const double lp = loss_fn(work);
    work[c] = saved - fd_step;
    const double lm = loss_fn(work);
    work[c] = saved;
    const double fd = (lp - lm) / (2.0 * fd_step);
    const double g = analytic_grad[c];
    const double rel = std::abs(fd - g) / std::max(1e-5, std::abs(fd) + std::abs(g));
    report.max_rel_err = std::max(report.max_rel_err, rel);
  }
  report.pass = report.max_rel_err < tolerance;
  return report;
}

}  // namespace tnce
