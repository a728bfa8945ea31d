#pragma once

#include <vector>

#include "tnce/synthdata/dataset.h"

namespace tnce {

// MI (nats) of a bivariate gaussian with correlation rho: -0.5 ln(1 - rho^2).
double gaussian_mi(double rho);

// Exact MI between two disjoint modality groups by full table enumeration.
// 0 <= I <= min(H(A), H(B)); tiny negative rounding is clipped at zero.
double exact_discrete_mi(const DiscreteJoint& joint,
                         const std::vector<std::size_t>& group_a,
                         const std::vector<std::size_t>& group_b,
                         std::size_t cell_cap = 1000000);

// Entropy (nats) of the full joint.
double discrete_entropy(const DiscreteJoint& joint);

// ln(n_softmax) - loss; may be negative for untrained critics.
double nce_bound_estimate(double loss, std::size_t n_softmax);

}  // namespace tnce
