#include "tnce/mi/oracles.h"

#include <cmath>
#include <map>
#include <set>

#include "tnce/error.h"

namespace tnce {

double gaussian_mi(double rho) {
  if (!(std::abs(rho) < 1.0))
    throw DomainError("gaussian_mi: |rho| must be < 1");
  return -0.5 * std::log(1.0 - rho * rho);
}

double exact_discrete_mi(const DiscreteJoint& joint,
                         const std::vector<std::size_t>& group_a,
                         const std::vector<std::size_t>& group_b,
                         std::size_t cell_cap) {
  joint.validate();
  if (group_a.empty() || group_b.empty())
    throw DomainError("exact_discrete_mi: groups must be non-empty");
  std::set<std::size_t> seen;
  for (std::size_t k : group_a) {
    if (k >= joint.num_modalities())
      throw DomainError("exact_discrete_mi: modality index out of range");
    seen.insert(k);
  }
  for (std::size_t k : group_b) {
    if (k >= joint.num_modalities())
      throw DomainError("exact_discrete_mi: modality index out of range");
    if (seen.count(k))
      throw DomainError("exact_discrete_mi: groups must be disjoint");
  }
  if (joint.cells() > cell_cap)
    throw BudgetError("exact_discrete_mi: table exceeds enumeration cap");

  // Mixed-radix sub-indices within each group.
  auto group_index = [&joint](const std::vector<std::size_t>& group,
                              const std::vector<std::size_t>& symbols) {
    std::size_t idx = 0;
    for (std::size_t k : group) idx = idx * joint.alphabet_sizes[k] + symbols[k];
    return idx;
  };

  std::map<std::size_t, double> pa, pb;
  std::map<std::pair<std::size_t, std::size_t>, double> pab;
  for (std::size_t cell = 0; cell < joint.cells(); ++cell) {
    const double p = joint.probs[cell];
    if (p == 0.0) continue;
    auto symbols = joint.symbols_at(cell);
    const std::size_t ia = group_index(group_a, symbols);
    const std::size_t ib = group_index(group_b, symbols);
    pa[ia] += p;
    pb[ib] += p;
    pab[{ia, ib}] += p;
  }

  double mi = 0.0;
  for (const auto& [key, p] : pab)
    mi += p * std::log(p / (pa[key.first] * pb[key.second]));
  if (mi < 0.0) {
    if (mi < -1e-12) throw NumericError("exact_discrete_mi: negative beyond rounding");
    mi = 0.0;
  }
  return mi;
}

double discrete_entropy(const DiscreteJoint& joint) {
  joint.validate();
  double h = 0.0;
  for (double p : joint.probs)
    if (p > 0.0) h -= p * std::log(p);
  return h < 0.0 ? 0.0 : h;
}

double nce_bound_estimate(double loss, std::size_t n_softmax) {
  if (n_softmax < 2)
    throw DomainError("nce_bound_estimate: n_softmax must be >= 2");
  return std::log(static_cast<double>(n_softmax)) - loss;
}

}  // namespace tnce
