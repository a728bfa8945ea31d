#include "tnce/contrast/proposal.h"

#include <cmath>

#include "tnce/error.h"
#include "tnce/util/kv.h"

namespace tnce {

void NegativeProposal::validate() const {
  if (alpha.size() < 2)
    throw ProposalError("proposal: need alpha_0 plus one weight per modality");
  double sum = 0.0;
  for (double a : alpha) {
    if (a < -1e-12) throw ProposalError("proposal: negative mixture weight");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ProposalError("proposal: weights sum to " + format_double(sum) +
                        ", expected 1 within 1e-9");
}

std::string NegativeProposal::describe() const {
  std::string s;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) s += ",";
    s += format_double(alpha[i]);
  }
  return s;
}

std::string NegativeProposal::ratio_form() const {
  // Scale the disturbed block by candidate denominators until every entry is
  // nearly integral.
  std::vector<double> disturbed(alpha.begin() + 1, alpha.end());
  double smallest = 0.0;
  for (double v : disturbed)
    if (v > 1e-12 && (smallest == 0.0 || v < smallest)) smallest = v;
  if (smallest == 0.0) return "0";
  for (int denom = 1; denom <= 48; ++denom) {
    bool ok = true;
    std::string s;
    for (std::size_t i = 0; i < disturbed.size(); ++i) {
      double scaled = disturbed[i] / smallest * denom;
      double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) > 1e-6 * denom) { ok = false; break; }
      if (i) s += ":";
      s += std::to_string(static_cast<long long>(rounded));
    }
    if (ok) return s;
  }
  std::string s;
  for (std::size_t i = 0; i < disturbed.size(); ++i) {
    if (i) s += ":";
    s += format_double(disturbed[i]);
  }
  return s;
}

NegativeProposal NegativeProposal::infonce(std::size_t num_modalities) {
  NegativeProposal p;
  p.alpha.assign(num_modalities + 1, 0.0);
  p.alpha[0] = 1.0;
  return p;
}

NegativeProposal NegativeProposal::uniform(std::size_t num_modalities) {
  NegativeProposal p;
  p.alpha.assign(num_modalities + 1, 1.0 / static_cast<double>(num_modalities + 1));
  return p;
}

NegativeProposal NegativeProposal::disturbed_uniform(std::size_t num_modalities) {
  NegativeProposal p;
  p.alpha.assign(num_modalities + 1, 0.0);
  for (std::size_t k = 1; k <= num_modalities; ++k)
    p.alpha[k] = 1.0 / static_cast<double>(num_modalities);
  return p;
}

namespace {

std::size_t draw_category(const std::vector<double>& alpha, RngState& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    acc += alpha[i];
    if (u < acc) return i;
  }
  return alpha.size() - 1;
}

}  // namespace

std::vector<NegativeSample> sample_negatives(const MultiModalDataset& pool,
                                             const NegativeProposal& proposal,
                                             std::size_t m, RngState& rng) {
  proposal.validate();
  if (proposal.num_modalities() != pool.num_modalities())
    throw ProposalError("sample_negatives: proposal covers " +
                        std::to_string(proposal.num_modalities()) +
                        " modalities, pool has " +
                        std::to_string(pool.num_modalities()));
  if (pool.size() < 2) throw PoolError("sample_negatives: pool must hold >= 2 tuples");
  if (m < 1) throw PoolError("sample_negatives: m must be >= 1");

  std::vector<NegativeSample> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t cat = draw_category(proposal.alpha, rng);
    const std::size_t base = rng.uniform_index(pool.size());
    NegativeSample neg;
    neg.tuple = pool.samples[base];
    if (cat > 0) {
      const std::size_t k = cat - 1;
      // Donor distinct from the base so the negative differs from a genuine
      // tuple in exactly modality k.
      std::size_t donor = rng.uniform_index(pool.size() - 1);
      if (donor >= base) ++donor;
      neg.tuple[k] = pool.samples[donor][k];
      neg.disturbed_modality = static_cast<int>(k);
    }
    out.push_back(std::move(neg));
  }
  return out;
}

std::vector<Tuple> naive_disturb_negatives(const MultiModalDataset& pool,
                                           std::size_t m, RngState& rng) {
  const std::size_t k = pool.num_modalities();
  if (pool.size() < k + 1)
    throw PoolError("naive_disturb_negatives: pool of " +
                    std::to_string(pool.size()) + " tuples too small for " +
                    std::to_string(k) + " modalities");
  std::vector<Tuple> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Tuple t;
    t.reserve(k);
    for (std::size_t mod = 0; mod < k; ++mod) {
      std::size_t src = rng.uniform_index(pool.size());
      t.push_back(pool.samples[src][mod]);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace tnce
