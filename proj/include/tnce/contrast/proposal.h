#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnce/numerics/rng.h"
#include "tnce/synthdata/dataset.h"

namespace tnce {

// Mixture weights over negative categories: alpha[0] draws an intact tuple
// from the data distribution, alpha[k] (k >= 1) draws a tuple whose modality
// k-1 is replaced from an independent sample. Lives on the probability
// simplex.
struct NegativeProposal {
  std::vector<double> alpha;

  std::size_t num_modalities() const { return alpha.empty() ? 0 : alpha.size() - 1; }
  void validate() const;  // throws ProposalError off the simplex
  std::string describe() const;
  // Disturbed components as a small integer ratio ("1:2:3") when one exists,
  // otherwise the normalized weights themselves.
  std::string ratio_form() const;

  static NegativeProposal infonce(std::size_t num_modalities);  // alpha0 = 1
  static NegativeProposal uniform(std::size_t num_modalities);  // all equal
  static NegativeProposal disturbed_uniform(std::size_t num_modalities);
};

struct NegativeSample {
  Tuple tuple;
  int disturbed_modality = -1;  // -1 = regular draw from the pool
};

// Draws m negatives from the proposal mixture. Categories are i.i.d. from
// alpha; a disturbed(k) negative takes a base pool tuple and swaps in
// modality k from a different pool tuple, so it differs from a genuine
// sample in exactly that view.
std::vector<NegativeSample> sample_negatives(const MultiModalDataset& pool,
                                             const NegativeProposal& proposal,
                                             std::size_t m, RngState& rng);

// Baseline: every modality drawn independently from the pool (the full
// product of marginals), all modalities scrambled at once.
std::vector<Tuple> naive_disturb_negatives(const MultiModalDataset& pool,
                                           std::size_t m, RngState& rng);

}  // namespace tnce
