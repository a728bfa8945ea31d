#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnce/contrast/train.h"
#include "tnce/eval/probe.h"
#include "tnce/sampleopt/reward.h"

namespace tnce {

// Projects raw non-negative weights onto the probability simplex by dividing
// by their sum. All-zero input is a domain error.
NegativeProposal simplex_normalize(const std::vector<double>& raw);

struct CandidateEval {
  NegativeProposal alpha;
  AugmentationPolicy beta;
  double reward = 0.0;          // -inf sentinel when the inner run failed
  double probe_accuracy = 0.0;  // linear probe on the fused embeddings
  std::uint64_t seed = 0;
  bool failed = false;
  std::size_t round = 0;
  std::string phase;  // "alpha" or "beta"
};

struct SearchSpec {
  std::vector<NegativeProposal> alpha_candidates;
  std::vector<AugmentationPolicy> beta_candidates;
  std::size_t budget = 64;  // max candidate evaluations
  std::size_t rounds = 2;   // alpha sweep + beta sweep per round
  TrainSettings inner;      // shortened training budget for candidates
  RewardConfig reward;
  ProbeSplit probe_split;
  std::size_t probe_epochs = 120;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct SearchResult {
  NegativeProposal best_alpha;
  AugmentationPolicy best_beta;
  double best_reward = 0.0;
  std::vector<CandidateEval> table;  // one row per evaluation performed
  bool truncated = false;            // budget ran out mid-round
  std::size_t rounds_run = 0;
};

// Trains an encoder with (alpha, beta) via train_contrastive, then scores it
// with the crossmodal reward; fully deterministic given the seed. A diverged
// inner run yields a failed row with a -inf reward, never a dropped one.
CandidateEval evaluate_candidate(const MultiModalDataset& ds,
                                 const NegativeProposal& alpha,
                                 const AugmentationPolicy& beta,
                                 const TrainSettings& inner,
                                 const RewardConfig& reward,
                                 const ProbeSplit& probe_split,
                                 std::size_t probe_epochs, std::uint64_t seed);

// Alternating coordinate search: fix beta and sweep alpha candidates, fix the
// best alpha and sweep beta candidates, repeat until the configured rounds or
// no improvement. Every evaluation is logged; identical (alpha, beta) pairs
// are evaluated once and reused.
SearchResult optimize_samples(const MultiModalDataset& ds, const SearchSpec& spec);

std::string search_table_csv(const std::vector<CandidateEval>& table);
std::string search_summary(const SearchResult& result);

}  // namespace tnce
