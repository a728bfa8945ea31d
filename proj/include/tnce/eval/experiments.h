#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tnce/contrast/train.h"
#include "tnce/eval/probe.h"

namespace tnce {

// Shared cell runner: train on the dataset, embed it frozen, linear-probe.
struct CellOutcome {
  double accuracy = 0.0;
  double final_bound = 0.0;  // mean ln N - loss over the last curve window
  std::uint64_t encoder_checksum = 0;
};
CellOutcome train_and_probe(const MultiModalDataset& ds, const TrainSettings& cfg,
                            const ProbeSplit& split, std::size_t probe_epochs);

struct ModalityScalingConfig {
  std::vector<std::vector<std::size_t>> subsets;  // modality index sets
  TrainSettings train;  // proposal is re-derived per subset (uniform)
  ProbeSplit split;
  std::size_t probe_epochs = 200;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::size_t jobs = 1;
};

struct SubsetResult {
  std::vector<std::size_t> subset;
  double mean_accuracy = 0.0;
  std::vector<double> per_seed;
};

// Trains one encoder per subset per seed under an identical budget and
// reports held-out probe accuracy. Duplicate subsets are a config error.
std::vector<SubsetResult> modality_scaling_experiment(
    const MultiModalDataset& ds, const ModalityScalingConfig& cfg);
std::string modality_scaling_csv(const std::vector<SubsetResult>& rows,
                                 const std::vector<std::uint64_t>& seeds);

struct SamplingEfficiencyConfig {
  std::vector<std::size_t> batch_sizes;  // softmax sizes N; negatives = N - 1
  TrainSettings train;                   // strategy field ignored; both run
  ProbeSplit split;
  std::size_t probe_epochs = 200;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::size_t jobs = 1;
};

struct EfficiencyCell {
  std::string strategy;  // "tuple_disturb" | "naive"
  std::size_t batch_size = 0;
  double mean_accuracy = 0.0;
  double mean_final_bound = 0.0;
  std::vector<double> per_seed;
};

// Accuracy-vs-batch-size curves for the per-modality disturbing proposal
// against naive simultaneous disturbing.
std::vector<EfficiencyCell> sampling_efficiency_experiment(
    const MultiModalDataset& ds, const SamplingEfficiencyConfig& cfg);
std::string sampling_efficiency_csv(const std::vector<EfficiencyCell>& cells,
                                    const std::vector<std::uint64_t>& seeds);

struct DropoutRobustnessConfig {
  TrainSettings train;
  double dropout_prob = 0.6;
  ProbeSplit split;
  std::size_t probe_epochs = 200;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::size_t jobs = 1;
};

struct DropoutRobustnessResult {
  double dropout_mean = 0.0;
  double plain_mean = 0.0;
  double gap = 0.0;  // plain - dropout, in accuracy points
  std::vector<double> dropout_per_seed;
  std::vector<double> plain_per_seed;
};

// Same config trained with and without modality dropout; the gap restates
// the bounded-degradation claim at desk scale.
DropoutRobustnessResult dropout_robustness_experiment(
    const MultiModalDataset& ds, const DropoutRobustnessConfig& cfg);
std::string dropout_robustness_csv(const DropoutRobustnessResult& r,
                                   const std::vector<std::uint64_t>& seeds);

}  // namespace tnce
