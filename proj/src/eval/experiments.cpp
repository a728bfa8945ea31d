#include "tnce/eval/experiments.h"

#include <algorithm>
#include <set>

#include "tnce/error.h"
#include "tnce/util/kv.h"
#include "tnce/util/parallel.h"

namespace tnce {

CellOutcome train_and_probe(const MultiModalDataset& ds, const TrainSettings& cfg,
                            const ProbeSplit& split, std::size_t probe_epochs) {
  TrainResult trained = train_contrastive(ds, cfg);
  CellOutcome out;
  const std::size_t tail = std::min<std::size_t>(50, trained.curve.size());
  double acc = 0.0;
  for (std::size_t i = trained.curve.size() - tail; i < trained.curve.size(); ++i)
    acc += trained.curve[i].bound;
  out.final_bound = acc / static_cast<double>(tail);

  const std::uint64_t before = trained.encoder.param_checksum();
  Matrix embs = embed_dataset(trained.encoder, ds);
  out.accuracy = linear_probe(embs, ds.labels, split, probe_epochs).accuracy;
  out.encoder_checksum = trained.encoder.param_checksum();
  if (out.encoder_checksum != before)
    throw Error("train_and_probe: probing modified encoder parameters");
  return out;
}

std::vector<SubsetResult> modality_scaling_experiment(
    const MultiModalDataset& ds, const ModalityScalingConfig& cfg) {
  if (cfg.subsets.empty())
    throw ConfigError("modality_scaling: no subsets given");
  if (!ds.has_labels())
    throw ConfigError("modality_scaling: dataset has no labels to probe");
  std::set<std::vector<std::size_t>> seen;
  for (auto subset : cfg.subsets) {
    if (subset.empty()) throw ConfigError("modality_scaling: empty subset");
    std::sort(subset.begin(), subset.end());
    if (!seen.insert(subset).second)
      throw ConfigError("modality_scaling: duplicate subset");
  }

  struct Cell {
    std::size_t subset_idx;
    std::size_t seed_idx;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < cfg.subsets.size(); ++s)
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) cells.push_back({s, i});

  std::vector<SubsetResult> results(cfg.subsets.size());
  for (std::size_t s = 0; s < cfg.subsets.size(); ++s) {
    results[s].subset = cfg.subsets[s];
    results[s].per_seed.assign(cfg.seeds.size(), 0.0);
  }

  parallel_for_indexed(cells.size(), cfg.jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    MultiModalDataset sub = ds.restrict_modalities(cfg.subsets[cell.subset_idx]);
    TrainSettings train = cfg.train;
    train.proposal = NegativeProposal::uniform(sub.num_modalities());
    if (!cfg.train.policy.per_modality.empty()) {
      AugmentationPolicy sub_policy;
      for (std::size_t k : cfg.subsets[cell.subset_idx])
        sub_policy.per_modality.push_back(cfg.train.policy.per_modality[k]);
      train.policy = sub_policy;
    }
    if (sub.num_modalities() == 1) train.dropout_prob = 0.0;
    train.seed = cfg.seeds[cell.seed_idx];
    ProbeSplit split = cfg.split;
    split.seed = cfg.seeds[cell.seed_idx];
    results[cell.subset_idx].per_seed[cell.seed_idx] =
        train_and_probe(sub, train, split, cfg.probe_epochs).accuracy;
  });

  for (auto& r : results) {
    double sum = 0.0;
    for (double a : r.per_seed) sum += a;
    r.mean_accuracy = sum / static_cast<double>(r.per_seed.size());
  }
  return results;
}

namespace {
std::string subset_label(const std::vector<std::size_t>& subset) {
  std::string s;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (i) s += "+";
    s += std::to_string(subset[i]);
  }
  return s;
}
}  // namespace

std::string modality_scaling_csv(const std::vector<SubsetResult>& rows,
                                 const std::vector<std::uint64_t>& seeds) {
  std::string out = "subset,seed,accuracy\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.per_seed.size(); ++i)
      out += subset_label(r.subset) + "," + std::to_string(seeds[i]) + "," +
             format_double(r.per_seed[i]) + "\n";
  for (const auto& r : rows)
    out += subset_label(r.subset) + ",mean," + format_double(r.mean_accuracy) + "\n";
  return out;
}

std::vector<EfficiencyCell> sampling_efficiency_experiment(
    const MultiModalDataset& ds, const SamplingEfficiencyConfig& cfg) {
  if (cfg.batch_sizes.size() < 2)
    throw ConfigError("sampling_efficiency: need at least two batch sizes");
  for (std::size_t n : cfg.batch_sizes)
    if (n < 2) throw ConfigError("sampling_efficiency: batch sizes must be >= 2");
  if (!ds.has_labels())
    throw ConfigError("sampling_efficiency: dataset has no labels to probe");

  const std::vector<std::string> strategies = {"tuple_disturb", "naive"};
  struct Cell {
    std::size_t strategy_idx, size_idx, seed_idx;
  };
  std::vector<Cell> cells;
  for (std::size_t st = 0; st < strategies.size(); ++st)
    for (std::size_t bs = 0; bs < cfg.batch_sizes.size(); ++bs)
      for (std::size_t sd = 0; sd < cfg.seeds.size(); ++sd)
        cells.push_back({st, bs, sd});

  std::vector<EfficiencyCell> results(strategies.size() * cfg.batch_sizes.size());
  for (std::size_t st = 0; st < strategies.size(); ++st)
    for (std::size_t bs = 0; bs < cfg.batch_sizes.size(); ++bs) {
      auto& r = results[st * cfg.batch_sizes.size() + bs];
      r.strategy = strategies[st];
      r.batch_size = cfg.batch_sizes[bs];
      r.per_seed.assign(cfg.seeds.size(), 0.0);
    }

  std::vector<double> bounds(cells.size(), 0.0);
  parallel_for_indexed(cells.size(), cfg.jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    TrainSettings train = cfg.train;
    train.strategy = cell.strategy_idx == 0 ? NegStrategy::proposal
                                            : NegStrategy::naive_product;
    if (train.strategy == NegStrategy::proposal &&
        train.proposal.alpha.size() != ds.num_modalities() + 1)
      train.proposal = NegativeProposal::uniform(ds.num_modalities());
    train.negatives_per_anchor = cfg.batch_sizes[cell.size_idx] - 1;
    train.seed = cfg.seeds[cell.seed_idx];
    ProbeSplit split = cfg.split;
    split.seed = cfg.seeds[cell.seed_idx];
    CellOutcome out = train_and_probe(ds, train, split, cfg.probe_epochs);
    results[cell.strategy_idx * cfg.batch_sizes.size() + cell.size_idx]
        .per_seed[cell.seed_idx] = out.accuracy;
    bounds[c] = out.final_bound;
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& r = results[cells[c].strategy_idx * cfg.batch_sizes.size() +
                      cells[c].size_idx];
    r.mean_final_bound += bounds[c] / static_cast<double>(cfg.seeds.size());
  }
  for (auto& r : results) {
    double sum = 0.0;
    for (double a : r.per_seed) sum += a;
    r.mean_accuracy = sum / static_cast<double>(r.per_seed.size());
  }
  return results;
}

std::string sampling_efficiency_csv(const std::vector<EfficiencyCell>& cells,
                                    const std::vector<std::uint64_t>& seeds) {
  std::string out = "strategy,batch_size,seed,accuracy,mean_final_bound\n";
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.per_seed.size(); ++i)
      out += c.strategy + "," + std::to_string(c.batch_size) + "," +
             std::to_string(seeds[i]) + "," + format_double(c.per_seed[i]) + "," +
             format_double(c.mean_final_bound) + "\n";
  for (const auto& c : cells)
    out += c.strategy + "," + std::to_string(c.batch_size) + ",mean," +
           format_double(c.mean_accuracy) + "," +
           format_double(c.mean_final_bound) + "\n";
  return out;
}

DropoutRobustnessResult dropout_robustness_experiment(
    const MultiModalDataset& ds, const DropoutRobustnessConfig& cfg) {
  if (!ds.has_labels())
    throw ConfigError("dropout_robustness: dataset has no labels to probe");
  DropoutRobustnessResult result;
  result.dropout_per_seed.assign(cfg.seeds.size(), 0.0);
  result.plain_per_seed.assign(cfg.seeds.size(), 0.0);

  struct Cell {
    bool with_dropout;
    std::size_t seed_idx;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    cells.push_back({true, i});
    cells.push_back({false, i});
  }
  parallel_for_indexed(cells.size(), cfg.jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    TrainSettings train = cfg.train;
    train.dropout_prob = cell.with_dropout ? cfg.dropout_prob : 0.0;
    train.seed = cfg.seeds[cell.seed_idx];
    ProbeSplit split = cfg.split;
    split.seed = cfg.seeds[cell.seed_idx];
    const double acc = train_and_probe(ds, train, split, cfg.probe_epochs).accuracy;
    (cell.with_dropout ? result.dropout_per_seed
                       : result.plain_per_seed)[cell.seed_idx] = acc;
  });

  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    result.dropout_mean += result.dropout_per_seed[i];
    result.plain_mean += result.plain_per_seed[i];
  }
  result.dropout_mean /= static_cast<double>(cfg.seeds.size());
  result.plain_mean /= static_cast<double>(cfg.seeds.size());
  result.gap = result.plain_mean - result.dropout_mean;
  return result;
}

std::string dropout_robustness_csv(const DropoutRobustnessResult& r,
                                   const std::vector<std::uint64_t>& seeds) {
  std::string out = "variant,seed,accuracy\n";
  for (std::size_t i = 0; i < seeds.size(); ++i)
    out += "dropout," + std::to_string(seeds[i]) + "," +
           format_double(r.dropout_per_seed[i]) + "\n";
  for (std::size_t i = 0; i < seeds.size(); ++i)
    out += "plain," + std::to_string(seeds[i]) + "," +
           format_double(r.plain_per_seed[i]) + "\n";
  out += "dropout,mean," + format_double(r.dropout_mean) + "\n";
  out += "plain,mean," + format_double(r.plain_mean) + "\n";
  out += "gap,," + format_double(r.gap) + "\n";
  return out;
}

}  // namespace tnce
