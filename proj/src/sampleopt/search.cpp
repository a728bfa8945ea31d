#include "tnce/sampleopt/search.h"

#include <cmath>
#include <limits>
#include <map>

#include "tnce/error.h"
#include "tnce/util/kv.h"
#include "tnce/util/parallel.h"

namespace tnce {

NegativeProposal simplex_normalize(const std::vector<double>& raw) {
  if (raw.size() < 2)
    throw DomainError("simplex_normalize: need alpha_0 plus one weight per modality");
  double sum = 0.0;
  for (double v : raw) {
    if (v < 0.0) throw DomainError("simplex_normalize: negative component");
    sum += v;
  }
  if (sum <= 0.0)
    throw DomainError("simplex_normalize: all components are zero");
  NegativeProposal p;
  p.alpha.reserve(raw.size());
  for (double v : raw) p.alpha.push_back(v / sum);
  p.validate();
  return p;
}

CandidateEval evaluate_candidate(const MultiModalDataset& ds,
                                 const NegativeProposal& alpha,
                                 const AugmentationPolicy& beta,
                                 const TrainSettings& inner,
                                 const RewardConfig& reward,
                                 const ProbeSplit& probe_split,
                                 std::size_t probe_epochs, std::uint64_t seed) {
  CandidateEval eval;
  eval.alpha = alpha;
  eval.beta = beta;
  eval.seed = seed;

  TrainSettings cfg = inner;
  cfg.proposal = alpha;
  cfg.policy = beta;
  cfg.seed = seed;

  try {
    TrainResult trained = train_contrastive(ds, cfg);
    RngState reward_rng = RngState(seed).fork(7001);
    eval.reward = crossmodal_reward(trained.encoder, ds, reward, reward_rng);
    if (ds.has_labels()) {
      Matrix embs = embed_dataset(trained.encoder, ds);
      ProbeSplit split = probe_split;
      split.seed = seed ^ 0x5851f42d4c957f2dULL;
      eval.probe_accuracy = linear_probe(embs, ds.labels, split, probe_epochs).accuracy;
    }
  } catch (const TrainingError&) {
    eval.failed = true;
    eval.reward = -std::numeric_limits<double>::infinity();
  }
  return eval;
}

namespace {

std::string candidate_key(const NegativeProposal& alpha,
                          const AugmentationPolicy& beta) {
  return alpha.describe() + "|" + beta.describe();
}

}  // namespace

SearchResult optimize_samples(const MultiModalDataset& ds, const SearchSpec& spec) {
  if (spec.alpha_candidates.empty() || spec.beta_candidates.empty())
    throw ConfigError("optimize_samples: candidate lists must be non-empty");
  if (spec.budget < 1) throw ConfigError("optimize_samples: budget must be >= 1");
  for (const auto& a : spec.alpha_candidates) a.validate();
  for (const auto& b : spec.beta_candidates) b.validate();

  SearchResult result;
  // Start from the identity policy when the list carries one.
  std::size_t beta0 = 0;
  for (std::size_t i = 0; i < spec.beta_candidates.size(); ++i)
    if (spec.beta_candidates[i].is_identity()) {
      beta0 = i;
      break;
    }
  NegativeProposal cur_alpha = spec.alpha_candidates.front();
  AugmentationPolicy cur_beta = spec.beta_candidates[beta0];

  std::map<std::string, std::size_t> memo;  // candidate key -> table row
  std::size_t evals_done = 0;

  // Evaluates a sweep of candidates against the fixed counterpart; honours
  // the budget and reuses memoized rows.
  auto run_sweep = [&](const std::vector<NegativeProposal>& alphas,
                       const std::vector<AugmentationPolicy>& betas,
                       std::size_t round, const char* phase) {
    struct Job {
      std::size_t list_index;
      std::uint64_t seed;
      std::size_t row;
    };
    std::vector<Job> jobs;
    const std::size_t sweep_len = std::max(alphas.size(), betas.size());
    for (std::size_t i = 0; i < sweep_len; ++i) {
      const auto& a = alphas.size() == 1 ? alphas[0] : alphas[i];
      const auto& b = betas.size() == 1 ? betas[0] : betas[i];
      const std::string key = candidate_key(a, b);
      if (memo.count(key)) continue;
      if (evals_done >= spec.budget) {
        result.truncated = true;
        break;
      }
      Job j;
      j.list_index = i;
      j.seed = RngState(spec.seed).fork(9000 + result.table.size()).next_u64();
      j.row = result.table.size();
      CandidateEval placeholder;
      placeholder.round = round;
      placeholder.phase = phase;
      result.table.push_back(placeholder);
      memo[key] = j.row;
      ++evals_done;
      jobs.push_back(j);
    }
    parallel_for_indexed(jobs.size(), spec.jobs, [&](std::size_t jidx) {
      const Job& j = jobs[jidx];
      const auto& a = alphas.size() == 1 ? alphas[0] : alphas[j.list_index];
      const auto& b = betas.size() == 1 ? betas[0] : betas[j.list_index];
      CandidateEval eval =
          evaluate_candidate(ds, a, b, spec.inner, spec.reward, spec.probe_split,
                             spec.probe_epochs, j.seed);
      eval.round = result.table[j.row].round;
      eval.phase = result.table[j.row].phase;
      result.table[j.row] = std::move(eval);
    });
  };

  double best_before_round = -std::numeric_limits<double>::infinity();
  for (std::size_t round = 0; round < spec.rounds; ++round) {
    result.rounds_run = round + 1;

    run_sweep(spec.alpha_candidates, {cur_beta}, round, "alpha");
    // Best alpha under the current beta.
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& row : result.table)
      if (!row.failed && row.beta.describe() == cur_beta.describe() &&
          row.reward > best) {
        best = row.reward;
        cur_alpha = row.alpha;
      }
    if (result.truncated) break;

    run_sweep({cur_alpha}, spec.beta_candidates, round, "beta");
    best = -std::numeric_limits<double>::infinity();
    for (const auto& row : result.table)
      if (!row.failed && row.alpha.describe() == cur_alpha.describe() &&
          row.reward > best) {
        best = row.reward;
        cur_beta = row.beta;
      }
    if (result.truncated) break;

    double best_now = -std::numeric_limits<double>::infinity();
    for (const auto& row : result.table)
      if (!row.failed && row.reward > best_now) best_now = row.reward;
    if (best_now <= best_before_round) break;  // no improvement this round
    best_before_round = best_now;
  }

  // Max consistency: the returned pair is the argmax over everything logged.
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& row : result.table) {
    if (row.failed) continue;
    if (!found || row.reward > best) {
      best = row.reward;
      result.best_alpha = row.alpha;
      result.best_beta = row.beta;
      result.best_reward = row.reward;
      found = true;
    }
  }
  if (!found)
    throw TrainingError("optimize_samples: every candidate evaluation failed");
  return result;
}

std::string search_table_csv(const std::vector<CandidateEval>& table) {
  std::string out = "round,phase,alpha,beta,reward,probe_accuracy,seed,failed\n";
  for (const auto& row : table) {
    out += std::to_string(row.round) + "," + row.phase + "," +
           row.alpha.describe() + "," + row.beta.describe() + "," +
           (row.failed ? "-inf" : format_double(row.reward)) + "," +
           format_double(row.probe_accuracy) + "," + std::to_string(row.seed) +
           "," + (row.failed ? "1" : "0") + "\n";
  }
  return out;
}

std::string search_summary(const SearchResult& result) {
  std::string out;
  out += "evaluations:     " + std::to_string(result.table.size()) + "\n";
  out += "rounds run:      " + std::to_string(result.rounds_run) + "\n";
  out += "truncated:       " + std::string(result.truncated ? "yes" : "no") + "\n";
  out += "best reward:     " + format_double(result.best_reward) + "\n";
  out += "best alpha:      " + result.best_alpha.describe() + "\n";
  out += "best alpha ratio (disturbed): " + result.best_alpha.ratio_form() + "\n";
  out += "best beta:       " + result.best_beta.describe() + "\n";
  return out;
}

}  // namespace tnce
