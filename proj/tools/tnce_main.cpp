#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tnce/cli/config.h"
#include "tnce/error.h"
#include "tnce/eval/presets.h"
#include "tnce/synthdata/io.h"
#include "tnce/util/kv.h"

namespace fs = std::filesystem;
using namespace tnce;

namespace {

// Exit codes: 0 success, 1 usage/config, 2 runtime/training, 3 verification
// failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerification = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "runs/out";
  std::size_t jobs = 1;
};

std::string resolve_out_dir(const std::string& flag_value) {
  if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) return env;
  return flag_value;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const KeyValueConfig& cfg) {
  KeyValueWriter w;
  w.comment("run manifest; re-run: tnce " + command + " --config <this file>");
  w.comment("command: " + command);
  w.raw_block(cfg.echo());
  write_file_atomic(out_dir + "/manifest.txt", w.str());
}

int run_gen_data(const CommonArgs& args) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(args.config_path);
  const std::string out_dir = resolve_out_dir(args.out_dir);
  MultiModalDataset ds = dataset_from_config(cfg);
  cfg.require_all_consumed();
  save_dataset(ds, out_dir + "/dataset.bin");
  write_manifest(out_dir, "gen-data", cfg);
  std::cout << "wrote " << out_dir << "/dataset.bin (" << ds.size() << " tuples, "
            << ds.num_modalities() << " modalities)\n";
  return kExitOk;
}

int run_train(const CommonArgs& args) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(args.config_path);
  const std::string out_dir = resolve_out_dir(args.out_dir);
  MultiModalDataset ds = dataset_from_config(cfg);
  TrainSettings settings = train_settings_from_config(cfg, ds.num_modalities());
  cfg.require_all_consumed();

  TrainResult result = train_contrastive(ds, settings);
  save_encoder(result.encoder, out_dir + "/encoder.ckpt");
  write_file_atomic(out_dir + "/loss_curve.csv", loss_curve_csv(result.curve));
  KeyValueWriter manifest;
  manifest.comment("run manifest; re-run: tnce train --config <this file>");
  manifest.raw_block(cfg.echo());
  manifest.comment("training summary:");
  manifest.raw_block([&] {
    std::string block;
    std::stringstream ss(result.manifest);
    std::string line;
    while (std::getline(ss, line)) block += "# " + line + "\n";
    return block;
  }());
  write_file_atomic(out_dir + "/manifest.txt", manifest.str());
  std::cout << "trained " << result.steps_run << " steps; final loss "
            << format_double(result.curve.back().loss) << "; wrote " << out_dir
            << "/encoder.ckpt\n";
  return kExitOk;
}

int run_verify_bound(const CommonArgs& args) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(args.config_path);
  const std::string out_dir = resolve_out_dir(args.out_dir);
  BoundVerifyConfig vcfg = bound_config_from_config(cfg);
  cfg.require_all_consumed();
  vcfg.jobs = args.jobs;

  BoundVerifyResult result = verify_tnce_bound(vcfg);
  write_file_atomic(out_dir + "/mi_reports.csv", mi_reports_csv(result.reports));
  const std::string verdict = verdict_block(result, vcfg.eps_stat);
  write_file_atomic(out_dir + "/verdict.txt", verdict);
  write_manifest(out_dir, "verify-bound", cfg);
  std::cout << verdict;
  return result.all_hold ? kExitOk : kExitVerification;
}

int run_optimize_samples(const CommonArgs& args) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(args.config_path);
  const std::string out_dir = resolve_out_dir(args.out_dir);
  MultiModalDataset ds = dataset_from_config(cfg);
  SearchSpec spec = search_spec_from_config(cfg, ds);
  cfg.require_all_consumed();
  spec.jobs = args.jobs;

  SearchResult result = optimize_samples(ds, spec);
  write_file_atomic(out_dir + "/search_table.csv", search_table_csv(result.table));
  const std::string summary = search_summary(result);
  write_file_atomic(out_dir + "/search_summary.txt", summary);
  write_manifest(out_dir, "optimize-samples", cfg);
  std::cout << summary;
  return kExitOk;
}

int run_probe(const CommonArgs& args, const std::string& checkpoint,
              const std::string& dataset_path) {
  KeyValueConfig cfg = args.config_path.empty()
                           ? KeyValueConfig::parse_string("", "<flags>")
                           : KeyValueConfig::parse_file(args.config_path);
  const std::string out_dir = resolve_out_dir(args.out_dir);
  const std::string ckpt =
      checkpoint.empty() ? cfg.get_string("probe.checkpoint") : checkpoint;
  const std::string data_file =
      dataset_path.empty() ? cfg.get_string("probe.dataset") : dataset_path;
  ProbeSplit split;
  split.train_fraction = cfg.get_double("probe.train_fraction", 0.7);
  split.seed = cfg.get_u64("probe.seed", 1);
  const std::size_t epochs = cfg.get_size("probe.epochs", 200);
  const std::string kind = cfg.get_string("probe.kind", "linear");
  const std::size_t knn_k = cfg.get_size("probe.knn_k", 5);
  cfg.require_all_consumed();

  FusionEncoder enc = load_encoder(ckpt);
  MultiModalDataset ds = load_dataset(data_file);
  if (!ds.has_labels())
    throw ConfigError("probe: dataset has no labels");
  Matrix embs = embed_dataset(enc, ds);
  ProbeResult result = kind == "knn" ? knn_probe(embs, ds.labels, split, knn_k)
                                     : linear_probe(embs, ds.labels, split, epochs);

  KeyValueWriter out;
  out.set("probe.kind", kind);
  out.set("probe.accuracy", result.accuracy);
  out.set("probe.train_count", result.train_count);
  out.set("probe.test_count", result.test_count);
  out.set("probe.seed", result.seed);
  write_file_atomic(out_dir + "/probe_result.txt", out.str());

  KeyValueWriter manifest;
  manifest.comment("run manifest; re-run: tnce probe --config <this file>");
  manifest.raw_block(cfg.echo());
  if (!cfg.has("probe.checkpoint")) manifest.set("probe.checkpoint", ckpt);
  if (!cfg.has("probe.dataset")) manifest.set("probe.dataset", data_file);
  write_file_atomic(out_dir + "/manifest.txt", manifest.str());

  std::cout << "probe accuracy: " << format_double(result.accuracy) << " ("
            << result.test_count << " held-out samples)\n";
  return kExitOk;
}

int run_experiment(const CommonArgs& args, const std::string& which) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(args.config_path);
  const std::string out_dir = resolve_out_dir(args.out_dir);
  MultiModalDataset ds = dataset_from_config(cfg);
  TrainSettings train = train_settings_from_config(cfg, ds.num_modalities());
  std::vector<std::uint64_t> seeds =
      cfg.has("experiment.seeds") ? cfg.get_u64_list("experiment.seeds")
                                  : std::vector<std::uint64_t>{1, 2, 3};
  ProbeSplit split;
  split.train_fraction = cfg.get_double("experiment.probe_train_fraction", 0.7);
  const std::size_t probe_epochs = cfg.get_size("experiment.probe_epochs", 200);

  if (which == "modality-scaling") {
    ModalityScalingConfig mcfg;
    mcfg.train = train;
    mcfg.seeds = seeds;
    mcfg.split = split;
    mcfg.probe_epochs = probe_epochs;
    mcfg.jobs = args.jobs;
    if (cfg.has("experiment.subsets")) {
      // Pipe-separated subsets of comma-separated indices: 0|0,1|0,1,2
      std::stringstream ss(cfg.get_string("experiment.subsets"));
      std::string part;
      while (std::getline(ss, part, '|')) {
        std::vector<std::size_t> subset;
        std::stringstream ps(part);
        std::string tok;
        while (std::getline(ps, tok, ','))
          subset.push_back(static_cast<std::size_t>(std::stoull(tok)));
        mcfg.subsets.push_back(std::move(subset));
      }
    } else {
      for (std::size_t k = 1; k <= ds.num_modalities(); ++k) {
        std::vector<std::size_t> subset(k);
        for (std::size_t i = 0; i < k; ++i) subset[i] = i;
        mcfg.subsets.push_back(std::move(subset));
      }
    }
    cfg.require_all_consumed();
    auto rows = modality_scaling_experiment(ds, mcfg);
    write_file_atomic(out_dir + "/modality_scaling.csv",
                      modality_scaling_csv(rows, seeds));
    write_manifest(out_dir, "experiment modality-scaling", cfg);
    for (const auto& r : rows)
      std::cout << "subset size " << r.subset.size() << ": mean accuracy "
                << format_double(r.mean_accuracy) << "\n";
    return kExitOk;
  }

  if (which == "sampling-efficiency") {
    SamplingEfficiencyConfig scfg;
    scfg.train = train;
    scfg.seeds = seeds;
    scfg.split = split;
    scfg.probe_epochs = probe_epochs;
    scfg.jobs = args.jobs;
    scfg.batch_sizes = cfg.has("experiment.batch_sizes")
                           ? cfg.get_size_list("experiment.batch_sizes")
                           : std::vector<std::size_t>{16, 32, 64, 128};
    cfg.require_all_consumed();
    auto cells = sampling_efficiency_experiment(ds, scfg);
    write_file_atomic(out_dir + "/sampling_efficiency.csv",
                      sampling_efficiency_csv(cells, seeds));
    write_manifest(out_dir, "experiment sampling-efficiency", cfg);
    for (const auto& c : cells)
      std::cout << c.strategy << " N=" << c.batch_size << ": mean accuracy "
                << format_double(c.mean_accuracy) << "\n";
    return kExitOk;
  }

  if (which == "dropout-robustness") {
    DropoutRobustnessConfig dcfg;
    dcfg.train = train;
    dcfg.seeds = seeds;
    dcfg.split = split;
    dcfg.probe_epochs = probe_epochs;
    dcfg.jobs = args.jobs;
    dcfg.dropout_prob = cfg.get_double("experiment.dropout_prob", 0.6);
    cfg.require_all_consumed();
    auto result = dropout_robustness_experiment(ds, dcfg);
    write_file_atomic(out_dir + "/dropout_robustness.csv",
                      dropout_robustness_csv(result, seeds));
    write_manifest(out_dir, "experiment dropout-robustness", cfg);
    std::cout << "dropout mean " << format_double(result.dropout_mean)
              << ", plain mean " << format_double(result.plain_mean) << ", gap "
              << format_double(result.gap) << "\n";
    return kExitOk;
  }

  throw ConfigError("unknown experiment: " + which);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tnce-lab: tuple contrastive learning laboratory"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string experiment_name;
  std::string probe_checkpoint, probe_dataset;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    auto* opt = sub->add_option("--config", args.config_path, "key = value config file");
    if (config_required) opt->required();
    sub->add_option("--out", args.out_dir, "output directory (env OUTPUT_DIR overrides)");
    sub->add_option("--jobs", args.jobs, "parallel workers for independent trials/cells");
  };

  auto* gen = app.add_subcommand("gen-data", "generate and save a synthetic dataset");
  add_common(gen);
  auto* train = app.add_subcommand("train", "train a fusion encoder");
  add_common(train);
  auto* verify = app.add_subcommand("verify-bound", "verify the MI lower bound against oracles");
  add_common(verify);
  auto* optimize = app.add_subcommand("optimize-samples", "search alpha and beta");
  add_common(optimize);
  auto* probe = app.add_subcommand("probe", "linear/knn probe of a checkpoint");
  add_common(probe, false);
  probe->add_option("--checkpoint", probe_checkpoint, "encoder checkpoint path");
  probe->add_option("--dataset", probe_dataset, "dataset file path");
  auto* experiment = app.add_subcommand("experiment", "run a named experiment");
  add_common(experiment);
  experiment
      ->add_option("name", experiment_name,
                   "modality-scaling | sampling-efficiency | dropout-robustness")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_data(args);
    if (train->parsed()) return run_train(args);
    if (verify->parsed()) return run_verify_bound(args);
    if (optimize->parsed()) return run_optimize_samples(args);
    if (probe->parsed()) return run_probe(args, probe_checkpoint, probe_dataset);
    if (experiment->parsed()) return run_experiment(args, experiment_name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
