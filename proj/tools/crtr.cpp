// Experiment driver: dataset generation, training, evaluation sweeps and
// report export for the contrastive puzzle-solving library.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crtr/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  long seed = -1;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", args.seed, "override the first configured seed");
  cmd->add_option("--out", args.out_dir, "override the output directory");
  cmd->add_option("--checkpoint", args.checkpoint, "checkpoint path (evaluate)");
  cmd->add_option("--threads", args.threads, "evaluation worker threads");
}

crtr::ExperimentConfig load(const CommonArgs& args) {
  crtr::json doc;
  {
    std::ifstream is(args.config_path);
    if (!is) throw crtr::ConfigError("cannot open config file: " + args.config_path);
    try {
      is >> doc;
    } catch (const crtr::json::exception& ex) {
      throw crtr::ConfigError(std::string("config parse error: ") + ex.what());
    }
  }
  if (!args.out_dir.empty()) doc["out_dir"] = args.out_dir;
  if (args.threads > 0) doc["threads"] = args.threads;
  if (args.seed >= 0) {
    auto seeds = doc.contains("seeds") ? doc["seeds"].get<std::vector<std::uint64_t>>()
                                       : std::vector<std::uint64_t>{};
    if (seeds.empty())
      seeds = {static_cast<std::uint64_t>(args.seed)};
    else
      seeds[0] = static_cast<std::uint64_t>(args.seed);
    doc["seeds"] = seeds;
  }
  return crtr::parse_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive temporal representations for combinatorial puzzles"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* generate = app.add_subcommand("generate", "write the trajectory dataset file");
  CLI::App* train = app.add_subcommand("train", "train the configured model");
  CLI::App* evaluate = app.add_subcommand("evaluate", "run the configured planner and report");
  CLI::App* sweep = app.add_subcommand("sweep", "cartesian sweep over the declared axes");
  CLI::App* report = app.add_subcommand("report", "re-merge per-cell reports into merged.csv");
  for (CLI::App* cmd : {generate, train, evaluate, sweep, report}) add_common(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags are config errors
  }

  try {
    const crtr::ExperimentConfig cfg = load(args);
    if (generate->parsed()) {
      const auto summary = crtr::run_generate(cfg, cfg.seeds[0]);
      std::printf("wrote %s: %ld trajectories, mean length %.2f\n", summary.path.c_str(),
                  summary.count, summary.mean_length);
    } else if (train->parsed()) {
      for (std::uint64_t seed : cfg.seeds) {
        const std::string path = crtr::run_train(cfg, seed);
        std::printf("seed %llu: checkpoint %s\n", static_cast<unsigned long long>(seed),
                    path.c_str());
      }
    } else if (evaluate->parsed()) {
      for (std::uint64_t seed : cfg.seeds) {
        const auto rep = crtr::run_evaluate(cfg, seed, args.checkpoint);
        std::printf("seed %llu: success@%ld %.3f, spearman %.4f, mean length %.1f\n",
                    static_cast<unsigned long long>(seed), rep.max_budget, rep.success_at_max,
                    rep.spearman_mean, rep.mean_solution_length);
      }
    } else if (sweep->parsed()) {
      crtr::run_sweep(cfg);
      std::printf("sweep complete: %s/merged.csv\n", cfg.out_dir.c_str());
    } else if (report->parsed()) {
      crtr::run_report(cfg);
      std::printf("report complete: %s/merged.csv\n", cfg.out_dir.c_str());
    }
  } catch (const crtr::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
