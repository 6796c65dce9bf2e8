#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "crtr/checkpoint.hpp"
#include "crtr/config.hpp"
#include "crtr/dataset.hpp"
#include "crtr/env/environments.hpp"
#include "crtr/metrics.hpp"
#include "crtr/scorers.hpp"
#include "crtr/search.hpp"
#include "crtr/trajectory_io.hpp"

namespace crtr {

namespace fs = std::filesystem;

struct GenerateSummary {
  std::string path;
  long count = 0;
  double mean_length = 0.0;
};

struct MetricsReport {
  std::string env;
  std::string model;
  std::string config_hash;
  std::uint64_t seed = 0;
  int n_instances = 0;
  double spearman_mean = 0.0;
  int correlation_skipped = 0;
  std::vector<std::pair<long, double>> success;
  std::vector<std::pair<int, double>> cdf;
  long max_budget = 0;
  double success_at_max = 0.0;
  double mean_solution_length = 0.0;  // over instances solved at max budget

  json to_json() const {
    json j;
    j["env"] = env;
    j["model"] = model;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["n_instances"] = n_instances;
    j["spearman_mean"] = spearman_mean;
    j["correlation_skipped"] = correlation_skipped;
    j["success_curve"] = success;
    j["length_cdf"] = cdf;
    j["max_budget"] = max_budget;
    j["success_at_max"] = success_at_max;
    j["mean_solution_length"] = mean_solution_length;
    return j;
  }
};

namespace detail {

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory: " + p.string());
}

inline fs::path seed_dir(const ExperimentConfig& cfg, std::uint64_t seed) {
  return fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
}

inline json board_json(const ExperimentConfig& cfg) {
  return json{{"height", cfg.board.height},
              {"width", cfg.board.width},
              {"boxes", cfg.board.boxes},
              {"wall_fraction", cfg.board.wall_fraction}};
}

inline std::uint64_t data_seed(std::uint64_t seed) {
  return fnv1a64("data", fnv1a64(&seed, sizeof(seed)));
}

inline TrajectoryDataset training_dataset(const Environment& env, const ExperimentConfig& cfg,
                                          std::uint64_t seed) {
  const fs::path path = fs::path(cfg.out_dir) / "dataset.crtj";
  if (fs::exists(path)) {
    const TrajectoryDataset ds = load_trajectories(path.string());
    if (ds.env != cfg.env) throw ConfigError("dataset file env does not match config");
    return ds;
  }
  return generate_trajectories(env, cfg.train.dataset.count, cfg.train.dataset.length,
                               data_seed(seed), cfg.train.dataset.remove_cycles);
}

/// Unlimited-data mode: a per-step fresh micro-dataset of batch_size/R
/// trajectories, each used exactly R times (id collisions vanish in the
/// infinite-dataset limit the mode models).
inline TrajectoryDataset fresh_step_dataset(const Environment& env,
                                            const ExperimentConfig& cfg, std::uint64_t seed,
                                            long step) {
  const int groups = cfg.train.sampler.batch_size / cfg.train.sampler.repetition_factor;
  TrajectoryDataset ds;
  ds.env = env.id();
  ds.trajectories.reserve(groups);
  for (int i = 0; i < groups; ++i) {
    Rng rng = Rng::stream(data_seed(seed) + step, "fresh_traj", static_cast<std::uint64_t>(i));
    Trajectory t;
    const int length = std::max(cfg.train.dataset.length, 1);
    env.sample_trajectory(rng, length, t.states, t.actions);
    if (cfg.train.dataset.remove_cycles) t = remove_single_step_cycles(t);
    // Cycle removal or early reverse-play exhaustion can leave a one-state
    // trajectory; pad by resampling until it is usable.
    std::uint64_t salt = 1;
    while (t.length() < 2) {
      Rng retry = Rng::stream(data_seed(seed) + step, "fresh_traj_retry",
                              static_cast<std::uint64_t>(i) * 1000 + salt++);
      env.sample_trajectory(retry, length, t.states, t.actions);
      if (cfg.train.dataset.remove_cycles) t = remove_single_step_cycles(t);
    }
    ds.trajectories.push_back(std::move(t));
  }
  return ds;
}

inline std::vector<int> round_robin_ids(const SamplerConfig& s) {
  std::vector<int> ids(s.batch_size);
  for (int i = 0; i < s.batch_size; ++i) ids[i] = i / s.repetition_factor;
  return ids;
}

inline int supervised_bins(const Environment& env, const ExperimentConfig& cfg,
                           std::uint64_t seed, const TrajectoryDataset* stored) {
  if (stored) return std::max(2, stored->max_len());
  // Fresh mode: bound from a deterministic probe of the generator.
  int max_len = cfg.train.dataset.length + 1;
  for (int i = 0; i < 64; ++i) {
    Rng rng = Rng::stream(data_seed(seed), "bins_probe", static_cast<std::uint64_t>(i));
    Trajectory t;
    env.sample_trajectory(rng, std::max(cfg.train.dataset.length, 1), t.states, t.actions);
    max_len = std::max(max_len, t.length());
  }
  return std::max(2, max_len);
}

inline ContrastiveConfig train_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  ContrastiveConfig tc;
  tc.lr = cfg.train.lr;
  tc.sampler = cfg.train.sampler;
  tc.metric = cfg.train.metric;
  tc.variant = cfg.train.variant;
  tc.temperature = cfg.train.temperature;
  tc.steps = cfg.train.steps;
  tc.seed = seed;
  return tc;
}

}  // namespace detail

/// Writes the trajectory dataset file for the configured environment and
/// recipe.
inline GenerateSummary run_generate(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto env = make_environment(cfg.env, cfg.board);
  const TrajectoryDataset ds =
      generate_trajectories(*env, cfg.train.dataset.count, cfg.train.dataset.length,
                            detail::data_seed(seed), cfg.train.dataset.remove_cycles);
  detail::ensure_dir(cfg.out_dir);
  const fs::path path = fs::path(cfg.out_dir) / "dataset.crtj";
  save_trajectories(path.string(), ds, env->state_tokens(), detail::board_json(cfg), cfg.hash);
  GenerateSummary summary;
  summary.path = path.string();
  summary.count = static_cast<long>(ds.trajectories.size());
  double total = 0.0;
  for (const auto& t : ds.trajectories) total += t.length();
  summary.mean_length = total / static_cast<double>(ds.trajectories.size());
  return summary;
}

/// Trains the configured model for one seed; writes periodic checkpoints, the
/// final checkpoint and the training log. Returns the checkpoint path.
inline std::string run_train(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.trainable())
    throw ConfigError(std::string("model kind ") + to_string(cfg.model) + " is not trainable");
  const auto env = make_environment(cfg.env, cfg.board);
  const bool supervised = cfg.model == ModelKind::Supervised;

  TrajectoryDataset stored;
  const bool fresh = cfg.train.dataset.fresh;
  if (!fresh) stored = detail::training_dataset(*env, cfg, seed);

  int n_bins = 0;
  EncoderArch arch;
  if (supervised) {
    n_bins = detail::supervised_bins(*env, cfg, seed, fresh ? nullptr : &stored);
    arch = {2 * env->encoding_dim(), cfg.train.hidden_dim, cfg.train.depth, n_bins};
  } else {
    arch = {env->encoding_dim(), cfg.train.hidden_dim, cfg.train.depth, cfg.train.repr_dim};
  }

  EncoderParams params = init_params(arch, fnv1a64("init", fnv1a64(&seed, sizeof(seed))));
  AdamState adam(params.data.size());
  ContrastiveConfig tc = detail::train_config(cfg, seed);
  const BinConfig bins{std::max(2, n_bins)};

  const fs::path dir = detail::seed_dir(cfg, seed);
  detail::ensure_dir(dir);
  const std::string ckpt_path = (dir / "checkpoint.crtr").string();
  std::ofstream log((dir / "train_log.csv").string());
  log << "# config_hash=" << cfg.hash << "\n";
  log << "step,loss,accuracy,wall_ms\n";

  auto save = [&](long step) {
    Checkpoint ck;
    ck.model_kind = supervised ? "supervised" : "contrastive";
    ck.env = to_string(cfg.env);
    ck.board = detail::board_json(cfg);
    ck.params = params;
    ck.metric = cfg.train.metric;
    ck.variant = cfg.train.variant;
    ck.temperature = tc.effective_temperature(arch.repr_dim);
    ck.step = step;
    ck.n_bins = n_bins;
    ck.config_hash = cfg.hash;
    ck.adam = adam;
    save_checkpoint(ckpt_path, ck);
  };

  const detail::WallTimer timer;
  for (long step = 0; step < cfg.train.steps; ++step) {
    Rng rng = Rng::stream(seed, "batch", static_cast<std::uint64_t>(step));
    StepStats stats;
    try {
      if (fresh) {
        const TrajectoryDataset ds = detail::fresh_step_dataset(*env, cfg, seed, step);
        const std::vector<int> ids = detail::round_robin_ids(tc.sampler);
        if (supervised)
          stats = supervised_train_step(*env, params, adam, ds, tc, bins, rng, &ids);
        else
          stats = contrastive_train_step(*env, params, adam, ds, tc, rng, &ids);
      } else {
        if (supervised)
          stats = supervised_train_step(*env, params, adam, stored, tc, bins, rng);
        else
          stats = contrastive_train_step(*env, params, adam, stored, tc, rng);
      }
    } catch (const TrainingError& ex) {
      log.flush();
      throw TrainingError(std::string(ex.what()) + " at step " + std::to_string(step) +
                          " (last periodic checkpoint retained)");
    }
    if (step % cfg.train.log_every == 0 || step + 1 == cfg.train.steps) {
      log << step << ',' << stats.loss << ',' << stats.accuracy << ',' << timer.ms() << "\n";
      log.flush();
    }
    if (cfg.train.checkpoint_every > 0 && (step + 1) % cfg.train.checkpoint_every == 0 &&
        step + 1 < cfg.train.steps)
      save(step + 1);
  }
  save(cfg.train.steps);
  return ckpt_path;
}

namespace detail {

inline std::unique_ptr<Scorer> make_scorer(const Environment& env,
                                           const ExperimentConfig& cfg, std::uint64_t seed,
                                           const std::string& checkpoint_path) {
  switch (cfg.model) {
    case ModelKind::Crtr:
    case ModelKind::Crl:
    case ModelKind::Supervised: {
      const std::string path = checkpoint_path.empty()
                                   ? (seed_dir(cfg, seed) / "checkpoint.crtr").string()
                                   : checkpoint_path;
      Checkpoint ck = load_checkpoint(path);
      if (ck.env != to_string(cfg.env))
        throw ConfigError("checkpoint env '" + ck.env + "' does not match config env '" +
                          to_string(cfg.env) + "'");
      if (cfg.model == ModelKind::Supervised) {
        if (ck.model_kind != "supervised")
          throw ConfigError("checkpoint is not a supervised model");
        if (ck.params.arch.input_dim != 2 * env.encoding_dim())
          throw ConfigError("checkpoint input width does not match the environment");
        return std::make_unique<SupervisedScorer>(env, std::move(ck.params));
      }
      if (ck.model_kind != "contrastive")
        throw ConfigError("checkpoint is not a contrastive model");
      if (ck.params.arch.input_dim != env.encoding_dim())
        throw ConfigError("checkpoint input width does not match the environment");
      return std::make_unique<CriticScorer>(env, std::move(ck.params), ck.metric);
    }
    case ModelKind::Oracle:
      return std::make_unique<OracleScorer>(env, cfg.eval.oracle_radius);
    case ModelKind::Random:
      return std::make_unique<RandomScorer>(seed);
    case ModelKind::Hamming:
      return std::make_unique<HammingScorer>();
  }
  throw ConfigError("make_scorer: unknown model kind");
}

inline SearchResult run_planner(const Environment& env, const Scorer& scorer,
                                const ExperimentConfig& cfg, const Instance& inst,
                                long budget) {
  SearchOptions options;
  options.alpha = cfg.eval.alpha;
  options.top_k = cfg.eval.top_k;
  options.allow_revisit = cfg.eval.allow_revisit;
  switch (cfg.eval.planner) {
    case Planner::Greedy:
      return greedy_solve(env, scorer, inst.start, inst.goal, {budget}, options);
    case Planner::BestFs:
      return best_first_search(env, scorer, inst.start, inst.goal, {budget}, options);
    case Planner::AStar:
      return a_star(env, scorer, cfg.eval.alpha, inst.start, inst.goal, {budget}, options);
  }
  throw ConfigError("run_planner: unknown planner");
}

inline void write_csv_header(std::ofstream& os, const std::string& hash,
                             const std::string& columns) {
  os << "# config_hash=" << hash << "\n" << columns << "\n";
}

}  // namespace detail

/// Evaluates the configured scorer: per-instance planning at the largest
/// budget (smaller budgets are exact truncations of the same run), held-out
/// trajectory correlation, and report files (JSON + plot-ready CSV).
inline MetricsReport run_evaluate(const ExperimentConfig& cfg, std::uint64_t seed,
                                  const std::string& checkpoint_path = "",
                                  const std::string& out_subdir = "") {
  const auto env = make_environment(cfg.env, cfg.board);
  const auto scorer = detail::make_scorer(*env, cfg, seed, checkpoint_path);

  std::vector<long> budgets = cfg.eval.budgets;
  std::sort(budgets.begin(), budgets.end());
  const long max_budget = budgets.back();
  const int n = cfg.eval.instances;

  std::vector<SearchResult> at_max(n);
  {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int n_threads = std::max(1, std::min(cfg.threads, n));
    std::vector<std::exception_ptr> errors(n_threads);
    for (int w = 0; w < n_threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            Rng rng = Rng::stream(seed, "eval_instance", static_cast<std::uint64_t>(i));
            const Instance inst = env->generate_instance(rng, cfg.eval.difficulty);
            SearchResult res = detail::run_planner(*env, *scorer, cfg, inst, max_budget);
            if (res.solved) {
              State s = inst.start;
              for (Action a : res.solution) s = env->apply(s, a);
              if (!env->is_goal(s, inst.goal))
                throw std::logic_error("solved result does not replay to the goal");
            }
            at_max[i] = std::move(res);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::map<long, std::vector<SearchResult>> by_budget;
  for (long b : budgets) {
    auto& list = by_budget[b];
    list.reserve(n);
    for (const auto& r : at_max) {
      SearchResult t = r;
      if (t.nodes_created > b) {
        t.solved = false;
        t.solution.clear();
        t.nodes_created = b;
      }
      list.push_back(std::move(t));
    }
  }

  // Held-out trajectories for the correlation metric.
  std::vector<Trajectory> held_out;
  for (int i = 0; i < cfg.eval.correlation_trajectories; ++i) {
    Rng rng = Rng::stream(seed, "eval_traj", static_cast<std::uint64_t>(i));
    Trajectory t;
    env->sample_trajectory(rng, std::max(cfg.train.dataset.length, 1), t.states, t.actions);
    if (cfg.train.dataset.remove_cycles) t = remove_single_step_cycles(t);
    held_out.push_back(std::move(t));
  }
  MetricsReport report;
  try {
    report.spearman_mean = trajectory_correlation(*scorer, held_out,
                                                  cfg.eval.correlation_trajectories,
                                                  &report.correlation_skipped);
  } catch (const UndefinedCorrelationError&) {
    report.spearman_mean = 0.0;
    report.correlation_skipped = static_cast<int>(held_out.size());
    std::cerr << "warning: all held-out trajectories degenerate for correlation\n";
  }

  report.env = to_string(cfg.env);
  report.model = to_string(cfg.model);
  report.config_hash = cfg.hash;
  report.seed = seed;
  report.n_instances = n;
  report.success = success_curve(by_budget);
  report.cdf = length_cdf(at_max);
  report.max_budget = max_budget;
  long solved = 0;
  double length_sum = 0.0;
  for (const auto& r : at_max)
    if (r.solved) {
      ++solved;
      length_sum += r.length();
    }
  report.success_at_max = static_cast<double>(solved) / n;
  report.mean_solution_length = solved > 0 ? length_sum / solved : 0.0;

  const fs::path dir =
      out_subdir.empty() ? detail::seed_dir(cfg, seed) : fs::path(cfg.out_dir) / out_subdir;
  detail::ensure_dir(dir);
  {
    std::ofstream os((dir / "report.json").string());
    os << report.to_json().dump(2) << "\n";
  }
  {
    std::ofstream os((dir / "success_curve.csv").string());
    detail::write_csv_header(os, cfg.hash, "budget,success");
    for (const auto& [b, f] : report.success) os << b << ',' << f << "\n";
  }
  {
    std::ofstream os((dir / "length_cdf.csv").string());
    detail::write_csv_header(os, cfg.hash, "length,fraction");
    for (const auto& [len, f] : report.cdf) os << len << ',' << f << "\n";
  }
  {
    std::ofstream os((dir / "results.csv").string());
    detail::write_csv_header(os, cfg.hash, "instance_id,solved,length,nodes_created,wall_ms");
    for (int i = 0; i < n; ++i) {
      const auto& r = at_max[i];
      os << i << ',' << (r.solved ? 1 : 0) << ',' << r.length() << ',' << r.nodes_created
         << ',' << r.wall_ms << "\n";
    }
  }
  return report;
}

namespace detail {

struct SweepCell {
  int repetition_factor;
  double alpha;
  SimilarityMetric metric;
  LossVariant variant;

  std::string name() const {
    std::ostringstream os;
    os << "R" << repetition_factor << "_a" << alpha << "_" << to_string(metric) << "_"
       << to_string(variant);
    return os.str();
  }
};

inline std::vector<SweepCell> sweep_cells(const ExperimentConfig& cfg) {
  auto rs = cfg.sweep.repetition_factor.empty()
                ? std::vector<int>{cfg.train.sampler.repetition_factor}
                : cfg.sweep.repetition_factor;
  auto alphas = cfg.sweep.alpha.empty() ? std::vector<double>{cfg.eval.alpha} : cfg.sweep.alpha;
  std::vector<SimilarityMetric> metrics;
  if (cfg.sweep.metric.empty())
    metrics = {cfg.train.metric};
  else
    for (const auto& m : cfg.sweep.metric) metrics.push_back(metric_from_string(m));
  std::vector<LossVariant> variants;
  if (cfg.sweep.variant.empty())
    variants = {cfg.train.variant};
  else
    for (const auto& v : cfg.sweep.variant) variants.push_back(variant_from_string(v));

  std::vector<SweepCell> cells;
  for (int r : rs)
    for (double a : alphas)
      for (auto m : metrics)
        for (auto v : variants) cells.push_back({r, a, m, v});
  return cells;
}

inline ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell) {
  json doc = base.canonical;
  doc["train"]["repetition_factor"] = cell.repetition_factor;
  doc["train"]["metric"] = to_string(cell.metric);
  doc["train"]["variant"] = to_string(cell.variant);
  doc["eval"]["alpha"] = cell.alpha;
  doc["out_dir"] = (fs::path(base.out_dir) / "cells" / cell.name()).string();
  doc["sweep"] = json::object();
  // A repetition factor of 1 under a sweep is the plain-sampler baseline.
  if (doc["model"] == "crl" && cell.repetition_factor != 1) doc["model"] = "crtr";
  if (doc["model"] == "crtr" && cell.repetition_factor == 1) doc["model"] = "crl";
  return parse_config(doc);
}

struct CellStats {
  std::string cell;
  long n_seeds = 0;
  std::vector<std::uint64_t> failed_seeds;
  // keyed by budget
  std::map<long, std::vector<double>> success;
  std::vector<double> spearman;
  std::vector<double> mean_length;
};

inline void append_merged_row(std::ofstream& os, const SweepCell& cell, long budget,
                              const std::vector<double>& values,
                              const std::vector<double>& spearman,
                              const std::vector<double>& mean_length, std::size_t failures) {
  const auto [sm, sse] = mean_and_stderr(values);
  const auto [rm, rse] = mean_and_stderr(spearman);
  const auto [lm, lse] = mean_and_stderr(mean_length);
  os << cell.repetition_factor << ',' << cell.alpha << ',' << to_string(cell.metric) << ','
     << to_string(cell.variant) << ',' << budget << ',' << values.size() << ',' << sm << ','
     << sse << ',' << rm << ',' << rse << ',' << lm << ',' << lse << ',' << failures << "\n";
}

}  // namespace detail

/// Cartesian sweep over the declared axes; per-cell-per-seed reports plus a
/// merged CSV with means and standard errors across seeds. Failed cells are
/// recorded and the sweep continues.
inline void run_sweep(const ExperimentConfig& cfg, std::ostream& progress = std::cout) {
  const auto cells = detail::sweep_cells(cfg);
  detail::ensure_dir(cfg.out_dir);
  std::ofstream merged((fs::path(cfg.out_dir) / "merged.csv").string());
  detail::write_csv_header(merged, cfg.hash,
                           "repetition_factor,alpha,metric,variant,budget,n_seeds,"
                           "success_mean,success_se,spearman_mean,spearman_se,"
                           "mean_length_mean,mean_length_se,failed_seeds");
  for (const auto& cell : cells) {
    const ExperimentConfig cc = detail::cell_config(cfg, cell);
    std::map<long, std::vector<double>> success;
    std::vector<double> spearman, mean_length;
    std::size_t failures = 0;
    for (std::uint64_t seed : cfg.seeds) {
      try {
        if (cc.trainable()) run_train(cc, seed);
        const MetricsReport report = run_evaluate(cc, seed);
        for (const auto& [b, f] : report.success) success[b].push_back(f);
        spearman.push_back(report.spearman_mean);
        mean_length.push_back(report.mean_solution_length);
        progress << "cell " << cell.name() << " seed " << seed << ": success@max "
                 << report.success_at_max << ", spearman " << report.spearman_mean << "\n";
      } catch (const std::exception& ex) {
        ++failures;
        progress << "cell " << cell.name() << " seed " << seed << " FAILED: " << ex.what()
                 << "\n";
      }
    }
    for (const auto& [budget, values] : success)
      detail::append_merged_row(merged, cell, budget, values, spearman, mean_length, failures);
  }
}

/// Re-merges the per-cell reports already on disk into merged.csv.
inline void run_report(const ExperimentConfig& cfg, std::ostream& progress = std::cout) {
  const auto cells = detail::sweep_cells(cfg);
  std::ofstream merged((fs::path(cfg.out_dir) / "merged.csv").string());
  detail::write_csv_header(merged, cfg.hash,
                           "repetition_factor,alpha,metric,variant,budget,n_seeds,"
                           "success_mean,success_se,spearman_mean,spearman_se,"
                           "mean_length_mean,mean_length_se,failed_seeds");
  for (const auto& cell : cells) {
    const ExperimentConfig cc = detail::cell_config(cfg, cell);
    std::map<long, std::vector<double>> success;
    std::vector<double> spearman, mean_length;
    std::size_t failures = 0;
    for (std::uint64_t seed : cfg.seeds) {
      const fs::path path = detail::seed_dir(cc, seed) / "report.json";
      if (!fs::exists(path)) {
        ++failures;
        progress << "missing report: " << path.string() << "\n";
        continue;
      }
      std::ifstream is(path.string());
      json j;
      is >> j;
      for (const auto& pair : j.at("success_curve"))
        success[pair.at(0).get<long>()].push_back(pair.at(1).get<double>());
      spearman.push_back(j.at("spearman_mean").get<double>());
      mean_length.push_back(j.at("mean_solution_length").get<double>());
    }
    for (const auto& [budget, values] : success)
      detail::append_merged_row(merged, cell, budget, values, spearman, mean_length, failures);
  }
}

}  // namespace crtr
