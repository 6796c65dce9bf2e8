#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crtr/contrastive.hpp"
#include "crtr/env/env.hpp"
#include "crtr/io.hpp"

namespace crtr {

enum class ModelKind { Crtr, Crl, Supervised, Random, Oracle, Hamming };
enum class Planner { Greedy, BestFs, AStar };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Crtr: return "crtr";
    case ModelKind::Crl: return "crl";
    case ModelKind::Supervised: return "supervised";
    case ModelKind::Random: return "random";
    case ModelKind::Oracle: return "oracle";
    case ModelKind::Hamming: return "hamming";
  }
  return "?";
}

inline ModelKind model_from_string(const std::string& s) {
  if (s == "crtr") return ModelKind::Crtr;
  if (s == "crl") return ModelKind::Crl;
  if (s == "supervised") return ModelKind::Supervised;
  if (s == "random") return ModelKind::Random;
  if (s == "oracle") return ModelKind::Oracle;
  if (s == "hamming") return ModelKind::Hamming;
  throw ConfigError("unknown model kind: " + s);
}

inline const char* to_string(Planner p) {
  switch (p) {
    case Planner::Greedy: return "greedy";
    case Planner::BestFs: return "bestfs";
    case Planner::AStar: return "astar";
  }
  return "?";
}

inline Planner planner_from_string(const std::string& s) {
  if (s == "greedy") return Planner::Greedy;
  if (s == "bestfs") return Planner::BestFs;
  if (s == "astar") return Planner::AStar;
  throw ConfigError("unknown planner: " + s);
}

struct DatasetOptions {
  long count = 20000;
  int length = 21;
  bool fresh = true;          // regenerate trajectories every step
  bool remove_cycles = false;
};

struct TrainOptions {
  long steps = 50000;
  double lr = 3e-4;
  SamplerConfig sampler;      // batch_size, discount, repetition_factor
  SimilarityMetric metric = SimilarityMetric::Dot;
  LossVariant variant = LossVariant::Backward;
  double temperature = 0.0;   // <= 0: sqrt(repr_dim)
  int hidden_dim = 256;
  int depth = 4;
  int repr_dim = 64;
  DatasetOptions dataset;
  long checkpoint_every = 10000;
  long log_every = 1;
};

struct EvalOptions {
  int instances = 1000;
  int difficulty = 5;
  std::vector<long> budgets = {10, 100, 1000, 6000};
  Planner planner = Planner::Greedy;
  double alpha = 0.0;
  int top_k = 0;
  int correlation_trajectories = 100;
  bool allow_revisit = false;
  int oracle_radius = 6;
};

struct SweepOptions {
  std::vector<int> repetition_factor;
  std::vector<double> alpha;
  std::vector<std::string> metric;
  std::vector<std::string> variant;

  bool empty() const {
    return repetition_factor.empty() && alpha.empty() && metric.empty() && variant.empty();
  }
};

struct ExperimentConfig {
  EnvId env = EnvId::RubiksCube;
  BoardConfig board;
  ModelKind model = ModelKind::Crtr;
  TrainOptions train;
  EvalOptions eval;
  SweepOptions sweep;
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "runs/default";
  int threads = 2;

  json canonical;    // defaults-filled document
  std::string hash;  // provenance hash of the canonical document

  bool trainable() const {
    return model == ModelKind::Crtr || model == ModelKind::Crl ||
           model == ModelKind::Supervised;
  }
};

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

inline SimilarityMetric default_metric(EnvId env) {
  switch (env) {
    case EnvId::LightsOut: return SimilarityMetric::NegL2;
    case EnvId::Sokoban: return SimilarityMetric::NegL2Squared;
    default: return SimilarityMetric::Dot;
  }
}

inline double default_lr(EnvId env) { return env == EnvId::LightsOut ? 1e-4 : 3e-4; }

inline int default_length(EnvId env) {
  switch (env) {
    case EnvId::RubiksCube: return 21;
    case EnvId::FifteenPuzzle: return 150;
    case EnvId::LightsOut: return 49;
    case EnvId::DigitJumper: return 0;  // path length is emergent
    case EnvId::Sokoban: return 30;
  }
  return 21;
}

inline int default_difficulty(EnvId env) {
  switch (env) {
    case EnvId::RubiksCube: return 5;
    case EnvId::FifteenPuzzle: return 8;
    case EnvId::LightsOut: return 5;
    case EnvId::DigitJumper: return 1;
    case EnvId::Sokoban: return 10;
  }
  return 5;
}

}  // namespace detail

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

/// Parses and validates a config document, filling per-environment defaults.
/// The canonical (defaults-filled) document and its hash are attached for
/// provenance; every output file carries the hash.
inline ExperimentConfig parse_config(const json& doc) {
  using detail::get_or;
  ExperimentConfig cfg;
  try {
    if (!doc.contains("env")) throw ConfigError("config: missing \"env\"");
    cfg.env = env_from_string(doc.at("env").get<std::string>());
    if (doc.contains("board")) {
      const json& b = doc.at("board");
      cfg.board.height = get_or(b, "height", 0);
      cfg.board.width = get_or(b, "width", 0);
      cfg.board.boxes = get_or(b, "boxes", 0);
      cfg.board.wall_fraction = get_or(b, "wall_fraction", -1.0);
    }
    cfg.model = model_from_string(get_or<std::string>(doc, "model", "crtr"));

    const json t = doc.contains("train") ? doc.at("train") : json::object();
    cfg.train.steps = get_or<long>(t, "steps", 50000);
    cfg.train.lr = get_or(t, "lr", detail::default_lr(cfg.env));
    cfg.train.sampler.batch_size = get_or(t, "batch_size", 512);
    cfg.train.sampler.discount = get_or(t, "discount", 0.9);
    const int default_r =
        (cfg.model == ModelKind::Crl || cfg.model == ModelKind::Supervised) ? 1 : 2;
    cfg.train.sampler.repetition_factor = get_or(t, "repetition_factor", default_r);
    if (cfg.model == ModelKind::Crl && cfg.train.sampler.repetition_factor != 1)
      throw ConfigError("config: crl is crtr with repetition_factor=1; set model=crtr "
                        "for other repetition factors");
    cfg.train.metric = metric_from_string(
        get_or<std::string>(t, "metric", to_string(detail::default_metric(cfg.env))));
    cfg.train.variant =
        variant_from_string(get_or<std::string>(t, "variant", "backward"));
    cfg.train.temperature = get_or(t, "temperature", 0.0);
    cfg.train.hidden_dim = get_or(t, "hidden_dim", 256);
    cfg.train.depth = get_or(t, "depth", 4);
    cfg.train.repr_dim = get_or(t, "repr_dim", 64);
    cfg.train.checkpoint_every = get_or<long>(t, "checkpoint_every", 10000);
    cfg.train.log_every = get_or<long>(t, "log_every", 1);
    const json d = t.contains("dataset") ? t.at("dataset") : json::object();
    cfg.train.dataset.count = get_or<long>(d, "count", 20000);
    cfg.train.dataset.length = get_or(d, "length", detail::default_length(cfg.env));
    cfg.train.dataset.fresh = get_or(d, "fresh", true);
    cfg.train.dataset.remove_cycles =
        get_or(d, "remove_cycles", cfg.env == EnvId::FifteenPuzzle);

    const json e = doc.contains("eval") ? doc.at("eval") : json::object();
    cfg.eval.instances = get_or(e, "instances", 1000);
    cfg.eval.difficulty = get_or(e, "difficulty", detail::default_difficulty(cfg.env));
    cfg.eval.budgets = get_or(e, "budgets", std::vector<long>{10, 100, 1000, 6000});
    cfg.eval.planner = planner_from_string(get_or<std::string>(e, "planner", "greedy"));
    cfg.eval.alpha = get_or(e, "alpha", 0.0);
    cfg.eval.top_k = get_or(e, "top_k", cfg.env == EnvId::LightsOut ? 10 : 0);
    cfg.eval.correlation_trajectories = get_or(e, "correlation_trajectories", 100);
    cfg.eval.allow_revisit = get_or(e, "allow_revisit", false);
    cfg.eval.oracle_radius = get_or(e, "oracle_radius", 6);

    if (doc.contains("sweep")) {
      const json& s = doc.at("sweep");
      cfg.sweep.repetition_factor = get_or(s, "repetition_factor", std::vector<int>{});
      cfg.sweep.alpha = get_or(s, "alpha", std::vector<double>{});
      cfg.sweep.metric = get_or(s, "metric", std::vector<std::string>{});
      cfg.sweep.variant = get_or(s, "variant", std::vector<std::string>{});
      for (const auto& m : cfg.sweep.metric) metric_from_string(m);
      for (const auto& v : cfg.sweep.variant) variant_from_string(v);
    }

    cfg.seeds = get_or(doc, "seeds", std::vector<std::uint64_t>{0});
    if (cfg.seeds.empty()) throw ConfigError("config: seeds must be nonempty");
    cfg.out_dir = get_or<std::string>(doc, "out_dir", "runs/default");
    cfg.threads = get_or(doc, "threads", 2);
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");

    cfg.train.sampler.validate();
    if (cfg.train.steps < 0) throw ConfigError("config: steps must be >= 0");
    if (cfg.train.hidden_dim < 1 || cfg.train.depth < 0 || cfg.train.repr_dim < 1 ||
        cfg.train.repr_dim > cfg.train.hidden_dim)
      throw ConfigError("config: bad encoder shape");
    if (cfg.eval.instances < 1) throw ConfigError("config: eval.instances must be >= 1");
    if (cfg.eval.difficulty < 0) throw ConfigError("config: eval.difficulty must be >= 0");
    if (cfg.eval.budgets.empty()) throw ConfigError("config: eval.budgets must be nonempty");
    for (long b : cfg.eval.budgets)
      if (b < 1) throw ConfigError("config: budgets must be >= 1");
    if (cfg.eval.alpha < 0.0) throw ConfigError("config: alpha must be >= 0");
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }

  // Canonical, defaults-filled document (sorted keys) for hashing.
  json c;
  c["env"] = to_string(cfg.env);
  c["board"] = {{"height", cfg.board.height},
                {"width", cfg.board.width},
                {"boxes", cfg.board.boxes},
                {"wall_fraction", cfg.board.wall_fraction}};
  c["model"] = to_string(cfg.model);
  c["train"] = {{"steps", cfg.train.steps},
                {"lr", cfg.train.lr},
                {"batch_size", cfg.train.sampler.batch_size},
                {"discount", cfg.train.sampler.discount},
                {"repetition_factor", cfg.train.sampler.repetition_factor},
                {"metric", to_string(cfg.train.metric)},
                {"variant", to_string(cfg.train.variant)},
                {"temperature", cfg.train.temperature},
                {"hidden_dim", cfg.train.hidden_dim},
                {"depth", cfg.train.depth},
                {"repr_dim", cfg.train.repr_dim},
                {"checkpoint_every", cfg.train.checkpoint_every},
                {"log_every", cfg.train.log_every},
                {"dataset",
                 {{"count", cfg.train.dataset.count},
                  {"length", cfg.train.dataset.length},
                  {"fresh", cfg.train.dataset.fresh},
                  {"remove_cycles", cfg.train.dataset.remove_cycles}}}};
  c["eval"] = {{"instances", cfg.eval.instances},
               {"difficulty", cfg.eval.difficulty},
               {"budgets", cfg.eval.budgets},
               {"planner", to_string(cfg.eval.planner)},
               {"alpha", cfg.eval.alpha},
               {"top_k", cfg.eval.top_k},
               {"correlation_trajectories", cfg.eval.correlation_trajectories},
               {"allow_revisit", cfg.eval.allow_revisit},
               {"oracle_radius", cfg.eval.oracle_radius}};
  c["sweep"] = {{"repetition_factor", cfg.sweep.repetition_factor},
                {"alpha", cfg.sweep.alpha},
                {"metric", cfg.sweep.metric},
                {"variant", cfg.sweep.variant}};
  c["seeds"] = cfg.seeds;
  // out_dir and threads identify where and how fast, not what was computed;
  // the provenance hash covers only result-determining fields.
  cfg.hash = hash_hex(fnv1a64(c.dump()));
  c["out_dir"] = cfg.out_dir;
  c["threads"] = cfg.threads;
  cfg.canonical = std::move(c);
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config parse error: ") + ex.what());
  }
  return parse_config(doc);
}

}  // namespace crtr
