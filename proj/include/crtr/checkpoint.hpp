#pragma once

#include <optional>
#include <string>

#include "crtr/contrastive.hpp"
#include "crtr/encoder.hpp"
#include "crtr/env/env.hpp"
#include "crtr/io.hpp"

namespace crtr {

/// Checkpoint file: magic "CRTR\x01", JSON header, then the flat parameter
/// tensor in ParamLayout order as little-endian 32-bit floats, followed by
/// the Adam first- and second-moment tensors when the optimizer is included.
inline constexpr char kCheckpointMagic[5] = {'C', 'R', 'T', 'R', '\x01'};

struct Checkpoint {
  std::string model_kind = "contrastive";  // or "supervised"
  std::string env;
  json board;
  EncoderParams params;
  SimilarityMetric metric = SimilarityMetric::Dot;
  LossVariant variant = LossVariant::Backward;
  double temperature = 0.0;
  long step = 0;
  int n_bins = 0;  // supervised only
  std::string config_hash;
  std::optional<AdamState> adam;
};

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const EncoderArch& a = ck.params.arch;
  json header{{"format", 1},
              {"model", ck.model_kind},
              {"env", ck.env},
              {"board", ck.board},
              {"arch",
               {{"input_dim", a.input_dim},
                {"hidden_dim", a.hidden_dim},
                {"depth", a.depth},
                {"repr_dim", a.repr_dim}}},
              {"metric", to_string(ck.metric)},
              {"variant", to_string(ck.variant)},
              {"temperature", ck.temperature},
              {"step", ck.step},
              {"n_bins", ck.n_bins},
              {"config_hash", ck.config_hash},
              {"has_optimizer", ck.adam.has_value()},
              {"adam_step", ck.adam ? ck.adam->step : 0}};
  auto os = bio::open_out(path);
  bio::write_header(os, kCheckpointMagic, sizeof(kCheckpointMagic), header);
  bio::write_f32_array(os, ck.params.data.data(), ck.params.data.size());
  if (ck.adam) {
    bio::write_f32_array(os, ck.adam->m.data(), ck.adam->m.size());
    bio::write_f32_array(os, ck.adam->v.data(), ck.adam->v.size());
  }
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  auto is = bio::open_in(path);
  const json h = bio::read_header(is, kCheckpointMagic, sizeof(kCheckpointMagic), "checkpoint");
  Checkpoint ck;
  ck.model_kind = h.at("model").get<std::string>();
  ck.env = h.at("env").get<std::string>();
  ck.board = h.at("board");
  EncoderArch arch{h.at("arch").at("input_dim").get<int>(),
                   h.at("arch").at("hidden_dim").get<int>(),
                   h.at("arch").at("depth").get<int>(),
                   h.at("arch").at("repr_dim").get<int>()};
  ck.params = EncoderParams(arch);
  ck.metric = metric_from_string(h.at("metric").get<std::string>());
  ck.variant = variant_from_string(h.at("variant").get<std::string>());
  ck.temperature = h.at("temperature").get<double>();
  ck.step = h.at("step").get<long>();
  ck.n_bins = h.at("n_bins").get<int>();
  ck.config_hash = h.at("config_hash").get<std::string>();
  bio::read_f32_array(is, ck.params.data.data(), ck.params.data.size());
  if (h.at("has_optimizer").get<bool>()) {
    AdamState adam(ck.params.data.size());
    adam.step = h.at("adam_step").get<std::int64_t>();
    bio::read_f32_array(is, adam.m.data(), adam.m.size());
    bio::read_f32_array(is, adam.v.data(), adam.v.size());
    ck.adam = std::move(adam);
  }
  return ck;
}

}  // namespace crtr
