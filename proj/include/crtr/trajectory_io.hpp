#pragma once

#include <string>

#include "crtr/dataset.hpp"
#include "crtr/io.hpp"

namespace crtr {

/// Trajectory file: magic "CRTJ\x01", JSON header, then per trajectory a u32
/// state count, the token states (one byte per token) and the actions (one
/// byte each). Little-endian throughout.
inline constexpr char kTrajectoryMagic[5] = {'C', 'R', 'T', 'J', '\x01'};

inline void save_trajectories(const std::string& path, const TrajectoryDataset& ds,
                              int state_tokens, const json& board,
                              const std::string& config_hash) {
  json header{{"format", 1},
              {"env", to_string(ds.env)},
              {"board", board},
              {"trajectories", ds.trajectories.size()},
              {"state_tokens", state_tokens},
              {"max_len", ds.max_len()},
              {"config_hash", config_hash}};
  auto os = bio::open_out(path);
  bio::write_header(os, kTrajectoryMagic, sizeof(kTrajectoryMagic), header);
  for (const auto& traj : ds.trajectories) {
    bio::write_u32(os, static_cast<std::uint32_t>(traj.states.size()));
    for (const auto& s : traj.states)
      os.write(reinterpret_cast<const char*>(s.data()),
               static_cast<std::streamsize>(s.size()));
    for (Action a : traj.actions) {
      const unsigned char b = static_cast<unsigned char>(a);
      os.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
  if (!os) throw std::runtime_error("failed writing trajectory file: " + path);
}

inline TrajectoryDataset load_trajectories(const std::string& path, json* header_out = nullptr) {
  auto is = bio::open_in(path);
  const json header =
      bio::read_header(is, kTrajectoryMagic, sizeof(kTrajectoryMagic), "trajectory file");
  if (header_out) *header_out = header;
  TrajectoryDataset ds;
  ds.env = env_from_string(header.at("env").get<std::string>());
  const auto count = header.at("trajectories").get<std::size_t>();
  const auto tokens = header.at("state_tokens").get<std::size_t>();
  ds.trajectories.resize(count);
  for (auto& traj : ds.trajectories) {
    const std::uint32_t n = bio::read_u32(is);
    traj.states.assign(n, State(tokens));
    for (auto& s : traj.states) {
      is.read(reinterpret_cast<char*>(s.data()), static_cast<std::streamsize>(tokens));
      if (!is) throw std::runtime_error("truncated trajectory file: " + path);
    }
    traj.actions.resize(n > 0 ? n - 1 : 0);
    for (auto& a : traj.actions) {
      unsigned char b = 0;
      is.read(reinterpret_cast<char*>(&b), 1);
      a = static_cast<Action>(b);
    }
    if (!is) throw std::runtime_error("truncated trajectory file: " + path);
  }
  return ds;
}

}  // namespace crtr
