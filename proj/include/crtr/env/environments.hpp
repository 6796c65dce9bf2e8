#pragma once

#include <memory>

#include "crtr/env/digit_jumper.hpp"
#include "crtr/env/env.hpp"
#include "crtr/env/fifteen_puzzle.hpp"
#include "crtr/env/lights_out.hpp"
#include "crtr/env/rubiks_cube.hpp"
#include "crtr/env/sokoban.hpp"

namespace crtr {

inline std::unique_ptr<Environment> make_environment(EnvId id, const BoardConfig& board) {
  const auto dim = [&](int def) { return board.height > 0 ? board.height : def; };
  const auto wdim = [&](int def) { return board.width > 0 ? board.width : def; };
  switch (id) {
    case EnvId::RubiksCube:
      return std::make_unique<RubiksCube>();
    case EnvId::FifteenPuzzle:
      return std::make_unique<FifteenPuzzle>();
    case EnvId::LightsOut:
      return std::make_unique<LightsOut>(dim(7), wdim(7));
    case EnvId::DigitJumper:
      return std::make_unique<DigitJumper>(dim(20), wdim(20));
    case EnvId::Sokoban:
      return std::make_unique<Sokoban>(dim(12), wdim(12), board.boxes > 0 ? board.boxes : 4,
                                       board.wall_fraction >= 0.0 ? board.wall_fraction : 0.2);
  }
  throw ConfigError("make_environment: unknown environment id");
}

}  // namespace crtr
