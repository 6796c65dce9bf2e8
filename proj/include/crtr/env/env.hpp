#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "crtr/errors.hpp"
#include "crtr/rng.hpp"

namespace crtr {

/// One token per board cell / sticker / tile. Values are environment-specific
/// and always fit a byte (the trajectory file stores them verbatim).
using Token = std::uint8_t;
using State = std::vector<Token>;
using Action = int;

enum class EnvId { RubiksCube, FifteenPuzzle, LightsOut, DigitJumper, Sokoban };

inline const char* to_string(EnvId id) {
  switch (id) {
    case EnvId::RubiksCube: return "rubiks_cube";
    case EnvId::FifteenPuzzle: return "fifteen_puzzle";
    case EnvId::LightsOut: return "lights_out";
    case EnvId::DigitJumper: return "digit_jumper";
    case EnvId::Sokoban: return "sokoban";
  }
  return "?";
}

inline EnvId env_from_string(const std::string& s) {
  if (s == "rubiks_cube") return EnvId::RubiksCube;
  if (s == "fifteen_puzzle") return EnvId::FifteenPuzzle;
  if (s == "lights_out") return EnvId::LightsOut;
  if (s == "digit_jumper") return EnvId::DigitJumper;
  if (s == "sokoban") return EnvId::Sokoban;
  throw ConfigError("unknown environment: " + s);
}

/// Grid-environment knobs. Zero / negative values select the per-environment
/// default (Lights Out 7x7, Digit Jumper 20x20, Sokoban 12x12 with 4 boxes
/// and 20% interior walls).
struct BoardConfig {
  int height = 0;
  int width = 0;
  int boxes = 0;
  double wall_fraction = -1.0;
};

struct Instance {
  State start;
  State goal;
};

/// Deterministic goal-conditioned dynamics. All operations are pure; states
/// are immutable values, safe to share across threads.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvId id() const = 0;
  virtual int action_count() const = 0;
  virtual int state_tokens() const = 0;
  virtual int encoding_dim() const = 0;

  virtual bool is_legal(const State& s, Action a) const = 0;

  /// Successor state; throws IllegalActionError if `a` is not legal in `s`.
  virtual State apply(const State& s, Action a) const = 0;

  /// All legal successors in ascending action order, each consistent with
  /// apply().
  std::vector<std::pair<Action, State>> neighbors(const State& s) const {
    std::vector<std::pair<Action, State>> out;
    const int n = action_count();
    out.reserve(n);
    for (Action a = 0; a < n; ++a)
      if (is_legal(s, a)) out.emplace_back(a, apply(s, a));
    return out;
  }

  /// Goal equivalence against a concrete goal state. Exact token equality for
  /// the scramble puzzles; Sokoban ignores the player, Digit Jumper compares
  /// only the player cell.
  virtual bool is_goal(const State& s, const State& goal) const = 0;

  /// The environment's canonical goal condition (cube solved, tiles ordered,
  /// lights off, player at the bottom-right cell, boxes on targets).
  virtual bool is_solved(const State& s) const = 0;

  /// Fixed-length float encoding used as the network input.
  virtual void encode_into(const State& s, float* out) const = 0;

  std::vector<float> encode(const State& s) const {
    std::vector<float> out(encoding_dim(), 0.0f);
    encode_into(s, out.data());
    return out;
  }

  /// Solvable-by-construction instance. For the scramble puzzles, `difficulty`
  /// is the number of random moves applied backwards from the solved state;
  /// for Sokoban it is the reverse-play pull count; Digit Jumper boards come
  /// out of the random-path generator and are solvable at any difficulty.
  virtual Instance generate_instance(Rng& rng, int difficulty) const = 0;

  /// One training trajectory ending in a solved state. `length` is the raw
  /// walk length for the scramble puzzles and the pull count for Sokoban;
  /// Digit Jumper paths end when the sampled path reaches the goal corner.
  virtual void sample_trajectory(Rng& rng, int length, std::vector<State>& states,
                                 std::vector<Action>& actions) const = 0;

  /// Canonical textual rendering for logs and golden tests.
  virtual std::string render(const State& s) const = 0;
};

namespace detail {

/// Random walk of `length` legal moves outward from `solved`, reversed so the
/// trajectory ends at the goal. `inverse` maps each move to its undo action.
template <typename Legal, typename Apply, typename Inverse>
void reversed_scramble(Rng& rng, const State& solved, int length, int action_count,
                       Legal&& legal, Apply&& apply_fn, Inverse&& inverse,
                       std::vector<State>& states, std::vector<Action>& actions) {
  states.clear();
  actions.clear();
  std::vector<State> walk{solved};
  std::vector<Action> walk_actions;
  State cur = solved;
  std::vector<Action> legal_now;
  for (int i = 0; i < length; ++i) {
    legal_now.clear();
    for (Action a = 0; a < action_count; ++a)
      if (legal(cur, a)) legal_now.push_back(a);
    const Action a = legal_now[rng.below(legal_now.size())];
    cur = apply_fn(cur, a);
    walk.push_back(cur);
    walk_actions.push_back(a);
  }
  states.assign(walk.rbegin(), walk.rend());
  for (auto it = walk_actions.rbegin(); it != walk_actions.rend(); ++it)
    actions.push_back(inverse(*it));
}

}  // namespace detail

}  // namespace crtr
