#pragma once

#include <iomanip>
#include <sstream>

#include "crtr/env/env.hpp"

namespace crtr {

/// 4x4 sliding-tile puzzle. Tokens are a permutation of 0-15 over row-major
/// cells, 0 is the blank. Actions move the blank: 0 up, 1 down, 2 left,
/// 3 right.
class FifteenPuzzle final : public Environment {
 public:
  static constexpr int kSide = 4;
  static constexpr int kCells = kSide * kSide;

  EnvId id() const override { return EnvId::FifteenPuzzle; }
  int action_count() const override { return 4; }
  int state_tokens() const override { return kCells; }
  int encoding_dim() const override { return kCells * kCells; }

  static State solved_state() {
    State s(kCells);
    // Tiles 1..15 in order, blank in the bottom-right corner.
    for (int i = 0; i < kCells - 1; ++i) s[i] = static_cast<Token>(i + 1);
    s[kCells - 1] = 0;
    return s;
  }

  bool is_legal(const State& s, Action a) const override {
    if (a < 0 || a >= 4) return false;
    const int blank = blank_cell(s);
    const int r = blank / kSide, c = blank % kSide;
    switch (a) {
      case 0: return r > 0;
      case 1: return r < kSide - 1;
      case 2: return c > 0;
      default: return c < kSide - 1;
    }
  }

  State apply(const State& s, Action a) const override {
    if (!is_legal(s, a)) throw IllegalActionError("fifteen_puzzle: illegal blank move");
    const int blank = blank_cell(s);
    static constexpr int dr[4] = {-1, 1, 0, 0};
    static constexpr int dc[4] = {0, 0, -1, 1};
    const int target = (blank / kSide + dr[a]) * kSide + (blank % kSide + dc[a]);
    State out = s;
    std::swap(out[blank], out[target]);
    return out;
  }

  static Action inverse_action(Action a) { return a ^ 1; }

  bool is_goal(const State& s, const State& goal) const override { return s == goal; }
  bool is_solved(const State& s) const override { return s == solved_state(); }

  void encode_into(const State& s, float* out) const override {
    for (int i = 0; i < kCells; ++i) out[i * kCells + s[i]] = 1.0f;
  }

  Instance generate_instance(Rng& rng, int difficulty) const override {
    State cur = solved_state();
    for (int i = 0; i < difficulty; ++i) {
      Action legal[4];
      int n = 0;
      for (Action a = 0; a < 4; ++a)
        if (is_legal(cur, a)) legal[n++] = a;
      cur = apply(cur, legal[rng.below(n)]);
    }
    return {cur, solved_state()};
  }

  void sample_trajectory(Rng& rng, int length, std::vector<State>& states,
                         std::vector<Action>& actions) const override {
    detail::reversed_scramble(
        rng, solved_state(), length, 4,
        [this](const State& s, Action a) { return is_legal(s, a); },
        [this](const State& s, Action a) { return apply(s, a); },
        [](Action a) { return inverse_action(a); }, states, actions);
  }

  std::string render(const State& s) const override {
    std::ostringstream os;
    for (int r = 0; r < kSide; ++r) {
      for (int c = 0; c < kSide; ++c)
        os << std::setw(2) << static_cast<int>(s[r * kSide + c]) << (c + 1 < kSide ? " " : "");
      os << '\n';
    }
    return os.str();
  }

 private:
  static int blank_cell(const State& s) {
    for (int i = 0; i < kCells; ++i)
      if (s[i] == 0) return i;
    throw std::invalid_argument("fifteen_puzzle: no blank token");
  }
};

}  // namespace crtr
