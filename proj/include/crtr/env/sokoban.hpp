#pragma once

#include <sstream>

#include "crtr/env/env.hpp"

namespace crtr {

/// H x W Sokoban board. One flag byte per cell: wall 1, box 2, target 4,
/// player 8. Actions 0-3 move the player up/down/left/right, pushing a box
/// when one is in the way and the cell behind it is free. Pushes are
/// irreversible, so boards are generated by reverse play: boxes start on
/// targets and the player executes random pulls; the recorded sequence
/// reversed is a successful trajectory.
class Sokoban final : public Environment {
 public:
  static constexpr Token kWall = 1;
  static constexpr Token kBox = 2;
  static constexpr Token kTarget = 4;
  static constexpr Token kPlayer = 8;

  explicit Sokoban(int height = 12, int width = 12, int boxes = 4,
                   double wall_fraction = 0.2)
      : h_(height), w_(width), boxes_(boxes), wall_fraction_(wall_fraction) {
    if (h_ < 3 || w_ < 3) throw ConfigError("sokoban: board must be at least 3x3");
    if (boxes_ < 1) throw ConfigError("sokoban: need at least one box");
    if (wall_fraction_ < 0.0 || wall_fraction_ > 0.8)
      throw ConfigError("sokoban: wall_fraction out of range");
  }

  EnvId id() const override { return EnvId::Sokoban; }
  int action_count() const override { return 4; }
  int state_tokens() const override { return h_ * w_; }
  int encoding_dim() const override { return 4 * h_ * w_; }
  int height() const { return h_; }
  int width() const { return w_; }

  bool is_legal(const State& s, Action a) const override {
    if (a < 0 || a >= 4) return false;
    const int p = player_cell(s);
    const int q = step(p, a);
    if (q < 0 || (s[q] & kWall)) return false;
    if (s[q] & kBox) {
      const int qq = step(q, a);
      if (qq < 0 || (s[qq] & (kWall | kBox))) return false;
    }
    return true;
  }

  State apply(const State& s, Action a) const override {
    if (!is_legal(s, a)) throw IllegalActionError("sokoban: blocked move");
    const int p = player_cell(s);
    const int q = step(p, a);
    State out = s;
    if (out[q] & kBox) {
      const int qq = step(q, a);
      out[q] = static_cast<Token>(out[q] & ~kBox);
      out[qq] = static_cast<Token>(out[qq] | kBox);
    }
    out[p] = static_cast<Token>(out[p] & ~kPlayer);
    out[q] = static_cast<Token>(out[q] | kPlayer);
    return out;
  }

  /// Goal equivalence depends only on box placement, not the player.
  bool is_goal(const State& s, const State&) const override { return is_solved(s); }

  bool is_solved(const State& s) const override {
    for (Token t : s)
      if ((t & kBox) && !(t & kTarget)) return false;
    return true;
  }

  void encode_into(const State& s, float* out) const override {
    const int cells = h_ * w_;
    for (int i = 0; i < cells; ++i) {
      if (s[i] & kWall) out[i] = 1.0f;
      if (s[i] & kBox) out[cells + i] = 1.0f;
      if (s[i] & kTarget) out[2 * cells + i] = 1.0f;
      if (s[i] & kPlayer) out[3 * cells + i] = 1.0f;
    }
  }

  Instance generate_instance(Rng& rng, int difficulty) const override {
    std::vector<State> states;
    std::vector<Action> actions;
    reverse_play(rng, difficulty, states, actions);
    return {states.front(), states.back()};
  }

  void sample_trajectory(Rng& rng, int length, std::vector<State>& states,
                         std::vector<Action>& actions) const override {
    reverse_play(rng, length, states, actions);
  }

  std::string render(const State& s) const override {
    std::ostringstream os;
    for (int r = 0; r < h_; ++r) {
      for (int c = 0; c < w_; ++c) {
        const Token t = s[r * w_ + c];
        char ch = ' ';
        if (t & kWall)
          ch = '#';
        else if ((t & kBox) && (t & kTarget))
          ch = '*';
        else if (t & kBox)
          ch = '$';
        else if ((t & kPlayer) && (t & kTarget))
          ch = '+';
        else if (t & kPlayer)
          ch = '@';
        else if (t & kTarget)
          ch = '.';
        os << ch;
      }
      os << '\n';
    }
    return os.str();
  }

 private:
  int player_cell(const State& s) const {
    for (int i = 0; i < h_ * w_; ++i)
      if (s[i] & kPlayer) return i;
    throw std::invalid_argument("sokoban: no player on board");
  }

  // Cell after one step in direction a, or -1 off the board.
  int step(int cell, Action a) const {
    static constexpr int dr[4] = {-1, 1, 0, 0};
    static constexpr int dc[4] = {0, 0, -1, 1};
    const int r = cell / w_ + dr[a], c = cell % w_ + dc[a];
    if (r < 0 || r >= h_ || c < 0 || c >= w_) return -1;
    return r * w_ + c;
  }

  State random_solved_board(Rng& rng) const {
    while (true) {
      State s(static_cast<std::size_t>(h_) * w_, 0);
      for (int r = 0; r < h_; ++r)
        for (int c = 0; c < w_; ++c) {
          const bool border = r == 0 || c == 0 || r == h_ - 1 || c == w_ - 1;
          if (border || rng.bernoulli(wall_fraction_)) s[r * w_ + c] = kWall;
        }
      std::vector<int> floor;
      for (int i = 0; i < h_ * w_; ++i)
        if (!(s[i] & kWall)) floor.push_back(i);
      if (static_cast<int>(floor.size()) < boxes_ + 1) continue;
      for (int b = 0; b < boxes_; ++b) {
        const std::size_t k = b + rng.below(floor.size() - b);
        std::swap(floor[b], floor[k]);
        s[floor[b]] = static_cast<Token>(kTarget | kBox);
      }
      const std::size_t k = boxes_ + rng.below(floor.size() - boxes_);
      s[floor[k]] = static_cast<Token>(s[floor[k]] | kPlayer);
      if (!reverse_moves_exist(s)) continue;
      return s;
    }
  }

  bool reverse_moves_exist(const State& s) const {
    const int v = player_cell(s);
    for (Action a = 0; a < 4; ++a) {
      const int back = step(v, opposite(a));
      if (back >= 0 && !(s[back] & (kWall | kBox))) return true;
    }
    return false;
  }

  static Action opposite(Action a) { return a ^ 1; }

  // Reverse play: starting from a solved board, repeatedly pick a forward
  // action d whose preimage exists (the player's previous cell is free) and
  // step backwards, optionally pulling a box that sits ahead of the player.
  // Reversing the recorded sequence yields a trajectory that replays to the
  // solved state under apply().
  void reverse_play(Rng& rng, int length, std::vector<State>& states,
                    std::vector<Action>& actions) const {
    State cur = random_solved_board(rng);
    std::vector<State> rev_states{cur};
    std::vector<Action> rev_actions;
    for (int i = 0; i < length; ++i) {
      struct Op {
        Action d;
        bool pull;
      };
      Op ops[8];
      int n = 0;
      const int v = player_cell(cur);
      for (Action d = 0; d < 4; ++d) {
        const int back = step(v, opposite(d));
        if (back < 0 || (cur[back] & (kWall | kBox))) continue;
        ops[n++] = {d, false};
        const int ahead = step(v, d);
        if (ahead >= 0 && (cur[ahead] & kBox)) ops[n++] = {d, true};
      }
      if (n == 0) break;
      const Op op = ops[rng.below(static_cast<std::uint64_t>(n))];
      const int back = step(v, opposite(op.d));
      State prev = cur;
      prev[v] = static_cast<Token>(prev[v] & ~kPlayer);
      prev[back] = static_cast<Token>(prev[back] | kPlayer);
      if (op.pull) {
        const int ahead = step(v, op.d);
        prev[ahead] = static_cast<Token>(prev[ahead] & ~kBox);
        prev[v] = static_cast<Token>(prev[v] | kBox);
      }
      rev_states.push_back(prev);
      rev_actions.push_back(op.d);
      cur = std::move(prev);
    }
    states.assign(rev_states.rbegin(), rev_states.rend());
    actions.assign(rev_actions.rbegin(), rev_actions.rend());
  }

  int h_, w_, boxes_;
  double wall_fraction_;
};

}  // namespace crtr
