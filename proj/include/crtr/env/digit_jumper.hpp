#pragma once

#include <sstream>

#include "crtr/env/env.hpp"

namespace crtr {

/// H x W grid of digits 1-6 plus a player cell. A move jumps the player
/// `digit(current cell)` steps in one of four directions; moves that leave
/// the board are illegal. The digit grid is fixed within an instance, and the
/// goal is to stand on the bottom-right cell. Jumps are generally not
/// undoable: the return jump length is set by the landing cell's digit.
///
/// Tokens: H*W digits followed by [player_row, player_col].
class DigitJumper final : public Environment {
 public:
  explicit DigitJumper(int height = 20, int width = 20) : h_(height), w_(width) {
    if (h_ < 2 || w_ < 2) throw ConfigError("digit_jumper: board must be at least 2x2");
    if (h_ > 255 || w_ > 255) throw ConfigError("digit_jumper: board too large");
  }

  EnvId id() const override { return EnvId::DigitJumper; }
  int action_count() const override { return 4; }
  int state_tokens() const override { return h_ * w_ + 2; }
  int encoding_dim() const override { return h_ * w_ * 6 + h_ * w_; }
  int height() const { return h_; }
  int width() const { return w_; }

  bool is_legal(const State& s, Action a) const override {
    if (a < 0 || a >= 4) return false;
    int r, c;
    target_cell(s, a, r, c);
    return r >= 0 && r < h_ && c >= 0 && c < w_;
  }

  State apply(const State& s, Action a) const override {
    if (!is_legal(s, a)) throw IllegalActionError("digit_jumper: jump leaves the board");
    int r, c;
    target_cell(s, a, r, c);
    State out = s;
    out[h_ * w_] = static_cast<Token>(r);
    out[h_ * w_ + 1] = static_cast<Token>(c);
    return out;
  }

  /// Player-cell equivalence: the goal is a position on the shared board.
  bool is_goal(const State& s, const State& goal) const override {
    return s[h_ * w_] == goal[h_ * w_] && s[h_ * w_ + 1] == goal[h_ * w_ + 1];
  }

  bool is_solved(const State& s) const override {
    return s[h_ * w_] == h_ - 1 && s[h_ * w_ + 1] == w_ - 1;
  }

  void encode_into(const State& s, float* out) const override {
    const int cells = h_ * w_;
    for (int i = 0; i < cells; ++i) out[i * 6 + (s[i] - 1)] = 1.0f;
    out[cells * 6 + s[cells] * w_ + s[cells + 1]] = 1.0f;
  }

  Instance generate_instance(Rng& rng, int difficulty) const override {
    if (difficulty < 0) throw std::invalid_argument("digit_jumper: bad difficulty");
    std::vector<State> states;
    std::vector<Action> actions;
    sample_trajectory(rng, 0, states, actions);
    State start = states.front();
    start[h_ * w_] = 0;
    start[h_ * w_ + 1] = 0;
    return {start, states.back()};
  }

  /// Builds the board and the trajectory together: a random path from the
  /// top-left to the bottom-right corner fixes the digits it uses, every
  /// remaining cell is filled uniformly from 1-6. The walk is biased toward
  /// the goal corner so paths stay reasonably short.
  void sample_trajectory(Rng& rng, int /*length*/, std::vector<State>& states,
                         std::vector<Action>& actions) const override {
    const int cells = h_ * w_;
    const int cap = 8 * cells;
    while (true) {
      std::vector<Token> digits(cells, 0);  // 0 = unassigned
      std::vector<Action> path_actions;
      std::vector<int> path_cells{0};
      int r = 0, c = 0;
      bool ok = false;
      for (int step = 0; step < cap; ++step) {
        if (r == h_ - 1 && c == w_ - 1) {
          ok = true;
          break;
        }
        const int cell = r * w_ + c;
        Action chosen = -1;
        int digit = digits[cell];
        if (digit != 0) {
          Action legal[4];
          int n = 0;
          for (Action a = 0; a < 4; ++a) {
            const int rr = r + kDr[a] * digit, cc = c + kDc[a] * digit;
            if (rr >= 0 && rr < h_ && cc >= 0 && cc < w_) legal[n++] = a;
          }
          if (n == 0) break;  // trapped by an already-fixed digit
          chosen = pick_direction(rng, legal, n, r, c, digit);
        } else {
          // Choose (direction, digit) together; snap to the goal when a jump
          // can land exactly on it.
          struct Cand {
            Action a;
            int n;
          };
          Cand cands[24], goal_cands[24];
          int n = 0, ng = 0;
          for (Action a = 0; a < 4; ++a)
            for (int d = 1; d <= 6; ++d) {
              const int rr = r + kDr[a] * d, cc = c + kDc[a] * d;
              if (rr < 0 || rr >= h_ || cc < 0 || cc >= w_) continue;
              cands[n++] = {a, d};
              if (rr == h_ - 1 && cc == w_ - 1) goal_cands[ng++] = {a, d};
            }
          if (n == 0) break;
          Cand pick{};
          if (ng > 0 && rng.bernoulli(0.5))
            pick = goal_cands[rng.below(static_cast<std::uint64_t>(ng))];
          else
            pick = cands[rng.below(static_cast<std::uint64_t>(n))];
          digits[cell] = static_cast<Token>(pick.n);
          digit = pick.n;
          chosen = pick.a;
        }
        r += kDr[chosen] * digit;
        c += kDc[chosen] * digit;
        path_actions.push_back(chosen);
        path_cells.push_back(r * w_ + c);
      }
      if (!ok) continue;  // resample the board
      for (int i = 0; i < cells; ++i)
        if (digits[i] == 0) digits[i] = static_cast<Token>(1 + rng.below(6));
      states.clear();
      actions = path_actions;
      for (int cell : path_cells) {
        State s(digits.begin(), digits.end());
        s.push_back(static_cast<Token>(cell / w_));
        s.push_back(static_cast<Token>(cell % w_));
        states.push_back(std::move(s));
      }
      return;
    }
  }

  std::string render(const State& s) const override {
    std::ostringstream os;
    for (int r = 0; r < h_; ++r) {
      for (int c = 0; c < w_; ++c) os << static_cast<int>(s[r * w_ + c]);
      os << '\n';
    }
    os << "player: " << static_cast<int>(s[h_ * w_]) << ' '
       << static_cast<int>(s[h_ * w_ + 1]) << '\n';
    return os.str();
  }

 private:
  static constexpr int kDr[4] = {-1, 1, 0, 0};
  static constexpr int kDc[4] = {0, 0, -1, 1};

  void target_cell(const State& s, Action a, int& r, int& c) const {
    const int pr = s[h_ * w_], pc = s[h_ * w_ + 1];
    const int n = s[pr * w_ + pc];
    r = pr + kDr[a] * n;
    c = pc + kDc[a] * n;
  }

  Action pick_direction(Rng& rng, const Action* legal, int n, int r, int c,
                        int digit) const {
    // Prefer a jump that lands exactly on the goal; otherwise mildly favor
    // down/right so the walk makes progress.
    for (int i = 0; i < n; ++i) {
      const int rr = r + kDr[legal[i]] * digit, cc = c + kDc[legal[i]] * digit;
      if (rr == h_ - 1 && cc == w_ - 1 && rng.bernoulli(0.5)) return legal[i];
    }
    double weights[4];
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      weights[i] = (legal[i] == 1 || legal[i] == 3) ? 0.3 : 0.2;
      total += weights[i];
    }
    double u = rng.uniform() * total;
    for (int i = 0; i < n; ++i) {
      u -= weights[i];
      if (u < 0) return legal[i];
    }
    return legal[n - 1];
  }

  int h_, w_;
};

}  // namespace crtr
