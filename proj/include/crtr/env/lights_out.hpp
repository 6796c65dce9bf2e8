#pragma once

#include <sstream>

#include "crtr/env/env.hpp"

namespace crtr {

/// H x W binary grid; pressing a cell flips it and its orthogonal neighbors.
/// Every cell press is always legal and self-inverse. Goal: all lights off.
class LightsOut final : public Environment {
 public:
  explicit LightsOut(int height = 7, int width = 7) : h_(height), w_(width) {
    if (h_ < 1 || w_ < 1) throw ConfigError("lights_out: board must be at least 1x1");
  }

  EnvId id() const override { return EnvId::LightsOut; }
  int action_count() const override { return h_ * w_; }
  int state_tokens() const override { return h_ * w_; }
  int encoding_dim() const override { return h_ * w_; }
  int height() const { return h_; }
  int width() const { return w_; }

  State solved_state() const { return State(static_cast<std::size_t>(h_) * w_, 0); }

  bool is_legal(const State&, Action a) const override { return a >= 0 && a < h_ * w_; }

  State apply(const State& s, Action a) const override {
    if (!is_legal(s, a)) throw IllegalActionError("lights_out: bad cell index");
    State out = s;
    const int r = a / w_, c = a % w_;
    auto flip = [&](int rr, int cc) {
      if (rr >= 0 && rr < h_ && cc >= 0 && cc < w_) out[rr * w_ + cc] ^= 1;
    };
    flip(r, c);
    flip(r - 1, c);
    flip(r + 1, c);
    flip(r, c - 1);
    flip(r, c + 1);
    return out;
  }

  static Action inverse_action(Action a) { return a; }

  bool is_goal(const State& s, const State& goal) const override { return s == goal; }

  bool is_solved(const State& s) const override {
    for (Token t : s)
      if (t) return false;
    return true;
  }

  void encode_into(const State& s, float* out) const override {
    for (int i = 0; i < h_ * w_; ++i) out[i] = static_cast<float>(s[i]);
  }

  Instance generate_instance(Rng& rng, int difficulty) const override {
    State cur = solved_state();
    for (int i = 0; i < difficulty; ++i)
      cur = apply(cur, static_cast<Action>(rng.below(static_cast<std::uint64_t>(h_) * w_)));
    return {cur, solved_state()};
  }

  void sample_trajectory(Rng& rng, int length, std::vector<State>& states,
                         std::vector<Action>& actions) const override {
    detail::reversed_scramble(
        rng, solved_state(), length, h_ * w_,
        [](const State&, Action) { return true; },
        [this](const State& s, Action a) { return apply(s, a); },
        [](Action a) { return a; }, states, actions);
  }

  std::string render(const State& s) const override {
    std::ostringstream os;
    for (int r = 0; r < h_; ++r) {
      for (int c = 0; c < w_; ++c) os << static_cast<int>(s[r * w_ + c]);
      os << '\n';
    }
    return os.str();
  }

 private:
  int h_, w_;
};

}  // namespace crtr
