#pragma once

#include <array>
#include <sstream>

#include "crtr/env/env.hpp"

namespace crtr {

/// 3x3x3 cube over 54 sticker tokens (values 0-5), quarter-turn metric:
/// 12 actions, face*2 + {0: clockwise, 1: counterclockwise}. Sticker layout is
/// face-major (face*9 + row*3 + col) with faces U=0 L=1 F=2 R=3 B=4 D=5.
class RubiksCube final : public Environment {
 public:
  static constexpr int kStickers = 54;
  static constexpr int kActions = 12;

  RubiksCube() { build_tables(); }

  EnvId id() const override { return EnvId::RubiksCube; }
  int action_count() const override { return kActions; }
  int state_tokens() const override { return kStickers; }
  int encoding_dim() const override { return kStickers * 6; }

  static State solved_state() {
    State s(kStickers);
    for (int i = 0; i < kStickers; ++i) s[i] = static_cast<Token>(i / 9);
    return s;
  }

  bool is_legal(const State&, Action a) const override { return a >= 0 && a < kActions; }

  State apply(const State& s, Action a) const override {
    if (!is_legal(s, a)) throw IllegalActionError("rubiks_cube: bad action index");
    State out(kStickers);
    const auto& src = src_[a];
    for (int i = 0; i < kStickers; ++i) out[i] = s[src[i]];
    return out;
  }

  static Action inverse_action(Action a) { return a ^ 1; }

  bool is_goal(const State& s, const State& goal) const override { return s == goal; }

  bool is_solved(const State& s) const override { return s == solved_state(); }

  void encode_into(const State& s, float* out) const override {
    for (int i = 0; i < kStickers; ++i) out[i * 6 + s[i]] = 1.0f;
  }

  Instance generate_instance(Rng& rng, int difficulty) const override {
    State cur = solved_state();
    for (int i = 0; i < difficulty; ++i)
      cur = apply(cur, static_cast<Action>(rng.below(kActions)));
    return {cur, solved_state()};
  }

  void sample_trajectory(Rng& rng, int length, std::vector<State>& states,
                         std::vector<Action>& actions) const override {
    detail::reversed_scramble(
        rng, solved_state(), length, kActions,
        [](const State&, Action) { return true; },
        [this](const State& s, Action a) { return apply(s, a); },
        [](Action a) { return inverse_action(a); }, states, actions);
  }

  std::string render(const State& s) const override {
    static const char* names = "ULFRBD";
    std::ostringstream os;
    for (int f = 0; f < 6; ++f) {
      os << names[f] << ":\n";
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) os << static_cast<int>(s[f * 9 + r * 3 + c]);
        os << '\n';
      }
    }
    return os.str();
  }

 private:
  struct V3 {
    int x, y, z;
    friend V3 operator+(V3 a, V3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend V3 operator*(int k, V3 a) { return {k * a.x, k * a.y, k * a.z}; }
    friend bool operator==(V3 a, V3 b) { return a.x == b.x && a.y == b.y && a.z == b.z; }
  };
  static int dot(V3 a, V3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
  static V3 cross(V3 a, V3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
  }

  // Unfolded-net sticker frame per face: outward normal plus on-face
  // right/down directions (viewed from outside the cube).
  static V3 normal(int f) {
    constexpr std::array<V3, 6> n{{{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}, {1, 0, 0}, {0, 0, -1}, {0, -1, 0}}};
    return n[f];
  }
  static V3 right_dir(int f) {
    constexpr std::array<V3, 6> r{{{1, 0, 0}, {0, 0, 1}, {1, 0, 0}, {0, 0, -1}, {-1, 0, 0}, {1, 0, 0}}};
    return r[f];
  }
  static V3 down_dir(int f) {
    constexpr std::array<V3, 6> d{{{0, 0, 1}, {0, -1, 0}, {0, -1, 0}, {0, -1, 0}, {0, -1, 0}, {0, 0, -1}}};
    return d[f];
  }

  static int face_of(V3 n) {
    for (int f = 0; f < 6; ++f)
      if (normal(f) == n) return f;
    return -1;
  }

  static int index_of(V3 pos, V3 dir) {
    const int f = face_of(dir);
    const int r = 1 + dot(down_dir(f), pos);
    const int c = 1 + dot(right_dir(f), pos);
    return f * 9 + r * 3 + c;
  }

  void build_tables() {
    // Clockwise (outside view) quarter turn = -90 degrees right-handed about
    // the face normal: v' = n (n.v) - n x v.
    for (int f = 0; f < 6; ++f) {
      const V3 n = normal(f);
      auto rot = [&](V3 v) { return dot(n, v) * n + (-1) * cross(n, v); };
      std::array<int, kStickers> dst{};
      for (int i = 0; i < kStickers; ++i) {
        const int face = i / 9, r = (i % 9) / 3, c = i % 3;
        V3 pos = normal(face) + (c - 1) * right_dir(face) + (r - 1) * down_dir(face);
        V3 dir = normal(face);
        if (dot(pos, n) == 1) {
          pos = rot(pos);
          dir = rot(dir);
        }
        dst[i] = index_of(pos, dir);
      }
      for (int i = 0; i < kStickers; ++i) src_[f * 2][dst[i]] = i;
      // Counterclockwise = clockwise applied three times.
      std::array<int, kStickers> once = src_[f * 2];
      std::array<int, kStickers> acc = once;
      for (int rep = 0; rep < 2; ++rep) {
        std::array<int, kStickers> next{};
        for (int i = 0; i < kStickers; ++i) next[i] = once[acc[i]];
        acc = next;
      }
      src_[f * 2 + 1] = acc;
    }
  }

  std::array<std::array<int, kStickers>, kActions> src_{};
};

}  // namespace crtr
