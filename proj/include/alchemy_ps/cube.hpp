#pragma once

// Partial models over the three binary stone features.
//
// Vertex layout: index = 4*color + 2*size + shape, so axis 0 is color,
// axis 1 is size and axis 2 is shape. Edge layout: index = 4*axis +
// 2*off_hi + off_lo where (off_hi, off_lo) are the coordinates of the edge on
// the two remaining axes in ascending axis order.

#include "alchemy_ps/random.hpp"

#include <array>
#include <bit>
#include <bitset>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace alchemy_ps {

inline constexpr int kNumAxes = 3;
inline constexpr int kNumVertices = 8;
inline constexpr int kNumEdges = 12;
inline constexpr int kNumPartialActions = 8;

struct VertexId {
  std::uint8_t index = 0;

  constexpr VertexId() = default;
  constexpr explicit VertexId(int i) : index(static_cast<std::uint8_t>(i)) {}

  /// Coordinate (0 or 1) of this vertex on `axis`.
  constexpr int coord(int axis) const { return (index >> (2 - axis)) & 1; }
  constexpr int color() const { return coord(0); }
  constexpr int size() const { return coord(1); }
  constexpr int shape() const { return coord(2); }

  constexpr VertexId flipped(int axis) const {
    return VertexId(index ^ (1 << (2 - axis)));
  }

  friend constexpr auto operator<=>(VertexId, VertexId) = default;
};

constexpr VertexId vertex_index(int color, int size, int shape) {
  return VertexId(4 * color + 2 * size + shape);
}

constexpr int hamming_distance(VertexId a, VertexId b) {
  return std::popcount(static_cast<unsigned>(a.index ^ b.index));
}

struct EdgeId {
  std::uint8_t index = 0;

  constexpr EdgeId() = default;
  constexpr explicit EdgeId(int i) : index(static_cast<std::uint8_t>(i)) {}

  constexpr int axis() const { return index / 4; }
  constexpr int off_hi() const { return (index >> 1) & 1; }
  constexpr int off_lo() const { return index & 1; }

  friend constexpr auto operator<=>(EdgeId, EdgeId) = default;
};

/// The two vertices joined by `e`, the one with axis coordinate 0 first.
constexpr std::pair<VertexId, VertexId> edge_endpoints(EdgeId e) {
  const int axis = e.axis();
  const int first = axis == 0 ? 1 : 0;
  const int second = axis == 2 ? 1 : 2;
  const int v = (e.off_hi() << (2 - first)) | (e.off_lo() << (2 - second));
  return {VertexId(v), VertexId(v | (1 << (2 - axis)))};
}

/// Edge crossed when moving from `v` along `axis` (either direction).
constexpr EdgeId edge_along(VertexId v, int axis) {
  int off[2];
  int k = 0;
  for (int d = 0; d < kNumAxes; ++d)
    if (d != axis) off[k++] = v.coord(d);
  return EdgeId(4 * axis + 2 * off[0] + off[1]);
}

enum class Direction : std::int8_t { Down = -1, Up = 1 };

/// Coordinate value a traversal in `dir` moves towards.
constexpr int target_coord(Direction dir) { return dir == Direction::Up ? 1 : 0; }

/// Action in the partial model. Codes 0..7: NoOp, Deposit, then
/// Traverse(axis, dir) at 2 + 2*axis + (dir == Up). Code + 1 is the
/// environment action number.
class PartialAction {
 public:
  constexpr PartialAction() = default;

  static constexpr PartialAction noop() { return PartialAction(0); }
  static constexpr PartialAction deposit() { return PartialAction(1); }
  static constexpr PartialAction traverse(int axis, Direction dir) {
    return PartialAction(2 + 2 * axis + (dir == Direction::Up ? 1 : 0));
  }
  static constexpr PartialAction from_code(int code) {
    if (code < 0 || code >= kNumPartialActions)
      throw std::out_of_range("partial action code out of range");
    return PartialAction(code);
  }

  constexpr int code() const { return code_; }
  constexpr bool is_noop() const { return code_ == 0; }
  constexpr bool is_deposit() const { return code_ == 1; }
  constexpr bool is_traverse() const { return code_ >= 2; }
  constexpr int axis() const { return (code_ - 2) / 2; }
  constexpr Direction direction() const {
    return ((code_ - 2) & 1) ? Direction::Up : Direction::Down;
  }

  friend constexpr auto operator<=>(PartialAction, PartialAction) = default;

 private:
  constexpr explicit PartialAction(int code) : code_(static_cast<std::uint8_t>(code)) {}
  std::uint8_t code_ = 0;
};

struct EdgeProbs {
  std::array<double, kNumEdges> p{};

  static EdgeProbs filled(double value) {
    EdgeProbs e;
    e.p.fill(value);
    return e;
  }
  double operator[](int i) const { return p[i]; }
  double& operator[](int i) { return p[i]; }
  bool operator==(const EdgeProbs&) const = default;
};

/// Reward probability per (vertex, partial action).
struct RewardProbs {
  std::array<std::array<double, kNumPartialActions>, kNumVertices> p{};

  /// The fixed reward function: only depositing the goal stone pays.
  static RewardProbs single_goal(VertexId goal) {
    RewardProbs r;
    r.p[goal.index][PartialAction::deposit().code()] = 1.0;
    return r;
  }
  double at(VertexId v, PartialAction x) const { return p[v.index][x.code()]; }
  double& at(VertexId v, PartialAction x) { return p[v.index][x.code()]; }
  bool operator==(const RewardProbs&) const = default;
};

using EdgeSet = std::bitset<kNumEdges>;

/// A deterministic partial model.
struct Cube {
  EdgeSet edges;
  RewardProbs reward;

  Cube() = default;
  Cube(EdgeSet e, VertexId goal) : edges(e), reward(RewardProbs::single_goal(goal)) {}
  Cube(EdgeSet e, RewardProbs r) : edges(e), reward(r) {}

  /// The unique vertex whose deposit is rewarded, if there is exactly one.
  std::optional<VertexId> goal_vertex() const {
    std::optional<VertexId> goal;
    for (int v = 0; v < kNumVertices; ++v) {
      if (reward.p[v][PartialAction::deposit().code()] > 0.0) {
        if (goal) return std::nullopt;
        goal = VertexId(v);
      }
    }
    return goal;
  }

  bool has_edge(EdgeId e) const { return edges.test(e.index); }

  EdgeProbs edge_probs() const {
    EdgeProbs out;
    for (int i = 0; i < kNumEdges; ++i) out.p[i] = edges.test(i) ? 1.0 : 0.0;
    return out;
  }

  bool operator==(const Cube&) const = default;
};

/// Moves `v` along `axis` towards `dir`. Boundary moves and missing edges
/// leave the vertex where it is.
constexpr VertexId apply_traversal(VertexId v, int axis, Direction dir, const EdgeSet& edges) {
  if (v.coord(axis) == target_coord(dir)) return v;
  return edges.test(edge_along(v, axis).index) ? v.flipped(axis) : v;
}

inline VertexId apply_traversal(VertexId v, int axis, Direction dir, const Cube& cube) {
  return apply_traversal(v, axis, dir, cube.edges);
}

/// Draws a deterministic cube from independent Bernoulli marginals.
/// Draws are taken in edge order then (vertex, action) order, and entries
/// with probability exactly 0 or 1 consume no randomness.
inline Cube sample_cube(const EdgeProbs& e, const RewardProbs& r, Rng& rng) {
  Cube out;
  for (int i = 0; i < kNumEdges; ++i) out.edges.set(i, bernoulli(rng, e.p[i]));
  for (int v = 0; v < kNumVertices; ++v)
    for (int x = 0; x < kNumPartialActions; ++x)
      out.reward.p[v][x] = bernoulli(rng, r.p[v][x]) ? 1.0 : 0.0;
  return out;
}

// Cube file lines: "<12 chars, edge 0 first> <goal vertex>", e.g. "111111111111 7".

inline std::string edge_bitstring(const EdgeSet& edges) {
  std::string s(kNumEdges, '0');
  for (int i = 0; i < kNumEdges; ++i)
    if (edges.test(i)) s[i] = '1';
  return s;
}

inline std::string format_cube_line(const Cube& cube) {
  auto goal = cube.goal_vertex();
  if (!goal) throw std::invalid_argument("cube has no unique goal vertex");
  return edge_bitstring(cube.edges) + " " + std::to_string(goal->index);
}

class CubeParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline EdgeSet parse_edge_bitstring(std::string_view bits) {
  if (bits.size() != kNumEdges) throw CubeParseError("edge bitstring must have 12 characters");
  EdgeSet edges;
  for (int i = 0; i < kNumEdges; ++i) {
    if (bits[i] == '1')
      edges.set(i);
    else if (bits[i] != '0')
      throw CubeParseError("edge bitstring may only contain '0' and '1'");
  }
  return edges;
}

inline Cube parse_cube_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
  auto space = line.find(' ');
  if (space == std::string_view::npos) throw CubeParseError("expected '<bits> <goal>'");
  EdgeSet edges = parse_edge_bitstring(line.substr(0, space));
  auto goal_text = line.substr(space + 1);
  if (goal_text.size() != 1 || goal_text[0] < '0' || goal_text[0] > '7')
    throw CubeParseError("goal vertex must be a single digit 0..7");
  return Cube(edges, VertexId(goal_text[0] - '0'));
}

}  // namespace alchemy_ps
