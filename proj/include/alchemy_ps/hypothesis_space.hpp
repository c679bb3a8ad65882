#pragma once

// Candidate cube sets for exact inference, their file format, and
// train/val/test splits.

#include "alchemy_ps/cube.hpp"
#include "alchemy_ps/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace alchemy_ps {

enum class CubeSource { All4096, Connected, File };

struct HypothesisSource {
  CubeSource kind = CubeSource::Connected;
  std::string path;  // File only
  VertexId goal{7};  // generated sets only; files carry their own goals

  /// Parses "all", "connected" or "file:<path>".
  static HypothesisSource parse(const std::string& text, VertexId goal = VertexId(7)) {
    if (text == "all") return {CubeSource::All4096, {}, goal};
    if (text == "connected") return {CubeSource::Connected, {}, goal};
    if (text.rfind("file:", 0) == 0 && text.size() > 5) return {CubeSource::File, text.substr(5), goal};
    throw std::invalid_argument("hypothesis source must be 'all', 'connected' or 'file:<path>', got '" +
                                text + "'");
  }

  std::string to_string() const {
    switch (kind) {
      case CubeSource::All4096: return "all";
      case CubeSource::Connected: return "connected";
      case CubeSource::File: return "file:" + path;
    }
    return {};
  }
};

struct CubeSet {
  std::vector<Cube> cubes;
  CubeSource source = CubeSource::All4096;

  std::size_t size() const { return cubes.size(); }
  const Cube& operator[](std::size_t i) const { return cubes[i]; }
};

/// True when every vertex has a path to `goal` along present edges.
inline bool connected_to_goal(const EdgeSet& edges, VertexId goal) {
  std::uint8_t reached = 1u << goal.index;
  for (bool grew = true; grew;) {
    grew = false;
    for (int e = 0; e < kNumEdges; ++e) {
      if (!edges.test(e)) continue;
      auto [a, b] = edge_endpoints(EdgeId(e));
      const bool ra = reached & (1u << a.index);
      const bool rb = reached & (1u << b.index);
      if (ra != rb) {
        reached |= (1u << a.index) | (1u << b.index);
        grew = true;
      }
    }
  }
  return reached == 0xFF;
}

class CubeFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_cube_set(std::ostream& out, const CubeSet& set) {
  for (const auto& c : set.cubes) out << format_cube_line(c) << '\n';
}

inline CubeSet read_cube_set(std::istream& in) {
  CubeSet set;
  set.source = CubeSource::File;
  std::unordered_set<unsigned long> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    try {
      Cube c = parse_cube_line(line);
      if (!seen.insert(c.edges.to_ulong()).second)
        throw CubeParseError("duplicate edge set " + edge_bitstring(c.edges));
      set.cubes.push_back(std::move(c));
    } catch (const CubeParseError& e) {
      throw CubeFileError("cube file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (in.bad()) throw CubeFileError("failed reading cube file");
  return set;
}

inline CubeSet load_cube_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CubeFileError("cannot open cube file '" + path + "'");
  return read_cube_set(in);
}

/// Cubes in canonical order: ascending edge bitset value (edge 0 is bit 0).
inline CubeSet enumerate(const HypothesisSource& src) {
  if (src.kind == CubeSource::File) return load_cube_file(src.path);
  CubeSet set;
  set.source = src.kind;
  for (unsigned long mask = 0; mask < (1ul << kNumEdges); ++mask) {
    EdgeSet edges(mask);
    if (src.kind == CubeSource::Connected && !connected_to_goal(edges, src.goal)) continue;
    set.cubes.emplace_back(edges, src.goal);
  }
  return set;
}

struct Split {
  std::vector<std::size_t> train, val, test;
  bool operator==(const Split&) const = default;
};

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Part sizes from ratios by largest-remainder rounding. Ties go to the
/// earlier part.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  double total = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw SplitError("split ratios must be finite and nonnegative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SplitError("split ratios must sum to 1");

  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k]];

  for (int i = 0; i < 3; ++i)
    if (ratios[i] > 0.0 && sizes[i] == 0)
      throw SplitError("cube set of size " + std::to_string(n) + " is too small for the requested ratios");
  return sizes;
}

/// Seeded Fisher-Yates shuffle of 0..n-1, then consecutive parts of the
/// given sizes.
inline Split split_by_sizes(std::size_t n, const std::array<std::size_t, 3>& sizes, std::uint64_t seed) {
  if (sizes[0] + sizes[1] + sizes[2] != n) throw SplitError("split sizes must add up to the set size");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
  Split s;
  auto it = idx.begin();
  s.train.assign(it, it + sizes[0]);
  it += sizes[0];
  s.val.assign(it, it + sizes[1]);
  it += sizes[1];
  s.test.assign(it, idx.end());
  return s;
}

inline Split split(const CubeSet& set, const std::array<double, 3>& ratios, std::uint64_t seed) {
  return split_by_sizes(set.size(), split_sizes(set.size(), ratios), seed);
}

inline void write_split(std::ostream& out, const Split& s) {
  auto line = [&](const char* name, const std::vector<std::size_t>& v) {
    out << name << ':';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << '\n';
  };
  line("train", s.train);
  line("val", s.val);
  line("test", s.test);
}

inline Split read_split(std::istream& in) {
  Split s;
  std::array<bool, 3> seen{};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw SplitError("split line without ':'");
    const std::string name = line.substr(0, colon);
    std::vector<std::size_t>* part = nullptr;
    int k = -1;
    if (name == "train") part = &s.train, k = 0;
    else if (name == "val") part = &s.val, k = 1;
    else if (name == "test") part = &s.test, k = 2;
    else throw SplitError("unknown split part '" + name + "'");
    seen[k] = true;
    std::stringstream items(line.substr(colon + 1));
    std::string item;
    while (std::getline(items, item, ',')) {
      item.erase(std::remove(item.begin(), item.end(), ' '), item.end());
      if (item.empty()) continue;
      try {
        std::size_t pos = 0;
        part->push_back(std::stoull(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw SplitError("bad index '" + item + "' in split file");
      }
    }
  }
  if (!seen[0] || !seen[1] || !seen[2]) throw SplitError("split file needs train, val and test lines");
  return s;
}

}  // namespace alchemy_ps
