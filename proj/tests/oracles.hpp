// Brute-force reference implementations used only by the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mg/grid.hpp"

namespace oracle {

using Edge = std::pair<std::uint32_t, std::uint32_t>;
using Matrix = std::vector<std::vector<char>>;

// Reflexive-transitive closure by Floyd-Warshall.
inline Matrix reachability(std::size_t n, const std::vector<Edge>& edges) {
  Matrix r(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
  for (auto [a, b] : edges) r[a][b] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = 1;
  return r;
}

// Strict reachability: a path with at least one edge.
inline Matrix strict_reachability(std::size_t n, const std::vector<Edge>& edges) {
  Matrix r(n, std::vector<char>(n, 0));
  for (auto [a, b] : edges) r[a][b] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = 1;
  return r;
}

// SCC partition as the smallest member of each vertex's class.
inline std::vector<std::uint32_t> scc_representatives(std::size_t n, const std::vector<Edge>& edges) {
  const Matrix r = reachability(n, edges);
  std::vector<std::uint32_t> rep(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      if (r[v][u] && r[u][v]) {
        rep[v] = static_cast<std::uint32_t>(u);
        break;
      }
    }
  }
  return rep;
}

// Vertices lying on a cycle (including self-loops), plus the escape vertex.
inline std::vector<char> recurrent(std::size_t n, const std::vector<Edge>& edges, long star = -1) {
  const Matrix s = strict_reachability(n, edges);
  std::vector<char> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = s[v][v] || static_cast<long>(v) == star;
  return out;
}

// Classes of recurrent vertices, each as a sorted member list, sorted by
// smallest member.
inline std::vector<std::vector<std::uint32_t>> recurrent_classes(std::size_t n, const std::vector<Edge>& edges,
                                                                 long star = -1) {
  const auto rep = scc_representatives(n, edges);
  const auto rec = recurrent(n, edges, star);
  std::vector<std::vector<std::uint32_t>> classes;
  for (std::size_t v = 0; v < n; ++v) {
    if (!rec[v] || rep[v] != v) continue;
    std::vector<std::uint32_t> members;
    for (std::size_t u = 0; u < n; ++u)
      if (rep[u] == v) members.push_back(static_cast<std::uint32_t>(u));
    classes.push_back(members);
  }
  return classes;
}

// Per-vertex antichain of recurrent classes reachable by explicit DFS path
// enumeration: maximal ones (classes not reachable from another reached
// class) or minimal ones (classes reaching no other reached class).
inline std::vector<std::vector<std::uint32_t>> reachable_extremes(std::size_t n, const std::vector<Edge>& edges,
                                                                  long star, bool minimal) {
  const auto classes = recurrent_classes(n, edges, star);
  std::vector<long> class_of(n, -1);
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (auto v : classes[c]) class_of[v] = static_cast<long>(c);
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (auto [a, b] : edges) adj[a].push_back(b);
  auto reached_from = [&](std::uint32_t s) {
    std::vector<char> seen(n, 0);
    std::vector<std::uint32_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto u : adj[v])
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
    }
    return seen;
  };
  std::vector<std::vector<char>> class_reach(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) class_reach[c] = reached_from(classes[c][0]);
  std::vector<std::vector<std::uint32_t>> out(n);
  for (std::size_t v = 0; v < n; ++v) {
    // A recurrent vertex is assigned its own class in both directions.
    if (class_of[v] >= 0) {
      out[v] = {static_cast<std::uint32_t>(class_of[v])};
      continue;
    }
    const auto seen = reached_from(static_cast<std::uint32_t>(v));
    std::set<std::uint32_t> hit;
    for (std::size_t u = 0; u < n; ++u)
      if (seen[u] && class_of[u] >= 0) hit.insert(static_cast<std::uint32_t>(class_of[u]));
    for (auto c : hit) {
      bool extreme = true;
      for (auto d : hit) {
        if (d == c) continue;
        // c reaches d: d is below c.
        const bool c_above_d = class_reach[c][classes[d][0]];
        const bool d_above_c = class_reach[d][classes[c][0]];
        if (minimal ? c_above_d : d_above_c) extreme = false;
      }
      if (extreme) out[v].push_back(c);
    }
  }
  return out;
}

// Covering pairs (p, q) of a strict order given as below[p][q] = q < p.
inline std::vector<Edge> transitive_reduction(const Matrix& below) {
  const std::size_t k = below.size();
  std::vector<Edge> out;
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q) {
      if (!below[p][q]) continue;
      bool cover = true;
      for (std::size_t r = 0; r < k && cover; ++r)
        if (below[p][r] && below[r][q]) cover = false;
      if (cover) out.emplace_back(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q));
    }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Edge> random_digraph(std::mt19937_64& rng, std::size_t n, double density) {
  std::bernoulli_distribution coin(density);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (coin(rng)) edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
  return edges;
}

// Exhaustive point location through cube_bounds.
inline std::vector<mg::CubeIndex> containing_cubes(const mg::CubicalGrid& g, const mg::Vec& x) {
  std::vector<mg::CubeIndex> out;
  for (mg::CubeIndex c = 0; c < g.cube_count(); ++c) {
    const auto b = g.cube_bounds(c);
    bool in = true;
    for (std::size_t i = 0; i < g.dims(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double v = x[ii];
      if (g.periodic(i)) v = mg::wrap_coordinate(v, g.lower()[ii], g.upper()[ii]);
      in = in && v >= b.lo[ii] && v <= b.hi[ii];
    }
    if (in) out.push_back(c);
  }
  return out;
}

// Closest-point distance from c to each cube over the periodic images.
inline std::vector<mg::CubeIndex> ball_cubes(const mg::CubicalGrid& g, const mg::Vec& c, double r) {
  const std::size_t n = g.dims();
  std::vector<mg::CubeIndex> out;
  for (mg::CubeIndex cube = 0; cube < g.cube_count(); ++cube) {
    const auto b = g.cube_bounds(cube);
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double best = INFINITY;
      const int span = g.periodic(i) ? 1 : 0;
      for (int s = -span; s <= span; ++s) {
        const double lo = b.lo[ii] + s * g.period(i);
        const double hi = b.hi[ii] + s * g.period(i);
        const double gap = c[ii] < lo ? lo - c[ii] : (c[ii] > hi ? c[ii] - hi : 0.0);
        best = std::min(best, gap);
      }
      d2 += best * best;
    }
    if (std::sqrt(d2) <= r) out.push_back(cube);
  }
  return out;
}

}  // namespace oracle
