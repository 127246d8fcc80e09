#include "mg/roa.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <ostream>
#include <random>

#include "mg/parallel.hpp"

namespace mg {

RoAAssignment regions_of_attraction(const MorseGraph& mg, const CondensationGraph& cg) {
  RoAAssignment a;
  a.mode = mg.star_node ? RoAMode::Escape : RoAMode::Standard;
  const SccNodeSets per_scc = reachable_extremes(cg, mg, a.mode == RoAMode::Escape);

  std::map<std::vector<std::uint32_t>, std::uint32_t> ids;
  std::vector<std::uint32_t> set_of_scc(cg.scc_count);
  for (std::uint32_t s = 0; s < cg.scc_count; ++s) {
    const auto span = per_scc.of(s);
    std::vector<std::uint32_t> key(span.begin(), span.end());
    auto [it, inserted] = ids.emplace(std::move(key), static_cast<std::uint32_t>(a.sets.size()));
    if (inserted) a.sets.push_back(it->first);
    set_of_scc[s] = it->second;
  }

  const std::size_t cubes = cg.star_vertex ? cg.vertex_count - 1 : cg.vertex_count;
  a.set_of_cube.resize(cubes);
  for (std::size_t c = 0; c < cubes; ++c) a.set_of_cube[c] = set_of_scc[cg.scc_of_vertex[c]];

  const auto minimal = minimal_nodes(mg);
  std::vector<std::int32_t> slot(mg.size(), -1);
  for (std::uint32_t p : minimal) {
    if (mg.star_node && p == *mg.star_node) continue;
    slot[p] = static_cast<std::int32_t>(a.maximal_roas.size());
    a.maximal_roas.emplace_back(p, std::vector<CubeIndex>{});
  }
  for (std::size_t c = 0; c < cubes; ++c) {
    const auto& set = a.sets[a.set_of_cube[c]];
    if (set.size() != 1) continue;
    if (mg.star_node && set[0] == *mg.star_node) {
      a.r_star.push_back(static_cast<CubeIndex>(c));
    } else if (slot[set[0]] >= 0) {
      a.maximal_roas[slot[set[0]]].second.push_back(static_cast<CubeIndex>(c));
    }
  }
  return a;
}

const std::vector<CubeIndex>& maximal_roa(const RoAAssignment& assign, const MorseGraph& mg,
                                          std::uint32_t p) {
  for (const auto& [node, cubes] : assign.maximal_roas) {
    if (node == p) return cubes;
  }
  if (p < mg.size() && mg.star_node && p == *mg.star_node) {
    throw InvalidArgument("maximal_roa: the escape node has no region of attraction");
  }
  throw InvalidArgument("maximal_roa: node " + std::to_string(p) + " is not a minimal Morse node");
}

std::vector<std::int32_t> morse_node_of_cube(const MorseGraph& mg, std::size_t cube_count) {
  std::vector<std::int32_t> out(cube_count, -1);
  for (std::uint32_t p = 0; p < mg.size(); ++p) {
    for (Vertex c : mg.nodes[p].cubes) out[c] = static_cast<std::int32_t>(p);
  }
  return out;
}

Theorem1Report theorem1_check(const TimeTauMap& map, const CubicalGrid& grid,
                              const MorseGraph& mg, const RoAAssignment& assign,
                              std::size_t samples, std::size_t horizon, std::uint64_t seed,
                              unsigned workers) {
  if (assign.mode != RoAMode::Standard) {
    throw InvalidArgument("theorem1_check: only defined for the standard assignment");
  }
  Theorem1Report report;
  std::vector<CubeIndex> eligible;
  std::vector<std::uint32_t> node_of_eligible;
  for (const auto& [p, cubes] : assign.maximal_roas) {
    report.nodes.push_back({p, 0, 0});
    eligible.insert(eligible.end(), cubes.begin(), cubes.end());
    node_of_eligible.insert(node_of_eligible.end(), cubes.size(),
                            static_cast<std::uint32_t>(report.nodes.size() - 1));
  }
  if (eligible.empty() || samples == 0) return report;

  const std::size_t n = grid.dims();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec> starts(samples);
  std::vector<std::uint32_t> slot(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t e = pick(rng);
    const Orthotope box = grid.cube_bounds(eligible[e]);
    Vec x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = box.lo[i] + unit(rng) * (box.hi[i] - box.lo[i]);
    starts[k] = x;
    slot[k] = node_of_eligible[e];
  }

  const auto cell_node = morse_node_of_cube(mg, grid.cube_count());
  const TimeTauMap local(map);
  std::vector<unsigned char> hit(samples, 0);
  parallel_for(samples, workers, [&](std::size_t k) {
    const auto target = static_cast<std::int32_t>(report.nodes[slot[k]].node);
    Vec x = starts[k];
    for (std::size_t it = 0; it <= horizon; ++it) {
      const auto cube = grid.cube_of_point(x);
      if (!cube) return;
      if (cell_node[*cube] == target) {
        hit[k] = 1;
        return;
      }
      if (it == horizon) return;
      TimeTauMap::Result r;
      try {
        r = local.propagate_checked(x);
      } catch (const PropagationError&) {
        return;
      }
      if (r.left_domain) return;
      x = r.state;
    }
  });
  for (std::size_t k = 0; k < samples; ++k) {
    ++report.nodes[slot[k]].tested;
    report.nodes[slot[k]].hits += hit[k];
  }
  return report;
}

void write_roa_csv(std::ostream& os, const CondensationGraph& cg, const MorseGraph& mg,
                   const RoAAssignment& assign) {
  os << "cube_index,scc_id,morse_nodes\n";
  for (std::size_t c = 0; c < assign.cube_count(); ++c) {
    os << c << ',' << cg.scc_of_vertex[c] << ',';
    bool first = true;
    for (std::uint32_t p : assign.nodes_of(static_cast<CubeIndex>(c))) {
      if (!first) os << ';';
      first = false;
      if (mg.star_node && p == *mg.star_node) {
        os << -1;
      } else {
        os << p;
      }
    }
    os << '\n';
  }
}

namespace {

using Rgb = std::array<int, 3>;

constexpr std::array<Rgb, 10> kPalette = {{{31, 119, 180},
                                           {214, 39, 40},
                                           {44, 160, 44},
                                           {255, 127, 14},
                                           {148, 103, 189},
                                           {23, 190, 207},
                                           {140, 86, 75},
                                           {227, 119, 194},
                                           {188, 189, 34},
                                           {0, 0, 128}}};

}  // namespace

void write_roa_ppm(std::ostream& os, const CubicalGrid& grid, const MorseGraph& mg,
                   const RoAAssignment& assign, std::size_t dim_x, std::size_t dim_y) {
  const std::size_t n = grid.dims();
  if (dim_x >= n || (n > 1 && (dim_y >= n || dim_y == dim_x))) {
    throw InvalidArgument("write_roa_ppm: invalid projection dimensions");
  }
  const std::uint32_t w = grid.cells(dim_x);
  const std::uint32_t h = n > 1 ? grid.cells(dim_y) : 1;

  // Category rank per cube: 0 escape basin, 1 other, 2 shared basin,
  // 3 + (K - p) RoA of minimal node p (smaller nodes win ties).
  std::vector<std::int32_t> roa_slot(mg.size(), -1);
  for (std::size_t i = 0; i < assign.maximal_roas.size(); ++i) {
    roa_slot[assign.maximal_roas[i].first] = static_cast<std::int32_t>(i);
  }
  const auto k = static_cast<std::int64_t>(mg.size());
  std::vector<std::int64_t> rank(static_cast<std::size_t>(w) * h, -1);
  for (std::size_t c = 0; c < assign.cube_count(); ++c) {
    const auto set = assign.nodes_of(static_cast<CubeIndex>(c));
    std::int64_t r;
    if (set.size() == 1 && mg.star_node && set[0] == *mg.star_node) {
      r = 0;
    } else if (set.size() == 1 && roa_slot[set[0]] >= 0) {
      r = 3 + (k - set[0]);
    } else if (set.size() > 1) {
      r = 2;
    } else {
      r = 1;
    }
    const auto coords = grid.coords_of(static_cast<CubeIndex>(c));
    const std::size_t px = coords[dim_x];
    const std::size_t py = n > 1 ? coords[dim_y] : 0;
    const std::size_t at = (h - 1 - py) * w + px;
    rank[at] = std::max(rank[at], r);
  }
  os << "P3\n" << w << ' ' << h << "\n255\n";
  for (std::size_t i = 0; i < rank.size(); ++i) {
    Rgb col;
    const std::int64_t r = rank[i];
    if (r <= 0) {
      col = {255, 255, 255};
    } else if (r == 1) {
      col = {0, 0, 0};
    } else if (r == 2) {
      col = {160, 160, 160};
    } else {
      const auto p = static_cast<std::size_t>(k - (r - 3));
      col = kPalette[static_cast<std::size_t>(roa_slot[p]) % kPalette.size()];
    }
    os << col[0] << ' ' << col[1] << ' ' << col[2] << ((i + 1) % w == 0 ? '\n' : ' ');
  }
}

}  // namespace mg
