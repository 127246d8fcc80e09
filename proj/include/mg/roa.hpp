#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mg/dynamics.hpp"
#include "mg/grid.hpp"
#include "mg/morse.hpp"

namespace mg {

enum class RoAMode { Standard, Escape };

/// Per-cube sets of reachable Morse nodes: maximal ones (standard mode) or
/// minimal ones (escape mode). Sets are shared through a table of distinct
/// sorted node lists.
struct RoAAssignment {
  RoAMode mode = RoAMode::Standard;
  std::vector<std::uint32_t> set_of_cube;
  std::vector<std::vector<std::uint32_t>> sets;
  /// Cubes whose only minimal reachable node is the escape node.
  std::vector<CubeIndex> r_star;
  /// For each minimal non-escape node, its maximal RoA.
  std::vector<std::pair<std::uint32_t, std::vector<CubeIndex>>> maximal_roas;

  std::span<const std::uint32_t> nodes_of(CubeIndex cube) const { return sets[set_of_cube[cube]]; }
  std::size_t cube_count() const { return set_of_cube.size(); }
};

/// Escape mode is used whenever the Morse graph has an escape node.
RoAAssignment regions_of_attraction(const MorseGraph& mg, const CondensationGraph& cg);

/// Throws InvalidArgument when p is not a minimal node.
const std::vector<CubeIndex>& maximal_roa(const RoAAssignment& assign, const MorseGraph& mg,
                                          std::uint32_t p);

/// Morse node per cube, -1 outside every Morse set.
std::vector<std::int32_t> morse_node_of_cube(const MorseGraph& mg, std::size_t cube_count);

struct Theorem1Report {
  struct Entry {
    std::uint32_t node = 0;
    std::size_t tested = 0;
    std::size_t hits = 0;
    double rate() const { return tested ? static_cast<double>(hits) / tested : 1.0; }
  };
  std::vector<Entry> nodes;
};

/// Samples `samples` points uniformly from cubes whose assignment is a
/// single minimal node p, iterates the map up to `horizon` times and counts
/// trajectories that enter a cube of M(p). Standard mode only.
Theorem1Report theorem1_check(const TimeTauMap& map, const CubicalGrid& grid,
                              const MorseGraph& mg, const RoAAssignment& assign,
                              std::size_t samples, std::size_t horizon, std::uint64_t seed = 1,
                              unsigned workers = 0);

/// `cube_index,scc_id,morse_nodes` with nodes joined by ';' and the escape
/// node written as -1.
void write_roa_csv(std::ostream& os, const CondensationGraph& cg, const MorseGraph& mg,
                   const RoAAssignment& assign);

/// Plain PPM, one pixel per cell of the (dim_x, dim_y) projection with
/// dim_y increasing upwards. Hidden dimensions are max-pooled by category:
/// minimal-node RoA over shared basin over other cubes over escape basin.
void write_roa_ppm(std::ostream& os, const CubicalGrid& grid, const MorseGraph& mg,
                   const RoAAssignment& assign, std::size_t dim_x = 0, std::size_t dim_y = 1);

}  // namespace mg
