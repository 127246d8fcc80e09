#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mg/dynamics.hpp"
#include "mg/grid.hpp"
#include "mg/morse.hpp"
#include "mg/roa.hpp"

namespace mg {

struct Trajectory {
  bool reached = false;
  bool left = false;  // crossed a non-periodic bound or blew up
  std::uint64_t steps = 0;
};

/// Integrates with fixed RK4 steps until the state is within `epsilon` of
/// `goal` (checked before every step), leaves X, or `horizon` steps pass.
Trajectory simulate_to_goal(const ControlSystem& system, const Controller& controller, Vec x,
                            const Vec& goal, double epsilon, std::uint64_t horizon,
                            double step = 0.01);

/// Cell-centred evaluation lattice over X with a per-point reach flag.
struct GroundTruth {
  std::vector<std::uint32_t> counts;
  Vec lower, upper;
  std::vector<bool> periodic;
  std::uint64_t horizon = 0;
  double epsilon = 0;
  std::uint64_t system_hash = 0;
  std::vector<unsigned char> reached;  // row-major, last dim fastest

  std::size_t point_count() const { return reached.size(); }
  Vec point(std::size_t index) const;
  std::size_t reached_count() const;
};

GroundTruth brute_force_roa(const ControlSystem& system, const Controller& controller,
                            const std::vector<std::uint32_t>& counts, std::uint64_t horizon,
                            double epsilon, double step = 0.01, unsigned workers = 0);

/// Binary: "MGTRUTH1", dims, counts, bounds, periodic flags, horizon,
/// epsilon, system hash, packed reach bits.
void write_truth(const std::string& path, const GroundTruth& truth);
GroundTruth read_truth(const std::string& path);
/// 2-D lattices only: reached points black on white, y axis upwards.
void write_truth_ppm(std::ostream& os, const GroundTruth& truth);

struct GoalNode {
  std::optional<std::uint32_t> node;
  std::string diagnostic;
};

/// The unique minimal non-escape Morse node whose cells meet B(goal, eps).
GoalNode goal_node(const MorseGraph& mg, const CubicalGrid& grid, const Vec& goal, double epsilon);

struct ComparisonReport {
  std::optional<std::uint32_t> goal_node;
  double tp_ratio = 0;
  std::uint64_t fp_count = 0;
  double unidentified_ratio = 0;
  std::uint64_t propagation_steps = 0;
  std::uint64_t roa_cubes = 0;
  std::uint64_t tp_points = 0;
  std::uint64_t reached_points = 0;
  std::uint64_t lattice_points = 0;
};

/// Truth volume is measured in lattice points. A RoA cube counts as true
/// positive when every lattice point inside it reaches the goal and as a
/// false positive when any does not.
ComparisonReport compare(const CubicalGrid& grid, const MorseGraph& mg,
                         const RoAAssignment& assign, std::optional<std::uint32_t> goal,
                         const GroundTruth& truth);

/// Same, from a saved RoA cube list and a precomputed unidentified ratio.
ComparisonReport compare_cubes(const CubicalGrid& grid, const std::vector<CubeIndex>& roa,
                               std::optional<std::uint32_t> goal, double unidentified,
                               const GroundTruth& truth);

/// Fraction of cubes whose assignment is not a single minimal node.
double unidentified_ratio(const MorseGraph& mg, const RoAAssignment& assign);

void write_report(std::ostream& os, const ComparisonReport& report);
void write_report_table(std::ostream& os, const ComparisonReport& report);

}  // namespace mg
