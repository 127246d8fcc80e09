#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "mg/bench.hpp"
#include "mg/config.hpp"
#include "mg/morse.hpp"
#include "mg/outer_approx.hpp"
#include "mg/roa.hpp"

namespace mg {

struct Timing {
  double lipschitz = 0;
  double propagate = 0;
  double scc = 0;
  double morse = 0;
  double roa = 0;
  double total = 0;
};

struct Analysis {
  explicit Analysis(CubicalGrid g) : grid(std::move(g)) {}

  CubicalGrid grid;
  std::unique_ptr<MultivaluedMap> map;
  CondensationGraph cg;
  MorseGraph mg;
  RoAAssignment assign;
  GoalNode goal;
  std::optional<LipschitzEstimate> estimate;
  double lipschitz = 0;
  // Steps spent on Lipschitz sampling, kept apart from the map's count.
  std::uint64_t lipschitz_steps = 0;
  double unidentified = 0;
  Timing timing;
};

Analysis run_analysis(const Config& config);

/// morse_graph.dot, roa.csv, roa.ppm, roa_<p>.cubes per minimal node,
/// summary.json, timing.json and manifest.json. Also dumps the image cache
/// when the config asks for it.
void write_analysis(const Config& config, const Analysis& analysis, const std::string& dir);
void write_roa_files(const Config& config, const Analysis& analysis, const std::string& dir);
void write_summary(std::ostream& os, const Config& config, const Analysis& analysis);
void write_manifest(const std::string& dir, const std::string& command, const Config& config);

struct TruthRun {
  GroundTruth truth;
  double seconds = 0;
};

TruthRun run_ground_truth(const Config& config);
/// truth.bin, truth.json, truth.ppm (2-D only), timing.json, manifest.json.
void write_ground_truth(const Config& config, const TruthRun& run, const std::string& dir);

/// Reads summary.json and roa_<goal>.cubes from an analysis directory and
/// truth.bin from a ground-truth directory.
ComparisonReport compare_dirs(const std::string& analysis_dir, const std::string& truth_dir);

struct ControllerStats {
  std::string label;
  std::size_t successes = 0;
  double mean_steps = 0;  // over successful starts
  double success_rate = 0;
};

struct HybridReport {
  std::size_t samples = 0;
  std::uint64_t horizon = 0;
  double epsilon = 0;
  ControllerStats hybrid, primary, fallback;
  // Mean hybrid length over mean other length, restricted to starts where
  // both succeed; absent when there are none.
  std::optional<double> ratio_vs_primary, ratio_vs_fallback;
  std::size_t common_primary = 0, common_fallback = 0;
};

/// Samples start states uniformly in X and runs the hybrid and both of its
/// parts to the system goal. The config must hold a hybrid controller.
HybridReport hybrid_eval(const Config& config);
void write_hybrid_report(std::ostream& os, const HybridReport& report);
void write_hybrid_table(std::ostream& os, const HybridReport& report);

}  // namespace mg
