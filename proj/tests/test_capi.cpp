#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "morsegraph.h"

namespace fs = std::filesystem;

namespace {

const char* kSmallPendulum = R"({
  "system": {"name": "pendulum"},
  "grid": {"total_exp": 10},
  "map": {"lipschitz": {"pairs": 2000, "safety": 1.2}},
  "ground_truth": {"lattice": [64, 128], "horizon": 500, "epsilon": 0.1},
  "hybrid_eval": {"samples": 50, "horizon": 1000}
})";

mg_config* parse_or_fail(const char* text, int workers = 1, int64_t seed = -1) {
  mg_config* cfg = nullptr;
  const mg_status st = mg_config_parse(text, ".", workers, seed, &cfg);
  INFO(mg_last_error());
  REQUIRE(st == MG_OK);
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("status names, version and argument checks") {
  CHECK(std::string(mg_version()) == "1.0.0");
  CHECK(std::string(mg_status_name(MG_OK)) == "ok");
  CHECK(std::string(mg_status_name(MG_ERR_CONFIG)) == "config error");
  mg_config* cfg = nullptr;
  CHECK(mg_config_parse(nullptr, ".", -1, -1, &cfg) == MG_ERR_INVALID_ARGUMENT);
  CHECK(mg_config_parse("{}", ".", -1, -1, nullptr) == MG_ERR_INVALID_ARGUMENT);
  CHECK(mg_analyze(nullptr, nullptr) == MG_ERR_INVALID_ARGUMENT);
  mg_config_free(nullptr);
  mg_analysis_free(nullptr);
  mg_truth_free(nullptr);
  mg_string_free(nullptr);
}

TEST_CASE("configuration errors map to status codes") {
  mg_config* cfg = nullptr;
  CHECK(mg_config_parse(R"({"system": {"name": "rocket"}})", ".", -1, -1, &cfg) == MG_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(mg_last_error()).find("/system/name") != std::string::npos);
  CHECK(mg_config_parse("{ nope", ".", -1, -1, &cfg) == MG_ERR_CONFIG);
  CHECK(std::string(mg_last_error()).find("<config>:1:") == 0);
  CHECK(mg_config_load("/nonexistent/x.json", -1, -1, &cfg) == MG_ERR_IO);
}

TEST_CASE("analysis, ground truth and comparison through the C interface") {
  mg_config* cfg = parse_or_fail(kSmallPendulum);
  const std::string resolved = mg_config_resolved(cfg);
  CHECK(resolved.find("\"workers\": 1") != std::string::npos);

  mg_analysis* a = nullptr;
  REQUIRE(mg_analyze(cfg, &a) == MG_OK);
  CHECK(mg_analysis_cube_count(a) == 1024);
  const size_t nodes = mg_analysis_node_count(a);
  CHECK(nodes >= 1);
  std::vector<uint32_t> minimal(nodes);
  const size_t count = mg_analysis_minimal_nodes(a, minimal.data(), minimal.size());
  CHECK(count >= 1);
  CHECK(mg_analysis_minimal_nodes(a, nullptr, 0) == count);
  const int64_t goal = mg_analysis_goal_node(a);
  REQUIRE(goal >= 0);
  CHECK(mg_analysis_roa_size(a, static_cast<uint32_t>(goal)) >= static_cast<int64_t>(mg_analysis_node_cubes(a, static_cast<uint32_t>(goal))));
  CHECK(mg_analysis_lipschitz(a) > 1);
  CHECK(mg_analysis_propagation_steps(a) == 32u * 33u * 100u);
  CHECK(mg_analysis_unidentified_ratio(a) >= 0);
  CHECK(mg_analysis_unidentified_ratio(a) <= 1);
  CHECK(mg_analysis_wall_time(a) >= 0);
  const std::string summary = mg_analysis_summary(a);
  CHECK(summary.find("\"propagation_steps\"") != std::string::npos);
  CHECK(summary.find("\"minimal_nodes\"") != std::string::npos);

  const fs::path dir = fs::temp_directory_path() / "mg_test_capi";
  fs::remove_all(dir);
  REQUIRE(mg_analysis_write(a, (dir / "analysis").c_str()) == MG_OK);
  for (const char* f : {"summary.json", "timing.json", "manifest.json", "morse_graph.dot", "roa.csv", "roa.ppm"})
    CHECK(fs::exists(dir / "analysis" / f));
  CHECK(fs::exists(dir / "analysis" / ("roa_" + std::to_string(goal) + ".cubes")));

  mg_truth* t = nullptr;
  REQUIRE(mg_ground_truth(cfg, &t) == MG_OK);
  CHECK(mg_truth_point_count(t) == 64u * 128u);
  CHECK(mg_truth_reached_count(t) > 0);
  REQUIRE(mg_truth_write(t, (dir / "truth").c_str()) == MG_OK);
  CHECK(fs::exists(dir / "truth" / "truth.bin"));
  CHECK(fs::exists(dir / "truth" / "truth.ppm"));

  mg_report r{};
  REQUIRE(mg_compare_dirs((dir / "analysis").c_str(), (dir / "truth").c_str(), (dir / "cmp").c_str(), &r) == MG_OK);
  CHECK(r.goal_node == goal);
  CHECK(r.tp_ratio >= 0);
  CHECK(r.tp_ratio <= 1);
  CHECK(r.lattice_points == 64u * 128u);
  CHECK(r.reached_points == mg_truth_reached_count(t));
  CHECK(r.propagation_steps == mg_analysis_propagation_steps(a));
  CHECK(fs::exists(dir / "cmp" / "report.txt"));
  char* table = mg_report_table(&r);
  REQUIRE(table != nullptr);
  CHECK(std::string(table).find("goal node") != std::string::npos);
  mg_string_free(table);

  CHECK(mg_compare_dirs((dir / "analysis").c_str(), (dir / "missing").c_str(), nullptr, &r) == MG_ERR_IO);

  // A different plant must not be compared against this truth.
  mg_config* other = parse_or_fail(R"({"system": {"name": "pendulum", "params": {"friction": 0.3}},
                                       "grid": {"total_exp": 6}, "map": {"lipschitz": 3.0}})");
  mg_analysis* b = nullptr;
  REQUIRE(mg_analyze(other, &b) == MG_OK);
  REQUIRE(mg_analysis_write(b, (dir / "other").c_str()) == MG_OK);
  CHECK(mg_compare_dirs((dir / "other").c_str(), (dir / "truth").c_str(), nullptr, &r) != MG_OK);
  mg_analysis_free(b);
  mg_config_free(other);

  mg_truth_free(t);
  mg_analysis_free(a);
  mg_config_free(cfg);
  fs::remove_all(dir);
}

TEST_CASE("identical runs produce identical artifacts") {
  const fs::path dir = fs::temp_directory_path() / "mg_test_capi_rerun";
  fs::remove_all(dir);
  for (int run = 0; run < 2; ++run) {
    mg_config* cfg = parse_or_fail(kSmallPendulum, run == 0 ? 1 : 3, 5);
    mg_analysis* a = nullptr;
    REQUIRE(mg_analyze(cfg, &a) == MG_OK);
    REQUIRE(mg_analysis_write(a, (dir / std::to_string(run)).c_str()) == MG_OK);
    mg_analysis_free(a);
    mg_config_free(cfg);
  }
  for (const char* f : {"summary.json", "morse_graph.dot", "roa.csv", "roa.ppm"})
    CHECK(slurp(dir / "0" / f) == slurp(dir / "1" / f));
  fs::remove_all(dir);
}

TEST_CASE("a single-cube grid") {
  mg_config* cfg = parse_or_fail(R"({"system": {"name": "pendulum"}, "grid": {"total_exp": 0},
                                     "map": {"lipschitz": 1.5}})");
  mg_analysis* a = nullptr;
  REQUIRE(mg_analyze(cfg, &a) == MG_OK);
  CHECK(mg_analysis_cube_count(a) == 1);
  const int64_t star = mg_analysis_escape_node(a);
  if (star < 0) {
    REQUIRE(mg_analysis_node_count(a) == 1);
    CHECK(mg_analysis_roa_size(a, 0) == 1);
  } else {
    // Escape mode: the lone cube either attracts itself or belongs to the escape basin.
    CHECK(mg_analysis_node_count(a) <= 2);
  }
  mg_analysis_free(a);
  mg_config_free(cfg);
}

TEST_CASE("hybrid evaluation with an always-true switch matches the primary") {
  mg_config* cfg = parse_or_fail(R"({
    "system": {"name": "ackermann"},
    "controller": {"type": "hybrid", "primary": {"type": "corke"},
                   "fallback": {"type": "corke", "goal": [-1.5, 0, 0]},
                   "switch": {"type": "always", "value": true}},
    "hybrid_eval": {"samples": 40, "horizon": 1500}
  })");
  mg_hybrid_report r{};
  REQUIRE(mg_hybrid_eval(cfg, nullptr, &r) == MG_OK);
  CHECK(r.samples == 40);
  CHECK(r.hybrid.successes == r.primary.successes);
  CHECK(r.hybrid.mean_steps == r.primary.mean_steps);
  if (r.common_primary > 0) CHECK(r.ratio_vs_primary == 1.0);
  char* table = mg_hybrid_table(&r);
  REQUIRE(table != nullptr);
  mg_string_free(table);
  mg_config_free(cfg);

  mg_config* plain = parse_or_fail(R"({"system": {"name": "ackermann"}})");
  CHECK(mg_hybrid_eval(plain, nullptr, &r) == MG_ERR_INVALID_ARGUMENT);
  mg_config_free(plain);
}
