#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mg/config.hpp"
#include "mg/systems.hpp"

using namespace mg;
namespace fs = std::filesystem;

namespace {

Config parse(const std::string& text, const ConfigOverrides& o = {}) {
  return parse_config(text, "test.json", ".", o);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "mg_test_config";
  fs::create_directories(dir / "sub");
  return dir;
}

}  // namespace

TEST_CASE("syntax errors carry line and column") {
  const std::string msg = error_of("{\n  \"system\": {\"name\": \"pendulum\"},\n  \"grid\": {\"total_exp\": 4,}\n}\n");
  CHECK(msg.rfind("test.json:3:", 0) == 0);
  CHECK(msg.find("parse error") != std::string::npos);
  CHECK(error_of("").rfind("test.json:1:1:", 0) == 0);
}

TEST_CASE("semantic errors name the offending value") {
  CHECK(error_of(R"({"system": {"name": "rocket"}})") ==
        "test.json: /system/name: unknown system 'rocket' (pendulum, ackermann, acrobot, linear)");
  CHECK(error_of(R"({"system": {"name": "pendulum"}, "grid": {"total_exp": 4, "colour": 1}})") ==
        "test.json: /grid/colour: unknown setting");
  CHECK(error_of(R"({"system": {"name": "pendulum"}, "map": {"tau": 1.0, "step": 0.03}})") ==
        "test.json: /map/tau: tau must be a positive integer multiple of the step");
  CHECK(error_of(R"({"system": {"name": "pendulum"}, "map": {"lipschitz": {"pairs": 10, "safety": 0.5}}})") ==
        "test.json: /map/lipschitz/safety: must be at least 1");
  CHECK(error_of(R"({"system": {"name": "pendulum"}, "grid": {"total_exp": 40}})") ==
        "test.json: /grid/total_exp: at most 2^31 cubes");
  CHECK(error_of(R"({"system": {"name": "pendulum"}, "grid": {"subdiv_exp": [3]}})") ==
        "test.json: /grid/subdiv_exp: expected one exponent per dimension");
  CHECK(error_of(R"({"system": {"name": "pendulum"}, "controller": {"type": "corke"}})") ==
        "test.json: /controller/type: the corke controller drives the ackermann system");
  CHECK(error_of(R"({"system": {"name": "ackermann"}, "controller": {"type": "corke", "k_alpha": 0.5}})")
            .find("/controller") != std::string::npos);
  CHECK(error_of(R"({"system": {"name": "pendulum", "params": {"mass": -1}}})").find("/system/params") !=
        std::string::npos);
  CHECK(error_of(R"({"system": {"name": "pendulum"}, "seed": "x"})") == "test.json: /seed: expected an integer");
  CHECK(error_of("[1, 2]") == "test.json: /: expected a JSON object");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("per-system defaults") {
  const Config p = parse(R"({"system": {"name": "pendulum"}})");
  CHECK(p.subdiv_exp == std::vector<int>{7, 7});
  CHECK(p.tau == 1.0);
  CHECK(p.step == 0.01);
  CHECK_FALSE(p.lipschitz);
  CHECK(p.lipschitz_pairs == 10000);
  CHECK(p.lipschitz_safety == 1.2);
  CHECK(p.lattice == std::vector<std::uint32_t>{251, 503});
  CHECK(p.horizon == 500);
  CHECK(p.epsilon == 0.1);
  CHECK(p.resolved["controller"]["type"] == "lqr");
  CHECK(p.system->control_bounds.hi[0] == 0.6372);

  const Config a = parse(R"({"system": {"name": "ackermann"}})");
  CHECK(a.subdiv_exp == std::vector<int>{5, 5, 5});
  CHECK(a.tau == 5.0);
  CHECK(a.lipschitz == 2.0);
  CHECK_FALSE(parse(R"({"system": {"name": "ackermann"}, "map": {"lipschitz": {"pairs": 50}}})").lipschitz);
  CHECK(a.resolved["controller"]["type"] == "corke");
  CHECK(a.resolved["controller"]["k_rho"] == 1.0);
  CHECK(a.resolved["controller"]["k_alpha"] == 4.0);
  CHECK(a.resolved["controller"]["k_beta"] == -1.5);

  const Config b = parse(R"({"system": {"name": "acrobot"}})");
  CHECK(b.subdiv_exp == std::vector<int>{4, 4, 4, 4});

  const Config l = parse(R"({"system": {"name": "linear", "params": {"dims": 3}}})");
  CHECK(l.system->n == 3);
  CHECK(l.subdiv_exp == std::vector<int>{4, 4, 4});
  CHECK(l.resolved["controller"]["type"] == "zero");
}

TEST_CASE("overrides and explicit settings") {
  const std::string text =
      R"({"system": {"name": "pendulum", "params": {"torque_bound": 0.724}}, "seed": 9, "workers": 2,
          "grid": {"subdiv_exp": [3, 5]}, "map": {"tau": 0.5, "lipschitz": 3.5, "refine": 2}})";
  const Config c = parse(text);
  CHECK(c.seed == 9);
  CHECK(c.workers == 2);
  CHECK(c.subdiv_exp == std::vector<int>{3, 5});
  CHECK(c.grid().cube_count() == 256);
  CHECK(c.lipschitz == 3.5);
  CHECK(c.refine == 2);
  CHECK(c.system->control_bounds.hi[0] == 0.724);
  const Config o = parse(text, {.workers = 1, .seed = 44});
  CHECK(o.seed == 44);
  CHECK(o.workers == 1);
  CHECK(o.resolved["seed"] == 44);
}

TEST_CASE("the resolved configuration is a fixed point") {
  for (const char* name : {"pendulum_lqr.json", "ackermann_corke.json", "acrobot_lqr.json", "ackermann_hybrid.json",
                           "pendulum_lqr_torque_0724.json"}) {
    CAPTURE(name);
    const Config first = load_config(std::string(MG_SOURCE_DIR) + "/configs/" + name);
    const Config second = parse_config(first.resolved.dump(2), "resolved", first.base_dir);
    CHECK(second.resolved == first.resolved);
    CHECK(second.system_hash() == first.system_hash());
    CHECK(second.subdiv_exp == first.subdiv_exp);
    const nlohmann::json manifest{{"command", "analyze"}, {"config", first.resolved}};
    CHECK(parse_config(manifest.dump(), "manifest", first.base_dir).resolved == first.resolved);
  }
}

TEST_CASE("system hash tracks plant and controller only") {
  const Config a = parse(R"({"system": {"name": "pendulum"}})");
  const Config b = parse(R"({"system": {"name": "pendulum"}, "grid": {"total_exp": 8}, "seed": 3})");
  const Config c = parse(R"({"system": {"name": "pendulum", "params": {"friction": 0.2}}})");
  const Config d = parse(R"({"system": {"name": "pendulum"}, "controller": {"type": "lqr", "Q": [2, 1]}})");
  CHECK(a.system_hash() == b.system_hash());
  CHECK(a.system_hash() != c.system_hash());
  CHECK(a.system_hash() != d.system_hash());
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("relative paths resolve against the config file") {
  const fs::path dir = scratch_dir();
  {
    std::ofstream table(dir / "sub" / "table.txt");
    table << "dims 2 1\n-3.141592653589793 3.141592653589793 1 1\n-6.283185307179586 6.283185307179586 1 0\n";
    for (int v = 0; v < 6; ++v) table << "0.1\n";
  }
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"system": {"name": "pendulum"}, "controller": {"type": "tabulated", "path": "sub/table.txt"},
               "map": {"dump_cache": "out/cache.bin"}})";
  }
  const Config c = load_config((dir / "cfg.json").string());
  REQUIRE(c.controller);
  CHECK((*c.controller)(make_vec({0.3, 1.0}))[0] == doctest::Approx(0.1));
  CHECK(fs::path(c.dump_cache) == dir / "out" / "cache.bin");
  CHECK(fs::path(c.resolved["controller"]["path"].get<std::string>()) == dir / "sub" / "table.txt");

  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"system": {"name": "pendulum"}, "controller": {"type": "tabulated", "path": "missing.txt"}})";
  }
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("hybrid controllers parse their parts") {
  const Config h = load_config(std::string(MG_SOURCE_DIR) + "/configs/ackermann_hybrid.json");
  REQUIRE(h.primary);
  REQUIRE(h.fallback);
  REQUIRE(h.controller);
  const Vec near_goal = make_vec({0.2, 0.2, 0.3});
  CHECK(((*h.controller)(near_goal).array() == (*h.primary)(near_goal).array()).all());
  const Vec far = make_vec({8, -8, 0});
  CHECK(((*h.controller)(far).array() == (*h.fallback)(far).array()).all());
}
