#include "mg/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "mg/parallel.hpp"

namespace mg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& value) {
  auto os = open_out(path);
  os << value.dump(2) << '\n';
  finish(os, path);
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("missing artifact '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

Analysis run_analysis(const Config& config) {
  const auto t_all = Clock::now();
  Analysis a(config.grid());
  const TimeTauMap phi(config.system, *config.controller, config.tau, config.step);

  auto t0 = Clock::now();
  if (config.lipschitz) {
    a.lipschitz = *config.lipschitz;
  } else {
    a.estimate = estimate_lipschitz(phi, a.grid, config.lipschitz_pairs, config.lipschitz_safety,
                                    config.seed, config.workers);
    a.lipschitz = a.estimate->value;
    a.lipschitz_steps = phi.step_counter();
  }
  a.timing.lipschitz = seconds_since(t0);

  t0 = Clock::now();
  if (!config.load_cache.empty()) {
    a.map = std::make_unique<MultivaluedMap>(MultivaluedMap::load_cache(
        config.load_cache, a.grid, config.tau, a.lipschitz, config.refine));
  } else {
    OuterApproxOptions opt;
    opt.lipschitz = a.lipschitz;
    opt.refine = config.refine;
    opt.cache_images = config.cache_images;
    opt.force_star = config.force_star;
    opt.workers = config.workers;
    a.map = std::make_unique<MultivaluedMap>(a.grid, phi, opt);
  }
  a.timing.propagate = seconds_since(t0);

  t0 = Clock::now();
  a.cg = compute_scc(*a.map);
  a.timing.scc = seconds_since(t0);

  t0 = Clock::now();
  a.mg = morse_graph(a.cg);
  a.timing.morse = seconds_since(t0);

  t0 = Clock::now();
  a.assign = regions_of_attraction(a.mg, a.cg);
  a.goal = goal_node(a.mg, a.grid, config.system->goal, config.epsilon);
  a.unidentified = unidentified_ratio(a.mg, a.assign);
  a.timing.roa = seconds_since(t0);
  a.timing.total = seconds_since(t_all);
  return a;
}

void write_summary(std::ostream& os, const Config& config, const Analysis& a) {
  const auto minimal = minimal_nodes(a.mg);
  json nodes = json::array();
  for (std::uint32_t p = 0; p < a.mg.size(); ++p) {
    json node = {{"id", p},
                 {"cubes", a.mg.nodes[p].cubes.size()},
                 {"escape", a.mg.nodes[p].is_star},
                 {"minimal", std::binary_search(minimal.begin(), minimal.end(), p)},
                 {"roa_cubes", nullptr}};
    for (const auto& [q, cubes] : a.assign.maximal_roas) {
      if (q == p) node["roa_cubes"] = cubes.size();
    }
    nodes.push_back(node);
  }
  json edges = json::array();
  for (auto [p, q] : a.mg.hasse_edges) edges.push_back({p, q});
  json periodic = json::array();
  for (std::size_t i = 0; i < a.grid.dims(); ++i) periodic.push_back(a.grid.periodic(i));

  json s = {{"system", config.system->name},
            {"system_hash", hex64(config.system_hash())},
            {"cube_count", a.grid.cube_count()},
            {"subdiv_exp", a.grid.subdiv_exps()},
            {"lower", vec_json(a.grid.lower())},
            {"upper", vec_json(a.grid.upper())},
            {"periodic", periodic},
            {"tau", config.tau},
            {"step", config.step},
            {"refine", a.map->refine()},
            {"lipschitz", a.lipschitz},
            {"radius", a.map->radius()},
            {"escape_vertex", a.map->has_star()},
            {"mode", a.assign.mode == RoAMode::Escape ? "escape" : "standard"},
            {"scc_count", a.cg.scc_count},
            {"node_count", a.mg.size()},
            {"minimal_nodes", minimal},
            {"nodes", nodes},
            {"hasse_edges", edges},
            {"goal_node", a.goal.node ? json(*a.goal.node) : json(nullptr)},
            {"goal_diagnostic", a.goal.diagnostic},
            {"r_star_cubes", a.assign.r_star.size()},
            {"unidentified_ratio", a.unidentified},
            {"propagation_steps", a.map->propagation_steps()},
            {"lipschitz_propagation_steps", a.lipschitz_steps},
            {"image_evaluations", a.cg.image_evaluations}};
  if (a.estimate) {
    s["lipschitz_estimate"] = {{"pairs", a.estimate->pairs}, {"max_ratio", a.estimate->max_ratio}};
  }
  os << s.dump(2) << '\n';
}

void write_manifest(const std::string& dir, const std::string& command, const Config& config) {
  write_json(fs::path(dir) / "manifest.json", {{"command", command}, {"config", config.resolved}});
}

void write_roa_files(const Config& config, const Analysis& a, const std::string& dir) {
  make_dir(dir);
  const fs::path d(dir);
  {
    const auto path = d / "roa.csv";
    auto os = open_out(path);
    write_roa_csv(os, a.cg, a.mg, a.assign);
    finish(os, path);
  }
  {
    const auto path = d / "roa.ppm";
    auto os = open_out(path);
    write_roa_ppm(os, a.grid, a.mg, a.assign, config.projection_x, config.projection_y);
    finish(os, path);
  }
  for (const auto& [p, cubes] : a.assign.maximal_roas) {
    const auto path = d / ("roa_" + std::to_string(p) + ".cubes");
    auto os = open_out(path);
    write_cube_set(os, CubeSet{a.grid, cubes});
    finish(os, path);
  }
}

void write_analysis(const Config& config, const Analysis& a, const std::string& dir) {
  make_dir(dir);
  const fs::path d(dir);
  {
    const auto path = d / "morse_graph.dot";
    auto os = open_out(path);
    write_dot(os, a.mg);
    finish(os, path);
  }
  write_roa_files(config, a, dir);
  {
    const auto path = d / "summary.json";
    auto os = open_out(path);
    write_summary(os, config, a);
    finish(os, path);
  }
  write_json(d / "timing.json", {{"lipschitz_s", a.timing.lipschitz},
                                 {"propagate_s", a.timing.propagate},
                                 {"scc_s", a.timing.scc},
                                 {"morse_s", a.timing.morse},
                                 {"roa_s", a.timing.roa},
                                 {"wall_time_s", a.timing.total}});
  write_manifest(dir, "analyze", config);
  if (!config.dump_cache.empty()) {
    if (!a.map->cached()) throw InvalidArgument("dump_cache needs the in-memory image cache");
    a.map->save_cache(config.dump_cache);
  }
}

TruthRun run_ground_truth(const Config& config) {
  const auto t0 = Clock::now();
  TruthRun run;
  run.truth = brute_force_roa(*config.system, *config.controller, config.lattice, config.horizon,
                              config.epsilon, config.step, config.workers);
  run.truth.system_hash = config.system_hash();
  run.seconds = seconds_since(t0);
  return run;
}

void write_ground_truth(const Config& config, const TruthRun& run, const std::string& dir) {
  make_dir(dir);
  const fs::path d(dir);
  const GroundTruth& t = run.truth;
  write_truth((d / "truth.bin").string(), t);
  if (t.counts.size() == 2) {
    const auto path = d / "truth.ppm";
    auto os = open_out(path);
    write_truth_ppm(os, t);
    finish(os, path);
  }
  const double fraction = t.point_count() ? static_cast<double>(t.reached_count()) / t.point_count() : 0.0;
  write_json(d / "truth.json", {{"system", config.system->name},
                                {"system_hash", hex64(t.system_hash)},
                                {"lattice", t.counts},
                                {"horizon", t.horizon},
                                {"epsilon", t.epsilon},
                                {"lattice_points", t.point_count()},
                                {"reached_points", t.reached_count()},
                                {"reached_fraction", fraction}});
  write_json(d / "timing.json", {{"wall_time_s", run.seconds}});
  write_manifest(dir, "ground-truth", config);
}

ComparisonReport compare_dirs(const std::string& analysis_dir, const std::string& truth_dir) {
  const fs::path ad(analysis_dir), td(truth_dir);
  const json s = read_json(ad / "summary.json");
  GroundTruth truth = read_truth((td / "truth.bin").string());

  std::optional<std::uint32_t> goal;
  double unidentified = 0;
  std::uint64_t steps = 0;
  std::vector<int> exps;
  Vec lo, hi;
  std::vector<bool> periodic;
  std::string hash;
  try {
    if (!s.at("goal_node").is_null()) goal = s.at("goal_node").get<std::uint32_t>();
    unidentified = s.at("unidentified_ratio").get<double>();
    steps = s.at("propagation_steps").get<std::uint64_t>();
    exps = s.at("subdiv_exp").get<std::vector<int>>();
    const auto l = s.at("lower").get<std::vector<double>>();
    const auto u = s.at("upper").get<std::vector<double>>();
    lo = Eigen::Map<const Vec>(l.data(), static_cast<Eigen::Index>(l.size()));
    hi = Eigen::Map<const Vec>(u.data(), static_cast<Eigen::Index>(u.size()));
    periodic = s.at("periodic").get<std::vector<bool>>();
    hash = s.at("system_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError("'" + (ad / "summary.json").string() + "': " + e.what());
  }
  if (hash != hex64(truth.system_hash)) {
    throw InvalidArgument("compare: analysis and ground truth were computed for different systems");
  }
  CubicalGrid grid(lo, hi, exps, periodic);
  std::vector<CubeIndex> roa;
  if (goal) {
    const auto path = ad / ("roa_" + std::to_string(*goal) + ".cubes");
    std::ifstream is(path);
    if (!is) throw IoError("missing artifact '" + path.string() + "'");
    CubeSet set = read_cube_set(is);
    if (!(set.grid == grid)) throw InvalidArgument("compare: cube set grid differs from the summary");
    roa = std::move(set.cubes);
  }
  ComparisonReport r = compare_cubes(grid, roa, goal, unidentified, truth);
  r.propagation_steps = steps;
  return r;
}

HybridReport hybrid_eval(const Config& config) {
  if (!config.primary || !config.fallback) {
    throw InvalidArgument("hybrid-eval needs a hybrid controller in the config");
  }
  const ControlSystem& sys = *config.system;
  HybridReport r;
  r.samples = config.hybrid_samples;
  r.horizon = config.hybrid_horizon;
  r.epsilon = config.hybrid_epsilon;

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec> starts(r.samples);
  for (auto& x : starts) {
    x.resize(static_cast<Eigen::Index>(sys.n));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = sys.state_bounds.lo[i] + unit(rng) * (sys.state_bounds.hi[i] - sys.state_bounds.lo[i]);
    }
  }

  const Controller* ctrl[3] = {&*config.controller, &*config.primary, &*config.fallback};
  std::vector<Trajectory> runs(3 * r.samples);
  parallel_for(3 * r.samples, config.workers, [&](std::size_t k) {
    try {
      runs[k] = simulate_to_goal(sys, *ctrl[k % 3], starts[k / 3], sys.goal, r.epsilon, r.horizon,
                                 config.step);
    } catch (const PropagationError&) {
      runs[k] = Trajectory{};
    }
  });

  ControllerStats* stats[3] = {&r.hybrid, &r.primary, &r.fallback};
  for (int c = 0; c < 3; ++c) {
    stats[c]->label = ctrl[c]->label();
    double total = 0;
    for (std::size_t s = 0; s < r.samples; ++s) {
      const Trajectory& t = runs[3 * s + c];
      if (!t.reached) continue;
      ++stats[c]->successes;
      total += static_cast<double>(t.steps);
    }
    stats[c]->success_rate = r.samples ? static_cast<double>(stats[c]->successes) / r.samples : 0;
    stats[c]->mean_steps = stats[c]->successes ? total / stats[c]->successes : 0;
  }
  auto ratio = [&](int other, std::size_t& common) -> std::optional<double> {
    double h = 0, o = 0;
    common = 0;
    for (std::size_t s = 0; s < r.samples; ++s) {
      const Trajectory& th = runs[3 * s];
      const Trajectory& to = runs[3 * s + other];
      if (!th.reached || !to.reached) continue;
      ++common;
      h += static_cast<double>(th.steps);
      o += static_cast<double>(to.steps);
    }
    if (common == 0 || o == 0) return std::nullopt;
    return h / o;
  };
  r.ratio_vs_primary = ratio(1, r.common_primary);
  r.ratio_vs_fallback = ratio(2, r.common_fallback);
  return r;
}

void write_hybrid_report(std::ostream& os, const HybridReport& r) {
  auto stats = [](const ControllerStats& s) {
    return json{{"label", s.label},
                {"successes", s.successes},
                {"success_rate", s.success_rate},
                {"mean_steps", s.mean_steps}};
  };
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"samples", r.samples},
            {"horizon", r.horizon},
            {"epsilon", r.epsilon},
            {"hybrid", stats(r.hybrid)},
            {"primary", stats(r.primary)},
            {"fallback", stats(r.fallback)},
            {"length_ratio_vs_primary", opt(r.ratio_vs_primary)},
            {"length_ratio_vs_fallback", opt(r.ratio_vs_fallback)},
            {"common_successes_primary", r.common_primary},
            {"common_successes_fallback", r.common_fallback}};
  os << j.dump(2) << '\n';
}

void write_hybrid_table(std::ostream& os, const HybridReport& r) {
  auto row = [&](const char* name, const ControllerStats& s) {
    os << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(2)
       << std::setw(9) << 100 * s.success_rate << " %" << std::setw(12) << s.mean_steps;
    if (!s.label.empty()) os << "  " << s.label;
    os << '\n';
  };
  os << std::left << std::setw(10) << "" << std::right << std::setw(11) << "success" << std::setw(12)
     << "mean steps" << '\n';
  row("hybrid", r.hybrid);
  row("primary", r.primary);
  row("fallback", r.fallback);
  auto ratio = [&](const char* name, const std::optional<double>& v, std::size_t n) {
    os << "length ratio vs " << name << ": ";
    if (v) {
      os << std::setprecision(3) << *v << " (" << n << " common starts)\n";
    } else {
      os << "n/a\n";
    }
  };
  ratio("primary", r.ratio_vs_primary, r.common_primary);
  ratio("fallback", r.ratio_vs_fallback, r.common_fallback);
  os.unsetf(std::ios::floatfield);
}

}  // namespace mg
