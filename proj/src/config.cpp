#include "mg/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include "mg/systems.hpp"

namespace mg {

using nlohmann::json;

namespace {

struct Defaults {
  int total_exp;
  double tau;
  std::vector<std::uint32_t> lattice;
  std::uint64_t horizon;
  std::uint64_t hybrid_horizon;
  const char* controller;
  // Explicit L when set; otherwise L is estimated.
  std::optional<double> lipschitz = std::nullopt;
};

class Parser {
 public:
  Parser(std::string source, std::string base_dir)
      : source_(std::move(source)), base_dir_(std::move(base_dir)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ConfigError(source_ + ": " + (ptr.empty() ? "/" : ptr) + ": " + msg);
  }

  const json& object(const json& parent, const std::string& key, const std::string& ptr) const {
    static const json empty = json::object();
    if (!parent.contains(key)) return empty;
    const json& v = parent.at(key);
    if (!v.is_object()) fail(ptr + "/" + key, "expected an object");
    return v;
  }

  void check_keys(const json& obj, const std::string& ptr,
                  std::initializer_list<const char*> allowed) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) fail(ptr + "/" + it.key(), "unknown setting");
    }
  }

  double number(const json& obj, const std::string& key, const std::string& ptr, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) fail(ptr + "/" + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ptr + "/" + key, "expected a finite number");
    return d;
  }

  std::int64_t integer(const json& obj, const std::string& key, const std::string& ptr,
                       std::int64_t fallback, std::int64_t min) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(ptr + "/" + key, "expected an integer");
    const auto i = v.get<std::int64_t>();
    if (i < min) fail(ptr + "/" + key, "must be at least " + std::to_string(min));
    return i;
  }

  bool boolean(const json& obj, const std::string& key, const std::string& ptr, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_boolean()) fail(ptr + "/" + key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& obj, const std::string& key, const std::string& ptr,
                     const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(ptr + "/" + key, "expected a string");
    return v.get<std::string>();
  }

  Vec vector(const json& v, const std::string& ptr, std::size_t n) const {
    if (!v.is_array() || v.size() != n) fail(ptr, "expected an array of " + std::to_string(n) + " numbers");
    Vec out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!v[i].is_number()) fail(ptr + "/" + std::to_string(i), "expected a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  // Either a diagonal (array of numbers) or a full matrix (array of rows).
  Eigen::MatrixXd matrix(const json& v, const std::string& ptr, std::size_t n) const {
    if (!v.is_array() || v.size() != n) fail(ptr, "expected " + std::to_string(n) + " entries");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const bool diagonal = n == 0 || v[0].is_number();
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (diagonal) {
        if (!v[i].is_number()) fail(ptr + "/" + std::to_string(i), "expected a number");
        m(ii, ii) = v[i].get<double>();
      } else {
        const Vec row = vector(v[i], ptr + "/" + std::to_string(i), n);
        m.row(ii) = row.transpose();
      }
    }
    return m;
  }

  std::string path(const std::string& p) const {
    std::filesystem::path fp(p);
    if (fp.is_relative()) fp = std::filesystem::path(base_dir_) / fp;
    return fp.lexically_normal().string();
  }

 private:
  std::string source_;
  std::string base_dir_;
};

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

Defaults defaults_for(const std::string& name, std::size_t n) {
  if (name == "pendulum") return {14, 1.0, {251, 503}, 500, 2000, "lqr"};
  // Sampled ratios for the polar law are dominated by pairs whose paths meet
  // its heading discontinuity, so the car gets a fixed L.
  if (name == "ackermann") return {15, 5.0, {81, 81, 26}, 1000, 2000, "corke", 2.0};
  if (name == "acrobot") return {16, 11.0, {13, 13, 25, 25}, 10000, 5000, "lqr"};
  return {static_cast<int>(4 * n), 1.0, std::vector<std::uint32_t>(n, 21), 500, 500, "zero"};
}

SystemPtr parse_system(const Parser& p, const json& s, json& out) {
  const std::string ptr = "/system";
  p.check_keys(s, ptr, {"name", "params", "lower", "upper", "periodic", "goal"});
  const std::string name = p.string(s, "name", ptr, "pendulum");
  const json& prm = p.object(s, "params", ptr);
  const std::string pp = ptr + "/params";
  SystemPtr base;
  if (name == "pendulum") {
    p.check_keys(prm, pp, {"mass", "length", "gravity", "friction", "torque_bound", "friction_on_angle"});
    PendulumParams d;
    d.mass = p.number(prm, "mass", pp, d.mass);
    d.length = p.number(prm, "length", pp, d.length);
    d.gravity = p.number(prm, "gravity", pp, d.gravity);
    d.friction = p.number(prm, "friction", pp, d.friction);
    d.torque_bound = p.number(prm, "torque_bound", pp, d.torque_bound);
    d.friction_on_angle = p.boolean(prm, "friction_on_angle", pp, d.friction_on_angle);
    try {
      base = pendulum_system(d);
    } catch (const InvalidArgument& e) {
      p.fail(pp, e.what());
    }
  } else if (name == "ackermann") {
    p.check_keys(prm, pp, {"wheelbase"});
    AckermannParams d;
    d.wheelbase = p.number(prm, "wheelbase", pp, d.wheelbase);
    try {
      base = ackermann_system(d);
    } catch (const InvalidArgument& e) {
      p.fail(pp, e.what());
    }
  } else if (name == "acrobot") {
    p.check_keys(prm, pp, {"m1", "m2", "l1", "l2", "lc1", "lc2", "i1", "i2", "gravity", "torque_bound"});
    AcrobotParams d;
    d.m1 = p.number(prm, "m1", pp, d.m1);
    d.m2 = p.number(prm, "m2", pp, d.m2);
    d.l1 = p.number(prm, "l1", pp, d.l1);
    d.l2 = p.number(prm, "l2", pp, d.l2);
    d.lc1 = p.number(prm, "lc1", pp, d.lc1);
    d.lc2 = p.number(prm, "lc2", pp, d.lc2);
    d.i1 = p.number(prm, "i1", pp, d.i1);
    d.i2 = p.number(prm, "i2", pp, d.i2);
    d.gravity = p.number(prm, "gravity", pp, d.gravity);
    d.torque_bound = p.number(prm, "torque_bound", pp, d.torque_bound);
    try {
      base = acrobot_system(d);
    } catch (const InvalidArgument& e) {
      p.fail(pp, e.what());
    }
  } else if (name == "linear") {
    p.check_keys(prm, pp, {"dims", "rate", "half_width"});
    const auto dims = p.integer(prm, "dims", pp, 2, 1);
    if (dims > kMaxDim) p.fail(pp + "/dims", "at most " + std::to_string(kMaxDim) + " dimensions");
    try {
      base = linear_system(static_cast<std::size_t>(dims), p.number(prm, "rate", pp, -1.0),
                           p.number(prm, "half_width", pp, 1.0));
    } catch (const InvalidArgument& e) {
      p.fail(pp, e.what());
    }
  } else {
    p.fail(ptr + "/name", "unknown system '" + name + "' (pendulum, ackermann, acrobot, linear)");
  }

  auto sys = std::make_shared<ControlSystem>(*base);
  if (s.contains("lower")) sys->state_bounds.lo = p.vector(s["lower"], ptr + "/lower", sys->n);
  if (s.contains("upper")) sys->state_bounds.hi = p.vector(s["upper"], ptr + "/upper", sys->n);
  for (std::size_t i = 0; i < sys->n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!(sys->state_bounds.hi[ii] > sys->state_bounds.lo[ii])) {
      p.fail(ptr + "/upper/" + std::to_string(i), "upper bound must exceed lower bound");
    }
  }
  if (s.contains("periodic")) {
    const json& v = s["periodic"];
    if (!v.is_array() || v.size() != sys->n) p.fail(ptr + "/periodic", "expected one flag per dimension");
    for (std::size_t i = 0; i < sys->n; ++i) {
      if (!v[i].is_boolean()) p.fail(ptr + "/periodic/" + std::to_string(i), "expected true or false");
      sys->periodic[i] = v[i].get<bool>();
    }
  }
  if (s.contains("goal")) sys->goal = p.vector(s["goal"], ptr + "/goal", sys->n);
  if (!sys->inside(sys->goal)) p.fail(ptr + "/goal", "goal lies outside the state space");

  json params = json::object();
  for (const auto& [k, v] : sys->params) params[k] = v;
  if (name == "pendulum") params["friction_on_angle"] = sys->params.at("friction_on_angle") != 0.0;
  if (name == "linear") params["dims"] = sys->n;
  json periodic = json::array();
  for (bool b : sys->periodic) periodic.push_back(b);
  out = {{"name", name},
         {"params", params},
         {"lower", to_json(sys->state_bounds.lo)},
         {"upper", to_json(sys->state_bounds.hi)},
         {"periodic", periodic},
         {"goal", to_json(sys->goal)}};
  return sys;
}

struct ControllerParts {
  std::optional<Controller> primary;
  std::optional<Controller> fallback;
};

Controller parse_controller(const Parser& p, const json& c, const std::string& ptr,
                            const SystemPtr& sys, const std::string& fallback_type, json& out,
                            ControllerParts* parts) {
  if (!c.is_object()) p.fail(ptr, "expected an object");
  const std::string type = p.string(c, "type", ptr, fallback_type);
  const std::size_t n = sys->n, m = sys->m;
  if (type == "zero") {
    p.check_keys(c, ptr, {"type"});
    out = {{"type", type}};
    return zero_controller(*sys);
  }
  if (type == "constant") {
    p.check_keys(c, ptr, {"type", "u"});
    if (!c.contains("u")) p.fail(ptr + "/u", "missing control value");
    const Vec u = p.vector(c["u"], ptr + "/u", m);
    out = {{"type", type}, {"u", to_json(u)}};
    return constant_controller(*sys, u);
  }
  if (type == "lqr") {
    p.check_keys(c, ptr, {"type", "Q", "R", "goal", "u0"});
    const Eigen::MatrixXd Q = c.contains("Q") ? p.matrix(c["Q"], ptr + "/Q", n)
                                              : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd R = c.contains("R") ? p.matrix(c["R"], ptr + "/R", m)
                                              : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    std::optional<Vec> goal, u0;
    if (c.contains("goal")) goal = p.vector(c["goal"], ptr + "/goal", n);
    if (c.contains("u0")) u0 = p.vector(c["u0"], ptr + "/u0", m);
    LqrDesign d;
    try {
      d = design_lqr(*sys, Q, R, goal, u0);
    } catch (const InvalidArgument& e) {
      p.fail(ptr, e.what());
    }
    out = {{"type", type}, {"Q", to_json(d.Q)}, {"R", to_json(d.R)}, {"goal", to_json(d.goal)}, {"u0", to_json(d.u0)}};
    return lqr_controller(sys, d);
  }
  if (type == "corke") {
    p.check_keys(c, ptr, {"type", "k_rho", "k_alpha", "k_beta", "goal"});
    if (sys->name != "ackermann") p.fail(ptr + "/type", "the corke controller drives the ackermann system");
    CorkeGains g;
    g.k_rho = p.number(c, "k_rho", ptr, g.k_rho);
    g.k_alpha = p.number(c, "k_alpha", ptr, g.k_alpha);
    g.k_beta = p.number(c, "k_beta", ptr, g.k_beta);
    const Vec goal = c.contains("goal") ? p.vector(c["goal"], ptr + "/goal", n) : sys->goal;
    out = {{"type", type}, {"k_rho", g.k_rho}, {"k_alpha", g.k_alpha}, {"k_beta", g.k_beta}, {"goal", to_json(goal)}};
    try {
      return corke_controller(*sys, g, goal);
    } catch (const InvalidArgument& e) {
      p.fail(ptr, e.what());
    }
  }
  if (type == "tabulated") {
    p.check_keys(c, ptr, {"type", "path"});
    if (!c.contains("path")) p.fail(ptr + "/path", "missing table file");
    const std::string file = p.path(p.string(c, "path", ptr, ""));
    std::ifstream is(file);
    if (!is) p.fail(ptr + "/path", "cannot open '" + file + "'");
    out = {{"type", type}, {"path", file}};
    try {
      return tabulated_controller(*sys, read_control_table(is));
    } catch (const Error& e) {
      p.fail(ptr + "/path", e.what());
    }
  }
  if (type == "hybrid") {
    p.check_keys(c, ptr, {"type", "primary", "fallback", "switch"});
    if (!c.contains("primary")) p.fail(ptr + "/primary", "missing controller");
    if (!c.contains("fallback")) p.fail(ptr + "/fallback", "missing controller");
    json po, fo;
    Controller primary = parse_controller(p, c["primary"], ptr + "/primary", sys, "zero", po, nullptr);
    Controller fallback = parse_controller(p, c["fallback"], ptr + "/fallback", sys, "zero", fo, nullptr);
    const json& sw = p.object(c, "switch", ptr);
    const std::string sp = ptr + "/switch";
    const std::string st = p.string(sw, "type", sp, "goal_ball");
    json so;
    SwitchPredicate pred;
    if (st == "always") {
      p.check_keys(sw, sp, {"type", "value"});
      const bool v = p.boolean(sw, "value", sp, true);
      pred = always_switch(v);
      so = {{"type", st}, {"value", v}};
    } else if (st == "goal_ball") {
      p.check_keys(sw, sp, {"type", "center", "radius"});
      const Vec center = sw.contains("center") ? p.vector(sw["center"], sp + "/center", n) : sys->goal;
      const double r = p.number(sw, "radius", sp, 0.6);
      if (!(r >= 0)) p.fail(sp + "/radius", "must be non-negative");
      pred = goal_ball(sys, center, r);
      so = {{"type", st}, {"center", to_json(center)}, {"radius", r}};
    } else if (st == "cube_set") {
      p.check_keys(sw, sp, {"type", "path"});
      if (!sw.contains("path")) p.fail(sp + "/path", "missing cube-set file");
      const std::string file = p.path(p.string(sw, "path", sp, ""));
      std::ifstream is(file);
      if (!is) p.fail(sp + "/path", "cannot open '" + file + "'");
      try {
        CubeSet set = read_cube_set(is);
        if (set.grid.dims() != n) p.fail(sp + "/path", "cube set dimension does not match the system");
        pred = cube_set_predicate(std::move(set));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        p.fail(sp + "/path", e.what());
      }
      so = {{"type", st}, {"path", file}};
    } else {
      p.fail(sp + "/type", "unknown switch '" + st + "' (always, goal_ball, cube_set)");
    }
    out = {{"type", type}, {"primary", po}, {"fallback", fo}, {"switch", so}};
    if (parts) {
      parts->primary = primary;
      parts->fallback = fallback;
    }
    return hybrid_controller(std::move(primary), std::move(fallback), std::move(pred));
  }
  p.fail(ptr + "/type", "unknown controller '" + type + "' (zero, constant, lqr, corke, tabulated, hybrid)");
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

CubicalGrid Config::grid() const {
  return CubicalGrid(system->state_bounds.lo, system->state_bounds.hi, subdiv_exp, system->periodic);
}

std::string canonical_json(const json& value) { return value.dump(); }

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t Config::system_hash() const {
  return fnv1a(canonical_json(json{{"system", resolved.at("system")}, {"controller", resolved.at("controller")}}));
}

Config parse_config(const std::string& text, const std::string& source, const std::string& base_dir,
                    const ConfigOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    const auto pos = what.find("parse error");
    throw ConfigError(source + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                      (pos == std::string::npos ? what : what.substr(pos)));
  }
  const Parser p(source, base_dir);
  if (!doc.is_object()) p.fail("", "expected a JSON object");
  // A run manifest carries the resolved config under "config".
  if (doc.size() == 2 && doc.contains("command") && doc.contains("config") && doc["config"].is_object()) {
    json inner = std::move(doc["config"]);
    doc = std::move(inner);
  }
  p.check_keys(doc, "", {"system", "controller", "grid", "map", "roa", "ground_truth", "hybrid_eval", "workers", "seed"});

  Config cfg;
  cfg.base_dir = base_dir;
  json& r = cfg.resolved;
  r = json::object();

  json sys_out;
  cfg.system = parse_system(p, p.object(doc, "system", ""), sys_out);
  r["system"] = sys_out;
  const std::size_t n = cfg.system->n;
  const Defaults def = defaults_for(cfg.system->name, n);

  cfg.seed = static_cast<std::uint64_t>(p.integer(doc, "seed", "", 1, 0));
  if (overrides.seed) cfg.seed = *overrides.seed;
  cfg.workers = static_cast<unsigned>(p.integer(doc, "workers", "", 0, 0));
  if (overrides.workers) cfg.workers = *overrides.workers;

  {
    json ctrl_out;
    ControllerParts parts;
    const json empty = json::object();
    const json& c = doc.contains("controller") ? doc["controller"] : empty;
    cfg.controller = parse_controller(p, c, "/controller", cfg.system, def.controller, ctrl_out, &parts);
    cfg.primary = parts.primary;
    cfg.fallback = parts.fallback;
    r["controller"] = ctrl_out;
  }

  {
    const std::string ptr = "/grid";
    const json& g = p.object(doc, "grid", "");
    p.check_keys(g, ptr, {"subdiv_exp", "total_exp"});
    if (g.contains("subdiv_exp")) {
      const json& v = g["subdiv_exp"];
      if (!v.is_array() || v.size() != n) p.fail(ptr + "/subdiv_exp", "expected one exponent per dimension");
      for (std::size_t i = 0; i < n; ++i) {
        if (!v[i].is_number_integer() || v[i].get<int>() < 0) {
          p.fail(ptr + "/subdiv_exp/" + std::to_string(i), "expected a non-negative integer");
        }
        cfg.subdiv_exp.push_back(v[i].get<int>());
      }
    } else {
      const auto total = p.integer(g, "total_exp", ptr, def.total_exp, 0);
      if (total > 31) p.fail(ptr + "/total_exp", "at most 2^31 cubes");
      cfg.subdiv_exp = split_exponents(static_cast<int>(total), n);
    }
    int sum = 0;
    for (int k : cfg.subdiv_exp) sum += k;
    if (sum > 31) p.fail(ptr + "/subdiv_exp", "at most 2^31 cubes");
    r["grid"] = {{"subdiv_exp", cfg.subdiv_exp}};
  }

  {
    const std::string ptr = "/map";
    const json& mp = p.object(doc, "map", "");
    p.check_keys(mp, ptr, {"tau", "step", "refine", "lipschitz", "cache", "dump_cache", "load_cache"});
    cfg.tau = p.number(mp, "tau", ptr, def.tau);
    cfg.step = p.number(mp, "step", ptr, 0.01);
    if (!(cfg.tau > 0)) p.fail(ptr + "/tau", "must be positive");
    if (!(cfg.step > 0)) p.fail(ptr + "/step", "must be positive");
    const double ratio = cfg.tau / cfg.step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1) {
      p.fail(ptr + "/tau", "tau must be a positive integer multiple of the step");
    }
    cfg.refine = static_cast<int>(p.integer(mp, "refine", ptr, 1, 1));
    json lip;
    if (!mp.contains("lipschitz") && def.lipschitz) {
      cfg.lipschitz = def.lipschitz;
    } else if (mp.contains("lipschitz") && mp["lipschitz"].is_number()) {
      cfg.lipschitz = p.number(mp, "lipschitz", ptr, 1.0);
    } else {
      const json& l = p.object(mp, "lipschitz", ptr);
      const std::string lp = ptr + "/lipschitz";
      p.check_keys(l, lp, {"value", "pairs", "safety"});
      if (l.contains("value")) {
        p.check_keys(l, lp, {"value"});
        cfg.lipschitz = p.number(l, "value", lp, 1.0);
      } else {
        cfg.lipschitz_pairs = static_cast<std::size_t>(p.integer(l, "pairs", lp, 10000, 1));
        cfg.lipschitz_safety = p.number(l, "safety", lp, 1.2);
        if (!(cfg.lipschitz_safety >= 1)) p.fail(lp + "/safety", "must be at least 1");
      }
    }
    if (cfg.lipschitz) {
      if (!(*cfg.lipschitz > 0)) p.fail(ptr + "/lipschitz", "must be positive");
      lip = {{"value", *cfg.lipschitz}};
    } else {
      lip = {{"pairs", cfg.lipschitz_pairs}, {"safety", cfg.lipschitz_safety}};
    }
    const std::string cache = p.string(mp, "cache", ptr, "memory");
    if (cache != "memory" && cache != "stream") p.fail(ptr + "/cache", "expected \"memory\" or \"stream\"");
    cfg.cache_images = cache == "memory";
    if (mp.contains("dump_cache")) cfg.dump_cache = p.path(p.string(mp, "dump_cache", ptr, ""));
    if (mp.contains("load_cache")) cfg.load_cache = p.path(p.string(mp, "load_cache", ptr, ""));
    r["map"] = {{"tau", cfg.tau}, {"step", cfg.step}, {"refine", cfg.refine}, {"lipschitz", lip}, {"cache", cache}};
    if (!cfg.dump_cache.empty()) r["map"]["dump_cache"] = cfg.dump_cache;
    if (!cfg.load_cache.empty()) r["map"]["load_cache"] = cfg.load_cache;
  }

  {
    const std::string ptr = "/roa";
    const json& ro = p.object(doc, "roa", "");
    p.check_keys(ro, ptr, {"escape", "projection"});
    const std::string esc = p.string(ro, "escape", ptr, "auto");
    if (esc != "auto" && esc != "force") p.fail(ptr + "/escape", "expected \"auto\" or \"force\"");
    cfg.force_star = esc == "force";
    cfg.projection_y = n > 1 ? 1 : 0;
    if (ro.contains("projection")) {
      const json& v = ro["projection"];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned()) {
        p.fail(ptr + "/projection", "expected two dimension indices");
      }
      cfg.projection_x = v[0].get<std::size_t>();
      cfg.projection_y = v[1].get<std::size_t>();
      if (cfg.projection_x >= n || cfg.projection_y >= n || (n > 1 && cfg.projection_x == cfg.projection_y)) {
        p.fail(ptr + "/projection", "expected two distinct dimension indices below " + std::to_string(n));
      }
    }
    r["roa"] = {{"escape", esc}, {"projection", {cfg.projection_x, cfg.projection_y}}};
  }

  {
    const std::string ptr = "/ground_truth";
    const json& gt = p.object(doc, "ground_truth", "");
    p.check_keys(gt, ptr, {"lattice", "horizon", "epsilon"});
    cfg.lattice = def.lattice;
    if (gt.contains("lattice")) {
      const json& v = gt["lattice"];
      if (!v.is_array() || v.size() != n) p.fail(ptr + "/lattice", "expected one count per dimension");
      for (std::size_t i = 0; i < n; ++i) {
        if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 1) {
          p.fail(ptr + "/lattice/" + std::to_string(i), "expected a positive integer");
        }
        cfg.lattice[i] = v[i].get<std::uint32_t>();
      }
    }
    cfg.horizon = static_cast<std::uint64_t>(p.integer(gt, "horizon", ptr, static_cast<std::int64_t>(def.horizon), 1));
    cfg.epsilon = p.number(gt, "epsilon", ptr, 0.1);
    if (!(cfg.epsilon > 0)) p.fail(ptr + "/epsilon", "must be positive");
    r["ground_truth"] = {{"lattice", cfg.lattice}, {"horizon", cfg.horizon}, {"epsilon", cfg.epsilon}};
  }

  {
    const std::string ptr = "/hybrid_eval";
    const json& he = p.object(doc, "hybrid_eval", "");
    p.check_keys(he, ptr, {"samples", "horizon", "epsilon"});
    cfg.hybrid_samples = static_cast<std::size_t>(p.integer(he, "samples", ptr, 1000, 1));
    cfg.hybrid_horizon = static_cast<std::uint64_t>(
        p.integer(he, "horizon", ptr, static_cast<std::int64_t>(def.hybrid_horizon), 1));
    cfg.hybrid_epsilon = p.number(he, "epsilon", ptr, 0.1);
    if (!(cfg.hybrid_epsilon > 0)) p.fail(ptr + "/epsilon", "must be positive");
    r["hybrid_eval"] = {{"samples", cfg.hybrid_samples}, {"horizon", cfg.hybrid_horizon}, {"epsilon", cfg.hybrid_epsilon}};
  }

  r["seed"] = cfg.seed;
  r["workers"] = cfg.workers;
  return cfg;
}

Config load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  std::string base = std::filesystem::path(path).parent_path().string();
  if (base.empty()) base = ".";
  return parse_config(ss.str(), path, base, overrides);
}

}  // namespace mg
