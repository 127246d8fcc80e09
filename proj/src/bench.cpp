#include "mg/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mg/parallel.hpp"

namespace mg {

namespace {

constexpr char kTruthMagic[8] = {'M', 'G', 'T', 'R', 'U', 'T', 'H', '1'};

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw IoError("ground truth: truncated file");
  return v;
}

}  // namespace

Trajectory simulate_to_goal(const ControlSystem& system, const Controller& controller, Vec x,
                            const Vec& goal, double epsilon, std::uint64_t horizon, double step) {
  Trajectory t;
  x = system.wrap(x);
  while (true) {
    if (!system.inside(x)) {
      t.left = true;
      return t;
    }
    if (system.distance(x, goal) <= epsilon) {
      t.reached = true;
      return t;
    }
    if (t.steps == horizon) return t;
    x = system.wrap(rk4_step(system, controller, x, step));
    ++t.steps;
  }
}

Vec GroundTruth::point(std::size_t index) const {
  const std::size_t n = counts.size();
  Vec x(static_cast<Eigen::Index>(n));
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t j = index % counts[i];
    index /= counts[i];
    const auto ii = static_cast<Eigen::Index>(i);
    x[ii] = lower[ii] + (static_cast<double>(j) + 0.5) * (upper[ii] - lower[ii]) / counts[i];
  }
  return x;
}

std::size_t GroundTruth::reached_count() const {
  std::size_t c = 0;
  for (unsigned char r : reached) c += r;
  return c;
}

GroundTruth brute_force_roa(const ControlSystem& system, const Controller& controller,
                            const std::vector<std::uint32_t>& counts, std::uint64_t horizon,
                            double epsilon, double step, unsigned workers) {
  if (counts.size() != system.n) throw InvalidArgument("ground truth: lattice dimension mismatch");
  if (!(epsilon > 0)) throw InvalidArgument("ground truth: epsilon must be positive");
  if (horizon < 1) throw InvalidArgument("ground truth: horizon must be at least 1");
  GroundTruth truth;
  truth.counts = counts;
  truth.lower = system.state_bounds.lo;
  truth.upper = system.state_bounds.hi;
  truth.periodic = system.periodic;
  truth.horizon = horizon;
  truth.epsilon = epsilon;
  std::size_t total = 1;
  for (std::uint32_t c : counts) {
    if (c == 0) throw InvalidArgument("ground truth: lattice counts must be positive");
    total *= c;
  }
  truth.reached.assign(total, 0);
  parallel_for(total, workers, [&](std::size_t k) {
    Trajectory t;
    try {
      t = simulate_to_goal(system, controller, truth.point(k), system.goal, epsilon, horizon, step);
    } catch (const PropagationError&) {
      return;
    }
    truth.reached[k] = t.reached ? 1 : 0;
  });
  return truth;
}

void write_truth(const std::string& path, const GroundTruth& truth) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("ground truth: cannot open '" + path + "' for writing");
  os.write(kTruthMagic, sizeof kTruthMagic);
  write_pod(os, static_cast<std::uint32_t>(truth.counts.size()));
  for (std::size_t i = 0; i < truth.counts.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    write_pod(os, truth.counts[i]);
    write_pod(os, truth.lower[ii]);
    write_pod(os, truth.upper[ii]);
    write_pod(os, static_cast<std::uint8_t>(truth.periodic[i] ? 1 : 0));
  }
  write_pod(os, truth.horizon);
  write_pod(os, truth.epsilon);
  write_pod(os, truth.system_hash);
  std::vector<unsigned char> bits((truth.reached.size() + 7) / 8, 0);
  for (std::size_t k = 0; k < truth.reached.size(); ++k) {
    if (truth.reached[k]) bits[k / 8] |= static_cast<unsigned char>(1u << (k % 8));
  }
  os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (!os) throw IoError("ground truth: write failed for '" + path + "'");
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("ground truth: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kTruthMagic, sizeof magic) != 0) {
    throw IoError("ground truth: '" + path + "' is not a ground-truth file");
  }
  GroundTruth t;
  const auto n = read_pod<std::uint32_t>(is);
  if (n < 1 || n > static_cast<std::uint32_t>(kMaxDim)) throw IoError("ground truth: bad dimension");
  t.counts.resize(n);
  t.lower.resize(n);
  t.upper.resize(n);
  t.periodic.resize(n);
  std::size_t total = 1;
  for (std::uint32_t i = 0; i < n; ++i) {
    t.counts[i] = read_pod<std::uint32_t>(is);
    t.lower[i] = read_pod<double>(is);
    t.upper[i] = read_pod<double>(is);
    t.periodic[i] = read_pod<std::uint8_t>(is) != 0;
    if (t.counts[i] == 0) throw IoError("ground truth: zero lattice count");
    total *= t.counts[i];
  }
  t.horizon = read_pod<std::uint64_t>(is);
  t.epsilon = read_pod<double>(is);
  t.system_hash = read_pod<std::uint64_t>(is);
  std::vector<unsigned char> bits((total + 7) / 8);
  is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (!is) throw IoError("ground truth: truncated file");
  t.reached.resize(total);
  for (std::size_t k = 0; k < total; ++k) t.reached[k] = (bits[k / 8] >> (k % 8)) & 1u;
  return t;
}

void write_truth_ppm(std::ostream& os, const GroundTruth& truth) {
  if (truth.counts.size() != 2) throw InvalidArgument("ground truth raster needs a 2-D lattice");
  const std::uint32_t w = truth.counts[0], h = truth.counts[1];
  os << "P3\n" << w << ' ' << h << "\n255\n";
  for (std::uint32_t row = 0; row < h; ++row) {
    const std::uint32_t j = h - 1 - row;
    for (std::uint32_t i = 0; i < w; ++i) {
      const int v = truth.reached[static_cast<std::size_t>(i) * h + j] ? 0 : 255;
      os << v << ' ' << v << ' ' << v << (i + 1 == w ? '\n' : ' ');
    }
  }
}

GoalNode goal_node(const MorseGraph& mg, const CubicalGrid& grid, const Vec& goal, double epsilon) {
  GoalNode out;
  const auto query = grid.cubes_intersecting_ball(goal, epsilon);
  const auto cell = morse_node_of_cube(mg, grid.cube_count());
  const auto minimal = minimal_nodes(mg);
  std::vector<std::uint32_t> hits;
  for (CubeIndex c : query.cubes) {
    const std::int32_t p = cell[c];
    if (p < 0) continue;
    const auto up = static_cast<std::uint32_t>(p);
    if (mg.star_node && up == *mg.star_node) continue;
    if (!std::binary_search(minimal.begin(), minimal.end(), up)) continue;
    if (std::find(hits.begin(), hits.end(), up) == hits.end()) hits.push_back(up);
  }
  std::sort(hits.begin(), hits.end());
  if (hits.size() == 1) {
    out.node = hits[0];
  } else if (hits.empty()) {
    out.diagnostic = "no minimal Morse node meets the goal ball";
  } else {
    std::ostringstream os;
    os << "several minimal Morse nodes meet the goal ball:";
    for (std::uint32_t p : hits) os << ' ' << p;
    out.diagnostic = os.str();
  }
  return out;
}

double unidentified_ratio(const MorseGraph& mg, const RoAAssignment& assign) {
  if (assign.cube_count() == 0) return 0;
  const auto minimal = minimal_nodes(mg);
  std::vector<unsigned char> identified_set(assign.sets.size(), 0);
  for (std::size_t s = 0; s < assign.sets.size(); ++s) {
    const auto& set = assign.sets[s];
    identified_set[s] =
        set.size() == 1 && std::binary_search(minimal.begin(), minimal.end(), set[0]);
  }
  std::size_t bad = 0;
  for (std::uint32_t s : assign.set_of_cube) bad += identified_set[s] ? 0 : 1;
  return static_cast<double>(bad) / static_cast<double>(assign.cube_count());
}

ComparisonReport compare_cubes(const CubicalGrid& grid, const std::vector<CubeIndex>& roa,
                               std::optional<std::uint32_t> goal, double unidentified,
                               const GroundTruth& truth) {
  const std::size_t n = grid.dims();
  bool same = truth.counts.size() == n;
  for (std::size_t i = 0; same && i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double tol = 1e-12 * (1 + std::abs(grid.period(i)));
    same = std::abs(truth.lower[ii] - grid.lower()[ii]) <= tol &&
           std::abs(truth.upper[ii] - grid.upper()[ii]) <= tol &&
           truth.periodic[i] == grid.periodic(i);
  }
  if (!same) throw InvalidArgument("compare: ground truth and analysis cover different domains");

  ComparisonReport r;
  r.goal_node = goal;
  r.lattice_points = truth.point_count();
  r.reached_points = truth.reached_count();
  r.unidentified_ratio = unidentified;

  std::vector<std::uint32_t> points(grid.cube_count(), 0), hits(grid.cube_count(), 0);
  for (std::size_t k = 0; k < truth.point_count(); ++k) {
    const auto cube = grid.cube_of_point(truth.point(k));
    if (!cube) continue;
    ++points[*cube];
    hits[*cube] += truth.reached[k];
  }
  r.roa_cubes = roa.size();
  for (CubeIndex c : roa) {
    if (c >= grid.cube_count()) throw InvalidArgument("compare: RoA cube index out of range");
    if (hits[c] == points[c]) {
      r.tp_points += points[c];
    } else {
      ++r.fp_count;
    }
  }
  r.tp_ratio = r.reached_points ? static_cast<double>(r.tp_points) / r.reached_points : 0.0;
  return r;
}

ComparisonReport compare(const CubicalGrid& grid, const MorseGraph& mg,
                         const RoAAssignment& assign, std::optional<std::uint32_t> goal,
                         const GroundTruth& truth) {
  static const std::vector<CubeIndex> none;
  return compare_cubes(grid, goal ? maximal_roa(assign, mg, *goal) : none, goal,
                       unidentified_ratio(mg, assign), truth);
}

void write_report(std::ostream& os, const ComparisonReport& r) {
  os << std::setprecision(17);
  os << "goal_node=" << (r.goal_node ? std::to_string(*r.goal_node) : std::string("none")) << '\n';
  os << "tp_ratio=" << r.tp_ratio << '\n';
  os << "fp_count=" << r.fp_count << '\n';
  os << "unidentified_ratio=" << r.unidentified_ratio << '\n';
  os << "propagation_steps=" << r.propagation_steps << '\n';
  os << "roa_cubes=" << r.roa_cubes << '\n';
  os << "tp_points=" << r.tp_points << '\n';
  os << "reached_points=" << r.reached_points << '\n';
  os << "lattice_points=" << r.lattice_points << '\n';
}

void write_report_table(std::ostream& os, const ComparisonReport& r) {
  auto row = [&](const char* key, const std::string& value) {
    os << std::left << std::setw(20) << key << value << '\n';
  };
  auto pct = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100 * v << " %";
    return s.str();
  };
  row("goal node", r.goal_node ? std::to_string(*r.goal_node) : std::string("none"));
  row("true positives", pct(r.tp_ratio));
  row("false positives", std::to_string(r.fp_count));
  row("unidentified", pct(r.unidentified_ratio));
  row("propagation steps", std::to_string(r.propagation_steps));
  row("RoA cubes", std::to_string(r.roa_cubes));
}

}  // namespace mg
