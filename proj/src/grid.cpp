#include "mg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace mg {

bool Orthotope::contains(const Vec& x) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
  }
  return true;
}

double wrap_coordinate(double v, double lo, double hi) {
  if (v >= lo && v < hi) return v;
  const double period = hi - lo;
  double t = std::fmod(v - lo, period);
  if (t < 0) t += period;
  double r = lo + t;
  if (r >= hi) r = lo;
  return r;
}

double periodic_difference(double a, double b, double period) {
  double d = std::fmod(a - b, period);
  if (d > period / 2) d -= period;
  if (d < -period / 2) d += period;
  return d;
}

std::vector<int> split_exponents(int total, std::size_t dims) {
  if (dims == 0) throw InvalidArgument("split_exponents: zero dimensions");
  if (total < 0) throw InvalidArgument("split_exponents: negative total");
  std::vector<int> k(dims, total / static_cast<int>(dims));
  for (std::size_t i = 0; i < static_cast<std::size_t>(total) % dims; ++i) ++k[i];
  return k;
}

CubicalGrid::CubicalGrid(Vec lower, Vec upper, std::vector<int> subdiv_exp,
                         std::vector<bool> periodic)
    : lower_(std::move(lower)),
      upper_(std::move(upper)),
      subdiv_exp_(std::move(subdiv_exp)),
      periodic_(std::move(periodic)) {
  const std::size_t n = static_cast<std::size_t>(lower_.size());
  if (n == 0 || n > static_cast<std::size_t>(kMaxDim)) {
    throw InvalidArgument("grid: dimension must be in [1, " +
                          std::to_string(kMaxDim) + "]");
  }
  if (static_cast<std::size_t>(upper_.size()) != n || subdiv_exp_.size() != n ||
      periodic_.size() != n) {
    throw InvalidArgument("grid: bounds, exponents and periodic flags differ in length");
  }
  int total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!(upper_[ii] > lower_[ii]) || !std::isfinite(lower_[ii]) ||
        !std::isfinite(upper_[ii])) {
      throw InvalidArgument("grid: upper bound must exceed lower bound in dim " +
                            std::to_string(i));
    }
    if (subdiv_exp_[i] < 0) throw InvalidArgument("grid: negative subdivision exponent");
    total += subdiv_exp_[i];
  }
  if (total > 31) throw InvalidArgument("grid: more than 2^31 cubes requested");

  cells_.resize(n);
  width_.resize(n);
  stride_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells_[i] = 1u << subdiv_exp_[i];
    width_[i] = (upper_[static_cast<Eigen::Index>(i)] - lower_[static_cast<Eigen::Index>(i)]) /
                static_cast<double>(cells_[i]);
  }
  std::uint64_t s = 1;
  for (std::size_t i = n; i-- > 0;) {
    stride_[i] = s;
    s *= cells_[i];
  }
  cube_count_ = s;
}

void CubicalGrid::check_dims(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != dims()) {
    throw DomainError("grid: point has " + std::to_string(x.size()) +
                      " components, grid has " + std::to_string(dims()));
  }
}

std::vector<std::uint32_t> CubicalGrid::coords_of(CubeIndex cube) const {
  std::vector<std::uint32_t> c(dims());
  std::uint64_t rem = cube;
  for (std::size_t i = 0; i < dims(); ++i) {
    c[i] = static_cast<std::uint32_t>(rem / stride_[i]);
    rem %= stride_[i];
  }
  return c;
}

CubeIndex CubicalGrid::index_of(const std::vector<std::uint32_t>& coords) const {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < dims(); ++i) idx += coords[i] * stride_[i];
  return static_cast<CubeIndex>(idx);
}

std::optional<CubeIndex> CubicalGrid::cube_of_point(const Vec& x) const {
  check_dims(x);
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < dims(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double v = x[ii];
    if (!std::isfinite(v)) return std::nullopt;
    if (periodic_[i]) {
      v = wrap_coordinate(v, lower_[ii], upper_[ii]);
    } else if (v < lower_[ii] || v > upper_[ii]) {
      return std::nullopt;
    }
    auto j = static_cast<std::int64_t>(std::floor((v - lower_[ii]) / width_[i]));
    j = std::clamp<std::int64_t>(j, 0, cells_[i] - 1);
    // Agree with face() exactly so lookups match cube_bounds().
    if (v < face(i, j) && j > 0) --j;
    if (j + 1 < cells_[i] && v >= face(i, j + 1)) ++j;
    idx += static_cast<std::uint64_t>(j) * stride_[i];
  }
  return static_cast<CubeIndex>(idx);
}

std::vector<Vec> CubicalGrid::corners(CubeIndex cube) const {
  const auto c = coords_of(cube);
  const std::size_t n = dims();
  std::vector<Vec> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Vec p(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = (mask >> (n - 1 - i)) & 1u;
      p[static_cast<Eigen::Index>(i)] = face(i, static_cast<std::int64_t>(c[i]) + (up ? 1 : 0));
    }
    out.push_back(p);
  }
  return out;
}

Orthotope CubicalGrid::cube_bounds(CubeIndex cube) const {
  const auto c = coords_of(cube);
  Orthotope box{Vec(lower_.size()), Vec(lower_.size())};
  for (std::size_t i = 0; i < dims(); ++i) {
    box.lo[static_cast<Eigen::Index>(i)] = face(i, c[i]);
    box.hi[static_cast<Eigen::Index>(i)] = face(i, static_cast<std::int64_t>(c[i]) + 1);
  }
  return box;
}

Vec CubicalGrid::cube_center(CubeIndex cube) const {
  const Orthotope b = cube_bounds(cube);
  return (b.lo + b.hi) / 2;
}

double CubicalGrid::diameter() const {
  double s = 0;
  for (double w : width_) s += w * w;
  return std::sqrt(s);
}

CubicalGrid::BallQuery CubicalGrid::cubes_intersecting_ball(const Vec& center,
                                                            double radius) const {
  BallQuery q;
  append_cubes_intersecting_ball(center, radius, q.cubes, q.escape);
  std::sort(q.cubes.begin(), q.cubes.end());
  return q;
}

void CubicalGrid::append_cubes_intersecting_ball(const Vec& center, double radius,
                                                 std::vector<CubeIndex>& out,
                                                 bool& escape) const {
  check_dims(center);
  if (!(radius >= 0)) throw InvalidArgument("ball query: negative radius");
  const std::size_t n = dims();

  // Per dimension: candidate cells with their squared distance to the
  // center along that axis.
  struct Candidate {
    std::uint32_t cell;
    double d2;
  };
  std::vector<Candidate> cand[kMaxDim];
  const double r2 = radius * radius;
  bool empty = false;

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double c = center[ii];
    if (!std::isfinite(c)) {
      escape = true;
      return;
    }
    std::int64_t jlo = 0;
    std::int64_t jhi = 0;
    if (periodic_[i]) {
      // With c wrapped into the period, the images one period away on either
      // side hold every cell's nearest copy.
      const auto m = static_cast<std::int64_t>(cells_[i]);
      c = wrap_coordinate(c, lower_[ii], upper_[ii]);
      const double span = std::min(radius, period(i));
      jlo = std::max<std::int64_t>(-m, static_cast<std::int64_t>(std::floor((c - span - lower_[ii]) / width_[i])) - 1);
      jhi = std::min<std::int64_t>(2 * m - 1, static_cast<std::int64_t>(std::floor((c + span - lower_[ii]) / width_[i])) + 1);
    } else {
      if (c - radius < lower_[ii] || c + radius > upper_[ii]) escape = true;
      jlo = static_cast<std::int64_t>(std::floor((c - radius - lower_[ii]) / width_[i])) - 1;
      jhi = static_cast<std::int64_t>(std::floor((c + radius - lower_[ii]) / width_[i])) + 1;
      jlo = std::max<std::int64_t>(jlo, 0);
      jhi = std::min<std::int64_t>(jhi, static_cast<std::int64_t>(cells_[i]) - 1);
    }
    for (std::int64_t j = jlo; j <= jhi; ++j) {
      const double a = face(i, j);
      const double b = face(i, j + 1);
      const double gap = std::max({0.0, a - c, c - b});
      const double d2 = gap * gap;
      if (d2 > r2) continue;
      const auto m = static_cast<std::int64_t>(cells_[i]);
      const auto cell = static_cast<std::uint32_t>(((j % m) + m) % m);
      auto it = std::find_if(cand[i].begin(), cand[i].end(),
                             [cell](const Candidate& x) { return x.cell == cell; });
      if (it == cand[i].end()) {
        cand[i].push_back({cell, d2});
      } else {
        it->d2 = std::min(it->d2, d2);
      }
    }
    if (cand[i].empty()) empty = true;
  }
  if (empty) return;

  // Odometer over the candidate product, pruning on the running distance.
  std::size_t pos[kMaxDim] = {};
  double partial[kMaxDim + 1] = {};
  std::uint64_t base[kMaxDim + 1] = {};
  std::size_t level = 0;
  while (true) {
    if (pos[level] < cand[level].size()) {
      const Candidate& c = cand[level][pos[level]];
      const double d2 = partial[level] + c.d2;
      if (d2 <= r2) {
        const std::uint64_t idx = base[level] + c.cell * stride_[level];
        if (level + 1 == n) {
          out.push_back(static_cast<CubeIndex>(idx));
          ++pos[level];
        } else {
          partial[level + 1] = d2;
          base[level + 1] = idx;
          ++level;
          pos[level] = 0;
        }
      } else {
        ++pos[level];
      }
    } else {
      if (level == 0) break;
      --level;
      ++pos[level];
    }
  }
}

Vec CubicalGrid::wrap(const Vec& x) const {
  check_dims(x);
  Vec y = x;
  for (std::size_t i = 0; i < dims(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (periodic_[i]) y[ii] = wrap_coordinate(y[ii], lower_[ii], upper_[ii]);
  }
  return y;
}

Vec CubicalGrid::difference(const Vec& a, const Vec& b) const {
  check_dims(a);
  check_dims(b);
  Vec d = a - b;
  for (std::size_t i = 0; i < dims(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (periodic_[i]) d[ii] = periodic_difference(a[ii], b[ii], period(i));
  }
  return d;
}

double CubicalGrid::distance(const Vec& a, const Vec& b) const {
  return difference(a, b).norm();
}

bool CubicalGrid::inside(const Vec& x) const {
  check_dims(x);
  for (std::size_t i = 0; i < dims(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!std::isfinite(x[ii])) return false;
    if (!periodic_[i] && (x[ii] < lower_[ii] || x[ii] > upper_[ii])) return false;
  }
  return true;
}

namespace {

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

}  // namespace

std::uint64_t CubicalGrid::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < dims(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double lo = lower_[ii];
    const double hi = upper_[ii];
    const std::int32_t k = subdiv_exp_[i];
    const unsigned char p = periodic_[i] ? 1 : 0;
    fnv_mix(h, &lo, sizeof lo);
    fnv_mix(h, &hi, sizeof hi);
    fnv_mix(h, &k, sizeof k);
    fnv_mix(h, &p, sizeof p);
  }
  return h;
}

bool CubicalGrid::same_domain(const CubicalGrid& other) const {
  if (dims() != other.dims()) return false;
  for (std::size_t i = 0; i < dims(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double tol = 1e-9 * std::max(1.0, std::abs(period(i)));
    if (std::abs(lower_[ii] - other.lower_[ii]) > tol) return false;
    if (std::abs(upper_[ii] - other.upper_[ii]) > tol) return false;
    if (periodic_[i] != other.periodic_[i]) return false;
  }
  return true;
}

bool CubicalGrid::operator==(const CubicalGrid& other) const {
  return lower_ == other.lower_ && upper_ == other.upper_ &&
         subdiv_exp_ == other.subdiv_exp_ && periodic_ == other.periodic_;
}

void write_grid_section(std::ostream& os, const CubicalGrid& grid) {
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < grid.dims(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    os << grid.lower()[ii] << ' ' << grid.upper()[ii] << ' ' << grid.subdiv_exp(i) << ' '
       << (grid.periodic(i) ? 1 : 0) << '\n';
  }
  os.precision(old);
}

CubicalGrid read_grid_section(std::istream& is, std::size_t dims) {
  if (dims == 0 || dims > static_cast<std::size_t>(kMaxDim)) {
    throw IoError("grid section: unsupported dimension " + std::to_string(dims));
  }
  Vec lo(static_cast<Eigen::Index>(dims));
  Vec hi(static_cast<Eigen::Index>(dims));
  std::vector<int> k(dims);
  std::vector<bool> per(dims);
  for (std::size_t i = 0; i < dims; ++i) {
    int p = 0;
    if (!(is >> lo[static_cast<Eigen::Index>(i)] >> hi[static_cast<Eigen::Index>(i)] >> k[i] >>
          p)) {
      throw IoError("grid section: malformed line for dimension " + std::to_string(i));
    }
    if (p != 0 && p != 1) throw IoError("grid section: periodic flag must be 0 or 1");
    per[i] = p == 1;
  }
  try {
    return CubicalGrid(lo, hi, k, per);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("grid section: ") + e.what());
  }
}

bool CubeSet::contains_point(const Vec& x) const {
  const auto c = grid.cube_of_point(x);
  return c && std::binary_search(cubes.begin(), cubes.end(), *c);
}

void write_cube_set(std::ostream& os, const CubeSet& set) {
  os << "cubeset " << set.grid.dims() << '\n';
  write_grid_section(os, set.grid);
  os << "count " << set.cubes.size() << '\n';
  for (CubeIndex c : set.cubes) os << c << '\n';
}

CubeSet read_cube_set(std::istream& is) {
  std::string tag;
  std::size_t n = 0;
  if (!(is >> tag >> n) || tag != "cubeset") throw IoError("cube set: missing 'cubeset <n>' header");
  CubicalGrid grid = read_grid_section(is, n);
  std::size_t count = 0;
  if (!(is >> tag >> count) || tag != "count") throw IoError("cube set: missing 'count' line");
  std::vector<CubeIndex> cubes(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t c = 0;
    if (!(is >> c)) throw IoError("cube set: truncated index list");
    if (c >= grid.cube_count()) throw IoError("cube set: cube index out of range");
    cubes[i] = static_cast<CubeIndex>(c);
  }
  std::sort(cubes.begin(), cubes.end());
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
  return CubeSet{std::move(grid), std::move(cubes)};
}

}  // namespace mg
