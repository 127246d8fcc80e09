#include "mg/outer_approx.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "mg/parallel.hpp"

namespace mg {

namespace {

constexpr char kCacheMagic[8] = {'M', 'G', 'C', 'A', 'C', 'H', 'E', '1'};

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw IoError("image cache: truncated file");
  return v;
}

std::string describe_point(const Vec& x) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

}  // namespace

MultivaluedMap::MultivaluedMap(CubicalGrid grid, double tau, double lipschitz, int refine)
    : grid_(std::move(grid)), tau_(tau), lipschitz_(lipschitz), refine_(refine) {
  if (!(lipschitz > 0) || !std::isfinite(lipschitz)) {
    throw InvalidArgument("outer approximation: Lipschitz estimate must be positive and finite");
  }
  if (refine < 1) throw InvalidArgument("outer approximation: refine must be at least 1");
  radius_ = lipschitz_ * grid_.diameter() / (2.0 * refine_);
}

MultivaluedMap::MultivaluedMap(CubicalGrid grid, const TimeTauMap& map,
                               const OuterApproxOptions& options)
    : MultivaluedMap(std::move(grid), map.tau(), options.lipschitz, options.refine) {
  const ControlSystem& sys = map.system();
  const CubicalGrid reference(sys.state_bounds.lo, sys.state_bounds.hi,
                              std::vector<int>(sys.n, 0), sys.periodic);
  if (!grid_.same_domain(reference)) {
    throw InvalidArgument("outer approximation: grid does not cover the system's state space");
  }
  const std::size_t n = grid_.dims();

  sample_counts_.resize(n);
  sample_count_ = 1;
  for (std::size_t i = 0; i < n; ++i) {
    sample_counts_[i] = static_cast<std::uint32_t>(refine_) * grid_.cells(i) +
                        (grid_.periodic(i) ? 0 : 1);
    sample_count_ *= sample_counts_[i];
  }
  sample_images_.assign(sample_count_ * n, 0.0);
  sample_star_.assign(sample_count_, 0);

  const std::uint64_t before = map.step_counter();
  const double h = 1.0 / refine_;
  parallel_for(sample_count_, options.workers, [&](std::size_t s) {
    Vec x(static_cast<Eigen::Index>(n));
    std::size_t rem = s;
    for (std::size_t i = n; i-- > 0;) {
      const std::size_t g = rem % sample_counts_[i];
      rem /= sample_counts_[i];
      const auto ii = static_cast<Eigen::Index>(i);
      x[ii] = grid_.lower()[ii] + static_cast<double>(g) * h * grid_.width(i);
    }
    TimeTauMap::Result r;
    try {
      r = map.propagate_checked(x);
    } catch (const PropagationError& e) {
      const auto cube = grid_.cube_of_point(x);
      throw PropagationError(std::string(e.what()) + " from sample " + describe_point(x) +
                             " of cube " + (cube ? std::to_string(*cube) : std::string("?")));
    }
    bool star = r.left_domain;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      sample_images_[s * n + i] = r.state[ii];
      if (!grid_.periodic(i) && (r.state[ii] - radius_ < grid_.lower()[ii] ||
                                 r.state[ii] + radius_ > grid_.upper()[ii])) {
        star = true;
      }
    }
    sample_star_[s] = star ? 1 : 0;
  });
  propagation_steps_ = map.step_counter() - before;
  has_star_ = options.force_star ||
              std::any_of(sample_star_.begin(), sample_star_.end(), [](unsigned char c) { return c; });

  if (options.cache_images) {
    const std::size_t count = grid_.cube_count();
    std::vector<Image> images(count);
    parallel_for(count, options.workers,
                 [&](std::size_t c) { images[c] = build_image(static_cast<CubeIndex>(c)); });
    offsets_.assign(count + 1, 0);
    for (std::size_t c = 0; c < count; ++c) offsets_[c + 1] = offsets_[c] + images[c].cubes.size();
    targets_.resize(offsets_.back());
    cube_star_.assign(count, 0);
    for (std::size_t c = 0; c < count; ++c) {
      std::copy(images[c].cubes.begin(), images[c].cubes.end(),
                targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[c]));
      cube_star_[c] = images[c].star ? 1 : 0;
      std::vector<CubeIndex>().swap(images[c].cubes);
    }
  }
}

std::size_t MultivaluedMap::sample_index(const std::vector<std::uint32_t>& cube_coords,
                                         const std::vector<std::uint32_t>& offset) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < grid_.dims(); ++i) {
    std::size_t g = static_cast<std::size_t>(refine_) * cube_coords[i] + offset[i];
    if (grid_.periodic(i)) g %= sample_counts_[i];
    idx = idx * sample_counts_[i] + g;
  }
  return idx;
}

MultivaluedMap::Image MultivaluedMap::build_image(CubeIndex cube) const {
  const std::size_t n = grid_.dims();
  const auto coords = grid_.coords_of(cube);
  Image img;
  std::vector<std::uint32_t> offset(n, 0);
  Vec center(static_cast<Eigen::Index>(n));
  while (true) {
    const std::size_t s = sample_index(coords, offset);
    for (std::size_t i = 0; i < n; ++i) center[static_cast<Eigen::Index>(i)] = sample_images_[s * n + i];
    bool escape = false;
    grid_.append_cubes_intersecting_ball(center, radius_, img.cubes, escape);
    if (escape || sample_star_[s]) img.star = true;
    // Next sample offset in {0..refine}^n.
    std::size_t i = n;
    while (i-- > 0) {
      if (offset[i] < static_cast<std::uint32_t>(refine_)) {
        ++offset[i];
        break;
      }
      offset[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  std::sort(img.cubes.begin(), img.cubes.end());
  img.cubes.erase(std::unique(img.cubes.begin(), img.cubes.end()), img.cubes.end());
  return img;
}

MultivaluedMap::Image MultivaluedMap::image(CubeIndex cube) const {
  if (cube >= grid_.cube_count()) throw InvalidArgument("image: cube index out of range");
  if (cached()) {
    Image img;
    img.cubes.assign(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[cube]),
                     targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[cube + 1]));
    img.star = cube_star_[cube] != 0;
    return img;
  }
  return build_image(cube);
}

Vertex MultivaluedMap::vertex_count() const {
  return static_cast<Vertex>(grid_.cube_count() + (has_star_ ? 1 : 0));
}

std::optional<Vertex> MultivaluedMap::star_vertex() const {
  if (!has_star_) return std::nullopt;
  return static_cast<Vertex>(grid_.cube_count());
}

void MultivaluedMap::successors(Vertex v, std::vector<Vertex>& out) const {
  evaluations_->fetch_add(1);
  if (v == grid_.cube_count()) return;  // escape node is a sink
  if (cached()) {
    out.insert(out.end(), targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
               targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
    if (cube_star_[v]) out.push_back(static_cast<Vertex>(grid_.cube_count()));
    return;
  }
  Image img = build_image(v);
  out.insert(out.end(), img.cubes.begin(), img.cubes.end());
  if (img.star) out.push_back(static_cast<Vertex>(grid_.cube_count()));
}

void MultivaluedMap::save_cache(const std::string& path) const {
  if (!cached()) throw InvalidArgument("image cache: map was built in streaming mode");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("image cache: cannot open '" + path + "' for writing");
  os.write(kCacheMagic, sizeof kCacheMagic);
  write_pod(os, grid_.hash());
  write_pod(os, tau_);
  write_pod(os, lipschitz_);
  write_pod(os, static_cast<std::uint32_t>(refine_));
  write_pod(os, static_cast<std::uint32_t>(has_star_ ? 1 : 0));
  write_pod(os, static_cast<std::uint64_t>(grid_.cube_count()));
  os.write(reinterpret_cast<const char*>(offsets_.data()),
           static_cast<std::streamsize>(offsets_.size() * sizeof(std::uint64_t)));
  os.write(reinterpret_cast<const char*>(targets_.data()),
           static_cast<std::streamsize>(targets_.size() * sizeof(CubeIndex)));
  std::vector<unsigned char> bits((cube_star_.size() + 7) / 8, 0);
  for (std::size_t c = 0; c < cube_star_.size(); ++c) {
    if (cube_star_[c]) bits[c / 8] |= static_cast<unsigned char>(1u << (c % 8));
  }
  os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (!os) throw IoError("image cache: write failed for '" + path + "'");
}

MultivaluedMap MultivaluedMap::load_cache(const std::string& path, CubicalGrid grid, double tau,
                                          double lipschitz, int refine) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("image cache: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) {
    throw IoError("image cache: '" + path + "' is not an image cache");
  }
  const auto hash = read_pod<std::uint64_t>(is);
  const auto file_tau = read_pod<double>(is);
  const auto file_l = read_pod<double>(is);
  const auto file_refine = read_pod<std::uint32_t>(is);
  const auto star = read_pod<std::uint32_t>(is);
  const auto count = read_pod<std::uint64_t>(is);
  if (hash != grid.hash() || count != grid.cube_count() || file_tau != tau || file_l != lipschitz ||
      file_refine != static_cast<std::uint32_t>(refine)) {
    throw IoError("image cache: header of '" + path + "' does not match the requested map");
  }
  MultivaluedMap m(std::move(grid), tau, lipschitz, refine);
  m.has_star_ = star != 0;
  m.offsets_.resize(count + 1);
  is.read(reinterpret_cast<char*>(m.offsets_.data()),
          static_cast<std::streamsize>(m.offsets_.size() * sizeof(std::uint64_t)));
  if (!is || m.offsets_.front() != 0) throw IoError("image cache: corrupt offsets");
  for (std::size_t c = 0; c < count; ++c) {
    if (m.offsets_[c + 1] < m.offsets_[c]) throw IoError("image cache: corrupt offsets");
  }
  m.targets_.resize(m.offsets_.back());
  is.read(reinterpret_cast<char*>(m.targets_.data()),
          static_cast<std::streamsize>(m.targets_.size() * sizeof(CubeIndex)));
  std::vector<unsigned char> bits((count + 7) / 8);
  is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (!is) throw IoError("image cache: truncated file");
  for (CubeIndex t : m.targets_) {
    if (t >= count) throw IoError("image cache: cube index out of range");
  }
  m.cube_star_.resize(count);
  for (std::size_t c = 0; c < count; ++c) m.cube_star_[c] = (bits[c / 8] >> (c % 8)) & 1u;
  if (count == 0) m.offsets_.assign(1, 0);
  return m;
}

LipschitzEstimate estimate_lipschitz(const TimeTauMap& map, const CubicalGrid& grid,
                                     std::size_t pairs, double safety, std::uint64_t seed,
                                     unsigned workers) {
  if (pairs < 1) throw InvalidArgument("estimate_lipschitz: need at least one pair");
  if (!(safety >= 1)) throw InvalidArgument("estimate_lipschitz: safety factor must be >= 1");
  const std::size_t n = grid.dims();

  // Pairs are drawn sequentially so a longer run extends a shorter one. The
  // partner point is drawn from the closed cube of the first point: the
  // covering argument only compares points of one cube, and the map may be
  // discontinuous across cube faces (e.g. a feedback law that wraps angles).
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec> a(pairs), b(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    Vec x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      x[ii] = grid.lower()[ii] + unit(rng) * grid.period(i);
    }
    const auto cube = grid.cube_of_point(x);
    const Orthotope box = grid.cube_bounds(cube ? *cube : 0);
    Vec y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      y[ii] = box.lo[ii] + unit(rng) * (box.hi[ii] - box.lo[ii]);
    }
    a[k] = x;
    b[k] = y;
  }
  std::vector<double> ratio(pairs, 0.0);
  parallel_for(pairs, workers, [&](std::size_t k) {
    const double sep = grid.distance(a[k], b[k]);
    if (!(sep > 0)) return;
    const Vec fa = map.propagate(a[k]);
    const Vec fb = map.propagate(b[k]);
    ratio[k] = grid.distance(fa, fb) / sep;
  });
  LipschitzEstimate est;
  est.pairs = pairs;
  est.max_ratio = *std::max_element(ratio.begin(), ratio.end());
  est.value = est.max_ratio * safety;
  return est;
}

}  // namespace mg
