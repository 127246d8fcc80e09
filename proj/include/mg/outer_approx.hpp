#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mg/digraph.hpp"
#include "mg/dynamics.hpp"
#include "mg/grid.hpp"

namespace mg {

struct OuterApproxOptions {
  double lipschitz = 1.0;
  // Samples per cube edge; 1 means corners only.
  int refine = 1;
  // Precompute every image into a CSR cache; otherwise images are rebuilt on
  // each request from the propagated samples.
  bool cache_images = true;
  // Materialize the escape vertex even when no image leaves X.
  bool force_star = false;
  unsigned workers = 0;
};

/// The combinatorial outer approximation F of the time-tau map.
///
/// Vertices 0..N-1 are cubes; when any image leaves X a synthetic sink
/// vertex N (the escape node) is added. F(xi) is the set of cubes meeting a
/// closed ball of radius L*d/(2*refine) around the image of some sample
/// point of xi. Each distinct sample point is propagated exactly once.
class MultivaluedMap final : public ImageSource {
 public:
  MultivaluedMap(CubicalGrid grid, const TimeTauMap& map, const OuterApproxOptions& options);

  struct Image {
    std::vector<CubeIndex> cubes;  // sorted, unique
    bool star = false;
  };

  Image image(CubeIndex cube) const;

  Vertex vertex_count() const override;
  void successors(Vertex v, std::vector<Vertex>& out) const override;
  std::optional<Vertex> star_vertex() const override;

  const CubicalGrid& grid() const { return grid_; }
  bool has_star() const { return has_star_; }
  double lipschitz() const { return lipschitz_; }
  int refine() const { return refine_; }
  double radius() const { return radius_; }
  double tau() const { return tau_; }
  bool cached() const { return !offsets_.empty(); }
  std::size_t sample_count() const { return sample_count_; }
  /// Integration steps spent propagating samples.
  std::uint64_t propagation_steps() const { return propagation_steps_; }
  /// Number of successors() requests served so far.
  std::uint64_t image_evaluations() const { return evaluations_->load(); }

  /// Binary dump: header (grid hash, tau, L, refine) then CSR adjacency and
  /// one star bit per cube.
  void save_cache(const std::string& path) const;
  /// Rebuilds a cached map from a dump; the header must match.
  static MultivaluedMap load_cache(const std::string& path, CubicalGrid grid, double tau,
                                   double lipschitz, int refine);

 private:
  MultivaluedMap(CubicalGrid grid, double tau, double lipschitz, int refine);

  Image build_image(CubeIndex cube) const;
  std::size_t sample_index(const std::vector<std::uint32_t>& cube_coords,
                           const std::vector<std::uint32_t>& offset) const;

  CubicalGrid grid_;
  double tau_ = 0;
  double lipschitz_ = 0;
  int refine_ = 1;
  double radius_ = 0;
  bool has_star_ = false;

  // Sample lattice: refine*cells (+1 on non-periodic dims) points per dim.
  std::vector<std::uint32_t> sample_counts_;
  std::size_t sample_count_ = 0;
  std::vector<double> sample_images_;      // n values per sample
  std::vector<unsigned char> sample_star_;  // image or ball leaves X
  std::uint64_t propagation_steps_ = 0;

  std::vector<std::uint64_t> offsets_;
  std::vector<CubeIndex> targets_;
  std::vector<unsigned char> cube_star_;

  std::unique_ptr<std::atomic<std::uint64_t>> evaluations_ =
      std::make_unique<std::atomic<std::uint64_t>>(0);
};

struct LipschitzEstimate {
  double value = 0;      // max observed ratio times safety
  double max_ratio = 0;  // max observed ratio
  std::size_t pairs = 0;
};

/// Samples pairs (x, x') lying in a common closed cube (so |x - x'| <= d) and returns the
/// largest |phi(x) - phi(x')| / |x - x'| times `safety`. Deterministic for a
/// given seed; the first k pairs do not depend on `pairs`.
LipschitzEstimate estimate_lipschitz(const TimeTauMap& map, const CubicalGrid& grid,
                                     std::size_t pairs, double safety = 1.2,
                                     std::uint64_t seed = 1, unsigned workers = 0);

}  // namespace mg
