#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mg/types.hpp"

namespace mg {

/// Closed axis-aligned box.
struct Orthotope {
  Vec lo;
  Vec hi;

  std::size_t dims() const { return static_cast<std::size_t>(lo.size()); }
  bool contains(const Vec& x) const;
};

/// Wraps `v` into [lo, hi) treating the interval as a circle.
double wrap_coordinate(double v, double lo, double hi);

/// Shortest signed difference a - b on a circle of the given period.
double periodic_difference(double a, double b, double period);

/// Spreads `total` subdivisions over `dims` dimensions as evenly as
/// possible, giving the remainder to the leading dimensions.
std::vector<int> split_exponents(int total, std::size_t dims);

/// Uniform decomposition of an orthotope into prod 2^k_i cubes.
///
/// Cubes are numbered row-major over their per-dimension cell indices with
/// the last dimension varying fastest. Point lookup uses half-open cells
/// (the topmost cell of a non-periodic dimension is closed above); ball
/// queries use closed cells. Immutable after construction.
class CubicalGrid {
 public:
  CubicalGrid(Vec lower, Vec upper, std::vector<int> subdiv_exp,
              std::vector<bool> periodic);

  std::size_t dims() const { return static_cast<std::size_t>(lower_.size()); }
  std::uint64_t cube_count() const { return cube_count_; }
  std::uint32_t cells(std::size_t dim) const { return cells_[dim]; }
  double width(std::size_t dim) const { return width_[dim]; }
  double period(std::size_t dim) const { return upper_[dim] - lower_[dim]; }
  bool periodic(std::size_t dim) const { return periodic_[dim]; }
  int subdiv_exp(std::size_t dim) const { return subdiv_exp_[dim]; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const std::vector<bool>& periodic_flags() const { return periodic_; }
  const std::vector<int>& subdiv_exps() const { return subdiv_exp_; }
  Orthotope bounds() const { return {lower_, upper_}; }

  /// Lower face of cell `j` along `dim`; `j` may lie outside [0, cells) to
  /// address a periodic image of the cell.
  double face(std::size_t dim, std::int64_t j) const {
    return lower_[static_cast<Eigen::Index>(dim)] +
           static_cast<double>(j) * width_[dim];
  }

  std::vector<std::uint32_t> coords_of(CubeIndex cube) const;
  CubeIndex index_of(const std::vector<std::uint32_t>& coords) const;

  std::optional<CubeIndex> cube_of_point(const Vec& x) const;
  std::vector<Vec> corners(CubeIndex cube) const;
  Orthotope cube_bounds(CubeIndex cube) const;
  Vec cube_center(CubeIndex cube) const;

  /// Euclidean length of a cell's main diagonal.
  double diameter() const;

  struct BallQuery {
    std::vector<CubeIndex> cubes;  // sorted, unique
    bool escape = false;
  };

  /// All cubes whose closed cell meets the closed ball B(center, radius).
  /// `escape` is set when the ball reaches outside X along a non-periodic
  /// dimension. Throws InvalidArgument when radius < 0.
  BallQuery cubes_intersecting_ball(const Vec& center, double radius) const;

  /// Appends (unsorted, unique within this call) matches to `out` and ORs
  /// the escape flag into `escape`.
  void append_cubes_intersecting_ball(const Vec& center, double radius,
                                      std::vector<CubeIndex>& out,
                                      bool& escape) const;

  /// Periodic components wrapped into [lower, upper).
  Vec wrap(const Vec& x) const;
  /// a - b with shortest-angle differences on periodic dimensions.
  Vec difference(const Vec& a, const Vec& b) const;
  double distance(const Vec& a, const Vec& b) const;
  /// True when every non-periodic component lies within its bounds.
  bool inside(const Vec& x) const;

  std::uint64_t hash() const;

  bool same_domain(const CubicalGrid& other) const;
  bool operator==(const CubicalGrid& other) const;

 private:
  void check_dims(const Vec& x) const;

  Vec lower_;
  Vec upper_;
  std::vector<int> subdiv_exp_;
  std::vector<bool> periodic_;
  std::vector<std::uint32_t> cells_;
  std::vector<double> width_;
  std::vector<std::uint64_t> stride_;
  std::uint64_t cube_count_ = 0;
};

/// Text grid section shared by the tabulated-controller and cube-set files:
/// one line per dimension, `lower upper subdiv_exp periodic`.
void write_grid_section(std::ostream& os, const CubicalGrid& grid);
CubicalGrid read_grid_section(std::istream& is, std::size_t dims);

/// A set of cubes on a grid, as exported for hybrid switching.
struct CubeSet {
  CubicalGrid grid;
  std::vector<CubeIndex> cubes;  // sorted

  bool contains_point(const Vec& x) const;
};

void write_cube_set(std::ostream& os, const CubeSet& set);
CubeSet read_cube_set(std::istream& is);

}  // namespace mg
