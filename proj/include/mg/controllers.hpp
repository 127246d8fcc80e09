#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mg/dynamics.hpp"
#include "mg/grid.hpp"

namespace mg {

Controller zero_controller(const ControlSystem& system);
Controller constant_controller(const ControlSystem& system, const Vec& u);

// ---- LQR -------------------------------------------------------------------

struct Linearization {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

/// Central finite differences of f at (x0, u0).
Linearization linearize(const ControlSystem& system, const Vec& x0, const Vec& u0,
                        double eps = 1e-6);

/// Stabilizing solution of A'P + PA - PBR^-1B'P + Q = 0. Uses the stable
/// invariant subspace of the Hamiltonian followed by Newton-Kleinman
/// refinement. Throws InvalidArgument when (A, B) is not stabilizable or the
/// residual does not converge.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P);

struct LqrDesign {
  Vec goal;
  Vec u0;  // steady input at the goal
  Eigen::MatrixXd A, B, Q, R, P, K;
  double residual = 0;

  /// Eigenvalues of A - BK.
  Eigen::VectorXcd closed_loop_eigenvalues() const;
};

/// Linearizes at `goal` (default: system goal) with steady input `u0`
/// (default: zero clamped into the control bounds) and solves the
/// infinite-horizon LQR problem.
LqrDesign design_lqr(const ControlSystem& system, const Eigen::MatrixXd& Q,
                     const Eigen::MatrixXd& R, std::optional<Vec> goal = std::nullopt,
                     std::optional<Vec> u0 = std::nullopt);

/// u(x) = clamp(u0 - K (x - goal)) with shortest-angle differences on
/// periodic dimensions.
Controller lqr_controller(SystemPtr system, const LqrDesign& design);

// ---- Corke polar pose regulator -------------------------------------------

struct CorkeGains {
  double k_rho = 1.0;
  double k_alpha = 4.0;
  double k_beta = -1.5;
};

/// Rejects gains violating k_rho > 0, k_beta < 0, k_alpha - k_rho > 0.
void validate_corke_gains(const CorkeGains& gains);

struct PolarError {
  double rho, alpha, beta;
};
PolarError polar_error(const Vec& pose, const Vec& goal);

/// Forward-only pose regulator for the Ackermann car: v = k_rho rho,
/// omega = k_alpha alpha + k_beta beta, steering delta = atan(W omega / v).
Controller corke_controller(const ControlSystem& ackermann, const CorkeGains& gains,
                            const Vec& goal_pose);

// ---- Tabulated policies ---------------------------------------------------

/// Control values on the vertices of a grid. Periodic dimensions have 2^k
/// vertices (the last wraps onto the first), others 2^k + 1.
struct ControlTable {
  CubicalGrid grid;
  std::size_t m = 0;
  std::vector<double> values;  // vertex-major, m values per vertex

  std::vector<std::uint32_t> vertex_counts() const;
  std::size_t vertex_count() const;
  Vec vertex_position(std::size_t vertex) const;
  /// Multilinear interpolation (wrapping on periodic dimensions).
  Vec interpolate(const Vec& x) const;
};

/// Samples `policy` at every vertex of `grid`.
ControlTable tabulate(const CubicalGrid& grid, std::size_t m,
                      const std::function<Vec(const Vec&)>& policy);

/// Format: `dims n m`, n lines `lower upper subdiv_exp periodic`, then one
/// line of m values per vertex in row-major order.
void write_control_table(std::ostream& os, const ControlTable& table);
ControlTable read_control_table(std::istream& is);

Controller tabulated_controller(const ControlSystem& system, ControlTable table);

// ---- Hybrid switching -----------------------------------------------------

struct SwitchPredicate {
  std::string label;
  std::function<bool(const Vec&)> test;
};

SwitchPredicate always_switch(bool value);
/// Membership in the closed ball B(center, radius) under the system's
/// geodesic distance.
SwitchPredicate goal_ball(SystemPtr system, const Vec& center, double radius);
/// Membership in a cube set exported from a previous analysis.
SwitchPredicate cube_set_predicate(CubeSet set);

/// Applies `primary` where the predicate holds and `fallback` elsewhere.
Controller hybrid_controller(Controller primary, Controller fallback, SwitchPredicate when);

}  // namespace mg
