#include "mg/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mg {

Controller zero_controller(const ControlSystem& system) {
  const auto m = static_cast<Eigen::Index>(system.m);
  return Controller("zero", system.control_bounds, [m](const Vec&) -> Vec { return Vec::Zero(m); });
}

Controller constant_controller(const ControlSystem& system, const Vec& u) {
  if (static_cast<std::size_t>(u.size()) != system.m) {
    throw InvalidArgument("constant controller: wrong control dimension");
  }
  return Controller("constant", system.control_bounds, [u](const Vec&) { return u; });
}

// ---- LQR -------------------------------------------------------------------

Linearization linearize(const ControlSystem& system, const Vec& x0, const Vec& u0,
                        double eps) {
  const auto n = static_cast<Eigen::Index>(system.n);
  const auto m = static_cast<Eigen::Index>(system.m);
  Linearization lin{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, m)};
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec xp = x0, xm = x0;
    xp[j] += eps;
    xm[j] -= eps;
    lin.A.col(j) = (system.vector_field(xp, u0) - system.vector_field(xm, u0)) / (2 * eps);
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    Vec up = u0, um = u0;
    up[j] += eps;
    um[j] -= eps;
    lin.B.col(j) = (system.vector_field(x0, up) - system.vector_field(x0, um)) / (2 * eps);
  }
  return lin;
}

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd res =
      A.transpose() * P + P * A - P * B * R.ldlt().solve(B.transpose()) * P + Q;
  return res.norm();
}

namespace {

// Solves Ac' X + X Ac = -M for symmetric X via the Kronecker form.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& M) {
  const Eigen::Index n = Ac.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
  const Eigen::MatrixXd At = Ac.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // (I kron At) + (At kron I)
      L.block(i * n, j * n, n, n) += I(i, j) * At;
      L.block(i * n, j * n, n, n) += At(i, j) * I;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(M.data(), n * n);
  const Eigen::VectorXd x = L.fullPivLu().solve(rhs);
  Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return (X + X.transpose()) / 2;
}

bool is_hurwitz(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  return (es.eigenvalues().real().array() < 0).all();
}

}  // namespace

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw InvalidArgument("care: inconsistent matrix shapes");
  }
  Eigen::LLT<Eigen::MatrixXd> rllt(R);
  if (rllt.info() != Eigen::Success) throw InvalidArgument("care: R must be positive definite");
  const Eigen::MatrixXd S = B * rllt.solve(B.transpose());

  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, -S, -Q, -A.transpose();
  Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw InvalidArgument("care: Hamiltonian eigensolver failed");
  const double scale = 1.0 + H.norm();
  Eigen::MatrixXcd V(2 * n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const double re = es.eigenvalues()[i].real();
    if (std::abs(re) <= 1e-9 * scale) {
      throw InvalidArgument("care: (A, B) is not stabilizable (imaginary-axis Hamiltonian eigenvalue)");
    }
    if (re < 0) {
      if (k == n) throw InvalidArgument("care: Hamiltonian spectrum is not split");
      V.col(k++) = es.eigenvectors().col(i);
    }
  }
  if (k != n) throw InvalidArgument("care: Hamiltonian spectrum is not split");
  const Eigen::MatrixXcd X1 = V.topRows(n);
  const Eigen::MatrixXcd X2 = V.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(X1);
  if (!lu.isInvertible()) throw InvalidArgument("care: (A, B) is not stabilizable");
  Eigen::MatrixXd P = (X2 * lu.inverse()).real();
  P = (P + P.transpose()) / 2;

  // Newton-Kleinman refinement from the (stabilizing) eigenvector seed.
  for (int it = 0; it < 30; ++it) {
    const Eigen::MatrixXd K = rllt.solve(B.transpose() * P);
    const Eigen::MatrixXd Ac = A - B * K;
    if (!is_hurwitz(Ac)) break;
    const Eigen::MatrixXd next = solve_lyapunov(Ac, Q + K.transpose() * R * K);
    const double change = (next - P).norm();
    P = next;
    if (change <= 1e-14 * (1.0 + P.norm())) break;
  }
  const double residual = care_residual(A, B, Q, R, P);
  if (!std::isfinite(residual) || residual > 1e-8 * (1.0 + P.norm())) {
    throw InvalidArgument("care: Riccati residual did not converge (" +
                          std::to_string(residual) + ")");
  }
  return P;
}

Eigen::VectorXcd LqrDesign::closed_loop_eigenvalues() const {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A - B * K, false);
  return es.eigenvalues();
}

LqrDesign design_lqr(const ControlSystem& system, const Eigen::MatrixXd& Q,
                     const Eigen::MatrixXd& R, std::optional<Vec> goal, std::optional<Vec> u0) {
  LqrDesign d;
  d.goal = goal.value_or(system.goal);
  d.u0 = u0.value_or(system.clamp_control(Vec::Zero(static_cast<Eigen::Index>(system.m))));
  if (static_cast<std::size_t>(d.goal.size()) != system.n ||
      static_cast<std::size_t>(d.u0.size()) != system.m) {
    throw InvalidArgument("lqr: goal or steady input has the wrong dimension");
  }
  if (!Q.isApprox(Q.transpose())) throw InvalidArgument("lqr: Q must be symmetric");
  if (!R.isApprox(R.transpose())) throw InvalidArgument("lqr: R must be symmetric");
  const Linearization lin = linearize(system, d.goal, d.u0);
  d.A = lin.A;
  d.B = lin.B;
  d.Q = Q;
  d.R = R;
  d.P = solve_care(d.A, d.B, Q, R);
  d.K = R.ldlt().solve(d.B.transpose() * d.P);
  d.residual = care_residual(d.A, d.B, Q, R, d.P);
  return d;
}

Controller lqr_controller(SystemPtr system, const LqrDesign& design) {
  const Eigen::MatrixXd K = design.K;
  const Vec goal = design.goal;
  const Vec u0 = design.u0;
  auto sys = system;
  Orthotope bounds = system->control_bounds;
  return Controller("lqr", bounds, [sys, K, goal, u0](const Vec& x) -> Vec {
    const Vec e = sys->difference(x, goal);
    Vec u = u0;
    u.noalias() -= K * e;
    return u;
  });
}

// ---- Corke -------------------------------------------------------------------

void validate_corke_gains(const CorkeGains& g) {
  if (!(g.k_rho > 0)) throw InvalidArgument("corke: k_rho must be positive");
  if (!(g.k_beta < 0)) throw InvalidArgument("corke: k_beta must be negative");
  if (!(g.k_alpha - g.k_rho > 0)) throw InvalidArgument("corke: k_alpha must exceed k_rho");
}

namespace {

double wrap_pi(double a) {
  return wrap_coordinate(a, -std::numbers::pi, std::numbers::pi);
}

}  // namespace

PolarError polar_error(const Vec& pose, const Vec& goal) {
  const double dx = goal[0] - pose[0];
  const double dy = goal[1] - pose[1];
  PolarError e{};
  e.rho = std::hypot(dx, dy);
  e.alpha = e.rho > 0 ? wrap_pi(std::atan2(dy, dx) - pose[2]) : 0.0;
  e.beta = wrap_pi(goal[2] - pose[2] - e.alpha);
  return e;
}

Controller corke_controller(const ControlSystem& ackermann, const CorkeGains& gains,
                            const Vec& goal_pose) {
  validate_corke_gains(gains);
  if (ackermann.n != 3 || ackermann.m != 2) {
    throw InvalidArgument("corke: requires the 3-state, 2-input Ackermann car");
  }
  if (goal_pose.size() != 3) throw InvalidArgument("corke: goal pose must be (x, y, theta)");
  const double wheelbase = ackermann.param("wheelbase");
  const double v_max = ackermann.control_bounds.hi[1];
  return Controller("corke", ackermann.control_bounds,
                    [=](const Vec& x) -> Vec {
                      const PolarError e = polar_error(x, goal_pose);
                      const double v = std::clamp(gains.k_rho * e.rho, 0.0, v_max);
                      const double omega = gains.k_alpha * e.alpha + gains.k_beta * e.beta;
                      const double delta = std::atan2(wheelbase * omega, v);
                      return make_vec({delta, v});
                    });
}

// ---- Tabulated ------------------------------------------------------------

std::vector<std::uint32_t> ControlTable::vertex_counts() const {
  std::vector<std::uint32_t> c(grid.dims());
  for (std::size_t i = 0; i < grid.dims(); ++i) {
    c[i] = grid.cells(i) + (grid.periodic(i) ? 0 : 1);
  }
  return c;
}

std::size_t ControlTable::vertex_count() const {
  std::size_t total = 1;
  for (auto c : vertex_counts()) total *= c;
  return total;
}

Vec ControlTable::vertex_position(std::size_t vertex) const {
  const auto counts = vertex_counts();
  Vec p(static_cast<Eigen::Index>(grid.dims()));
  for (std::size_t i = grid.dims(); i-- > 0;) {
    p[static_cast<Eigen::Index>(i)] = grid.face(i, static_cast<std::int64_t>(vertex % counts[i]));
    vertex /= counts[i];
  }
  return p;
}

Vec ControlTable::interpolate(const Vec& x) const {
  const std::size_t n = grid.dims();
  if (static_cast<std::size_t>(x.size()) != n) {
    throw DomainError("tabulated controller: state dimension mismatch");
  }
  const auto counts = vertex_counts();
  std::size_t lo_idx[kMaxDim];
  std::size_t hi_idx[kMaxDim];
  double frac[kMaxDim];
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double v = x[ii];
    if (grid.periodic(i)) v = wrap_coordinate(v, grid.lower()[ii], grid.upper()[ii]);
    const double t = (v - grid.lower()[ii]) / grid.width(i);
    auto j = static_cast<std::int64_t>(std::floor(t));
    j = std::clamp<std::int64_t>(j, 0, static_cast<std::int64_t>(grid.cells(i)) - 1);
    frac[i] = std::clamp(t - static_cast<double>(j), 0.0, 1.0);
    lo_idx[i] = static_cast<std::size_t>(j);
    hi_idx[i] = grid.periodic(i) ? (lo_idx[i] + 1) % counts[i] : lo_idx[i] + 1;
  }
  Vec u = Vec::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double w = 1;
    std::size_t vertex = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool up = (mask >> i) & 1u;
      w *= up ? frac[i] : 1 - frac[i];
      vertex = vertex * counts[i] + (up ? hi_idx[i] : lo_idx[i]);
    }
    if (w == 0) continue;
    for (std::size_t k = 0; k < m; ++k) {
      u[static_cast<Eigen::Index>(k)] += w * values[vertex * m + k];
    }
  }
  return u;
}

ControlTable tabulate(const CubicalGrid& grid, std::size_t m,
                      const std::function<Vec(const Vec&)>& policy) {
  ControlTable t{grid, m, {}};
  const std::size_t count = t.vertex_count();
  t.values.resize(count * m);
  for (std::size_t v = 0; v < count; ++v) {
    const Vec u = policy(t.vertex_position(v));
    for (std::size_t k = 0; k < m; ++k) t.values[v * m + k] = u[static_cast<Eigen::Index>(k)];
  }
  return t;
}

void write_control_table(std::ostream& os, const ControlTable& table) {
  os << "dims " << table.grid.dims() << ' ' << table.m << '\n';
  write_grid_section(os, table.grid);
  const auto old = os.precision(17);
  const std::size_t count = table.vertex_count();
  for (std::size_t v = 0; v < count; ++v) {
    for (std::size_t k = 0; k < table.m; ++k) {
      if (k) os << ' ';
      os << table.values[v * table.m + k];
    }
    os << '\n';
  }
  os.precision(old);
}

ControlTable read_control_table(std::istream& is) {
  std::string tag;
  std::size_t n = 0, m = 0;
  if (!(is >> tag >> n >> m) || tag != "dims") {
    throw IoError("control table: expected header 'dims <n> <m>'");
  }
  if (m == 0 || m > static_cast<std::size_t>(kMaxDim)) {
    throw IoError("control table: unsupported control dimension");
  }
  ControlTable t{read_grid_section(is, n), m, {}};
  const std::size_t count = t.vertex_count();
  t.values.resize(count * m);
  for (std::size_t i = 0; i < count * m; ++i) {
    if (!(is >> t.values[i])) {
      throw IoError("control table: expected " + std::to_string(count) + " vertex rows, data ends at value " +
                    std::to_string(i));
    }
    if (!std::isfinite(t.values[i])) throw IoError("control table: non-finite value");
  }
  if (is >> tag) throw IoError("control table: trailing data after vertex rows");
  return t;
}

Controller tabulated_controller(const ControlSystem& system, ControlTable table) {
  if (table.grid.dims() != system.n || table.m != system.m) {
    throw InvalidArgument("tabulated controller: table dims (" + std::to_string(table.grid.dims()) +
                          ", " + std::to_string(table.m) + ") do not match system (" +
                          std::to_string(system.n) + ", " + std::to_string(system.m) + ")");
  }
  for (std::size_t i = 0; i < system.n; ++i) {
    if (table.grid.periodic(i) != system.periodic[i]) {
      throw InvalidArgument("tabulated controller: periodicity of dim " + std::to_string(i) +
                            " differs from the system");
    }
  }
  auto shared = std::make_shared<const ControlTable>(std::move(table));
  return Controller("tabulated", system.control_bounds,
                    [shared](const Vec& x) { return shared->interpolate(x); });
}

// ---- Hybrid -------------------------------------------------------------------

SwitchPredicate always_switch(bool value) {
  return {value ? "always" : "never", [value](const Vec&) { return value; }};
}

SwitchPredicate goal_ball(SystemPtr system, const Vec& center, double radius) {
  if (!(radius >= 0)) throw InvalidArgument("goal ball: negative radius");
  std::ostringstream label;
  label << "ball(r=" << radius << ")";
  return {label.str(), [system, center, radius](const Vec& x) {
            return system->distance(x, center) <= radius;
          }};
}

SwitchPredicate cube_set_predicate(CubeSet set) {
  auto shared = std::make_shared<const CubeSet>(std::move(set));
  return {"cube_set(" + std::to_string(shared->cubes.size()) + ")",
          [shared](const Vec& x) { return shared->contains_point(x); }};
}

Controller hybrid_controller(Controller primary, Controller fallback, SwitchPredicate when) {
  if (primary.control_bounds().dims() != fallback.control_bounds().dims()) {
    throw InvalidArgument("hybrid controller: control dimensions differ");
  }
  Orthotope bounds = primary.control_bounds();
  bounds.lo = bounds.lo.cwiseMin(fallback.control_bounds().lo);
  bounds.hi = bounds.hi.cwiseMax(fallback.control_bounds().hi);
  std::string label = "hybrid(" + primary.label() + " if " + when.label + ", else " +
                      fallback.label() + ")";
  return Controller(std::move(label), bounds,
                    [p = std::move(primary), f = std::move(fallback),
                     w = std::move(when)](const Vec& x) { return w.test(x) ? p(x) : f(x); });
}

}  // namespace mg
