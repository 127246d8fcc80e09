#include "mg/systems.hpp"

#include <cmath>
#include <numbers>

namespace mg {

namespace {

constexpr double kPi = std::numbers::pi;

Orthotope box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return {make_vec(lo), make_vec(hi)};
}

}  // namespace

SystemPtr pendulum_system(const PendulumParams& p) {
  if (!(p.mass > 0) || !(p.length > 0)) {
    throw InvalidArgument("pendulum: mass and length must be positive");
  }
  if (!(p.torque_bound > 0)) throw InvalidArgument("pendulum: torque bound must be positive");
  auto sys = std::make_shared<ControlSystem>();
  sys->name = "pendulum";
  sys->n = 2;
  sys->m = 1;
  const double inertia = p.mass * p.length * p.length;
  const double mgl = p.mass * p.gravity * p.length;
  const double beta = p.friction;
  const bool on_angle = p.friction_on_angle;
  sys->vector_field = [=](const Vec& x, const Vec& u) {
    const double drag = on_angle ? beta * x[0] : beta * x[1];
    return make_vec({x[1], (mgl * std::sin(x[0]) - drag + u[0]) / inertia});
  };
  sys->energy = [=](const Vec& x) {
    return 0.5 * inertia * x[1] * x[1] + mgl * std::cos(x[0]);
  };
  sys->state_bounds = box({-kPi, -2 * kPi}, {kPi, 2 * kPi});
  sys->control_bounds = box({-p.torque_bound}, {p.torque_bound});
  sys->goal = make_vec({0, 0});
  sys->periodic = {true, false};
  sys->params = {{"mass", p.mass},         {"length", p.length},
                 {"gravity", p.gravity},   {"friction", p.friction},
                 {"torque_bound", p.torque_bound},
                 {"friction_on_angle", on_angle ? 1.0 : 0.0}};
  return sys;
}

SystemPtr ackermann_system(const AckermannParams& p) {
  if (!(p.wheelbase > 0)) throw InvalidArgument("ackermann: wheelbase must be positive");
  auto sys = std::make_shared<ControlSystem>();
  sys->name = "ackermann";
  sys->n = 3;
  sys->m = 2;
  const double w = p.wheelbase;
  sys->vector_field = [=](const Vec& x, const Vec& u) {
    const double delta = u[0];
    const double v = u[1];
    return make_vec({v * std::cos(x[2]), v * std::sin(x[2]), v / w * std::tan(delta)});
  };
  sys->state_bounds = box({-10, -10, -kPi}, {10, 10, kPi});
  sys->control_bounds = box({-1.05, 0}, {1.05, 30});
  sys->goal = make_vec({0, 0, kPi / 2});
  sys->periodic = {false, false, true};
  sys->params = {{"wheelbase", w}};
  return sys;
}

AcrobotMassMatrix acrobot_mass_matrix(const ControlSystem& a, double theta2) {
  const double m1 = a.param("m1"), m2 = a.param("m2"), l1 = a.param("l1");
  const double lc1 = a.param("lc1"), lc2 = a.param("lc2");
  const double i1 = a.param("i1"), i2 = a.param("i2");
  const double c2 = std::cos(theta2);
  AcrobotMassMatrix mm{};
  mm.m11 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * c2) + i1 + i2;
  mm.m12 = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
  mm.m22 = m2 * lc2 * lc2 + i2;
  return mm;
}

SystemPtr acrobot_system(const AcrobotParams& p) {
  if (!(p.m1 > 0 && p.m2 > 0 && p.l1 > 0 && p.l2 > 0 && p.lc1 > 0 && p.lc2 > 0)) {
    throw InvalidArgument("acrobot: masses and lengths must be positive");
  }
  const double i1 = p.i1 < 0 ? p.m1 * p.l1 * p.l1 / 12 : p.i1;
  const double i2 = p.i2 < 0 ? p.m2 * p.l2 * p.l2 / 12 : p.i2;
  auto sys = std::make_shared<ControlSystem>();
  sys->name = "acrobot";
  sys->n = 4;
  sys->m = 1;
  sys->params = {{"m1", p.m1},   {"m2", p.m2},   {"l1", p.l1}, {"l2", p.l2},
                 {"lc1", p.lc1}, {"lc2", p.lc2}, {"i1", i1},   {"i2", i2},
                 {"gravity", p.gravity}, {"torque_bound", p.torque_bound}};
  const double m1 = p.m1, m2 = p.m2, l1 = p.l1, lc1 = p.lc1, lc2 = p.lc2, g = p.gravity;
  const double m22 = m2 * lc2 * lc2 + i2;
  const double base11 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2) + i1 + i2;
  sys->vector_field = [=](const Vec& x, const Vec& u) {
    const double th1 = x[0], th2 = x[1], w1 = x[2], w2 = x[3];
    const double c2 = std::cos(th2), s2 = std::sin(th2);
    const double m11 = base11 + 2 * m2 * l1 * lc2 * c2;
    const double m12 = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
    const double h = m2 * l1 * lc2 * s2;
    const double s12 = std::sin(th1 + th2);
    const double g1 = (m1 * lc1 + m2 * l1) * g * std::sin(th1) + m2 * lc2 * g * s12;
    const double g2 = m2 * lc2 * g * s12;
    const double r1 = -(-h * w2 * w2 - 2 * h * w1 * w2) - g1;
    const double r2 = u[0] - h * w1 * w1 - g2;
    const double det = m11 * m22 - m12 * m12;
    if (!(det > 0)) throw PropagationError("acrobot: singular mass matrix");
    const double a1 = (m22 * r1 - m12 * r2) / det;
    const double a2 = (m11 * r2 - m12 * r1) / det;
    return make_vec({w1, w2, a1, a2});
  };
  sys->energy = [=](const Vec& x) {
    const double th1 = x[0], th2 = x[1], w1 = x[2], w2 = x[3];
    const double c2 = std::cos(th2);
    const double m11 = base11 + 2 * m2 * l1 * lc2 * c2;
    const double m12 = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
    const double kinetic = 0.5 * (m11 * w1 * w1 + 2 * m12 * w1 * w2 + m22 * w2 * w2);
    const double potential =
        -(m1 * lc1 + m2 * l1) * g * std::cos(th1) - m2 * lc2 * g * std::cos(th1 + th2);
    return kinetic + potential;
  };
  sys->state_bounds = box({0, -kPi, -6, -6}, {2 * kPi, kPi, 6, 6});
  sys->control_bounds = box({-p.torque_bound}, {p.torque_bound});
  sys->goal = make_vec({0, kPi, 0, 0});
  sys->periodic = {true, true, false, false};
  return sys;
}

SystemPtr linear_system(std::size_t n, double rate, double half_width) {
  if (n == 0 || n > static_cast<std::size_t>(kMaxDim)) {
    throw InvalidArgument("linear: unsupported dimension");
  }
  if (!(half_width > 0)) throw InvalidArgument("linear: half width must be positive");
  auto sys = std::make_shared<ControlSystem>();
  sys->name = "linear";
  sys->n = n;
  sys->m = n;
  sys->vector_field = [rate](const Vec& x, const Vec& u) -> Vec { return rate * x + u; };
  const auto nn = static_cast<Eigen::Index>(n);
  sys->state_bounds = {Vec::Constant(nn, -half_width), Vec::Constant(nn, half_width)};
  sys->control_bounds = {Vec::Constant(nn, -1), Vec::Constant(nn, 1)};
  sys->goal = Vec::Zero(nn);
  sys->periodic.assign(n, false);
  sys->params = {{"rate", rate}, {"half_width", half_width}};
  return sys;
}

SystemPtr linear_matrix_system(const Eigen::Matrix2d& matrix, double half_width) {
  if (!(half_width > 0)) throw InvalidArgument("linear: half width must be positive");
  auto sys = std::make_shared<ControlSystem>();
  sys->name = "linear2";
  sys->n = 2;
  sys->m = 2;
  sys->vector_field = [matrix](const Vec& x, const Vec& u) -> Vec {
    Vec dx = matrix * Eigen::Vector2d(x[0], x[1]);
    return dx + u;
  };
  sys->state_bounds = {Vec::Constant(2, -half_width), Vec::Constant(2, half_width)};
  sys->control_bounds = {Vec::Constant(2, -1), Vec::Constant(2, 1)};
  sys->goal = Vec::Zero(2);
  sys->periodic = {false, false};
  sys->params = {{"a11", matrix(0, 0)}, {"a12", matrix(0, 1)},
                 {"a21", matrix(1, 0)}, {"a22", matrix(1, 1)},
                 {"half_width", half_width}};
  return sys;
}

}  // namespace mg
