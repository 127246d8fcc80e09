#pragma once

#include "mg/dynamics.hpp"

namespace mg {

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 1.0;
  double friction = 0.1;
  double torque_bound = 0.6372;
  // Apply friction as -beta*theta instead of -beta*theta_dot.
  bool friction_on_angle = false;
};

/// m l^2 th'' = m G l sin(th) - beta th' + u with th measured from upright.
/// State (th, th'), th periodic on [-pi, pi], th' in [-2pi, 2pi].
SystemPtr pendulum_system(const PendulumParams& params = {});

struct AckermannParams {
  double wheelbase = 1.0;
};

/// First-order car: x' = v cos th, y' = v sin th, th' = (v / W) tan(delta),
/// controls (delta, v) with delta in [-1.05, 1.05] and v in [0, 30].
SystemPtr ackermann_system(const AckermannParams& params = {});

struct AcrobotParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double l1 = 1.0;
  double l2 = 1.0;
  double lc1 = 0.5;
  double lc2 = 0.5;
  // Negative means "use m l^2 / 12".
  double i1 = -1.0;
  double i2 = -1.0;
  double gravity = 9.8;
  double torque_bound = 14.0;
};

/// Two-link arm actuated at the elbow. th1 is measured from hanging down on
/// [0, 2pi], th2 is relative on [-pi, pi]; both periodic. Velocities lie in
/// [-6, 6]. The goal (0, pi, 0, 0) balances the second link upright.
SystemPtr acrobot_system(const AcrobotParams& params = {});

struct AcrobotMassMatrix {
  double m11, m12, m22;
};
AcrobotMassMatrix acrobot_mass_matrix(const ControlSystem& acrobot, double theta2);

/// x' = rate * x + u on [-half_width, half_width]^n, non-periodic, u in
/// [-1, 1]^n. The test plant with an exactly known flow.
SystemPtr linear_system(std::size_t n, double rate, double half_width = 1.0);

/// A 2-D linear plant x' = M x + u with arbitrary matrix M, used for
/// soundness tests with a known Lipschitz constant exp(tau * ||M||).
SystemPtr linear_matrix_system(const Eigen::Matrix2d& matrix, double half_width = 1.0);

}  // namespace mg
