#include "mg/dynamics.hpp"

#include <cmath>
#include <string>

namespace mg {

Vec ControlSystem::wrap(const Vec& x) const {
  Vec y = x;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (periodic[i]) y[ii] = wrap_coordinate(y[ii], state_bounds.lo[ii], state_bounds.hi[ii]);
  }
  return y;
}

Vec ControlSystem::difference(const Vec& a, const Vec& b) const {
  Vec d = a - b;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (periodic[i]) {
      d[ii] = periodic_difference(a[ii], b[ii], state_bounds.hi[ii] - state_bounds.lo[ii]);
    }
  }
  return d;
}

double ControlSystem::distance(const Vec& a, const Vec& b) const {
  return difference(a, b).norm();
}

bool ControlSystem::inside(const Vec& x) const {
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (!std::isfinite(x[ii])) return false;
    if (!periodic[i] && (x[ii] < state_bounds.lo[ii] || x[ii] > state_bounds.hi[ii])) {
      return false;
    }
  }
  return true;
}

Vec ControlSystem::clamp_control(const Vec& u) const {
  return u.cwiseMax(control_bounds.lo).cwiseMin(control_bounds.hi);
}

double ControlSystem::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw InvalidArgument(name + ": no parameter '" + key + "'");
  return it->second;
}

Controller::Controller(std::string label, Orthotope control_bounds, Policy policy)
    : label_(std::move(label)), bounds_(std::move(control_bounds)), policy_(std::move(policy)) {}

Vec Controller::operator()(const Vec& x) const {
  Vec u = policy_(x);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    // NaN maps to the lower bound rather than propagating.
    if (!(u[i] >= bounds_.lo[i])) u[i] = bounds_.lo[i];
    if (u[i] > bounds_.hi[i]) u[i] = bounds_.hi[i];
  }
  return u;
}

Vec rk4_step(const ControlSystem& system, const Controller& controller, const Vec& x,
             double h) {
  auto f = [&](const Vec& s) { return system.vector_field(s, controller(s)); };
  const Vec k1 = f(x);
  const Vec k2 = f(x + (h / 2) * k1);
  const Vec k3 = f(x + (h / 2) * k2);
  const Vec k4 = f(x + h * k3);
  return x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

TimeTauMap::TimeTauMap(SystemPtr system, Controller controller, double tau, double step)
    : system_(std::move(system)), controller_(std::move(controller)), tau_(tau), step_(step) {
  if (!system_) throw InvalidArgument("time-tau map: null system");
  if (!(tau > 0)) throw InvalidArgument("time-tau map: tau must be positive");
  if (!(step > 0)) throw InvalidArgument("time-tau map: step must be positive");
  const double ratio = tau / step;
  const double steps = std::round(ratio);
  if (steps < 1 || std::abs(ratio - steps) > 1e-6 * std::max(1.0, ratio)) {
    throw InvalidArgument("time-tau map: tau/step must be a positive integer");
  }
  steps_ = static_cast<std::uint64_t>(steps);
}

TimeTauMap::TimeTauMap(const TimeTauMap& other)
    : system_(other.system_),
      controller_(other.controller_),
      tau_(other.tau_),
      step_(other.step_),
      steps_(other.steps_),
      counter_(other.counter_.load()) {}

TimeTauMap::Result TimeTauMap::propagate_checked(const Vec& x0) const {
  const ControlSystem& sys = *system_;
  if (static_cast<std::size_t>(x0.size()) != sys.n) {
    throw DomainError("propagate: state has " + std::to_string(x0.size()) +
                      " components, system has " + std::to_string(sys.n));
  }
  Result r{x0, false};
  for (std::uint64_t k = 1; k <= steps_; ++k) {
    r.state = rk4_step(sys, controller_, r.state, step_);
    if (!r.state.allFinite()) {
      counter_ += k;
      throw PropagationError("propagate: non-finite state at integration step " +
                             std::to_string(k));
    }
    if (!r.left_domain && !sys.inside(r.state)) r.left_domain = true;
  }
  counter_ += steps_;
  r.state = sys.wrap(r.state);
  return r;
}

}  // namespace mg
