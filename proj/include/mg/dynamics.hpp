#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mg/grid.hpp"
#include "mg/types.hpp"

namespace mg {

/// Continuous-time plant x' = f(x, u) on a bounded state space.
struct ControlSystem {
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  std::function<Vec(const Vec& x, const Vec& u)> vector_field;
  Orthotope state_bounds;
  Orthotope control_bounds;
  Vec goal;
  std::vector<bool> periodic;
  // Plant parameters as resolved at construction (wheelbase, masses, ...).
  std::map<std::string, double> params;
  // Total mechanical energy of the unforced plant, when defined.
  std::function<double(const Vec& x)> energy;

  Vec wrap(const Vec& x) const;
  Vec difference(const Vec& a, const Vec& b) const;
  double distance(const Vec& a, const Vec& b) const;
  /// Non-periodic components within bounds.
  bool inside(const Vec& x) const;
  Vec clamp_control(const Vec& u) const;
  double param(const std::string& key) const;
};

using SystemPtr = std::shared_ptr<const ControlSystem>;

/// State-feedback policy whose output is always clamped into the control
/// bounds. Evaluation is pure and reentrant.
class Controller {
 public:
  using Policy = std::function<Vec(const Vec& x)>;

  Controller(std::string label, Orthotope control_bounds, Policy policy);

  Vec operator()(const Vec& x) const;
  /// Policy output before clamping.
  Vec raw(const Vec& x) const { return policy_(x); }
  const std::string& label() const { return label_; }
  const Orthotope& control_bounds() const { return bounds_; }

 private:
  std::string label_;
  Orthotope bounds_;
  Policy policy_;
};

/// One classical RK4 step of the closed loop with the control re-evaluated
/// at every stage.
Vec rk4_step(const ControlSystem& system, const Controller& controller, const Vec& x,
             double h);

/// The time-tau map of the closed loop, integrated with fixed-step RK4.
class TimeTauMap {
 public:
  TimeTauMap(SystemPtr system, Controller controller, double tau, double step = 0.01);
  TimeTauMap(const TimeTauMap& other);
  TimeTauMap& operator=(const TimeTauMap&) = delete;

  struct Result {
    Vec state;
    // Some integration step ended outside X along a non-periodic dimension.
    bool left_domain = false;
  };

  /// Integrates from x0 for tau; periodic components are wrapped at the end.
  /// Throws PropagationError when a non-finite state appears.
  Result propagate_checked(const Vec& x0) const;
  Vec propagate(const Vec& x0) const { return propagate_checked(x0).state; }

  const ControlSystem& system() const { return *system_; }
  const SystemPtr& system_ptr() const { return system_; }
  const Controller& controller() const { return controller_; }
  double tau() const { return tau_; }
  double step() const { return step_; }
  std::uint64_t steps_per_map() const { return steps_; }

  /// Integration steps performed so far by this instance.
  std::uint64_t step_counter() const { return counter_.load(); }
  void reset_counter() { counter_ = 0; }

 private:
  SystemPtr system_;
  Controller controller_;
  double tau_;
  double step_;
  std::uint64_t steps_;
  mutable std::atomic<std::uint64_t> counter_{0};
};

}  // namespace mg
