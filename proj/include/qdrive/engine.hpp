#pragma once

// Schroedinger propagation i d|psi>/dt = H(t)|psi> for a ControlSchedule.
//
// Each substep uses the fourth-order Magnus exponent built from the two
// Gauss-Legendre nodes. For H = h.sigma the exponent stays in su(2):
//   v = (dt/2)(h1 + h2) - (sqrt(3)/6) dt^2 (h1 x h2),  U = exp(-i v.sigma),
// so every substep is an exact unitary. Step size is controlled by step
// doubling on the state.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qdrive/core.hpp"
#include "qdrive/errors.hpp"
#include "qdrive/protocols.hpp"

namespace qdrive {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double max_step_tau = 1e-3;
  int sample_count = 201;

  void validate() const {
    if (!(rel_tol > 0.0)) throw InvalidArgument("IntegratorConfig: rel_tol must be positive");
    if (!(max_step_tau > 0.0 && max_step_tau <= 1.0)) {
      throw InvalidArgument("IntegratorConfig: max_step_tau must lie in (0, 1]");
    }
    if (sample_count < 2) throw InvalidArgument("IntegratorConfig: sample_count must be >= 2");
  }
};

struct TrajectorySample {
  double tau;
  StateVector state;
  ControlSample control;
};

/// Samples at tau < 1 hold the state before any kick scheduled at that tau;
/// the tau = 1 sample holds the state after the closing kicks.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::string schedule_label;
  double duration = 0.0;

  const StateVector& final_state() const { return samples.back().state; }
};

/// exp(-i * area * sigma_z).
inline StateVector apply_kick(const StateVector& s, const Kick& k) { return rotate_z(s, k.area); }

namespace detail {

using Vec3 = std::array<double, 3>;

inline Vec3 field(const ControlSample& h) { return {h.omega, h.sigma_y, h.gamma}; }

/// exp(-i v.sigma) |s>
inline StateVector apply_su2(const Vec3& v, const StateVector& s) {
  const double theta = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double c = std::cos(theta);
  const double sinc = theta > 0.0 ? std::sin(theta) / theta : 1.0;
  const Complex i{0.0, 1.0};
  const Complex u00{c, -sinc * v[2]};
  const Complex u11{c, sinc * v[2]};
  const Complex u01 = -i * sinc * Complex{v[0], -v[1]};
  const Complex u10 = -i * sinc * Complex{v[0], v[1]};
  return {u00 * s.c0 + u01 * s.c1, u10 * s.c0 + u11 * s.c1};
}

inline ControlSample checked_sample(const ControlSchedule& sch, double tau) {
  const ControlSample h = sch.at(tau);
  if (!h.finite()) {
    throw NumericalError("non-finite Hamiltonian near tau = " + fmt(tau) + " in " + sch.label, tau);
  }
  return h;
}

/// One fourth-order Magnus step over [tau, tau + dtau].
inline StateVector magnus4_step(const ControlSchedule& sch, double tau, double dtau, const StateVector& s) {
  static const double node = std::sqrt(3.0) / 6.0;
  const double dt = dtau * sch.duration;
  const Vec3 h1 = field(checked_sample(sch, tau + (0.5 - node) * dtau));
  const Vec3 h2 = field(checked_sample(sch, tau + (0.5 + node) * dtau));
  const Vec3 cross{h1[1] * h2[2] - h1[2] * h2[1], h1[2] * h2[0] - h1[0] * h2[2], h1[0] * h2[1] - h1[1] * h2[0]};
  const double k = node * dt * dt;
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = 0.5 * dt * (h1[i] + h2[i]) - k * cross[i];
  return apply_su2(v, s);
}

inline double distance(const StateVector& a, const StateVector& b) {
  return std::sqrt(std::norm(a.c0 - b.c0) + std::norm(a.c1 - b.c1));
}

/// Adaptive propagation across [from, to] where H is smooth.
class Stepper {
 public:
  Stepper(const ControlSchedule& sch, const IntegratorConfig& cfg)
      : sch_(sch), cfg_(cfg), step_(cfg.max_step_tau) {}

  StateVector advance(StateVector s, double from, double to) {
    constexpr double kMinStep = 1e-13;
    constexpr double kErrFloor = 1e-15;
    double tau = from;
    while (tau < to) {
      double h = std::min(step_, cfg_.max_step_tau);
      bool last = false;
      if (tau + h >= to) {
        h = to - tau;
        last = true;
      }
      const StateVector full = magnus4_step(sch_, tau, h, s);
      const StateVector mid = magnus4_step(sch_, tau, 0.5 * h, s);
      const StateVector two = magnus4_step(sch_, tau + 0.5 * h, 0.5 * h, mid);
      const double err = distance(full, two);
      const double tol = std::max(cfg_.rel_tol * h, kErrFloor);
      if (!std::isfinite(err)) {
        throw NumericalError("non-finite state near tau = " + fmt(tau) + " in " + sch_.label, tau);
      }
      if (err <= tol) {
        s = two;
        tau = last ? to : tau + h;
        ++accepted_;
        const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
        // Keep the proposal from the untruncated step when the last one was clipped.
        if (!last || grow < 1.0) step_ = std::min(cfg_.max_step_tau, h * std::clamp(grow, 0.2, 5.0));
      } else {
        ++rejected_;
        step_ = h * std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.9);
        if (step_ < kMinStep) {
          throw NumericalError("step size underflow near tau = " + fmt(tau) + " in " + sch_.label, tau);
        }
      }
    }
    return s;
  }

  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

 private:
  const ControlSchedule& sch_;
  const IntegratorConfig& cfg_;
  double step_;
  long accepted_ = 0;
  long rejected_ = 0;
};

inline std::vector<double> sample_grid(const ControlSchedule& sch, int count) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count) + sch.kicks.size());
  for (int i = 0; i < count; ++i) grid.push_back(static_cast<double>(i) / (count - 1));
  grid.back() = 1.0;
  for (const Kick& k : sch.kicks) grid.push_back(k.tau);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

inline void validate_schedule(const ControlSchedule& sch) {
  if (!sch.gamma || !sch.omega) throw InvalidArgument("schedule " + sch.label + " has no Gamma/omega profile");
  if (!(sch.duration > 0.0) || !std::isfinite(sch.duration)) {
    throw InvalidArgument("schedule " + sch.label + " has non-positive duration");
  }
  for (const Kick& k : sch.kicks) {
    if (!(k.tau >= 0.0 && k.tau <= 1.0) || !std::isfinite(k.area)) {
      throw InvalidArgument("schedule " + sch.label + " has a kick outside [0, 1]");
    }
  }
}

}  // namespace detail

/// Adiabatic ground state of the reference Hamiltonian at tau = 0.
inline StateVector initial_ground_state(const ControlSchedule& sch) {
  const ControlSample r = sch.reference_at(0.0);
  return ground_state(r.gamma, r.omega);
}

/// Propagate `schedule` from tau = 0 to 1. With no `initial` state the
/// evolution starts in the reference ground state at tau = 0.
inline Trajectory evolve(const ControlSchedule& schedule, const IntegratorConfig& cfg = {},
                         std::optional<StateVector> initial = std::nullopt) {
  cfg.validate();
  detail::validate_schedule(schedule);
  StateVector state = initial ? *initial : initial_ground_state(schedule);
  require_unit_norm(state);

  std::vector<Kick> kicks = schedule.kicks;
  std::stable_sort(kicks.begin(), kicks.end(), [](const Kick& a, const Kick& b) { return a.tau < b.tau; });
  std::vector<double> stops = schedule.breakpoints;
  std::sort(stops.begin(), stops.end());

  const std::vector<double> grid = detail::sample_grid(schedule, cfg.sample_count);
  Trajectory traj;
  traj.schedule_label = schedule.label;
  traj.duration = schedule.duration;
  traj.samples.reserve(grid.size());

  detail::Stepper stepper(schedule, cfg);
  std::size_t next_kick = 0;
  auto apply_kicks_at = [&](double tau) {
    while (next_kick < kicks.size() && kicks[next_kick].tau <= tau) {
      state = apply_kick(state, kicks[next_kick]);
      ++next_kick;
    }
  };

  double tau = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double target = grid[i];
    if (target > tau) {
      for (double b : stops) {
        if (b > tau && b < target) {
          state = stepper.advance(state, tau, b);
          tau = b;
        }
      }
      state = stepper.advance(state, tau, target);
      tau = target;
    }
    const bool end = i + 1 == grid.size();
    if (end) apply_kicks_at(1.0);
    traj.samples.push_back({target, state, schedule.at(target)});
    if (!end) apply_kicks_at(target);
  }
  return traj;
}

/// Final state only (two-point output grid).
inline StateVector evolve_final(const ControlSchedule& schedule, const IntegratorConfig& cfg = {},
                                std::optional<StateVector> initial = std::nullopt) {
  IntegratorConfig c = cfg;
  c.sample_count = 2;
  return evolve(schedule, c, initial).final_state();
}

/// F_fin = |<psi_g(tau = 1)|psi(1)>|^2 against the reference ground state.
inline double final_fidelity(const ControlSchedule& schedule, const IntegratorConfig& cfg = {}) {
  const StateVector fin = evolve_final(schedule, cfg);
  const ControlSample r = schedule.reference_at(1.0);
  return overlap_fidelity(ground_state(r.gamma, r.omega), fin);
}

}  // namespace qdrive
