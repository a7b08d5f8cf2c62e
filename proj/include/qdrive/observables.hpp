#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qdrive/core.hpp"
#include "qdrive/engine.hpp"
#include "qdrive/errors.hpp"
#include "qdrive/protocols.hpp"

namespace qdrive {

enum class ObservableKind { AdiabaticFidelity, DiabaticProbability };

inline const char* to_string(ObservableKind k) {
  return k == ObservableKind::AdiabaticFidelity ? "adiabatic_fidelity" : "diabatic_probability";
}

struct ObservableSeries {
  std::vector<double> taus;
  std::vector<double> values;
  ObservableKind kind;
};

inline constexpr double kSeriesTolerance = 1e-12;

namespace detail {

inline double clamp_probability(double v) {
  if (v < -kSeriesTolerance || v > 1.0 + kSeriesTolerance) {
    throw NumericalError("probability " + fmt(v) + " outside [0, 1]", 0.0);
  }
  return std::clamp(v, 0.0, 1.0);
}

inline void require_matching(const Trajectory& traj, const ControlSchedule& schedule) {
  if (traj.schedule_label != schedule.label || traj.duration != schedule.duration) {
    throw InvalidArgument("trajectory of '" + traj.schedule_label + "' (T=" + fmt(traj.duration) +
                          ") does not belong to schedule '" + schedule.label + "' (T=" + fmt(schedule.duration) + ")");
  }
}

}  // namespace detail

/// State the schedule is designed to hold at tau: the reference ground state,
/// seen from the superadiabatic rotating frame at interior times.
inline StateVector designed_state(const ControlSchedule& schedule, double tau) {
  const ControlSample r = schedule.reference_at(tau);
  return rotate_z(ground_state(r.gamma, r.omega), schedule.reference_frame_area(tau));
}

/// F(tau) = |<psi_g(tau)|psi(tau)>|^2 at every trajectory sample.
inline ObservableSeries fidelity_series(const Trajectory& traj, const ControlSchedule& schedule) {
  detail::require_matching(traj, schedule);
  ObservableSeries out{{}, {}, ObservableKind::AdiabaticFidelity};
  out.taus.reserve(traj.samples.size());
  out.values.reserve(traj.samples.size());
  for (const TrajectorySample& s : traj.samples) {
    out.taus.push_back(s.tau);
    out.values.push_back(detail::clamp_probability(std::norm(inner(designed_state(schedule, s.tau), s.state))));
  }
  return out;
}

/// Population |<psi_e(tau)|psi(tau)>|^2 of the reference excited state.
inline ObservableSeries excited_population_series(const Trajectory& traj, const ControlSchedule& schedule) {
  detail::require_matching(traj, schedule);
  ObservableSeries out{{}, {}, ObservableKind::AdiabaticFidelity};
  for (const TrajectorySample& s : traj.samples) {
    const ControlSample r = schedule.reference_at(s.tau);
    const StateVector e = rotate_z(adiabatic_eigenstates(r).excited, schedule.reference_frame_area(s.tau));
    out.taus.push_back(s.tau);
    out.values.push_back(detail::clamp_probability(std::norm(inner(e, s.state))));
  }
  return out;
}

/// P_diab(tau) = |<1|psi(tau)>|^2.
inline ObservableSeries diabatic_probability_series(const Trajectory& traj) {
  ObservableSeries out{{}, {}, ObservableKind::DiabaticProbability};
  out.taus.reserve(traj.samples.size());
  out.values.reserve(traj.samples.size());
  for (const TrajectorySample& s : traj.samples) {
    out.taus.push_back(s.tau);
    out.values.push_back(detail::clamp_probability(std::norm(s.state.c1)));
  }
  return out;
}

/// Ground-state population of the initially empty diabatic level.
///
/// The closed form omega^2/2 / (Gamma^2 + omega^2 + Gamma E), E = sqrt(Gamma^2 +
/// omega^2), is the weight of the ground state on the level that is lower at
/// the start of the sweep. Evaluated at -Gamma it gives the population of |1>,
/// which is ~0 at Gamma = -2 and ~1 at Gamma = +2.
inline constexpr double kDiabaticSignConvention = -1.0;

inline double analytic_pdiab(const ControlSample& s) {
  if (s.gamma == 0.0 && s.omega == 0.0) throw GapClosedError("analytic_pdiab: gap closed (Gamma = omega = 0)");
  const double g = kDiabaticSignConvention * s.gamma;
  const double w2 = s.omega * s.omega;
  const double e = std::hypot(s.gamma, s.omega);
  // Both branches are the closed form above; the second is 1 - (same form at -g)
  // to avoid cancellation in Gamma^2 + omega^2 + g E when g < 0.
  if (g >= 0.0) return 0.5 * w2 / (e * e + g * e);
  return 1.0 - 0.5 * w2 / (e * e - g * e);
}

}  // namespace qdrive
