#pragma once

// Control schedules: Gamma(tau), omega(tau) on the rescaled time tau = t/T in
// [0, 1], a nominal duration T, and a list of instantaneous sigma_z kicks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qdrive/core.hpp"
#include "qdrive/errors.hpp"

namespace qdrive {

using TauFunction = std::function<double(double)>;

enum class KickAxis { Z };

/// Impulse exp(-i * area * sigma_z) applied at rescaled time tau.
struct Kick {
  double tau = 0.0;
  KickAxis axis = KickAxis::Z;
  double area = 0.0;
};

enum class Family {
  LinearLZ,
  PowerLaw,
  LinearPlusSin,
  Tangent,
  RolandCerf,
  RcEta,
  CompositePulse,
  SuperadiabaticLinear,
  SuperadiabaticTangent,
  Counterdiabatic,
  Mirror,
};

/// The Hamiltonian a schedule is designed to follow, used by fidelity
/// measurements. For superadiabatic schedules the evolved state is the base
/// ground state seen from a frame rotated about z by `frame_area(tau)` (in
/// kick-area units); the edge kicks remove that rotation at tau = 0 and 1.
struct ReferenceHamiltonian {
  TauFunction gamma;
  TauFunction omega;
  TauFunction frame_area;
};

struct ControlSchedule {
  std::string label;
  Family family = Family::LinearLZ;
  double duration = 1.0;
  TauFunction gamma;
  TauFunction omega;
  TauFunction sigma_y;     // empty: no sigma_y term
  TauFunction gamma_rate;  // dGamma/dtau; empty: numerical
  TauFunction omega_rate;  // domega/dtau; empty: numerical
  std::vector<Kick> kicks;
  /// tau values where Gamma or omega jump; the integrator lands on them.
  std::vector<double> breakpoints;
  std::optional<ReferenceHamiltonian> reference;
  /// Gamma(0) = -2, Gamma(1) = +2.
  bool sweep_family = true;
  /// Gamma(1-tau) = -Gamma(tau), omega(1-tau) = omega(tau).
  bool point_symmetric = true;

  ControlSample at(double tau) const {
    return {gamma(tau), omega(tau), sigma_y ? sigma_y(tau) : 0.0};
  }

  /// Base Hamiltonian sample whose ground state the protocol targets.
  ControlSample reference_at(double tau) const {
    if (reference) return {reference->gamma(tau), reference->omega(tau), 0.0};
    return {gamma(tau), omega(tau), 0.0};
  }

  double reference_frame_area(double tau) const {
    if (!reference || !reference->frame_area || tau <= 0.0 || tau >= 1.0) return 0.0;
    return reference->frame_area(tau);
  }
};

namespace detail {

inline constexpr double kDerivativeStep = 1e-6;

/// Second-order finite difference that stays inside [0, 1].
inline double tau_derivative(const TauFunction& f, double tau, double h = kDerivativeStep) {
  if (tau - h < 0.0) return (-3.0 * f(tau) + 4.0 * f(tau + h) - f(tau + 2.0 * h)) / (2.0 * h);
  if (tau + h > 1.0) return (3.0 * f(tau) - 4.0 * f(tau - h) + f(tau - 2.0 * h)) / (2.0 * h);
  return (f(tau + h) - f(tau - h)) / (2.0 * h);
}

inline void require_positive(double v, const char* name, const char* where) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << where << ": " << name << " must be positive and finite (got " << v << ")";
    throw InvalidArgument(os.str());
  }
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

inline TauFunction constant(double v) {
  return [v](double) { return v; };
}

}  // namespace detail

inline double gamma_rate(const ControlSchedule& s, double tau) {
  return s.gamma_rate ? s.gamma_rate(tau) : detail::tau_derivative(s.gamma, tau);
}

inline double omega_rate(const ControlSchedule& s, double tau) {
  return s.omega_rate ? s.omega_rate(tau) : detail::tau_derivative(s.omega, tau);
}

// ---------------------------------------------------------------------------
// Sweeps at constant coupling

inline ControlSchedule linear_lz(double omega, double duration) {
  detail::require_positive(omega, "omega", "linear_lz");
  detail::require_positive(duration, "T", "linear_lz");
  ControlSchedule s;
  s.label = "linear-lz(omega=" + detail::fmt(omega) + ")";
  s.family = Family::LinearLZ;
  s.duration = duration;
  s.gamma = [](double tau) { return 4.0 * (tau - 0.5); };
  s.omega = detail::constant(omega);
  s.gamma_rate = detail::constant(4.0);
  s.omega_rate = detail::constant(0.0);
  return s;
}

/// Gamma = 2 sign(tau - 1/2) |2(tau - 1/2)|^alpha, i.e. -+2^(alpha+1)|tau - 1/2|^alpha.
inline ControlSchedule power_law(double alpha, double omega, double duration) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("power_law: alpha must be >= 1 (got " + detail::fmt(alpha) + ")");
  }
  detail::require_positive(omega, "omega", "power_law");
  detail::require_positive(duration, "T", "power_law");
  ControlSchedule s;
  s.label = "power-law(alpha=" + detail::fmt(alpha) + ",omega=" + detail::fmt(omega) + ")";
  s.family = Family::PowerLaw;
  s.duration = duration;
  s.gamma = [alpha](double tau) {
    const double x = 2.0 * (tau - 0.5);
    return std::copysign(2.0 * std::pow(std::abs(x), alpha), x);
  };
  s.omega = detail::constant(omega);
  s.gamma_rate = [alpha](double tau) {
    const double x = std::abs(2.0 * (tau - 0.5));
    return alpha == 1.0 ? 4.0 : 4.0 * alpha * std::pow(x, alpha - 1.0);
  };
  s.omega_rate = detail::constant(0.0);
  return s;
}

/// Gamma = 4[tau + delta sin(2 pi tau)] - 2, written in the odd form 4s - 4 delta sin(2 pi s).
inline ControlSchedule linear_plus_sin(double delta, double omega, double duration) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("linear_plus_sin: delta must be >= 0 (got " + detail::fmt(delta) + ")");
  }
  detail::require_positive(omega, "omega", "linear_plus_sin");
  detail::require_positive(duration, "T", "linear_plus_sin");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ControlSchedule s;
  s.label = "linear-sin(delta=" + detail::fmt(delta) + ",omega=" + detail::fmt(omega) + ")";
  s.family = Family::LinearPlusSin;
  s.duration = duration;
  s.gamma = [delta](double tau) {
    const double x = tau - 0.5;
    return 4.0 * x - 4.0 * delta * std::sin(two_pi * x);
  };
  s.omega = detail::constant(omega);
  s.gamma_rate = [delta](double tau) { return 4.0 - 4.0 * delta * two_pi * std::cos(two_pi * (tau - 0.5)); };
  s.omega_rate = detail::constant(0.0);
  return s;
}

/// Gamma = omega tan(2(tau - 1/2) arctan(2/omega)).
inline ControlSchedule tangent(double omega, double duration) {
  detail::require_positive(omega, "omega", "tangent");
  detail::require_positive(duration, "T", "tangent");
  const double a = std::atan(kGamma0 / omega);
  ControlSchedule s;
  s.label = "tangent(omega=" + detail::fmt(omega) + ")";
  s.family = Family::Tangent;
  s.duration = duration;
  s.gamma = [omega, a](double tau) { return omega * std::tan(2.0 * (tau - 0.5) * a); };
  s.omega = detail::constant(omega);
  s.gamma_rate = [omega, a](double tau) {
    const double c = std::cos(2.0 * (tau - 0.5) * a);
    return 2.0 * a * omega / (c * c);
  };
  s.omega_rate = detail::constant(0.0);
  return s;
}

// ---------------------------------------------------------------------------
// Locally adiabatic (Roland-Cerf) sweeps

/// Optimal eta = 1/sqrt(4 + omega^2).
inline double eta_opt(double omega) { return 1.0 / std::sqrt(4.0 + omega * omega); }

/// T_F = 1/(epsilon * omega * sqrt(4 + omega^2)).
inline double roland_cerf_duration(double epsilon, double omega) {
  return 1.0 / (epsilon * omega * std::sqrt(4.0 + omega * omega));
}

/// Gamma = 4 sqrt(1 - 4 eta^2)(tau - 1/2) / sqrt(1 - 16 eta^2 (tau - 1/2)^2).
inline ControlSchedule rc_eta(double eta, double omega, double duration) {
  if (!(eta > 0.0) || !(eta * eta < 0.25)) {
    throw InvalidArgument("rc_eta: need 0 < eta^2 < 0.25 (got eta = " + detail::fmt(eta) + ")");
  }
  detail::require_positive(omega, "omega", "rc_eta");
  detail::require_positive(duration, "T", "rc_eta");
  const double e2 = eta * eta;
  const double k = std::sqrt(1.0 - 4.0 * e2);
  ControlSchedule s;
  s.label = "rc-eta(eta_sq=" + detail::fmt(e2) + ",omega=" + detail::fmt(omega) + ")";
  s.family = Family::RcEta;
  s.duration = duration;
  s.gamma = [e2, k](double tau) {
    const double x = tau - 0.5;
    return 4.0 * k * x / std::sqrt(1.0 - 16.0 * e2 * x * x);
  };
  s.omega = detail::constant(omega);
  s.gamma_rate = [e2, k](double tau) {
    const double x = tau - 0.5;
    return 4.0 * k * std::pow(1.0 - 16.0 * e2 * x * x, -1.5);
  };
  s.omega_rate = detail::constant(0.0);
  return s;
}

inline ControlSchedule roland_cerf(double epsilon, double omega) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InvalidArgument("roland_cerf: epsilon must lie in (0, 1) (got " + detail::fmt(epsilon) + ")");
  }
  detail::require_positive(omega, "omega", "roland_cerf");
  ControlSchedule s = rc_eta(eta_opt(omega), omega, roland_cerf_duration(epsilon, omega));
  s.label = "roland-cerf(epsilon=" + detail::fmt(epsilon) + ",omega=" + detail::fmt(omega) + ")";
  s.family = Family::RolandCerf;
  return s;
}

// ---------------------------------------------------------------------------
// Time-optimal composite pulse

/// |<psi_g(+gamma0)|psi_g(-gamma0)>| at fixed coupling.
inline double endpoint_overlap(double omega, double gamma0 = kGamma0) {
  return std::abs(inner(ground_state(gamma0, omega), ground_state(-gamma0, omega)));
}

/// Duration of the Gamma = 0 Rabi segment: arccos|<fin|ini>| / omega.
inline double rabi_segment_duration(double omega, double gamma0 = kGamma0) {
  return std::acos(std::min(1.0, endpoint_overlap(omega, gamma0))) / omega;
}

/// Half Rabi rotation at Gamma = 0 framed by z impulses of area +pi/4 and -pi/4.
///
/// With `gamma_m` unset the impulses are ideal kicks; otherwise they are square
/// pulses of height +-gamma_m lasting t0 = pi/(4 gamma_m) each, during which the
/// coupling stays on.
inline ControlSchedule composite_pulse(double omega, std::optional<double> gamma_m = std::nullopt,
                                       double gamma0 = kGamma0) {
  detail::require_positive(omega, "omega", "composite_pulse");
  detail::require_positive(gamma0, "gamma0", "composite_pulse");
  constexpr double quarter_pi = std::numbers::pi / 4.0;
  const double plateau = rabi_segment_duration(omega, gamma0);
  ControlSchedule s;
  s.family = Family::CompositePulse;
  s.sweep_family = false;
  s.omega = detail::constant(omega);
  s.omega_rate = detail::constant(0.0);
  if (!gamma_m) {
    s.label = "composite(omega=" + detail::fmt(omega) + ")";
    s.duration = plateau;
    s.gamma = [gamma0](double tau) { return tau <= 0.0 ? -gamma0 : (tau >= 1.0 ? gamma0 : 0.0); };
    s.kicks = {Kick{0.0, KickAxis::Z, quarter_pi}, Kick{1.0, KickAxis::Z, -quarter_pi}};
    return s;
  }
  detail::require_positive(*gamma_m, "gamma_m", "composite_pulse");
  const double t0 = quarter_pi / *gamma_m;
  if (!(t0 < 0.5 * plateau)) {
    throw InvalidArgument("composite_pulse: gamma_m = " + detail::fmt(*gamma_m) +
                          " gives edge pulses of length " + detail::fmt(t0) +
                          ", not shorter than half the ideal transfer time " + detail::fmt(plateau));
  }
  const double total = plateau + 2.0 * t0;
  const double edge = t0 / total;
  const double gm = *gamma_m;
  s.label = "composite(omega=" + detail::fmt(omega) + ",gamma_m=" + detail::fmt(gm) + ")";
  s.duration = total;
  s.gamma = [gamma0, gm, edge](double tau) {
    if (tau <= 0.0) return -gamma0;
    if (tau >= 1.0) return gamma0;
    if (tau < edge) return gm;
    if (tau > 1.0 - edge) return -gm;
    return 0.0;
  };
  s.breakpoints = {edge, 1.0 - edge};
  return s;
}

// ---------------------------------------------------------------------------
// Counterdiabatic and superadiabatic schedules

/// sigma_y coefficient g = (omega' Gamma - Gamma' omega) / (2(Gamma^2 + omega^2)),
/// derivatives taken in physical time.
inline double counterdiabatic_coefficient(const ControlSchedule& base, double tau) {
  const double g = base.gamma(tau);
  const double w = base.omega(tau);
  const double d2 = g * g + w * w;
  if (d2 == 0.0) {
    throw GapClosedError("counterdiabatic_construct: gap closes at tau = " + detail::fmt(tau));
  }
  const double gdot = gamma_rate(base, tau) / base.duration;
  const double wdot = omega_rate(base, tau) / base.duration;
  return (wdot * g - gdot * w) / (2.0 * d2);
}

/// H + H_c with H_c = g(tau) sigma_y; evolution follows the base ground state exactly.
inline ControlSchedule counterdiabatic_construct(const ControlSchedule& base) {
  if (!base.kicks.empty()) {
    throw InvalidArgument("counterdiabatic_construct: base schedule must not contain kicks");
  }
  constexpr int probes = 257;
  for (int i = 0; i < probes; ++i) {
    const double tau = static_cast<double>(i) / (probes - 1);
    if (base.gamma(tau) == 0.0 && base.omega(tau) == 0.0) {
      throw GapClosedError("counterdiabatic_construct: gap closes at tau = " + detail::fmt(tau));
    }
  }
  ControlSchedule s = base;
  s.label = "counterdiabatic[" + base.label + "]";
  s.family = Family::Counterdiabatic;
  s.sigma_y = [base](double tau) { return counterdiabatic_coefficient(base, tau); };
  s.reference = ReferenceHamiltonian{base.gamma, base.omega, {}};
  return s;
}

struct SuperadiabaticOptions {
  /// false: keep omega' = omega (Gamma' and the edge kicks are unchanged).
  bool omega_correction = true;
  /// Use the Gamma' expression exactly as printed in the original write-up of
  /// the linear protocol. Its denominator does not follow from the base
  /// linear sweep, so evolution under it does not track the ground state.
  bool printed_linear_form = false;
};

/// Edge kick areas -+ chi/2 where chi = atan(g/omega) is the frame angle.
inline std::pair<Kick, Kick> superadiabatic_edge_kicks(double chi_start, double chi_end) {
  return {Kick{0.0, KickAxis::Z, -0.5 * chi_start}, Kick{1.0, KickAxis::Z, 0.5 * chi_end}};
}

/// Counterdiabatic linear sweep rotated into the x-z plane.
///
/// With s = tau - 1/2 and u = T(8 s^2 + omega^2/2):
///   omega' = omega sqrt(1 + 1/u^2),
///   Gamma' = 4s - 8s/(u^2 + 1),
/// and the rotating-frame angle chi = -atan(1/u).
inline ControlSchedule superadiabatic_linear(double omega, double duration, SuperadiabaticOptions opts = {}) {
  detail::require_positive(omega, "omega", "superadiabatic_linear");
  detail::require_positive(duration, "T", "superadiabatic_linear");
  const double T = duration;
  const double w2half = 0.5 * omega * omega;
  auto u_of = [T, w2half](double tau) {
    const double x = tau - 0.5;
    return T * (8.0 * x * x + w2half);
  };
  ControlSchedule s;
  s.label = "superadiabatic-linear(omega=" + detail::fmt(omega) + ",T=" + detail::fmt(T) +
            (opts.omega_correction ? "" : ",uncorrected") + (opts.printed_linear_form ? ",printed" : "") + ")";
  s.family = Family::SuperadiabaticLinear;
  s.duration = T;
  if (opts.printed_linear_form) {
    s.gamma = [T, w2half](double tau) {
      const double x = tau - 0.5;
      const double d = T * (x * x + w2half);
      return 4.0 * x - 4.0 * x / (d * d + 1.0);
    };
  } else {
    s.gamma = [u_of](double tau) {
      const double x = tau - 0.5;
      const double u = u_of(tau);
      return 4.0 * x - 8.0 * x / (u * u + 1.0);
    };
  }
  if (opts.omega_correction) {
    s.omega = [omega, u_of](double tau) {
      const double u = u_of(tau);
      return omega * std::sqrt(1.0 + 1.0 / (u * u));
    };
  } else {
    s.omega = detail::constant(omega);
  }
  const double chi_edge = -std::atan(1.0 / u_of(0.0));
  auto [k0, k1] = superadiabatic_edge_kicks(chi_edge, chi_edge);
  s.kicks = {k0, k1};
  s.reference = ReferenceHamiltonian{
      [](double tau) { return 4.0 * (tau - 0.5); },
      detail::constant(omega),
      [u_of](double tau) { return 0.5 * std::atan(1.0 / u_of(tau)); },
  };
  return s;
}

/// Counterdiabatic tangent sweep: Gamma unchanged, constant
/// omega' = omega sqrt(1 + (arctan(2/omega)/(T omega))^2).
inline ControlSchedule superadiabatic_tangent(double omega, double duration, SuperadiabaticOptions opts = {}) {
  detail::require_positive(omega, "omega", "superadiabatic_tangent");
  detail::require_positive(duration, "T", "superadiabatic_tangent");
  const double a = std::atan(kGamma0 / omega);
  const double ratio = a / (duration * omega);
  const ControlSchedule base = tangent(omega, duration);
  ControlSchedule s;
  s.label = "superadiabatic-tangent(omega=" + detail::fmt(omega) + ",T=" + detail::fmt(duration) +
            (opts.omega_correction ? "" : ",uncorrected") + ")";
  s.family = Family::SuperadiabaticTangent;
  s.duration = duration;
  s.gamma = base.gamma;
  s.gamma_rate = base.gamma_rate;
  s.omega = detail::constant(opts.omega_correction ? omega * std::sqrt(1.0 + ratio * ratio) : omega);
  s.omega_rate = detail::constant(0.0);
  const double chi = -std::atan(ratio);
  auto [k0, k1] = superadiabatic_edge_kicks(chi, chi);
  s.kicks = {k0, k1};
  s.reference = ReferenceHamiltonian{base.gamma, base.omega, detail::constant(-0.5 * chi)};
  return s;
}

// ---------------------------------------------------------------------------
// Schedule transforms

/// Same tau-profile executed over a different physical duration.
inline ControlSchedule with_duration(ControlSchedule s, double duration) {
  detail::require_positive(duration, "T", "with_duration");
  s.duration = duration;
  return s;
}

/// Time-reversed schedule: tau -> 1 - tau, kicks mirrored. The sigma_y term
/// changes sign so that evolving the complex-conjugated final state under the
/// mirror retraces the original trajectory.
inline ControlSchedule time_mirror(const ControlSchedule& src) {
  ControlSchedule s;
  s.label = "mirror[" + src.label + "]";
  s.family = Family::Mirror;
  s.duration = src.duration;
  s.sweep_family = false;
  s.point_symmetric = false;
  auto g = src.gamma;
  auto w = src.omega;
  s.gamma = [g](double tau) { return g(1.0 - tau); };
  s.omega = [w](double tau) { return w(1.0 - tau); };
  if (src.sigma_y) {
    auto y = src.sigma_y;
    s.sigma_y = [y](double tau) { return -y(1.0 - tau); };
  }
  for (auto it = src.kicks.rbegin(); it != src.kicks.rend(); ++it) {
    s.kicks.push_back(Kick{1.0 - it->tau, it->axis, it->area});
  }
  for (auto it = src.breakpoints.rbegin(); it != src.breakpoints.rend(); ++it) s.breakpoints.push_back(1.0 - *it);
  return s;
}

}  // namespace qdrive
