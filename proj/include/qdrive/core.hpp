#pragma once

// Two-level Hamiltonian H = Gamma*sigma_z + omega*sigma_x (+ g*sigma_y), hbar = 1.
// The diabatic basis is {|0>, |1>} with sigma_z|0> = +|0>, so |0> has energy
// +Gamma and is the lower diabatic level while Gamma < 0.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "qdrive/errors.hpp"

namespace qdrive {

using Complex = std::complex<double>;

/// Sweep half-range: every sweep family runs Gamma from -kGamma0 to +kGamma0.
inline constexpr double kGamma0 = 2.0;

inline constexpr double kNormTolerance = 1e-6;

struct ControlSample {
  double gamma = 0.0;
  double omega = 0.0;
  /// Coefficient of sigma_y; nonzero only for counterdiabatic schedules.
  double sigma_y = 0.0;

  bool finite() const { return std::isfinite(gamma) && std::isfinite(omega) && std::isfinite(sigma_y); }
};

struct StateVector {
  Complex c0{1.0, 0.0};
  Complex c1{0.0, 0.0};

  double norm_squared() const { return std::norm(c0) + std::norm(c1); }

  static StateVector basis0() { return {Complex{1.0, 0.0}, Complex{0.0, 0.0}}; }
  static StateVector basis1() { return {Complex{0.0, 0.0}, Complex{1.0, 0.0}}; }
};

inline void require_unit_norm(const StateVector& s, double tol = kNormTolerance) {
  const double dev = std::abs(std::sqrt(s.norm_squared()) - 1.0);
  if (!(dev <= tol)) {
    throw NormalizationError("state vector is not normalized (norm deviation " + std::to_string(dev) + ")");
  }
}

inline StateVector normalized(StateVector s) {
  const double n = std::sqrt(s.norm_squared());
  if (!(n > 0.0) || !std::isfinite(n)) throw NormalizationError("cannot normalize a zero or non-finite state");
  s.c0 /= n;
  s.c1 /= n;
  return s;
}

/// <a|b>
inline Complex inner(const StateVector& a, const StateVector& b) {
  return std::conj(a.c0) * b.c0 + std::conj(a.c1) * b.c1;
}

struct AdiabaticPair {
  double e_ground;
  double e_excited;
  StateVector ground;
  StateVector excited;

  double gap() const { return e_excited - e_ground; }
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Eigenstructure of Gamma*sigma_z + omega*sigma_x.
///
/// With phi = atan2(omega, -Gamma) the ground state is (cos(phi/2), -sin(phi/2))
/// and the excited state (sin(phi/2), cos(phi/2)). The amplitude of the ground
/// state on |0> is therefore real and non-negative for omega >= 0.
inline AdiabaticPair adiabatic_eigenstates(const ControlSample& s) {
  if (!std::isfinite(s.gamma) || !std::isfinite(s.omega)) {
    throw InvalidArgument("adiabatic_eigenstates: non-finite control sample");
  }
  if (s.gamma == 0.0 && s.omega == 0.0) {
    throw GapClosedError("adiabatic_eigenstates: gap closed (Gamma = omega = 0)");
  }
  const double e = std::hypot(s.gamma, s.omega);
  const double half = 0.5 * std::atan2(s.omega, -s.gamma);
  const double c = std::cos(half);
  const double sn = std::sin(half);
  return AdiabaticPair{
      -e,
      e,
      StateVector{Complex{c, 0.0}, Complex{-sn, 0.0}},
      StateVector{Complex{sn, 0.0}, Complex{c, 0.0}},
  };
}

inline StateVector ground_state(double gamma, double omega) {
  return adiabatic_eigenstates({gamma, omega}).ground;
}

/// |<a|b>|^2 for unit-norm states.
inline double overlap_fidelity(const StateVector& a, const StateVector& b) {
  require_unit_norm(a);
  require_unit_norm(b);
  const double f = std::norm(inner(a, b));
  return std::clamp(f, 0.0, 1.0);
}

inline BlochVector to_bloch(const StateVector& s) {
  require_unit_norm(s);
  const Complex cross = std::conj(s.c0) * s.c1;
  return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(s.c0) - std::norm(s.c1)};
}

/// exp(-i * angle * sigma_z) applied to s: a Bloch rotation by 2*angle about z.
inline StateVector rotate_z(const StateVector& s, double angle) {
  const Complex phase = std::polar(1.0, -angle);
  return {s.c0 * phase, s.c1 * std::conj(phase)};
}

/// Apply H = Gamma sigma_z + omega sigma_x + g sigma_y to s.
inline StateVector apply_hamiltonian(const ControlSample& h, const StateVector& s) {
  const Complex i{0.0, 1.0};
  return {h.gamma * s.c0 + (h.omega - i * h.sigma_y) * s.c1,
          (h.omega + i * h.sigma_y) * s.c0 - h.gamma * s.c1};
}

}  // namespace qdrive
