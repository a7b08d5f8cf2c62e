#pragma once

// Mapping between the dimensionless two-level model and a Bose-Einstein
// condensate in an accelerated optical lattice. Energies are in units of the
// recoil energy hbar*omega_rec, times in 1/omega_rec, quasimomentum in hbar*k.

#include <cmath>
#include <numbers>

#include "qdrive/core.hpp"
#include "qdrive/errors.hpp"

namespace qdrive::lattice {

/// omega_rec = 2 pi x 3.125 kHz for 87Rb in an 842 nm lattice.
inline constexpr double kRubidiumRecoil = 2.0 * std::numbers::pi * 3125.0;
/// d_L = lambda/2 for lambda = 842 nm.
inline constexpr double kLatticeConstant = 421e-9;
/// Depths at or above this (in E_rec) leave the two-band regime.
inline constexpr double kDefaultValidityBound = 5.0;

struct LatticeParams {
  double v0 = 2.0;
  double q = 0.0;
  double gamma0 = kGamma0;
  double d_l = kLatticeConstant;
  double omega_rec = kRubidiumRecoil;
};

struct CouplingEstimate {
  double omega;
  /// Set when the two-level truncation is unreliable (deep, flat-band lattice).
  bool validity_warning;
};

/// hbar omega = V0 / 4.
inline CouplingEstimate depth_to_coupling(double v0, double validity_bound = kDefaultValidityBound) {
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw InvalidArgument("depth_to_coupling: lattice depth must be >= 0");
  return {0.25 * v0, v0 >= validity_bound};
}

inline double coupling_to_depth(double omega) {
  if (!(omega >= 0.0)) throw InvalidArgument("coupling_to_depth: omega must be >= 0");
  return 4.0 * omega;
}

/// Gamma = 2 gamma0 (q - 1/2), q in units of hbar k.
inline double quasimomentum_to_gamma(double q, double gamma0 = kGamma0) { return 2.0 * gamma0 * (q - 0.5); }

inline double gamma_to_quasimomentum(double gamma, double gamma0 = kGamma0) {
  if (gamma0 == 0.0) throw InvalidArgument("gamma_to_quasimomentum: gamma0 must be nonzero");
  return 0.5 + gamma / (2.0 * gamma0);
}

/// T_Bloch = 2 pi hbar / (F d_L); with hbar = 1 the units follow the inputs.
inline double bloch_period(double force, double d_l) {
  if (force == 0.0) throw InvalidArgument("bloch_period: force must be nonzero");
  if (!(d_l > 0.0)) throw InvalidArgument("bloch_period: lattice constant must be positive");
  return 2.0 * std::numbers::pi / (std::abs(force) * d_l);
}

inline double natural_time_to_seconds(double t, double omega_rec = kRubidiumRecoil) { return t / omega_rec; }

inline double seconds_to_natural_time(double seconds, double omega_rec = kRubidiumRecoil) { return seconds * omega_rec; }

}  // namespace qdrive::lattice
