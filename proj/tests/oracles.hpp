#pragma once

// Reference computations used only by the tests. They share no numerical code
// with the library: eigenstates come from Eigen's Hermitian solver and
// evolutions from fixed-step classical RK4 on the Schrodinger equation.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "qdrive/protocols.hpp"

namespace oracle {

using C = std::complex<double>;
using Vec = Eigen::Vector2cd;
using Mat = Eigen::Matrix2cd;

inline Mat hamiltonian(double gamma, double omega, double g = 0.0) {
  Mat h;
  h << C(gamma, 0.0), C(omega, -g), C(omega, g), C(-gamma, 0.0);
  return h;
}

struct Eigen2 {
  double e_ground;
  double e_excited;
  Vec ground;
  Vec excited;
};

inline Eigen2 diagonalize(double gamma, double omega, double g = 0.0) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hamiltonian(gamma, omega, g));
  return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvectors().col(0), es.eigenvectors().col(1)};
}

inline double fidelity(const Vec& a, const Vec& b) { return std::norm(a.dot(b)); }

inline Vec from(const qdrive::StateVector& s) { return Vec(s.c0, s.c1); }

inline Vec kick(const Vec& v, double area) {
  return Vec(std::exp(C(0.0, -area)) * v(0), std::exp(C(0.0, area)) * v(1));
}

/// dpsi/dtau = -i T H(tau) psi integrated with `steps` RK4 steps; kicks at
/// tau = 0 are applied first, kicks at tau = 1 last. Interior kicks are not
/// supported.
inline Vec rk4_evolve(const qdrive::ControlSchedule& s, Vec psi, int steps) {
  auto rhs = [&](double tau, const Vec& v) -> Vec {
    const double g = s.sigma_y ? s.sigma_y(tau) : 0.0;
    return C(0.0, -s.duration) * (hamiltonian(s.gamma(tau), s.omega(tau), g) * v);
  };
  for (const auto& k : s.kicks) {
    if (k.tau == 0.0) psi = kick(psi, k.area);
  }
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Vec k1 = rhs(t, psi);
    const Vec k2 = rhs(t + 0.5 * h, psi + 0.5 * h * k1);
    const Vec k3 = rhs(t + 0.5 * h, psi + 0.5 * h * k2);
    const Vec k4 = rhs(t + h, psi + h * k3);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  for (const auto& k : s.kicks) {
    if (k.tau == 1.0) psi = kick(psi, k.area);
  }
  return psi;
}

/// Final fidelity against the ground state of the schedule's reference
/// Hamiltonian, starting in the reference ground state at tau = 0.
inline double rk4_final_fidelity(const qdrive::ControlSchedule& s, int steps) {
  auto ref = [&](double tau) {
    if (s.reference) return diagonalize(s.reference->gamma(tau), s.reference->omega(tau)).ground;
    return diagonalize(s.gamma(tau), s.omega(tau)).ground;
  };
  return fidelity(ref(1.0), rk4_evolve(s, ref(0.0), steps));
}

/// Landau-Zener asymptotic infidelity for dGamma/dt = 4/T.
inline double lz_infidelity(double omega, double duration) {
  return std::exp(-M_PI * omega * omega * duration / 4.0);
}

}  // namespace oracle
