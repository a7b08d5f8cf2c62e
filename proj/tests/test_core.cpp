#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qdrive/core.hpp"
#include "qdrive/errors.hpp"

using namespace qdrive;

TEST(AdiabaticEigenstates, DiagonalHamiltonian) {
  const auto p = adiabatic_eigenstates({-2.0, 0.0});
  EXPECT_NEAR(p.gap(), 4.0, 1e-15);
  EXPECT_NEAR(std::abs(p.ground.c0), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(p.ground.c1), 0.0, 1e-15);
  EXPECT_GE(p.ground.c0.real(), 0.0);
}

TEST(AdiabaticEigenstates, Anticrossing) {
  const auto p = adiabatic_eigenstates({0.0, 0.5});
  EXPECT_NEAR(p.gap(), 1.0, 1e-15);
  EXPECT_NEAR(p.ground.c0.real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(p.ground.c1.real(), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(AdiabaticEigenstates, UpperLevelWeightMatchesDiagonalization) {
  const auto p = adiabatic_eigenstates({-2.0, 0.5});
  const auto o = oracle::diagonalize(-2.0, 0.5);
  EXPECT_NEAR(std::norm(p.ground.c1), std::norm(o.ground(1)), 1e-14);
  EXPECT_NEAR(std::norm(p.ground.c1), 0.0149, 5e-5);
}

TEST(AdiabaticEigenstates, GapClosedThrows) {
  EXPECT_THROW(adiabatic_eigenstates({0.0, 0.0}), GapClosedError);
  EXPECT_THROW(adiabatic_eigenstates({NAN, 0.5}), InvalidArgument);
}

TEST(AdiabaticEigenstates, RandomizedAgainstEigen) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> g(-10.0, 10.0);
  std::uniform_real_distribution<double> w(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const ControlSample s{g(rng), w(rng)};
    const auto p = adiabatic_eigenstates(s);
    const auto o = oracle::diagonalize(s.gamma, s.omega);
    EXPECT_NEAR(p.e_ground, o.e_ground, 1e-12 * (1.0 + std::abs(o.e_ground)));
    EXPECT_NEAR(p.e_excited, o.e_excited, 1e-12 * (1.0 + std::abs(o.e_excited)));
    EXPECT_NEAR(p.gap(), 2.0 * std::hypot(s.gamma, s.omega), 1e-12 * (1.0 + p.gap()));
    EXPECT_NEAR(oracle::fidelity(oracle::from(p.ground), o.ground), 1.0, 1e-12);
    EXPECT_LT(std::abs(inner(p.ground, p.excited)), 1e-12);
    EXPECT_NEAR(p.ground.norm_squared(), 1.0, 1e-12);
    // H v = E v
    const StateVector hv = apply_hamiltonian(s, p.ground);
    const double res = std::abs(hv.c0 - p.e_ground * p.ground.c0) + std::abs(hv.c1 - p.e_ground * p.ground.c1);
    EXPECT_LT(res, 1e-10 * (std::abs(s.gamma) + s.omega));
    EXPECT_GE(p.ground.c0.real(), 0.0);
    EXPECT_EQ(p.ground.c0.imag(), 0.0);
  }
}

TEST(OverlapFidelity, Basics) {
  const StateVector psi{Complex(0.6, 0.0), Complex(0.0, 0.8)};
  EXPECT_NEAR(overlap_fidelity(psi, psi), 1.0, 1e-15);
  EXPECT_EQ(overlap_fidelity(StateVector::basis0(), StateVector::basis1()), 0.0);
  const StateVector phased{psi.c0 * std::polar(1.0, 1.3), psi.c1 * std::polar(1.0, 1.3)};
  EXPECT_NEAR(overlap_fidelity(psi, phased), 1.0, 1e-15);
  EXPECT_NEAR(overlap_fidelity(phased, StateVector::basis0()), overlap_fidelity(StateVector::basis0(), phased), 1e-15);
}

TEST(OverlapFidelity, EndpointGroundStates) {
  const double f = overlap_fidelity(ground_state(-2.0, 0.5), ground_state(2.0, 0.5));
  const double geometric = std::pow(std::cos((std::numbers::pi - 2.0 * std::atan(0.25)) / 2.0), 2);
  const auto a = oracle::diagonalize(-2.0, 0.5).ground;
  const auto b = oracle::diagonalize(2.0, 0.5).ground;
  EXPECT_NEAR(f, geometric, 1e-14);
  EXPECT_NEAR(f, oracle::fidelity(a, b), 1e-14);
  EXPECT_NEAR(f, 0.0588, 1e-4);
}

TEST(OverlapFidelity, RejectsUnnormalized) {
  const StateVector bad{Complex(1.0, 0.0), Complex(0.01, 0.0)};
  EXPECT_THROW(overlap_fidelity(bad, StateVector::basis0()), NormalizationError);
}

TEST(Bloch, CardinalStates) {
  const double r = 1.0 / std::sqrt(2.0);
  auto b = to_bloch(StateVector::basis0());
  EXPECT_NEAR(b.z, 1.0, 1e-15);
  b = to_bloch({Complex(r, 0), Complex(r, 0)});
  EXPECT_NEAR(b.x, 1.0, 1e-15);
  EXPECT_NEAR(b.y, 0.0, 1e-15);
  b = to_bloch({Complex(r, 0), Complex(0, r)});
  EXPECT_NEAR(b.y, 1.0, 1e-15);
  EXPECT_NEAR(b.x, 0.0, 1e-15);
  EXPECT_NEAR(b.norm(), 1.0, 1e-15);
}
