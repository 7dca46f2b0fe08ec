#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "scarlab/dynamics.hpp"
#include "scarlab/pipeline.hpp"
#include "support.hpp"

using namespace scarlab;

namespace {

struct Small {
  HamiltonianOp h;
  EigenSet eigs;
};

Small small_xorx(int n) {
  Small s;
  s.h = build_xorx({1.0, 0.1, 1.0, n}, SectorConstraint::frozen(n));
  s.eigs = diagonalize(s.h);
  return s;
}

// exp(-iHt) psi0 from the dense matrix exponential.
Eigen::VectorXcd expm_oracle(const HamiltonianOp& h, const StateVector& psi0, double t) {
  const Eigen::MatrixXcd dense = to_dense(h.op);
  const Eigen::MatrixXcd u = (Complex(0.0, -t) * dense).exp();
  return u * psi0.amplitudes();
}

}  // namespace

TEST_CASE("evolve at t=0 returns the initial state unchanged") {
  auto s = small_xorx(8);
  std::mt19937_64 rng(3);
  const auto psi = testing::random_state(s.eigs.basis, rng);
  const auto out = evolve(s.eigs, psi, 0.0);
  CHECK((out.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigenstates are stationary") {
  auto s = small_xorx(8);
  for (Eigen::Index j : {Eigen::Index{0}, s.eigs.size() / 2, s.eigs.size() - 1}) {
    const auto curve = revival_curve(s.eigs, s.eigs.state(j), time_grid(50.0, 101));
    for (double f : curve.fidelity) CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("evolution preserves the norm of random states") {
  auto s = small_xorx(10);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = testing::random_state(s.eigs.basis, rng);
    const auto out = evolve(s.eigs, psi, 37.3);  // lambda = 1
    CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("spectral propagator matches the matrix exponential") {
  std::mt19937_64 rng(5);
  SUBCASE("xorX, frozen boundaries") {
    auto s = small_xorx(8);
    for (double t : {0.3, 2.7, 19.1}) {
      const auto psi = testing::random_state(s.eigs.basis, rng);
      const Eigen::VectorXcd ref = expm_oracle(s.h, psi, t);
      CHECK((evolve(s.eigs, psi, t).amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-8);
      const double f_ref = std::norm(psi.amplitudes().dot(ref));
      const std::vector<double> grid{t};
      CHECK(std::abs(revival_curve(s.eigs, psi, grid).fidelity[0] - f_ref) < 1e-8);
    }
  }
  SUBCASE("PXP, periodic") {
    PXPParams p;
    p.n = 8;
    p.boundary = PXPBoundary::Periodic;
    const auto h = build_pxp(p, SectorConstraint::rydberg(8, true));
    const auto eigs = diagonalize(h);
    for (double t : {0.5, 4.0}) {
      const auto psi = testing::random_state(eigs.basis, rng);
      const Eigen::VectorXcd ref = expm_oracle(h, psi, t);
      CHECK((evolve(eigs, psi, t).amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("two-level states follow the closed-form fidelity") {
  auto s = small_xorx(8);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index a = std::uniform_int_distribution<Eigen::Index>(0, s.eigs.size() - 1)(rng);
    Eigen::Index b = std::uniform_int_distribution<Eigen::Index>(0, s.eigs.size() - 1)(rng);
    if (b == a) b = (a + 1) % s.eigs.size();
    const double p = testing::uniform(rng, 0.05, 0.95);
    const double phase = testing::uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const Eigen::VectorXcd v = std::sqrt(p) * s.eigs.states.col(a) +
                               std::sqrt(1.0 - p) * std::polar(1.0, phase) * s.eigs.states.col(b);
    const StateVector psi(s.eigs.basis, v);
    const double gap = s.eigs.energies[b] - s.eigs.energies[a];
    const auto times = time_grid(30.0, 61);
    const auto curve = revival_curve(s.eigs, psi, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double expected = 1.0 - 2.0 * p * (1.0 - p) * (1.0 - std::cos(gap * times[i]));
      CHECK(std::abs(curve.fidelity[i] - expected) < 1e-12);
    }
  }
}

TEST_CASE("fidelity starts at one and stays in [0, 1]") {
  auto s = small_xorx(8);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto psi = testing::random_state(s.eigs.basis, rng);
    const auto curve = revival_curve(s.eigs, psi, time_grid(100.0, 201));
    CHECK(std::abs(curve.fidelity[0] - 1.0) < 1e-12);
    for (double f : curve.fidelity) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
  }
}

TEST_CASE("equal superposition of the scar tower revives at the tower period") {
  const XorXParams params{1.0, 0.1, 1.0, 10};
  const auto spec = xorx_spectrum(params);
  std::vector<double> scar_energies;
  for (auto j : spec.scar_indices) scar_energies.push_back(spec.eigs.energies[j]);
  const double period = tower_period(scar_energies);
  // spacing from the closed-form tower energies, independent of ED
  const double spacing = 2.0 * params.delta - 4.0 * params.j;
  CHECK(period == doctest::Approx(2.0 * std::numbers::pi / std::abs(spacing)).epsilon(1e-9));

  const auto psi = equal_superposition(spec.eigs, spec.scar_indices);
  const std::vector<double> times{0.0, 0.5 * period, period, 2.0 * period};
  const auto curve = revival_curve(spec.eigs, psi, times, "scars");
  CHECK(curve.fidelity[2] > 0.999);
  CHECK(curve.fidelity[3] > 0.999);
  CHECK(curve.fidelity[1] < 0.5);
}

TEST_CASE("tower period rejects uneven or flat towers") {
  CHECK(tower_period({0.0, 2.0, 4.0}) == doctest::Approx(std::numbers::pi));
  CHECK_THROWS_AS(tower_period({0.0, 1.0, 3.0}), Error);
  CHECK_THROWS_AS(tower_period({1.0, 1.0}), Error);
  CHECK_THROWS_AS(tower_period({1.0}), Error);
}

TEST_CASE("states from another sector are rejected") {
  auto s = small_xorx(8);
  const auto other = build_sector(8, SectorConstraint::full(8));
  const auto psi = StateVector::basis_state(other, 0);
  try {
    evolve(s.eigs, psi, 1.0);
    FAIL("expected SectorMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorMismatch);
  }
  CHECK_THROWS_AS(revival_curve(s.eigs, psi, time_grid(1.0, 3)), Error);
}

TEST_CASE("peak and mean helpers") {
  RevivalCurve c;
  c.times = {0.0, 1.0, 2.0, 3.0};
  c.fidelity = {1.0, 0.2, 0.6, 0.4};
  CHECK(peak_after(c, 0.5) == doctest::Approx(0.6));
  CHECK(mean_after(c, 1.0) == doctest::Approx(0.4));
  CHECK_THROWS_AS(peak_after(c, 5.0), Error);
}
