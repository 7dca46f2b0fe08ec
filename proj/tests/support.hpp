#pragma once

// Shared helpers for the test binaries: seeded random draws and small dense oracles.

#include <cmath>
#include <random>

#include "scarlab/hilbert.hpp"

namespace scarlab::testing {

inline Eigen::VectorXcd random_vector(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (Eigen::Index j = 0; j < dim; ++j) v[j] = Complex(g(rng), g(rng));
  return v;
}

inline StateVector random_state(const BasisPtr& basis, std::mt19937_64& rng) {
  return StateVector(basis, random_vector(basis->size(), rng).normalized());
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Reduced density matrix of sites [0, cut) by explicit summation over the environment.
inline Eigen::MatrixXcd reduced_density_left(const Eigen::VectorXcd& full, int n, int cut) {
  const Eigen::Index dl = Eigen::Index{1} << cut;
  const Eigen::Index dr = Eigen::Index{1} << (n - cut);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dl, dl);
  for (Eigen::Index a = 0; a < dl; ++a)
    for (Eigen::Index b = 0; b < dl; ++b)
      for (Eigen::Index e = 0; e < dr; ++e) rho(a, b) += full[a + dl * e] * std::conj(full[b + dl * e]);
  return rho;
}

inline Eigen::MatrixXcd reduced_density_right(const Eigen::VectorXcd& full, int n, int cut) {
  const Eigen::Index dl = Eigen::Index{1} << cut;
  const Eigen::Index dr = Eigen::Index{1} << (n - cut);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dr, dr);
  for (Eigen::Index a = 0; a < dr; ++a)
    for (Eigen::Index b = 0; b < dr; ++b)
      for (Eigen::Index e = 0; e < dl; ++e) rho(a, b) += full[e + dl * a] * std::conj(full[e + dl * b]);
  return rho;
}

inline double von_neumann(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double p = es.eigenvalues()[k];
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

}  // namespace scarlab::testing
