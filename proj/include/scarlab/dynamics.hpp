#pragma once

// Unitary evolution through the spectral decomposition and return-probability curves.

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scarlab/spectra.hpp"

namespace scarlab {

// psi_t = sum_j exp(-i E_j t) <v_j|psi0> v_j. Throws SectorMismatch when psi0 lives in another
// basis or the eigenset does not span it.
StateVector evolve(const EigenSet& eigs, const StateVector& psi0, double t);

struct RevivalCurve {
  std::vector<double> times;
  std::vector<double> fidelity;  // |<psi0|psi_t>|^2
  std::string label;
  nlohmann::json initial_state;  // descriptor of psi0
};

RevivalCurve revival_curve(const EigenSet& eigs, const StateVector& psi0, std::span<const double> times,
                           const std::string& label = "", const nlohmann::json& initial_state = {});

// Normalized sum of eigenvector columns with uniform positive coefficients.
StateVector equal_superposition(const EigenSet& eigs, std::span<const Eigen::Index> columns);

// 2 pi / |spacing| for an equally spaced tower; throws Degenerate when the spacings differ by
// more than `tolerance` or vanish.
double tower_period(std::vector<double> energies, double tolerance = 1e-8);

// Uniform grid t_m = m * t_max / (points - 1).
std::vector<double> time_grid(double t_max, int points);

// Largest fidelity at times >= t_min.
double peak_after(const RevivalCurve& curve, double t_min);

// Mean fidelity at times >= t_min.
double mean_after(const RevivalCurve& curve, double t_min);

}  // namespace scarlab
