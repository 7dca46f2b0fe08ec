#include "scarlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scarlab/error.hpp"

namespace scarlab {

namespace {

Eigen::VectorXcd spectral_weights(const EigenSet& eigs, const StateVector& psi0) {
  require(eigs.basis && same_basis(*eigs.basis, psi0.basis()), ErrorCode::SectorMismatch,
          "initial state is not in the eigenset basis");
  require(eigs.states.rows() == psi0.size() && eigs.states.cols() == psi0.size(), ErrorCode::SectorMismatch,
          "eigenset is not complete in the sector");
  return eigs.states.adjoint() * psi0.amplitudes();
}

}  // namespace

StateVector evolve(const EigenSet& eigs, const StateVector& psi0, double t) {
  Eigen::VectorXcd c = spectral_weights(eigs, psi0);
  if (t == 0.0) return psi0;
  for (Eigen::Index j = 0; j < c.size(); ++j) c[j] *= std::polar(1.0, -eigs.energies[j] * t);
  return StateVector(psi0.basis_ptr(), eigs.states * c);
}

RevivalCurve revival_curve(const EigenSet& eigs, const StateVector& psi0, std::span<const double> times,
                           const std::string& label, const nlohmann::json& initial_state) {
  const Eigen::VectorXcd c = spectral_weights(eigs, psi0);
  const Eigen::VectorXd w = c.cwiseAbs2();
  const double norm2 = w.sum();
  require(norm2 > 0.0, ErrorCode::ZeroState, "initial state has zero norm");

  RevivalCurve curve;
  curve.label = label;
  curve.initial_state = initial_state;
  curve.times.assign(times.begin(), times.end());
  curve.fidelity.assign(times.size(), 0.0);
  const auto count = static_cast<std::ptrdiff_t>(times.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    Complex amp = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (w[j] != 0.0) amp += w[j] * std::polar(1.0, -eigs.energies[j] * times[i]);
    }
    curve.fidelity[i] = std::clamp(std::norm(amp) / (norm2 * norm2), 0.0, 1.0);
  }
  return curve;
}

StateVector equal_superposition(const EigenSet& eigs, std::span<const Eigen::Index> columns) {
  require(!columns.empty(), ErrorCode::ZeroState, "no eigenstates to superpose");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(eigs.states.rows());
  for (Eigen::Index col : columns) {
    require(col >= 0 && col < eigs.size(), ErrorCode::InvalidArgument, "eigenstate index out of range");
    v += eigs.states.col(col);
  }
  return StateVector(eigs.basis, v).normalized();
}

double tower_period(std::vector<double> energies, double tolerance) {
  require(energies.size() >= 2, ErrorCode::TooFew, "tower needs at least two energies");
  std::sort(energies.begin(), energies.end());
  const double spacing = (energies.back() - energies.front()) / static_cast<double>(energies.size() - 1);
  require(std::abs(spacing) > tolerance, ErrorCode::Degenerate, "tower spacing vanishes");
  for (std::size_t i = 1; i < energies.size(); ++i) {
    require(std::abs(energies[i] - energies[i - 1] - spacing) <= tolerance, ErrorCode::Degenerate,
            "tower is not equally spaced");
  }
  return 2.0 * std::numbers::pi / std::abs(spacing);
}

std::vector<double> time_grid(double t_max, int points) {
  require(points >= 2 && t_max > 0.0, ErrorCode::InvalidArgument, "time grid needs t_max > 0 and 2+ points");
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int m = 0; m < points; ++m) t[static_cast<std::size_t>(m)] = t_max * m / (points - 1);
  return t;
}

double peak_after(const RevivalCurve& curve, double t_min) {
  double best = -1.0;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.times[i] >= t_min) best = std::max(best, curve.fidelity[i]);
  }
  require(best >= 0.0, ErrorCode::TooFew, "no samples after t_min");
  return best;
}

double mean_after(const RevivalCurve& curve, double t_min) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.times[i] >= t_min) {
      sum += curve.fidelity[i];
      ++count;
    }
  }
  require(count > 0, ErrorCode::TooFew, "no samples after t_min");
  return sum / count;
}

}  // namespace scarlab
