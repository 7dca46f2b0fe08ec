#pragma once

// Dense exact diagonalization and per-eigenstate diagnostics.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "scarlab/models.hpp"

namespace scarlab {

struct EigenSet {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXcd states;   // column j is the eigenvector of energies[j]
  BasisPtr basis;
  std::vector<int> block;    // symmetry-block label of each state (-1 when unused)
  nlohmann::json metadata;

  Eigen::Index size() const { return energies.size(); }
  StateVector state(Eigen::Index j) const { return StateVector(basis, states.col(j)); }
};

EigenSet diagonalize(const HamiltonianOp& h, Eigen::Index threshold = kDefaultDenseThreshold);

// Direct sum of block spectra, re-expressed over `parent` (which must contain every block basis).
EigenSet merge_blocks(std::span<const EigenSet> blocks, const BasisPtr& parent, std::span<const int> labels);

// Inside every cluster of (numerically) degenerate eigenvalues, rotate the eigenvectors so that the
// projections of `refs` (taken in order, Gram-Schmidt) become basis vectors of the cluster.
void align_degenerate(EigenSet& eigs, std::span<const StateVector> refs, double tol = 1e-8);

double max_residual(const HamiltonianOp& h, const EigenSet& eigs);
double orthonormality_error(const EigenSet& eigs);
double reconstruction_error(const HamiltonianOp& h, const EigenSet& eigs);

// Von Neumann entropy (nats) of sites [0, cut) after zero-padding into the 2^n space.
double half_chain_entropy(const StateVector& psi, int cut);

double participation_ratio(const StateVector& psi);

struct SzStats {
  double mean = 0.0;
  double variance = 0.0;
};

// Statistics of sum_{i in [first, last)} sigma^z_i.
SzStats sz_stats(const StateVector& psi, int first, int last);

double subspace_weight(const StateVector& psi, std::span<const Bits> subspace);

// |<ref|psi_j>|^2 for every eigenstate.
Eigen::VectorXd overlap_scan(const EigenSet& eigs, const StateVector& ref);

// Indices j with overlap_j > min_overlap that carry the largest overlap among all states
// within |E_i - E_j| <= window (upper envelope of the overlap-vs-energy scatter).
std::vector<Eigen::Index> overlap_envelope(const Eigen::VectorXd& energies, const Eigen::VectorXd& overlaps,
                                           double window, double min_overlap = 1e-12);

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
};

struct TowerDensity {
  DensityCurve energy;
  DensityCurve difference;  // all ordered pairs (i, j), including i == j
};

TowerDensity energy_tower_density(std::span<const double> energies, double broadening, int grid_points = 801);

struct DiagnosticsRow {
  Eigen::Index index = 0;
  double energy = 0.0;
  double half_chain_entropy = 0.0;
  double participation_ratio = 0.0;
  double sz_mean = 0.0;
  double sz_variance = 0.0;
  std::vector<double> overlaps;
  std::vector<double> subspace_weights;
  bool marked = false;
  double q = -1.0;  // classifier output when available
};

struct DiagnosticsOptions {
  int cut = -1;                // default floor(n/2)
  int sz_first = 1;            // bulk sites by default
  int sz_last = -1;            // default n-1
  std::vector<std::pair<std::string, StateVector>> references;
  std::vector<std::pair<std::string, std::vector<Bits>>> subspaces;
};

std::vector<DiagnosticsRow> compute_diagnostics(const EigenSet& eigs, const DiagnosticsOptions& options);

}  // namespace scarlab
