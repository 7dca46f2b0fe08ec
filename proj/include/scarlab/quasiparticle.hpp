#pragma once

// Effective tight-binding models for the quasiparticles of the xorX chain (single domain wall
// between Neel domains, ferromagnetic and antiferromagnetic magnon bound states), their momentum
// blocks and closed-form dispersions, standing waves, full-chain subspaces, and the symmetric
// subspace K of the PXP blockade sector.

#include <string>
#include <vector>

#include "json.hpp"
#include "scarlab/models.hpp"
#include "scarlab/spectra.hpp"

namespace scarlab {

enum class QuasiparticleKind { SingleDomainWall, FerroMagnonBound, AFMagnonBound };

std::string to_string(QuasiparticleKind kind);
QuasiparticleKind parse_quasiparticle_kind(const std::string& text);

struct EffectiveModel {
  QuasiparticleKind kind = QuasiparticleKind::SingleDomainWall;
  double lambda = 1.0;
  double delta = 0.1;

  int internal_states() const { return kind == QuasiparticleKind::SingleDomainWall ? 2 : 4; }
};

// Momentum-space block, entry by entry as the models are defined (k in radians, unit spacing).
Eigen::MatrixXcd momentum_block(const EffectiveModel& model, double k);

// Branch labels in ascending energy order at generic k:
//   SingleDomainWall: "lower", "upper"
//   FerroMagnonBound: "ground", "second", "third", "top"
//   AFMagnonBound:    "ground", "first_excited", "second_excited", "top"
std::vector<std::string> branch_names(QuasiparticleKind kind);

// Closed-form branch energy.
double dispersion_value(const EffectiveModel& model, const std::string& branch, double k);

struct DispersionCurve {
  QuasiparticleKind kind = QuasiparticleKind::SingleDomainWall;
  std::string branch;
  std::vector<double> k;
  std::vector<double> energy;
  std::vector<double> sz;
  double max_block_deviation = 0.0;  // closed form vs block eigenvalue, max over the grid
};

// Closed forms on the grid, each point checked against the block eigenvalue of the same rank;
// throws Degenerate when the self-check exceeds `tolerance`.
DispersionCurve dispersion(const EffectiveModel& model, const std::string& branch, const std::vector<double>& k_grid,
                           int chain_length, double tolerance = 1e-12);

// k_m = -pi + 2 pi m / points, m = 0 .. points-1.
std::vector<double> k_grid(int points);

// Total S_z over the bulk sites (2..n-1 in 1-based labels) of the branch eigenvector at k:
// background -(n-2) plus the weighted magnetization carried by the internal configurations.
double sz_of_mode(const EffectiveModel& model, const std::string& branch, double k, int chain_length);

// Bulk magnetization offset (2 x number of up spins) of each internal configuration in an
// n-site chain.
std::vector<double> internal_magnetization(QuasiparticleKind kind, int chain_length);

enum class ChainBoundary { Open, Periodic };

// Real-space effective chain. Positions are unit cells of internal_states() states; the
// single-domain-wall chain is indexed by wall position i = 1..L with on-site (-1)^i Delta.
// With PBC, the Bloch vectors |k, a> = M^{-1/2} sum_c e^{i k c} |cell_index[c][a]> reduce the
// chain to momentum_block(k) for every k = 2 pi m / M.
struct EffectiveChain {
  QuasiparticleKind kind = QuasiparticleKind::SingleDomainWall;
  ChainBoundary boundary = ChainBoundary::Open;
  Eigen::MatrixXd matrix;
  int cells = 0;
  std::vector<std::vector<int>> cell_index;  // [cell][internal] -> row, -1 when absent
  nlohmann::json metadata;
};

// `length`: wall positions for SingleDomainWall (even for PBC), cells for the bound states.
EffectiveChain effective_chain_hamiltonian(const EffectiveModel& model, int length, ChainBoundary boundary);

// Bloch state phi_k of `branch` on a PBC chain and the two real standing waves
// (phi_k +- phi_-k)/sqrt 2, each normalized; phases are fixed so that phi_-k = conj(phi_k).
struct StandingWaves {
  Eigen::VectorXcd plus;
  Eigen::VectorXcd minus;
};

StandingWaves standing_wave(const EffectiveModel& model, const std::string& branch, double k,
                            const EffectiveChain& chain);

// Single-domain-wall chain vector (index i-1 = wall position i) as a state of the n-site
// frozen-boundary chain; the wall position is the bond whose two spins agree.
StateVector embed_domain_wall_chain(const Eigen::VectorXcd& amplitudes, const BasisPtr& basis);

enum class QuasiparticleSubspace { SingleMagnon, FerroString, AFString, SingleDomainWall };

std::string to_string(QuasiparticleSubspace kind);
QuasiparticleSubspace parse_quasiparticle_subspace(const std::string& text);

// Configurations of `basis` that realize the quasiparticle at any position, with every other
// bulk spin down (or, for SingleDomainWall, Neel order on both sides of the wall). Throws
// Incompatible when the basis has no frozen (0,0) boundaries or holds none of them.
std::vector<Bits> quasiparticle_subspace(QuasiparticleSubspace kind, const SectorBasis& basis);

// Sublattice-resolved symmetric subspace of the blockade sector. Label (n1, n2) counts
// excitations on odd and even 1-based sites.
struct SymmetricSubspace {
  std::vector<std::pair<int, int>> labels;
  std::vector<double> normalizations;  // number of configurations behind each label
  Eigen::MatrixXcd embedding;          // columns: orthonormal basis vectors in the sector
  Eigen::MatrixXcd projected;          // embedding^dagger H embedding
  Eigen::VectorXd quasimode_energies;
  Eigen::MatrixXcd quasimodes;         // eigenvectors embedded in the sector
  BasisPtr basis;
  nlohmann::json metadata;
};

SymmetricSubspace symmetric_subspace(const HamiltonianOp& pxp);

// Weight of every eigenvector in K: sum over labels of |<label|psi>|^2.
Eigen::VectorXd subspace_weights(const SymmetricSubspace& k, const EigenSet& eigs);

// Interleaving of quasimode energies with a band of eigenstate energies. Each band energy owns
// the cell bounded by the midpoints to its neighbours (half a spacing beyond the band ends).
// Quasimodes whose reference overlap is below `relative_floor` times the largest one are
// ignored; the rest must all fall inside cells, and every cell must hold at least one.
struct InterlaceReport {
  std::vector<double> band;
  std::vector<double> quasimodes;
  bool interlaced = false;
  std::string detail;
};

InterlaceReport interlace(std::vector<double> band, const std::vector<double>& quasimode_energies,
                          const std::vector<double>& quasimode_overlaps, double relative_floor = 0.01);

}  // namespace scarlab
