#pragma once

// Computational-basis bookkeeping for spin-1/2 chains.
//
// Conventions used throughout the library:
//   * bit i of a configuration is the state of site i (0-based, left to right);
//   * sigma^z |0> = -|0>, sigma^z |1> = +|1>, sigma^+ = |1><0|;
//   * bases are ordered by ascending integer value of the configuration bits.

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "scarlab/error.hpp"

namespace scarlab {

using Complex = std::complex<double>;
using Bits = std::uint32_t;

inline constexpr int kDefaultMaxSites = 20;
inline constexpr Eigen::Index kDefaultDenseThreshold = Eigen::Index{1} << 14;

inline int bit(Bits config, int site) { return static_cast<int>((config >> site) & 1u); }

// sigma^z eigenvalue of a site under the library convention.
inline int spin_z(Bits config, int site) { return bit(config, site) ? 1 : -1; }

int popcount(Bits config);

// Number of bonds (i, i+1), i in [0, n-2], whose bits differ.
int domain_wall_count(Bits config, int n);

struct SectorConstraint {
  enum class Kind { FullSpace, FrozenBoundary, DomainWallNumber, RydbergBlockade, MagnetizationNumber };

  Kind kind = Kind::FullSpace;
  int n = 0;
  int left_value = 0;   // FrozenBoundary / DomainWallNumber
  int right_value = 0;  // FrozenBoundary / DomainWallNumber
  int domain_walls = 0;  // DomainWallNumber
  int excitations = 0;   // MagnetizationNumber: number of 1 bits
  bool periodic = false;  // RydbergBlockade: include the wrap-around bond

  static SectorConstraint full(int n);
  static SectorConstraint frozen(int n, int left = 0, int right = 0);
  static SectorConstraint domain_wall_number(int n, int n_dw, int left = 0, int right = 0);
  static SectorConstraint rydberg(int n, bool periodic);
  static SectorConstraint magnetization(int n, int k);

  bool admits(Bits config) const;
  void validate(int max_sites = kDefaultMaxSites) const;
  std::string describe() const;

  friend bool operator==(const SectorConstraint&, const SectorConstraint&) = default;
};

class SectorBasis {
 public:
  SectorBasis(std::vector<Bits> configs, SectorConstraint constraint);

  int sites() const { return constraint_.n; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(configs_.size()); }
  const std::vector<Bits>& configs() const { return configs_; }
  Bits config(Eigen::Index j) const { return configs_[static_cast<std::size_t>(j)]; }
  const SectorConstraint& constraint() const { return constraint_; }

  // Dense index of a configuration, or -1 when the configuration is outside the sector.
  Eigen::Index index_of(Bits config) const;
  bool contains(Bits config) const { return index_of(config) >= 0; }

  // Hex dump of the configuration list, one per line.
  std::string dump_hex() const;

 private:
  std::vector<Bits> configs_;
  std::vector<std::int32_t> lookup_;
  SectorConstraint constraint_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

BasisPtr build_sector(int n, const SectorConstraint& constraint, int max_sites = kDefaultMaxSites);

bool same_basis(const SectorBasis& a, const SectorBasis& b);

class StateVector {
 public:
  StateVector() = default;
  StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes);

  static StateVector zero(BasisPtr basis);
  static StateVector basis_state(BasisPtr basis, Bits config);

  const SectorBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() { return amplitudes_; }
  Eigen::Index size() const { return amplitudes_.size(); }

  double norm() const { return amplitudes_.norm(); }
  bool is_normalized(double tol = 1e-10) const;
  StateVector normalized() const;

  Complex dot(const StateVector& other) const;  // <this|other>

  // Amplitudes over the full 2^n tensor space (zero padding outside the sector).
  Eigen::VectorXcd embed_full() const;

  // Re-express in another basis that contains the support; throws SectorEscape otherwise.
  StateVector project_to(BasisPtr target) const;

 private:
  BasisPtr basis_;
  Eigen::VectorXcd amplitudes_;
};

// Single-site factors available in Pauli/projector strings.
enum class SiteOp { X, Y, Z, Plus, Minus, P0, P1 };

struct SiteFactor {
  int site;
  SiteOp op;
};

// coefficient * (product of site factors). Factors on distinct sites commute; if a site
// appears more than once the factors are applied right to left.
struct PauliString {
  Complex coefficient{1.0, 0.0};
  std::vector<SiteFactor> factors;
};

// Image of a basis configuration: amplitude 0 means the string annihilates it.
struct StringImage {
  Bits config;
  Complex amplitude;
};

StringImage apply_to_config(const PauliString& string, Bits config);

StateVector pauli_string_apply(const PauliString& string, const StateVector& psi);
StateVector pauli_sum_apply(std::span<const PauliString> terms, const StateVector& psi);

class SparseOp {
 public:
  using Matrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

  SparseOp() = default;
  SparseOp(Matrix matrix, bool hermitian);

  static SparseOp from_terms(const SectorBasis& basis, std::span<const PauliString> terms, bool hermitian);
  static SparseOp from_dense(const Eigen::MatrixXcd& dense, bool hermitian, double drop_tol = 0.0);

  Eigen::Index dimension() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  bool hermitian() const { return hermitian_; }
  Eigen::Index nonzeros() const { return matrix_.nonZeros(); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix_ * v; }

  // max |A - A^dagger| over stored entries.
  double hermiticity_error() const;
  bool is_real() const;

 private:
  Matrix matrix_;
  bool hermitian_ = false;
};

Eigen::MatrixXcd to_dense(const SparseOp& op, Eigen::Index threshold = kDefaultDenseThreshold);

// ||[A, B]||_max computed on sparse matrices.
double commutator_norm(const SparseOp& a, const SparseOp& b);

}  // namespace scarlab
