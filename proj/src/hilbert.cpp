#include "scarlab/hilbert.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace scarlab {

int popcount(Bits config) { return std::popcount(config); }

int domain_wall_count(Bits config, int n) {
  if (n < 2) return 0;
  const Bits mask = (n >= 32) ? ~Bits{0} : ((Bits{1} << (n - 1)) - 1);
  return std::popcount((config ^ (config >> 1)) & mask);
}

// ---------------------------------------------------------------------------
// SectorConstraint

SectorConstraint SectorConstraint::full(int n) {
  SectorConstraint c;
  c.kind = Kind::FullSpace;
  c.n = n;
  return c;
}

SectorConstraint SectorConstraint::frozen(int n, int left, int right) {
  SectorConstraint c;
  c.kind = Kind::FrozenBoundary;
  c.n = n;
  c.left_value = left;
  c.right_value = right;
  return c;
}

SectorConstraint SectorConstraint::domain_wall_number(int n, int n_dw, int left, int right) {
  SectorConstraint c;
  c.kind = Kind::DomainWallNumber;
  c.n = n;
  c.domain_walls = n_dw;
  c.left_value = left;
  c.right_value = right;
  return c;
}

SectorConstraint SectorConstraint::rydberg(int n, bool periodic) {
  SectorConstraint c;
  c.kind = Kind::RydbergBlockade;
  c.n = n;
  c.periodic = periodic;
  return c;
}

SectorConstraint SectorConstraint::magnetization(int n, int k) {
  SectorConstraint c;
  c.kind = Kind::MagnetizationNumber;
  c.n = n;
  c.excitations = k;
  return c;
}

bool SectorConstraint::admits(Bits config) const {
  switch (kind) {
    case Kind::FullSpace:
      return true;
    case Kind::FrozenBoundary:
      return bit(config, 0) == left_value && bit(config, n - 1) == right_value;
    case Kind::DomainWallNumber:
      return bit(config, 0) == left_value && bit(config, n - 1) == right_value &&
             domain_wall_count(config, n) == domain_walls;
    case Kind::RydbergBlockade: {
      if (config & (config >> 1)) return false;
      if (periodic && bit(config, 0) && bit(config, n - 1)) return false;
      return true;
    }
    case Kind::MagnetizationNumber:
      return popcount(config) == excitations;
  }
  return false;
}

void SectorConstraint::validate(int max_sites) const {
  require(n <= max_sites, ErrorCode::Overflow,
          "chain of " + std::to_string(n) + " sites exceeds the configured maximum " + std::to_string(max_sites));
  require(n >= 3, ErrorCode::InvalidArgument, "sector construction needs at least 3 sites");
  auto binary = [](int v) { return v == 0 || v == 1; };
  switch (kind) {
    case Kind::FrozenBoundary:
      require(binary(left_value) && binary(right_value), ErrorCode::InvalidArgument, "boundary values must be 0 or 1");
      break;
    case Kind::DomainWallNumber:
      require(binary(left_value) && binary(right_value), ErrorCode::InvalidArgument, "boundary values must be 0 or 1");
      require(domain_walls >= 0 && domain_walls <= n - 1, ErrorCode::InvalidArgument,
              "domain-wall number must lie in [0, n-1]");
      break;
    case Kind::MagnetizationNumber:
      require(excitations >= 0 && excitations <= n, ErrorCode::InvalidArgument, "excitation number out of range");
      break;
    default:
      break;
  }
}

std::string SectorConstraint::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::FullSpace: os << "full(n=" << n << ")"; break;
    case Kind::FrozenBoundary: os << "frozen(n=" << n << ",left=" << left_value << ",right=" << right_value << ")"; break;
    case Kind::DomainWallNumber:
      os << "domain_walls(n=" << n << ",n_dw=" << domain_walls << ",left=" << left_value << ",right=" << right_value
         << ",boundary_bonds=included)";
      break;
    case Kind::RydbergBlockade: os << "rydberg(n=" << n << (periodic ? ",pbc" : ",obc") << ")"; break;
    case Kind::MagnetizationNumber: os << "magnetization(n=" << n << ",k=" << excitations << ")"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SectorBasis

SectorBasis::SectorBasis(std::vector<Bits> configs, SectorConstraint constraint)
    : configs_(std::move(configs)), constraint_(constraint) {
  require(std::is_sorted(configs_.begin(), configs_.end()) &&
              std::adjacent_find(configs_.begin(), configs_.end()) == configs_.end(),
          ErrorCode::InvalidArgument, "basis configurations must be strictly increasing");
  const std::size_t full = std::size_t{1} << constraint_.n;
  lookup_.assign(full, -1);
  for (std::size_t j = 0; j < configs_.size(); ++j) {
    require(configs_[j] < full, ErrorCode::InvalidArgument, "configuration exceeds 2^n");
    lookup_[configs_[j]] = static_cast<std::int32_t>(j);
  }
}

Eigen::Index SectorBasis::index_of(Bits config) const {
  if (config >= lookup_.size()) return -1;
  return lookup_[config];
}

std::string SectorBasis::dump_hex() const {
  std::string out;
  char buf[16];
  for (Bits c : configs_) {
    std::snprintf(buf, sizeof buf, "0x%x\n", c);
    out += buf;
  }
  return out;
}

BasisPtr build_sector(int n, const SectorConstraint& constraint, int max_sites) {
  require(constraint.n == n, ErrorCode::InvalidArgument, "constraint built for a different chain length");
  constraint.validate(max_sites);
  std::vector<Bits> configs;
  const Bits full = Bits{1} << n;
  for (Bits c = 0; c < full; ++c)
    if (constraint.admits(c)) configs.push_back(c);
  require(!configs.empty(), ErrorCode::EmptySector, "no configuration satisfies " + constraint.describe());
  return std::make_shared<const SectorBasis>(std::move(configs), constraint);
}

bool same_basis(const SectorBasis& a, const SectorBasis& b) {
  return &a == &b || (a.sites() == b.sites() && a.configs() == b.configs());
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(BasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  require(basis_ != nullptr, ErrorCode::InvalidArgument, "state vector without basis");
  require(amplitudes_.size() == basis_->size(), ErrorCode::DimensionMismatch, "amplitude count differs from basis size");
}

StateVector StateVector::zero(BasisPtr basis) {
  const auto dim = basis->size();
  return StateVector(std::move(basis), Eigen::VectorXcd::Zero(dim));
}

StateVector StateVector::basis_state(BasisPtr basis, Bits config) {
  const auto j = basis->index_of(config);
  require(j >= 0, ErrorCode::NotInSector, "configuration not in sector " + basis->constraint().describe());
  auto psi = zero(std::move(basis));
  psi.amplitudes_[j] = 1.0;
  return psi;
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

StateVector StateVector::normalized() const {
  const double nrm = norm();
  require(nrm > 0.0, ErrorCode::ZeroState, "cannot normalize the zero vector");
  return StateVector(basis_, amplitudes_ / nrm);
}

Complex StateVector::dot(const StateVector& other) const {
  require(same_basis(*basis_, *other.basis_), ErrorCode::SectorMismatch, "inner product across different sectors");
  return amplitudes_.dot(other.amplitudes_);
}

Eigen::VectorXcd StateVector::embed_full() const {
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(Eigen::Index{1} << basis_->sites());
  for (Eigen::Index j = 0; j < amplitudes_.size(); ++j) full[basis_->config(j)] = amplitudes_[j];
  return full;
}

StateVector StateVector::project_to(BasisPtr target) const {
  require(target->sites() == basis_->sites(), ErrorCode::SectorMismatch, "chain lengths differ");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(target->size());
  for (Eigen::Index j = 0; j < amplitudes_.size(); ++j) {
    if (amplitudes_[j] == Complex{}) continue;
    const auto k = target->index_of(basis_->config(j));
    require(k >= 0, ErrorCode::SectorEscape, "state has support outside the target sector");
    out[k] = amplitudes_[j];
  }
  return StateVector(std::move(target), std::move(out));
}

// ---------------------------------------------------------------------------
// Pauli strings

StringImage apply_to_config(const PauliString& string, Bits config) {
  Complex amp = string.coefficient;
  for (auto it = string.factors.rbegin(); it != string.factors.rend(); ++it) {
    const Bits mask = Bits{1} << it->site;
    const bool up = (config & mask) != 0;
    switch (it->op) {
      case SiteOp::X:
        config ^= mask;
        break;
      case SiteOp::Y:
        // Y|1> = i|0>, Y|0> = -i|1> in the (|1>, |0>) = (up, down) convention.
        amp *= up ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
        config ^= mask;
        break;
      case SiteOp::Z:
        if (!up) amp = -amp;
        break;
      case SiteOp::Plus:
        if (up) return {config, Complex{}};
        config |= mask;
        break;
      case SiteOp::Minus:
        if (!up) return {config, Complex{}};
        config &= ~mask;
        break;
      case SiteOp::P0:
        if (up) return {config, Complex{}};
        break;
      case SiteOp::P1:
        if (!up) return {config, Complex{}};
        break;
    }
  }
  return {config, amp};
}

namespace {

void check_sites(const PauliString& string, int n) {
  for (const auto& f : string.factors)
    require(f.site >= 0 && f.site < n, ErrorCode::InvalidArgument, "site index " + std::to_string(f.site) + " out of range");
}

}  // namespace

StateVector pauli_string_apply(const PauliString& string, const StateVector& psi) {
  return pauli_sum_apply(std::span<const PauliString>(&string, 1), psi);
}

StateVector pauli_sum_apply(std::span<const PauliString> terms, const StateVector& psi) {
  const auto& basis = psi.basis();
  for (const auto& t : terms) check_sites(t, basis.sites());
  auto out = StateVector::zero(psi.basis_ptr());
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    const Complex a = psi.amplitudes()[j];
    if (a == Complex{}) continue;
    for (const auto& t : terms) {
      const auto img = apply_to_config(t, basis.config(j));
      if (img.amplitude == Complex{}) continue;
      const auto k = basis.index_of(img.config);
      require(k >= 0, ErrorCode::SectorEscape, "operator maps a configuration outside " + basis.constraint().describe());
      out.amplitudes()[k] += img.amplitude * a;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SparseOp

SparseOp::SparseOp(Matrix matrix, bool hermitian) : matrix_(std::move(matrix)), hermitian_(hermitian) {
  require(matrix_.rows() == matrix_.cols(), ErrorCode::DimensionMismatch, "operator must be square");
  matrix_.makeCompressed();
  if (hermitian_)
    require(hermiticity_error() < 1e-12, ErrorCode::NonHermitian, "operator flagged Hermitian is not");
}

SparseOp SparseOp::from_terms(const SectorBasis& basis, std::span<const PauliString> terms, bool hermitian) {
  for (const auto& t : terms) check_sites(t, basis.sites());
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    for (const auto& t : terms) {
      const auto img = apply_to_config(t, basis.config(j));
      if (img.amplitude == Complex{}) continue;
      const auto k = basis.index_of(img.config);
      require(k >= 0, ErrorCode::SectorEscape, "operator maps a configuration outside " + basis.constraint().describe());
      triplets.emplace_back(k, j, img.amplitude);
    }
  }
  Matrix m(basis.size(), basis.size());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.prune(Complex{}, 0.0);
  return SparseOp(std::move(m), hermitian);
}

SparseOp SparseOp::from_dense(const Eigen::MatrixXcd& dense, bool hermitian, double drop_tol) {
  require(dense.rows() == dense.cols(), ErrorCode::DimensionMismatch, "operator must be square");
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index i = 0; i < dense.rows(); ++i)
    for (Eigen::Index j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_tol) triplets.emplace_back(i, j, dense(i, j));
  Matrix m(dense.rows(), dense.cols());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseOp(std::move(m), hermitian);
}

double SparseOp::hermiticity_error() const {
  const Matrix adj = matrix_.adjoint();
  const Matrix diff = matrix_ - adj;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (Matrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

bool SparseOp::is_real() const {
  for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k)
    for (Matrix::InnerIterator it(matrix_, k); it; ++it)
      if (it.value().imag() != 0.0) return false;
  return true;
}

Eigen::MatrixXcd to_dense(const SparseOp& op, Eigen::Index threshold) {
  require(op.dimension() <= threshold, ErrorCode::TooLarge,
          "dimension " + std::to_string(op.dimension()) + " exceeds dense threshold " + std::to_string(threshold));
  Eigen::MatrixXcd dense = Eigen::MatrixXcd(op.matrix());
  if (op.hermitian()) {
    const double err = (dense - dense.adjoint()).cwiseAbs().maxCoeff();
    require(err < 1e-12, ErrorCode::NonHermitian, "dense copy is not Hermitian");
  }
  return dense;
}

double commutator_norm(const SparseOp& a, const SparseOp& b) {
  require(a.dimension() == b.dimension(), ErrorCode::DimensionMismatch, "commutator of operators on different spaces");
  const SparseOp::Matrix ab = a.matrix() * b.matrix();
  const SparseOp::Matrix ba = b.matrix() * a.matrix();
  const SparseOp::Matrix diff = ab - ba;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (SparseOp::Matrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

}  // namespace scarlab
