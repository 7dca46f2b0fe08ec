#include "scarlab/quasiparticle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace scarlab {

namespace {

const Complex I(0.0, 1.0);

int branch_rank(QuasiparticleKind kind, const std::string& branch) {
  const auto names = branch_names(kind);
  const auto it = std::find(names.begin(), names.end(), branch);
  require(it != names.end(), ErrorCode::InvalidArgument, "unknown branch '" + branch + "' for " + to_string(kind));
  return static_cast<int>(it - names.begin());
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solve_block(const EffectiveModel& model, double k) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(momentum_block(model, k));
}

}  // namespace

std::string to_string(QuasiparticleKind kind) {
  switch (kind) {
    case QuasiparticleKind::SingleDomainWall: return "single_domain_wall";
    case QuasiparticleKind::FerroMagnonBound: return "ferro_magnon_bound";
    case QuasiparticleKind::AFMagnonBound: return "af_magnon_bound";
  }
  return "?";
}

QuasiparticleKind parse_quasiparticle_kind(const std::string& text) {
  for (auto k : {QuasiparticleKind::SingleDomainWall, QuasiparticleKind::FerroMagnonBound,
                 QuasiparticleKind::AFMagnonBound})
    if (to_string(k) == text) return k;
  throw Error(ErrorCode::Config, "unknown quasiparticle model '" + text + "'");
}

Eigen::MatrixXcd momentum_block(const EffectiveModel& model, double k) {
  const double l = model.lambda, d = model.delta;
  const Complex t = l + l * std::exp(I * k);
  switch (model.kind) {
    case QuasiparticleKind::SingleDomainWall: {
      Eigen::MatrixXcd h(2, 2);
      h << d, t, std::conj(t), -d;
      return h;
    }
    case QuasiparticleKind::FerroMagnonBound: {
      Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 4);
      for (int a = 0; a < 4; ++a) h(a, a) = (3 - 2 * a) * d;
      for (int a = 0; a < 3; ++a) {
        h(a, a + 1) = t;
        h(a + 1, a) = std::conj(t);
      }
      return h;
    }
    case QuasiparticleKind::AFMagnonBound: {
      Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 4);
      h(0, 0) = d;
      h(1, 1) = -d;
      h(2, 2) = d;
      h(3, 3) = -d;
      h(0, 1) = h(1, 0) = l;
      h(1, 2) = h(2, 1) = l;
      h(2, 3) = h(3, 2) = l;
      h(0, 3) = l * std::exp(I * k);
      h(3, 0) = l * std::exp(-I * k);
      return h;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown quasiparticle model");
}

std::vector<std::string> branch_names(QuasiparticleKind kind) {
  switch (kind) {
    case QuasiparticleKind::SingleDomainWall: return {"lower", "upper"};
    case QuasiparticleKind::FerroMagnonBound: return {"ground", "second", "third", "top"};
    case QuasiparticleKind::AFMagnonBound: return {"ground", "first_excited", "second_excited", "top"};
  }
  return {};
}

double dispersion_value(const EffectiveModel& model, const std::string& branch, double k) {
  const int r = branch_rank(model.kind, branch);
  const double l = model.lambda, d = model.delta;
  const double c = std::abs(std::cos(0.5 * k));
  switch (model.kind) {
    case QuasiparticleKind::SingleDomainWall: {
      const double e = std::sqrt(d * d + 4 * l * l * c * c);
      return r == 0 ? -e : e;
    }
    case QuasiparticleKind::FerroMagnonBound: {
      // u = |lambda + lambda e^{ik}| / Delta, written without the division:
      // E^2 = Delta^2 (10 + 3u^2 +- sqrt(64 + 48u^2 + 5u^4)) / 2
      const double t2 = std::norm(l + l * std::exp(I * k));
      const double d2 = d * d;
      const double root = std::sqrt(64 * d2 * d2 + 48 * d2 * t2 + 5 * t2 * t2);
      const double outer = std::sqrt((10 * d2 + 3 * t2 + root) / 2);
      const double inner = std::sqrt(std::max(0.0, (10 * d2 + 3 * t2 - root) / 2));
      const double e[4] = {-outer, -inner, inner, outer};
      return e[r];
    }
    case QuasiparticleKind::AFMagnonBound: {
      const double hi = std::sqrt(d * d + 2 * l * l * (1 + c));
      const double lo = std::sqrt(d * d + 2 * l * l * (1 - c));
      const double e[4] = {-hi, -lo, lo, hi};
      return e[r];
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown quasiparticle model");
}

std::vector<double> k_grid(int points) {
  require(points >= 1, ErrorCode::InvalidArgument, "k grid needs at least one point");
  std::vector<double> k(static_cast<std::size_t>(points));
  for (int m = 0; m < points; ++m) k[static_cast<std::size_t>(m)] = -std::numbers::pi + 2 * std::numbers::pi * m / points;
  return k;
}

std::vector<double> internal_magnetization(QuasiparticleKind kind, int chain_length) {
  switch (kind) {
    case QuasiparticleKind::SingleDomainWall:
      // even wall position: n/2 up spins; odd: n/2 - 1 (n even, frozen 0 boundaries)
      return {static_cast<double>(chain_length), static_cast<double>(chain_length - 2)};
    case QuasiparticleKind::FerroMagnonBound:
      // strings of length 4, 3, 2, 1
      return {8.0, 6.0, 4.0, 2.0};
    case QuasiparticleKind::AFMagnonBound:
      // 1101, 1001, 1011, 101: three, two, three and two up spins
      return {6.0, 4.0, 6.0, 4.0};
  }
  return {};
}

double sz_of_mode(const EffectiveModel& model, const std::string& branch, double k, int chain_length) {
  require(chain_length >= 3, ErrorCode::InvalidArgument, "chain too short");
  const int r = branch_rank(model.kind, branch);
  const auto es = solve_block(model, k);
  const Eigen::VectorXcd v = es.eigenvectors().col(r);
  const auto offsets = internal_magnetization(model.kind, chain_length);
  double sz = -(chain_length - 2);
  for (Eigen::Index a = 0; a < v.size(); ++a) sz += std::norm(v[a]) * offsets[static_cast<std::size_t>(a)];
  return sz;
}

DispersionCurve dispersion(const EffectiveModel& model, const std::string& branch, const std::vector<double>& k_values,
                           int chain_length, double tolerance) {
  const int r = branch_rank(model.kind, branch);
  DispersionCurve out;
  out.kind = model.kind;
  out.branch = branch;
  out.k = k_values;
  for (double k : k_values) {
    const double e = dispersion_value(model, branch, k);
    const double block = solve_block(model, k).eigenvalues()[r];
    out.max_block_deviation = std::max(out.max_block_deviation, std::abs(e - block));
    out.energy.push_back(e);
    out.sz.push_back(sz_of_mode(model, branch, k, chain_length));
  }
  require(out.max_block_deviation <= tolerance, ErrorCode::Degenerate,
          "closed-form dispersion deviates from the momentum block by " + std::to_string(out.max_block_deviation));
  return out;
}

EffectiveChain effective_chain_hamiltonian(const EffectiveModel& model, int length, ChainBoundary boundary) {
  require(length >= 2, ErrorCode::InvalidArgument, "effective chain needs at least two positions");
  const double l = model.lambda, d = model.delta;
  EffectiveChain chain;
  chain.kind = model.kind;
  chain.boundary = boundary;
  const bool pbc = boundary == ChainBoundary::Periodic;
  chain.metadata = {{"model", to_string(model.kind)},
                    {"lambda", l},
                    {"delta", d},
                    {"length", length},
                    {"boundary", pbc ? "periodic" : "open"}};

  if (model.kind == QuasiparticleKind::SingleDomainWall) {
    require(!pbc || length % 2 == 0, ErrorCode::InvalidArgument, "periodic wall chain needs an even length");
    chain.matrix = Eigen::MatrixXd::Zero(length, length);
    for (int i = 1; i <= length; ++i) chain.matrix(i - 1, i - 1) = (i % 2 == 0 ? d : -d);
    for (int i = 1; i < length; ++i) chain.matrix(i - 1, i) = chain.matrix(i, i - 1) = l;
    if (pbc) chain.matrix(0, length - 1) = chain.matrix(length - 1, 0) = l;
    // cell c holds wall positions 2c+2 (+Delta) and 2c+1 (-Delta)
    chain.cells = length / 2;
    for (int c = 0; c < chain.cells; ++c) chain.cell_index.push_back({2 * c + 1, 2 * c});
    if (!pbc && length % 2 == 1) chain.cell_index.push_back({-1, length - 1});
    return chain;
  }

  const int m = length;
  chain.cells = m;
  chain.matrix = Eigen::MatrixXd::Zero(4 * m, 4 * m);
  for (int c = 0; c < m; ++c) chain.cell_index.push_back({4 * c, 4 * c + 1, 4 * c + 2, 4 * c + 3});
  auto link = [&](int c1, int a1, int c2, int a2, double amp) {
    if (c2 >= m || c2 < 0) {
      if (!pbc) return;
      c2 = (c2 + m) % m;
    }
    const int i = 4 * c1 + a1, j = 4 * c2 + a2;
    chain.matrix(i, j) += amp;
    chain.matrix(j, i) += amp;
  };
  for (int c = 0; c < m; ++c) {
    if (model.kind == QuasiparticleKind::FerroMagnonBound) {
      // string of length 4-a with leftmost site c; it shrinks to length 3-a at c or at c+1
      for (int a = 0; a < 4; ++a) chain.matrix(4 * c + a, 4 * c + a) = (3 - 2 * a) * d;
      for (int a = 0; a < 3; ++a) {
        link(c, a, c, a + 1, l);
        link(c, a, c + 1, a + 1, l);
      }
    } else {
      const double onsite[4] = {d, -d, d, -d};
      for (int a = 0; a < 4; ++a) chain.matrix(4 * c + a, 4 * c + a) = onsite[a];
      link(c, 0, c, 1, l);
      link(c, 1, c, 2, l);
      link(c, 2, c, 3, l);
      link(c, 0, c + 1, 3, l);
    }
  }
  return chain;
}

StandingWaves standing_wave(const EffectiveModel& model, const std::string& branch, double k,
                            const EffectiveChain& chain) {
  require(k > 0 && k < std::numbers::pi, ErrorCode::InvalidArgument, "standing waves need 0 < k < pi");
  require(chain.kind == model.kind, ErrorCode::InvalidArgument, "chain built for another model");
  const int r = branch_rank(model.kind, branch);
  const Eigen::VectorXcd v = solve_block(model, k).eigenvectors().col(r);
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(chain.matrix.rows());
  for (int c = 0; c < static_cast<int>(chain.cell_index.size()); ++c)
    for (int a = 0; a < model.internal_states(); ++a) {
      const int row = chain.cell_index[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)];
      if (row >= 0) phi[row] = std::exp(I * (k * c)) * v[a];
    }
  // rotate so that sum phi^2 is real; then phi_-k = conj(phi) and the two real parts are orthogonal
  const Complex s = phi.cwiseProduct(phi).sum();
  if (std::abs(s) > 0) phi *= std::exp(-0.5 * I * std::arg(s));
  StandingWaves out;
  out.plus = phi.real().cast<Complex>();
  out.minus = phi.imag().cast<Complex>();
  require(out.plus.norm() > 1e-12 && out.minus.norm() > 1e-12, ErrorCode::Degenerate,
          "standing wave combination vanishes");
  out.plus.normalize();
  out.minus.normalize();
  return out;
}

StateVector embed_domain_wall_chain(const Eigen::VectorXcd& amplitudes, const BasisPtr& basis) {
  const int n = basis->sites();
  require(amplitudes.size() == n - 1, ErrorCode::DimensionMismatch, "wall chain length must be n-1");
  require(n % 2 == 0, ErrorCode::Incompatible, "a single wall between Neel domains needs even n");
  StateVector out = StateVector::zero(basis);
  for (int i = 1; i <= n - 1; ++i) {
    // sites 1..i alternate from 0, site i+1 repeats site i, then alternation resumes
    Bits c = 0;
    int value = 0;
    for (int s = 1; s <= n; ++s) {
      if (s > 1 && s != i + 1) value ^= 1;
      if (value) c |= Bits{1} << (s - 1);
    }
    const auto j = basis->index_of(c);
    require(j >= 0, ErrorCode::SectorEscape, "wall configuration missing from the basis");
    out.amplitudes()[j] = amplitudes[i - 1];
  }
  return out;
}

std::string to_string(QuasiparticleSubspace kind) {
  switch (kind) {
    case QuasiparticleSubspace::SingleMagnon: return "single_magnon";
    case QuasiparticleSubspace::FerroString: return "ferro_string";
    case QuasiparticleSubspace::AFString: return "af_string";
    case QuasiparticleSubspace::SingleDomainWall: return "single_domain_wall";
  }
  return "?";
}

QuasiparticleSubspace parse_quasiparticle_subspace(const std::string& text) {
  for (auto k : {QuasiparticleSubspace::SingleMagnon, QuasiparticleSubspace::FerroString,
                 QuasiparticleSubspace::AFString, QuasiparticleSubspace::SingleDomainWall})
    if (to_string(k) == text) return k;
  throw Error(ErrorCode::Config, "unknown quasiparticle subspace '" + text + "'");
}

std::vector<Bits> quasiparticle_subspace(QuasiparticleSubspace kind, const SectorBasis& basis) {
  const int n = basis.sites();
  const auto& sc = basis.constraint();
  const bool frozen_zero =
      (sc.kind == SectorConstraint::Kind::FrozenBoundary || sc.kind == SectorConstraint::Kind::DomainWallNumber) &&
      sc.left_value == 0 && sc.right_value == 0;
  require(frozen_zero, ErrorCode::Incompatible, "quasiparticle subspaces need frozen (0,0) boundaries");

  std::vector<Bits> candidates;
  auto add_pattern = [&](const std::vector<int>& offsets) {
    // leftmost site x in the bulk, every one inside 1..n-2
    const int span = *std::max_element(offsets.begin(), offsets.end());
    for (int x = 1; x + span <= n - 2; ++x) {
      Bits c = 0;
      for (int o : offsets) c |= Bits{1} << (x + o);
      candidates.push_back(c);
    }
  };
  switch (kind) {
    case QuasiparticleSubspace::SingleMagnon: add_pattern({0}); break;
    case QuasiparticleSubspace::FerroString:
      add_pattern({0});
      add_pattern({0, 1});
      add_pattern({0, 1, 2});
      add_pattern({0, 1, 2, 3});
      break;
    case QuasiparticleSubspace::AFString:
      add_pattern({0, 2});        // 101
      add_pattern({0, 2, 3});     // 1011
      add_pattern({0, 3});        // 1001
      add_pattern({0, 1, 3});     // 1101
      break;
    case QuasiparticleSubspace::SingleDomainWall: {
      require(n % 2 == 0, ErrorCode::Incompatible, "a single wall between Neel domains needs even n");
      for (int i = 1; i <= n - 1; ++i) {
        Bits c = 0;
        int value = 0;
        for (int s = 1; s <= n; ++s) {
          if (s > 1 && s != i + 1) value ^= 1;
          if (value) c |= Bits{1} << (s - 1);
        }
        candidates.push_back(c);
      }
      break;
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<Bits> out;
  for (Bits c : candidates)
    if (basis.contains(c)) out.push_back(c);
  require(!out.empty(), ErrorCode::Incompatible, "sector holds no " + to_string(kind) + " configurations");
  return out;
}

SymmetricSubspace symmetric_subspace(const HamiltonianOp& pxp) {
  require(pxp.basis->constraint().kind == SectorConstraint::Kind::RydbergBlockade, ErrorCode::Incompatible,
          "the symmetric subspace is built inside a blockade sector");
  const auto& basis = *pxp.basis;
  std::map<std::pair<int, int>, std::vector<Eigen::Index>> groups;
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const Bits c = basis.config(j);
    int odd = 0, even = 0;  // 1-based parity: 0-based even sites are odd labels
    for (int s = 0; s < basis.sites(); ++s)
      if ((c >> s) & 1u) (s % 2 == 0 ? odd : even)++;
    groups[{odd, even}].push_back(j);
  }
  SymmetricSubspace k;
  k.basis = pxp.basis;
  k.embedding = Eigen::MatrixXcd::Zero(basis.size(), static_cast<Eigen::Index>(groups.size()));
  Eigen::Index col = 0;
  for (const auto& [label, members] : groups) {
    k.labels.push_back(label);
    k.normalizations.push_back(static_cast<double>(members.size()));
    const double amp = 1.0 / std::sqrt(static_cast<double>(members.size()));
    for (auto j : members) k.embedding(j, col) = amp;
    ++col;
  }
  Eigen::MatrixXcd h_cols(basis.size(), k.embedding.cols());
  for (Eigen::Index c = 0; c < k.embedding.cols(); ++c) h_cols.col(c) = pxp.op.apply(k.embedding.col(c));
  k.projected = k.embedding.adjoint() * h_cols;
  const Eigen::MatrixXcd sym = 0.5 * (k.projected + k.projected.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
  k.quasimode_energies = es.eigenvalues();
  k.quasimodes = k.embedding * es.eigenvectors();
  k.metadata = {{"labels", k.labels.size()},
                {"hamiltonian", "pxp"},
                {"note", "projection of the PXP Hamiltonian; the xorX label in the source formula is not used"},
                {"parity", "odd/even refer to 1-based site labels"}};
  return k;
}

Eigen::VectorXd subspace_weights(const SymmetricSubspace& k, const EigenSet& eigs) {
  require(same_basis(*k.basis, *eigs.basis), ErrorCode::SectorMismatch, "eigenvectors live in another sector");
  const Eigen::MatrixXcd proj = k.embedding.adjoint() * eigs.states;
  return proj.cwiseAbs2().colwise().sum().transpose();
}

InterlaceReport interlace(std::vector<double> band, const std::vector<double>& quasimode_energies,
                          const std::vector<double>& quasimode_overlaps, double relative_floor) {
  require(quasimode_energies.size() == quasimode_overlaps.size(), ErrorCode::DimensionMismatch,
          "one overlap per quasimode");
  InterlaceReport r;
  std::sort(band.begin(), band.end());
  r.band = band;
  double largest = 0.0;
  for (double o : quasimode_overlaps) largest = std::max(largest, o);
  for (std::size_t q = 0; q < quasimode_energies.size(); ++q)
    if (quasimode_overlaps[q] >= relative_floor * largest && largest > 0) r.quasimodes.push_back(quasimode_energies[q]);
  std::sort(r.quasimodes.begin(), r.quasimodes.end());
  if (band.size() < 2 || r.quasimodes.empty()) {
    r.detail = "need at least two band energies and one quasimode";
    return r;
  }
  std::vector<double> edges;  // cell boundaries, band.size() + 1 of them
  edges.push_back(band.front() - 0.5 * (band[1] - band[0]));
  for (std::size_t i = 0; i + 1 < band.size(); ++i) edges.push_back(0.5 * (band[i] + band[i + 1]));
  edges.push_back(band.back() + 0.5 * (band.back() - band[band.size() - 2]));

  std::ostringstream why;
  bool ok = true;
  std::vector<int> counts(band.size(), 0);
  for (double q : r.quasimodes) {
    if (q < edges.front() || q > edges.back()) {
      why << "quasimode " << q << " lies outside the band; ";
      ok = false;
      continue;
    }
    const auto cell = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), q) - edges.begin()) - 1, band.size() - 1);
    ++counts[cell];
  }
  for (std::size_t i = 0; i < band.size(); ++i)
    if (counts[i] == 0) {
      why << "no quasimode near band energy " << band[i] << "; ";
      ok = false;
    }
  r.interlaced = ok;
  r.detail = ok ? "interlaced" : why.str();
  return r;
}

}  // namespace scarlab
