#include "scarlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace scarlab {

EigenSet diagonalize(const HamiltonianOp& h, Eigen::Index threshold) {
  require(h.op.hermitian(), ErrorCode::NonHermitian, "diagonalize needs a Hermitian operator");
  const Eigen::MatrixXcd dense = to_dense(h.op, threshold);
  EigenSet out;
  out.basis = h.basis;
  out.metadata = h.metadata;
  if (h.op.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense.real());
    require(solver.info() == Eigen::Success, ErrorCode::NonHermitian, "eigensolver failed");
    out.energies = solver.eigenvalues();
    out.states = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
    require(solver.info() == Eigen::Success, ErrorCode::NonHermitian, "eigensolver failed");
    out.energies = solver.eigenvalues();
    out.states = solver.eigenvectors();
  }
  out.block.assign(static_cast<std::size_t>(out.energies.size()), -1);
  return out;
}

EigenSet merge_blocks(std::span<const EigenSet> blocks, const BasisPtr& parent, std::span<const int> labels) {
  require(blocks.size() == labels.size(), ErrorCode::InvalidArgument, "one label per block");
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.size();
  require(total <= parent->size(), ErrorCode::DimensionMismatch, "blocks exceed the parent space");

  struct Entry {
    double energy;
    std::size_t block;
    Eigen::Index column;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(total));
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (Eigen::Index j = 0; j < blocks[b].size(); ++j) entries.push_back({blocks[b].energies[j], b, j});
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.energy < y.energy; });

  // Row maps from each block basis into the parent basis.
  std::vector<std::vector<Eigen::Index>> rows(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& basis = *blocks[b].basis;
    rows[b].resize(static_cast<std::size_t>(basis.size()));
    for (Eigen::Index r = 0; r < basis.size(); ++r) {
      const auto k = parent->index_of(basis.config(r));
      require(k >= 0, ErrorCode::SectorEscape, "block basis not contained in the parent basis");
      rows[b][static_cast<std::size_t>(r)] = k;
    }
  }

  EigenSet out;
  out.basis = parent;
  out.energies.resize(total);
  out.states = Eigen::MatrixXcd::Zero(parent->size(), total);
  out.block.resize(static_cast<std::size_t>(total));
  for (Eigen::Index c = 0; c < total; ++c) {
    const auto& e = entries[static_cast<std::size_t>(c)];
    out.energies[c] = e.energy;
    out.block[static_cast<std::size_t>(c)] = labels[e.block];
    const auto& col = blocks[e.block].states.col(e.column);
    for (Eigen::Index r = 0; r < col.size(); ++r) out.states(rows[e.block][static_cast<std::size_t>(r)], c) = col[r];
  }
  if (!blocks.empty()) out.metadata = blocks.front().metadata;
  return out;
}

void align_degenerate(EigenSet& eigs, std::span<const StateVector> refs, double tol) {
  for (const auto& r : refs)
    require(same_basis(*r.basis_ptr(), *eigs.basis), ErrorCode::SectorMismatch, "reference lives in another sector");
  const Eigen::Index n = eigs.size();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && eigs.energies[stop] - eigs.energies[stop - 1] < tol) ++stop;
    const Eigen::Index width = stop - start;
    if (width > 1) {
      // Only columns of a single block can be mixed.
      bool same_block = true;
      for (Eigen::Index j = start + 1; j < stop; ++j)
        same_block &= eigs.block[static_cast<std::size_t>(j)] == eigs.block[static_cast<std::size_t>(start)];
      if (same_block) {
        Eigen::MatrixXcd cluster = eigs.states.middleCols(start, width);
        // Coordinates of the reference projections inside the cluster.
        Eigen::MatrixXcd coords(width, 0);
        for (const auto& r : refs) {
          Eigen::VectorXcd c = cluster.adjoint() * r.amplitudes();
          for (Eigen::Index k = 0; k < coords.cols(); ++k) c -= coords.col(k) * coords.col(k).dot(c);
          const double nrm = c.norm();
          if (nrm < 1e-10 || coords.cols() == width) continue;
          coords.conservativeResize(Eigen::NoChange, coords.cols() + 1);
          coords.col(coords.cols() - 1) = c / nrm;
        }
        if (coords.cols() > 0) {
          // Complete to a unitary on the cluster.
          Eigen::MatrixXcd rot(width, width);
          rot.leftCols(coords.cols()) = coords;
          Eigen::Index filled = coords.cols();
          for (Eigen::Index e = 0; e < width && filled < width; ++e) {
            Eigen::VectorXcd v = Eigen::VectorXcd::Unit(width, e);
            for (Eigen::Index k = 0; k < filled; ++k) v -= rot.col(k) * rot.col(k).dot(v);
            for (Eigen::Index k = 0; k < filled; ++k) v -= rot.col(k) * rot.col(k).dot(v);
            const double nrm = v.norm();
            if (nrm < 1e-8) continue;
            rot.col(filled++) = v / nrm;
          }
          eigs.states.middleCols(start, width) = cluster * rot;
        }
      }
    }
    start = stop;
  }
}

double max_residual(const HamiltonianOp& h, const EigenSet& eigs) {
  require(same_basis(*h.basis, *eigs.basis), ErrorCode::SectorMismatch, "eigenset from another sector");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < eigs.size(); ++j) {
    const Eigen::VectorXcd v = eigs.states.col(j);
    worst = std::max(worst, (h.op.apply(v) - eigs.energies[j] * v).norm());
  }
  return worst;
}

double orthonormality_error(const EigenSet& eigs) {
  const Eigen::MatrixXcd gram = eigs.states.adjoint() * eigs.states;
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

double reconstruction_error(const HamiltonianOp& h, const EigenSet& eigs) {
  const Eigen::MatrixXcd rebuilt = eigs.states * eigs.energies.cast<Complex>().asDiagonal() * eigs.states.adjoint();
  return (rebuilt - to_dense(h.op)).cwiseAbs().maxCoeff();
}

double half_chain_entropy(const StateVector& psi, int cut) {
  const int n = psi.basis().sites();
  require(cut > 0 && cut < n, ErrorCode::BadCut, "cut must lie strictly inside (0, n)");
  const Eigen::VectorXcd full = psi.embed_full();
  const Eigen::Index rows = Eigen::Index{1} << cut;
  const Eigen::Index cols = Eigen::Index{1} << (n - cut);
  // Column-major map: entry (left, right) sits at left + rows * right = full index.
  const Eigen::Map<const Eigen::MatrixXcd> amp(full.data(), rows, cols);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(amp);
  double s = 0.0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double p = svd.singularValues()[k] * svd.singularValues()[k];
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

double participation_ratio(const StateVector& psi) {
  double pr = 0.0;
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    const double p = std::norm(psi.amplitudes()[j]);
    pr += p * p;
  }
  return pr;
}

SzStats sz_stats(const StateVector& psi, int first, int last) {
  const int n = psi.basis().sites();
  require(first >= 0 && first <= last && last <= n, ErrorCode::InvalidArgument, "bad site range");
  double m1 = 0.0, m2 = 0.0;
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    const double p = std::norm(psi.amplitudes()[j]);
    if (p == 0.0) continue;
    int sz = 0;
    for (int s = first; s < last; ++s) sz += spin_z(psi.basis().config(j), s);
    m1 += p * sz;
    m2 += p * sz * sz;
  }
  return {m1, std::max(0.0, m2 - m1 * m1)};
}

double subspace_weight(const StateVector& psi, std::span<const Bits> subspace) {
  double w = 0.0;
  for (Bits c : subspace) {
    const auto j = psi.basis().index_of(c);
    require(j >= 0, ErrorCode::NotSubset, "subspace configuration outside the state's sector");
    w += std::norm(psi.amplitudes()[j]);
  }
  return w;
}

Eigen::VectorXd overlap_scan(const EigenSet& eigs, const StateVector& ref) {
  require(same_basis(ref.basis(), *eigs.basis), ErrorCode::SectorMismatch, "reference lives in another sector");
  const Eigen::VectorXcd c = eigs.states.adjoint() * ref.amplitudes();
  return c.cwiseAbs2();
}

std::vector<Eigen::Index> overlap_envelope(const Eigen::VectorXd& energies, const Eigen::VectorXd& overlaps,
                                           double window, double min_overlap) {
  require(energies.size() == overlaps.size(), ErrorCode::DimensionMismatch, "energy/overlap length mismatch");
  std::vector<Eigen::Index> picked;
  for (Eigen::Index j = 0; j < energies.size(); ++j) {
    if (overlaps[j] <= min_overlap) continue;
    bool best = true;
    for (Eigen::Index i = 0; i < energies.size() && best; ++i)
      if (i != j && std::abs(energies[i] - energies[j]) <= window && overlaps[i] > overlaps[j]) best = false;
    if (best) picked.push_back(j);
  }
  return picked;
}

namespace {

DensityCurve gaussian_density(const std::vector<double>& points, double sigma, int grid_points) {
  const auto [lo_it, hi_it] = std::minmax_element(points.begin(), points.end());
  const double lo = *lo_it - 5.0 * sigma;
  const double hi = *hi_it + 5.0 * sigma;
  DensityCurve curve;
  curve.grid.resize(static_cast<std::size_t>(grid_points));
  curve.density.assign(static_cast<std::size_t>(grid_points), 0.0);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < grid_points; ++g) {
    const double x = lo + (hi - lo) * g / (grid_points - 1);
    double acc = 0.0;
    for (double p : points) {
      const double z = (x - p) / sigma;
      acc += std::exp(-0.5 * z * z);
    }
    curve.grid[static_cast<std::size_t>(g)] = x;
    curve.density[static_cast<std::size_t>(g)] = norm * acc;
  }
  return curve;
}

}  // namespace

TowerDensity energy_tower_density(std::span<const double> energies, double broadening, int grid_points) {
  require(energies.size() >= 2, ErrorCode::TooFew, "tower density needs at least two states");
  require(broadening > 0.0 && grid_points >= 2, ErrorCode::InvalidArgument, "broadening and grid must be positive");
  std::vector<double> e(energies.begin(), energies.end());
  std::vector<double> diffs;
  diffs.reserve(e.size() * e.size());
  for (double a : e)
    for (double b : e) diffs.push_back(a - b);
  return {gaussian_density(e, broadening, grid_points), gaussian_density(diffs, broadening, grid_points)};
}

std::vector<DiagnosticsRow> compute_diagnostics(const EigenSet& eigs, const DiagnosticsOptions& options) {
  const int n = eigs.basis->sites();
  const int cut = options.cut > 0 ? options.cut : n / 2;
  const int sz_last = options.sz_last >= 0 ? options.sz_last : n - 1;
  std::vector<Eigen::VectorXd> overlaps;
  for (const auto& [label, ref] : options.references) overlaps.push_back(overlap_scan(eigs, ref));

  std::vector<DiagnosticsRow> rows(static_cast<std::size_t>(eigs.size()));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < eigs.size(); ++j) {
    const auto psi = eigs.state(j);
    auto& row = rows[static_cast<std::size_t>(j)];
    row.index = j;
    row.energy = eigs.energies[j];
    row.half_chain_entropy = half_chain_entropy(psi, cut);
    row.participation_ratio = participation_ratio(psi);
    const auto sz = sz_stats(psi, options.sz_first, sz_last);
    row.sz_mean = sz.mean;
    row.sz_variance = sz.variance;
    for (const auto& ov : overlaps) row.overlaps.push_back(ov[j]);
    for (const auto& [label, configs] : options.subspaces) row.subspace_weights.push_back(subspace_weight(psi, configs));
  }
  return rows;
}

}  // namespace scarlab
