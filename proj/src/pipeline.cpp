#include "scarlab/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "scarlab/error.hpp"
#include "scarlab/quasiparticle.hpp"
#include "scarlab/random.hpp"

namespace scarlab {

XorXSpectrum xorx_spectrum(const XorXParams& params) {
  const int n = params.n;
  XorXSpectrum out;
  const auto frozen = build_sector(n, SectorConstraint::frozen(n));
  out.hamiltonian = build_xorx(params, SectorConstraint::frozen(n));

  std::vector<EigenSet> blocks;
  std::vector<int> labels;
  for (int dw = 0; dw <= n - 1; dw += 2) {
    blocks.push_back(diagonalize(build_xorx(params, SectorConstraint::domain_wall_number(n, dw))));
    labels.push_back(dw);
  }
  out.eigs = merge_blocks(blocks, frozen, labels);
  out.tower = scar_tower(frozen);
  std::vector<StateVector> refs;
  for (const auto& s : out.tower) refs.push_back(s.state);
  align_degenerate(out.eigs, refs);

  for (const auto& s : out.tower) {
    const auto ov = overlap_scan(out.eigs, s.state);
    Eigen::Index best = 0;
    ov.maxCoeff(&best);
    out.scar_indices.push_back(best);
    out.scar_overlaps.push_back(ov[best]);
  }
  return out;
}

ModelSpectrum model_spectrum(const RunConfig& config) {
  const auto sector = sector_constraint(config);
  const int n = config.model.n();
  ModelSpectrum out;
  out.metadata = {{"model", to_string(config.model.kind)}, {"sector", sector.describe()}};
  const auto envelope = [&](ReferenceLabel label, double window) {
    const auto ref = reference_state(label, out.eigs.basis);
    out.references.emplace_back(to_string(label), ref);
    out.positives = overlap_envelope(out.eigs.energies, overlap_scan(out.eigs, ref), window);
    out.metadata["positives"] = "overlap envelope of " + to_string(label);
    out.metadata["window"] = window;
  };
  switch (config.model.kind) {
    case ModelKind::XorX: {
      const auto& p = config.model.xorx;
      out.metadata["params"] = {{"lambda", p.lambda}, {"delta", p.delta}, {"j", p.j}, {"n", p.n}};
      if (sector == SectorConstraint::frozen(n)) {
        auto spec = xorx_spectrum(p);
        out.hamiltonian = std::move(spec.hamiltonian);
        out.eigs = std::move(spec.eigs);
        out.positives = spec.scar_indices;
        for (const auto& s : spec.tower) out.references.emplace_back("S" + std::to_string(s.m), s.state);
        for (auto kind : {QuasiparticleSubspace::SingleMagnon, QuasiparticleSubspace::FerroString,
                          QuasiparticleSubspace::AFString, QuasiparticleSubspace::SingleDomainWall})
          out.subspaces.emplace_back(to_string(kind), quasiparticle_subspace(kind, *out.eigs.basis));
        out.encoding = QubitEncoding::bulk_sites(n);
        out.metadata["positives"] = "exact scar tower";
      } else {
        out.hamiltonian = build_xorx(p, sector);
        out.eigs = diagonalize(out.hamiltonian);
        out.encoding = QubitEncoding::all_sites(n);
      }
      break;
    }
    case ModelKind::PXP: {
      const auto& p = config.model.pxp;
      out.metadata["params"] = {{"omega", p.omega}, {"n", p.n}, {"periodic", p.boundary == PXPBoundary::Periodic}};
      out.hamiltonian = build_pxp(p, sector);
      out.eigs = diagonalize(out.hamiltonian);
      out.encoding = QubitEncoding::all_sites(n);
      envelope(ReferenceLabel::Z2, config.training.window > 0.0 ? config.training.window : p.omega / 2.0);
      break;
    }
    case ModelKind::SSH: {
      const auto& p = config.model.ssh;
      out.metadata["params"] = {{"j_even", p.j_even}, {"j_odd", p.j_odd}, {"j_nnn", p.j_nnn}, {"n", p.n}};
      out.hamiltonian = build_ssh(p, sector);
      out.eigs = diagonalize(out.hamiltonian);
      out.encoding = QubitEncoding::all_sites(n);
      if (n % 4 == 0)
        envelope(ReferenceLabel::Z1001, config.training.window > 0.0 ? config.training.window : p.j_even / 2.0);
      break;
    }
  }
  return out;
}

double scheduled_rate(const TrainingConfig& training, long t, long total) {
  double rate = training.optimizer.learning_rate;
  for (double f : training.decay_at)
    if (static_cast<double>(t) >= f * static_cast<double>(total)) rate *= training.decay_factor;
  return rate;
}

BatchSource seeded_batches(const DatasetSource& source, int batch_size, std::uint64_t seed) {
  return [source, batch_size, seed](long t) {
    auto rng = make_stream(seed, "qcnn.batch", static_cast<std::uint64_t>(t));
    return make_dataset(source, batch_size, rng);
  };
}

TrainResult train_scheduled(const CircuitSpec& spec, ParamVector theta, const BatchSource& batches,
                            const TrainingConfig& training, long total, OptimizerState state, long start) {
  require(start >= 0 && start <= total, ErrorCode::InvalidArgument, "start beyond the end of the run");
  std::vector<long> cuts{start, total};
  for (double f : training.decay_at) {
    const auto c = static_cast<long>(std::ceil(f * static_cast<double>(total)));
    if (c > start && c < total) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  TrainResult result;
  result.theta = std::move(theta);
  result.optimizer = std::move(state);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    OptimizerConfig opt = training.optimizer;
    opt.learning_rate = scheduled_rate(training, cuts[i], total);
    auto part = train(spec, result.theta, batches, opt, cuts[i + 1] - cuts[i], result.optimizer, cuts[i]);
    result.theta = std::move(part.theta);
    result.optimizer = std::move(part.optimizer);
    result.trace.insert(result.trace.end(), part.trace.begin(), part.trace.end());
  }
  return result;
}

MitigationStudy mitigation_study(const MitigationConfig& config, const ReadoutModel& readout, std::uint64_t seed) {
  MitigationStudy study;
  const int n = readout.encoding.n_sites;
  study.sites = n;
  study.noiseless_q = forward(readout.spec, readout.theta, encode(exact_scar(1, n).state, readout.encoding));
  NoisyRunOptions options;
  options.trajectories = config.trajectories;
  options.shots = config.shots;
  options.seed = seed;
  auto run = [&](double p, int r) {
    auto c = prep_s1_circuit(n);
    c.error_rate = p;
    c.fold = r;
    MitigationRow row{p, r, run_noisy(c, options, &readout), fidelity_proxy(c, options)};
    study.rows.push_back(row);
  };
  for (double p : config.error_rates) run(p, 0);
  for (int r : config.folds) {
    const bool seen = std::any_of(study.rows.begin(), study.rows.end(), [&](const MitigationRow& row) {
      return row.error_rate == config.fold_error_rate && row.fold == r;
    });
    if (!seen) run(config.fold_error_rate, r);
  }
  std::vector<FitPoint> loglog, linear;
  for (const auto& row : study.rows) {
    loglog.push_back({row.proxy.value, row.summary.p1, row.summary.p1_stderr});
    if (row.error_rate == config.fold_error_rate)
      linear.push_back({1.0 + 2.0 * row.fold, row.summary.p1, row.summary.p1_stderr});
  }
  std::sort(linear.begin(), linear.end(), [](const FitPoint& a, const FitPoint& b) { return a.x < b.x; });
  study.loglog = zne_fit(loglog, FitFamily::LogLog);
  study.linear = zne_fit(linear, FitFamily::Linear);
  return study;
}

}  // namespace scarlab
