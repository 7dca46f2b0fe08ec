#pragma once

// Assembled workflows shared by the command-line tool and the acceptance runs.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scarlab/config.hpp"
#include "scarlab/dynamics.hpp"
#include "scarlab/mitigation.hpp"
#include "scarlab/models.hpp"
#include "scarlab/qcnn.hpp"
#include "scarlab/spectra.hpp"

namespace scarlab {

// Full frozen-boundary xorX spectrum, built block by block over the wall-number sectors and
// merged (block label = wall number). Degenerate clusters are rotated onto the exact scars.
struct XorXSpectrum {
  HamiltonianOp hamiltonian;  // over the frozen basis
  EigenSet eigs;
  std::vector<ScarState> tower;
  std::vector<Eigen::Index> scar_indices;  // eigenvector column of each tower state
  std::vector<double> scar_overlaps;       // |<S_m|psi>|^2 at that column
};

XorXSpectrum xorx_spectrum(const XorXParams& params);

// Spectrum of the configured model and sector together with the states used as training
// positives, the reference states reported in diagnostics and the qubit encoding.
//   xorX, frozen (0,0) boundaries: positives = exact scar tower, encoding = bulk sites
//   PXP: positives = Z2 overlap envelope (window Omega/2 unless configured), all sites
//   SSH: positives = Z1001 overlap envelope (window J_even/2 unless configured), all sites
struct ModelSpectrum {
  HamiltonianOp hamiltonian;
  EigenSet eigs;
  std::vector<Eigen::Index> positives;
  std::vector<std::pair<std::string, StateVector>> references;
  std::vector<std::pair<std::string, std::vector<Bits>>> subspaces;
  QubitEncoding encoding;
  nlohmann::json metadata;
};

ModelSpectrum model_spectrum(const RunConfig& config);

// Learning rate in force at iteration t of a `total`-iteration run.
double scheduled_rate(const TrainingConfig& training, long t, long total);

// Batch of iteration t: make_dataset drawn from the stream (seed, "qcnn.batch", t).
BatchSource seeded_batches(const DatasetSource& source, int batch_size, std::uint64_t seed);

// Iterations [start, total) under the step schedule; the result depends only on `total`, not on
// how the run is split.
TrainResult train_scheduled(const CircuitSpec& spec, ParamVector theta, const BatchSource& batches,
                            const TrainingConfig& training, long total, OptimizerState state = {}, long start = 0);

struct MitigationRow {
  double error_rate = 0.0;
  int fold = 0;
  NoisySummary summary;
  ProxyEstimate proxy;
};

struct MitigationStudy {
  int sites = 0;
  double noiseless_q = 0.0;  // q(|S_1>) of the readout model
  std::vector<MitigationRow> rows;
  ExtrapolationFit loglog;  // P_1 vs proxy fidelity over every row
  ExtrapolationFit linear;  // P_1 vs 1 + 2r at the fold error rate
};

// Error-rate sweep at r = 0 and fold sweep at the fold error rate on the S_1 preparation of the
// readout model's chain length.
MitigationStudy mitigation_study(const MitigationConfig& config, const ReadoutModel& readout, std::uint64_t seed);

}  // namespace scarlab
