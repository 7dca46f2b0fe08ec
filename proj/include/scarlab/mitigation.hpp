#pragma once

// Noisy preparation of the one-magnon scar on a qubit register, Pauli-error Monte Carlo, global
// folding U (U^dagger U)^r, the all-zero fidelity proxy and zero-noise extrapolation fits.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "scarlab/qcnn.hpp"

namespace scarlab {

struct NamedGate {
  std::string name;
  std::vector<int> qubits;  // local index bit(qubits[0]) + 2 bit(qubits[1]) + ...
  Eigen::MatrixXcd matrix;
  bool multi_qubit() const { return qubits.size() > 1; }
};

NamedGate dagger(const NamedGate& gate);

// Register layout: qubit s = chain site s (0 .. n-1), qubit n = helper ancilla.
struct NoisyCircuit {
  int sites = 0;
  int seed_site = 0;  // the site flipped first
  std::vector<NamedGate> gates;
  double error_rate = 0.0;  // per touched qubit after every multi-qubit gate
  int fold = 0;

  int qubits() const { return sites + 1; }
  int ancilla() const { return sites; }
  // U (U^dagger U)^fold
  std::vector<NamedGate> folded_gates() const;
  std::size_t multi_qubit_count() const;
};

// X on the last bulk site, then one amplitude-balanced split per bulk site: controlled-RY onto
// the ancilla, controlled-SWAP moving the excitation one site left, CNOT returning the ancilla
// to |0>; Z gates give the alternating signs. Maps |0...0> to |S_1> (x) |0>_ancilla.
NoisyCircuit prep_s1_circuit(int n);

// Noiseless application of a gate list.
Eigen::VectorXcd apply_gates(const std::vector<NamedGate>& gates, Eigen::VectorXcd psi);

// Full register unitary (small registers only).
Eigen::MatrixXcd circuit_unitary(const std::vector<NamedGate>& gates, int qubits);

// |S_1> of the n-site frozen chain (x) |0>_ancilla as register amplitudes.
Eigen::VectorXcd s1_register(int n);

// QCNN acting on the bulk sites of the register; the other register qubits are traced out.
struct ReadoutModel {
  CircuitSpec spec;
  ParamVector theta;
  QubitEncoding encoding;
};

// Probability of the readout reporting 1 for the mixed bulk state of `reg`.
double register_readout(const ReadoutModel& model, const Eigen::VectorXcd& reg, int sites);

struct NoisyRunOptions {
  int trajectories = 1000;
  long shots = 0;  // total measurement shots per run; 0 reports exact trajectory marginals
  std::uint64_t seed = 1;
};

struct NoisySummary {
  double error_rate = 0.0;
  int fold = 0;
  int trajectories = 0;
  long shots = 0;
  double fidelity = 0.0;  // <S_1|rho|S_1>, trajectory average
  double fidelity_stderr = 0.0;
  double ancilla_one = 0.0;  // probability that the helper ancilla ends in |1>
  double p1 = -1.0;          // QCNN success probability, when a readout model is given
  double p1_stderr = 0.0;
};

// Trajectory t draws its errors and shots from the stream (seed, "mitigation.trajectory", t).
NoisySummary run_noisy(const NoisyCircuit& circuit, const NoisyRunOptions& options,
                       const ReadoutModel* readout = nullptr);

struct ProxyEstimate {
  double value = 0.0;
  double stderr = 0.0;
};

// Probability of the all-zero outcome after X_seed, the noisy folded preparation, and the exact
// inverse (X_seed U)^dagger, averaged over trajectories.
ProxyEstimate fidelity_proxy(const NoisyCircuit& circuit, const NoisyRunOptions& options);

enum class FitFamily { LogLog, Linear };

std::string to_string(FitFamily family);
FitFamily parse_fit_family(const std::string& text);

struct FitPoint {
  double x = 0.0;  // input fidelity (LogLog) or error multiplier 1 + 2r (Linear)
  double y = 0.0;  // P_1
  double y_err = 0.0;
};

struct ExtrapolationFit {
  FitFamily family = FitFamily::LogLog;
  std::vector<FitPoint> points;
  std::vector<bool> used;
  double slope = 0.0;
  double offset = 0.0;     // regression intercept in the fitted coordinates
  double intercept = 0.0;  // P_1 at x = 1 (LogLog) or x = 0 (Linear)
  double stderr = 0.0;
  nlohmann::json to_json() const;
};

// LogLog: ln P_1 = offset + slope ln x, extrapolated to x = 1.
// Linear: P_1 = offset + slope x, extrapolated to x = 0, using only points farther than
// knee_sigmas * y_err from `baseline` (the saturated value).
// Throws TooFew with fewer than 3 usable points and Degenerate when all x coincide.
ExtrapolationFit zne_fit(const std::vector<FitPoint>& points, FitFamily family, double baseline = 0.5,
                         double knee_sigmas = 2.0);

}  // namespace scarlab
