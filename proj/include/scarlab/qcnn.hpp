#pragma once

// Enhanced quantum convolutional neural network: architecture, statevector forward pass,
// gradients, training and spectrum classification.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "scarlab/circuit.hpp"
#include "scarlab/spectra.hpp"

namespace scarlab {

// Rotation generator of a primitive gate exp(-i theta P / 2).
enum class Axis { X, Y, Z, XX, YY, ZZ };

struct Primitive {
  Axis axis = Axis::Z;
  int target = 0;  // single-qubit axes: 0 = first qubit of the gate, 1 = second
  int slot = 0;
};

// A fused gate on one qubit (second = -1) or an ordered qubit pair; primitives act in order.
struct GateInstance {
  int first = 0;
  int second = -1;
  std::vector<Primitive> primitives;
  bool two_qubit() const { return second >= 0; }
};

enum class LayerKind { GeneralPre, Conv, Pool, FullyConnected };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  std::vector<GateInstance> gates;
  std::vector<int> kept_after;  // qubits still active once the layer has acted
};

struct CircuitSpec {
  int n_data = 0;
  int n_ancilla = 1;
  int readout = 0;
  int n_params = 0;
  int conv_layers_per_block = 0;
  bool with_pre = false;
  std::vector<LayerSpec> layers;
  std::vector<std::string> slot_labels;

  int qubits() const { return n_data + n_ancilla; }
  std::size_t gate_count() const;
  nlohmann::json describe() const;
};

using ParamVector = Eigen::VectorXd;

// Alternating [Conv x n_l] -> Pool blocks over the data qubits plus ancillas until at most two
// qubits remain, then a fully connected block (shared two-qubit block + rotation on the readout).
// The readout is the last surviving qubit. Slot count without the pre-block: 12 + S (9 n_l + 3),
// S = number of pooling stages.
CircuitSpec build_architecture(int n_data, int n_l, bool with_pre = false, int n_ancilla = 1);

// Hand-assembled circuit (used by tests and small experiments).
CircuitSpec custom_circuit(int qubits, int readout, std::vector<LayerSpec> layers, int n_params);

CircuitSpec circuit_from_json(const nlohmann::json& j);

ParamVector initial_parameters(const CircuitSpec& spec, std::uint64_t seed);

// Input amplitudes over the data qubits; ancillas start in |0>.
Eigen::VectorXcd run_circuit(const CircuitSpec& spec, const ParamVector& theta, const Eigen::VectorXcd& input);

// Probability that the readout qubit is |1>.
double forward(const CircuitSpec& spec, const ParamVector& theta, const Eigen::VectorXcd& input);

struct TrainingSample {
  Eigen::VectorXcd state;  // over the data qubits
  int label = 0;
};

struct LossReport {
  double loss = 0.0;
  std::vector<double> q;
  long iteration = 0;
};

LossReport loss(const CircuitSpec& spec, const ParamVector& theta, const std::vector<TrainingSample>& batch);

// Parameter-shift gradient of the loss: each primitive instance is shifted by +-pi/2 separately
// and the contributions of tied instances are summed. The subgradient of |y - q| at y = q is 0.
Eigen::VectorXd gradient(const CircuitSpec& spec, const ParamVector& theta, const std::vector<TrainingSample>& batch);

// Same quantity by one forward and one backward sweep per sample (used for training).
Eigen::VectorXd adjoint_gradient(const CircuitSpec& spec, const ParamVector& theta,
                                 const std::vector<TrainingSample>& batch, LossReport* report = nullptr);

// d q / d theta for a single input, by parameter shift and by the adjoint sweep.
Eigen::VectorXd output_gradient_shift(const CircuitSpec& spec, const ParamVector& theta, const Eigen::VectorXcd& input);
Eigen::VectorXd output_gradient_adjoint(const CircuitSpec& spec, const ParamVector& theta,
                                        const Eigen::VectorXcd& input);

// Map of chain sites onto data qubits: data qubit k carries site sites[k].
struct QubitEncoding {
  int n_sites = 0;
  std::vector<int> sites;

  static QubitEncoding all_sites(int n);
  static QubitEncoding bulk_sites(int n);  // sites 1..n-2 (frozen boundaries are constant)
  int data_qubits() const { return static_cast<int>(sites.size()); }
};

// Amplitudes over the data qubits; sites outside the encoding must be 0 on the support.
Eigen::VectorXcd encode(const StateVector& psi, const QubitEncoding& enc);
Eigen::MatrixXcd encode_columns(const EigenSet& eigs, const QubitEncoding& enc);

struct DatasetSource {
  Eigen::MatrixXcd encoded;           // encoded eigenvectors (columns)
  std::vector<Eigen::Index> scars;    // positive columns
  std::vector<Eigen::Index> others;   // negative columns
};

DatasetSource make_source(const EigenSet& eigs, const std::vector<Eigen::Index>& scar_indices,
                          const QubitEncoding& enc);

// d/2 positives (complex-Gaussian superpositions over the scar span) and d/2 negatives
// (a single non-scar eigenstate with probability 1/2, otherwise a 2-4 state superposition).
std::vector<TrainingSample> make_dataset(const DatasetSource& source, int d, std::mt19937_64& rng);

struct OptimizerConfig {
  enum class Kind { GradientDescent, Adam };
  Kind kind = Kind::GradientDescent;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

std::string to_string(OptimizerConfig::Kind kind);
OptimizerConfig::Kind parse_optimizer(const std::string& text);

struct OptimizerState {
  long step = 0;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
};

void optimizer_update(const OptimizerConfig& config, OptimizerState& state, ParamVector& theta,
                      const Eigen::VectorXd& grad);

using BatchSource = std::function<std::vector<TrainingSample>(long iteration)>;

struct TrainResult {
  ParamVector theta;
  OptimizerState optimizer;
  std::vector<LossReport> trace;
};

// Runs iterations [start, start + iterations); the batch of iteration t is batches(t).
TrainResult train(const CircuitSpec& spec, ParamVector theta, const BatchSource& batches,
                  const OptimizerConfig& optimizer, long iterations, OptimizerState state = {}, long start = 0);

// Mean loss over the last `window` trace entries.
double converged_loss(const std::vector<LossReport>& trace, std::size_t window);

// Marking rule: strictly above one half.
inline bool is_marked(double q) { return q > 0.5; }

struct Classification {
  std::vector<double> q;
  std::vector<bool> marked;  // q > 0.5
  std::size_t marked_count() const;
};

Classification classify_spectrum(const CircuitSpec& spec, const ParamVector& theta, const EigenSet& eigs,
                                 const QubitEncoding& enc);

}  // namespace scarlab
