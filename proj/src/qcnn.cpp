#include "scarlab/qcnn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scarlab/random.hpp"

namespace scarlab {

using circuit::Mat2;
using circuit::Mat4;

namespace {

const Complex I(0.0, 1.0);

Mat2 single_pauli(Axis a) {
  switch (a) {
    case Axis::X: return circuit::pauli_x();
    case Axis::Y: return circuit::pauli_y();
    case Axis::Z: return circuit::pauli_z();
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "two-qubit axis used on a single qubit");
}

bool is_pair_axis(Axis a) { return a == Axis::XX || a == Axis::YY || a == Axis::ZZ; }

Mat2 single_rotation(Axis a, double theta) {
  return std::cos(0.5 * theta) * Mat2::Identity() - I * std::sin(0.5 * theta) * single_pauli(a);
}

// Generator P of a primitive, written on the gate's own space (2x2 or 4x4 as a 4x4 with
// the unused block ignored for single-qubit gates).
Mat4 generator4(const Primitive& p) {
  switch (p.axis) {
    case Axis::XX: return circuit::on_pair(circuit::pauli_x(), circuit::pauli_x());
    case Axis::YY: return circuit::on_pair(circuit::pauli_y(), circuit::pauli_y());
    case Axis::ZZ: return circuit::on_pair(circuit::pauli_z(), circuit::pauli_z());
    default: break;
  }
  const Mat2 s = single_pauli(p.axis);
  return p.target == 0 ? circuit::on_pair(s, Mat2::Identity()) : circuit::on_pair(Mat2::Identity(), s);
}

Mat4 primitive4(const Primitive& p, double theta) {
  return std::cos(0.5 * theta) * Mat4::Identity() - I * std::sin(0.5 * theta) * generator4(p);
}

std::vector<const GateInstance*> flatten(const CircuitSpec& spec) {
  std::vector<const GateInstance*> out;
  for (const auto& layer : spec.layers)
    for (const auto& g : layer.gates) out.push_back(&g);
  return out;
}

// Fused matrix of a gate; an optional shift is added to primitive `shift_prim`.
Mat4 fused4(const GateInstance& g, const ParamVector& theta, int shift_prim = -1, double shift = 0.0) {
  Mat4 u = Mat4::Identity();
  for (std::size_t k = 0; k < g.primitives.size(); ++k) {
    const auto& p = g.primitives[k];
    const double angle = theta[p.slot] + (static_cast<int>(k) == shift_prim ? shift : 0.0);
    u = primitive4(p, angle) * u;
  }
  return u;
}

Mat2 fused2(const GateInstance& g, const ParamVector& theta, int shift_prim = -1, double shift = 0.0) {
  Mat2 u = Mat2::Identity();
  for (std::size_t k = 0; k < g.primitives.size(); ++k) {
    const auto& p = g.primitives[k];
    const double angle = theta[p.slot] + (static_cast<int>(k) == shift_prim ? shift : 0.0);
    u = single_rotation(p.axis, angle) * u;
  }
  return u;
}

void apply_gate(Eigen::VectorXcd& psi, const GateInstance& g, const ParamVector& theta, int shift_prim = -1,
                double shift = 0.0) {
  if (g.two_qubit())
    circuit::apply_2q(psi, g.first, g.second, fused4(g, theta, shift_prim, shift));
  else
    circuit::apply_1q(psi, g.first, fused2(g, theta, shift_prim, shift));
}

Eigen::VectorXcd padded_input(const CircuitSpec& spec, const Eigen::VectorXcd& input) {
  require(input.size() == (Eigen::Index{1} << spec.n_data), ErrorCode::DimensionMismatch,
          "input has " + std::to_string(input.size()) + " amplitudes, circuit expects 2^" +
              std::to_string(spec.n_data));
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << spec.qubits());
  psi.head(input.size()) = input;
  return psi;
}

double loss_sign(int label, double q) {
  const double diff = label - q;
  return diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
}

void check_theta(const CircuitSpec& spec, const ParamVector& theta) {
  require(theta.size() == spec.n_params, ErrorCode::DimensionMismatch,
          "parameter vector has " + std::to_string(theta.size()) + " entries, circuit needs " +
              std::to_string(spec.n_params));
}

// Conv-type two-qubit block: U3 on each qubit, then RXX RYY RZZ. Nine slots from `base`.
GateInstance conv_gate(int a, int b, int base) {
  GateInstance g{a, b, {}};
  for (int t = 0; t < 2; ++t) {
    g.primitives.push_back({Axis::Z, t, base + 3 * t});
    g.primitives.push_back({Axis::Y, t, base + 3 * t + 1});
    g.primitives.push_back({Axis::Z, t, base + 3 * t + 2});
  }
  g.primitives.push_back({Axis::XX, 0, base + 6});
  g.primitives.push_back({Axis::YY, 0, base + 7});
  g.primitives.push_back({Axis::ZZ, 0, base + 8});
  return g;
}

GateInstance pair_gate(int a, int b, int base) {
  return GateInstance{a, b, {{Axis::XX, 0, base}, {Axis::YY, 0, base + 1}, {Axis::ZZ, 0, base + 2}}};
}

GateInstance u3_gate(int q, int base) {
  return GateInstance{q, -1, {{Axis::Z, 0, base}, {Axis::Y, 0, base + 1}, {Axis::Z, 0, base + 2}}};
}

std::vector<std::pair<int, int>> brick_bonds(const std::vector<int>& kept) {
  std::vector<std::pair<int, int>> bonds;
  for (std::size_t i = 0; i + 1 < kept.size(); i += 2) bonds.emplace_back(kept[i], kept[i + 1]);
  for (std::size_t i = 1; i + 1 < kept.size(); i += 2) bonds.emplace_back(kept[i], kept[i + 1]);
  return bonds;
}

void add_labels(std::vector<std::string>& labels, const std::string& prefix, const std::vector<std::string>& names) {
  for (const auto& n : names) labels.push_back(prefix + "." + n);
}

const std::vector<std::string> kConvNames = {"u3a.rz1", "u3a.ry", "u3a.rz2", "u3b.rz1", "u3b.ry",
                                             "u3b.rz2", "rxx",    "ryy",     "rzz"};
const std::vector<std::string> kPairNames = {"rxx", "ryy", "rzz"};
const std::vector<std::string> kU3Names = {"rz1", "ry", "rz2"};

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::GeneralPre: return "general_pre";
    case LayerKind::Conv: return "conv";
    case LayerKind::Pool: return "pool";
    case LayerKind::FullyConnected: return "fully_connected";
  }
  return "?";
}

std::size_t CircuitSpec::gate_count() const {
  std::size_t c = 0;
  for (const auto& l : layers) c += l.gates.size();
  return c;
}

nlohmann::json CircuitSpec::describe() const {
  nlohmann::json layers_json = nlohmann::json::array();
  for (const auto& l : layers) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : l.gates) gates.push_back(g.two_qubit() ? nlohmann::json{g.first, g.second} : nlohmann::json{g.first});
    layers_json.push_back({{"kind", to_string(l.kind)}, {"gates", gates}, {"kept_after", l.kept_after}});
  }
  return {{"n_data", n_data},
          {"n_ancilla", n_ancilla},
          {"readout", readout},
          {"n_params", n_params},
          {"conv_layers_per_block", conv_layers_per_block},
          {"with_pre", with_pre},
          {"layers", layers_json}};
}

CircuitSpec build_architecture(int n_data, int n_l, bool with_pre, int n_ancilla) {
  require(n_data >= 4, ErrorCode::InvalidArgument, "the QCNN needs at least 4 data qubits");
  require(n_l >= 0 && n_ancilla >= 0, ErrorCode::InvalidArgument, "layer and ancilla counts must be non-negative");
  CircuitSpec spec;
  spec.n_data = n_data;
  spec.n_ancilla = n_ancilla;
  spec.conv_layers_per_block = n_l;
  spec.with_pre = with_pre;
  std::vector<int> kept(static_cast<std::size_t>(spec.qubits()));
  for (int q = 0; q < spec.qubits(); ++q) kept[static_cast<std::size_t>(q)] = q;
  int slot = 0;

  if (with_pre) {
    for (int round = 0; round < 2; ++round) {
      LayerSpec layer{LayerKind::GeneralPre, {}, kept};
      for (int q : kept) {
        layer.gates.push_back(u3_gate(q, slot));
        add_labels(spec.slot_labels, "pre" + std::to_string(round) + ".q" + std::to_string(q), kU3Names);
        slot += 3;
      }
      for (auto [a, b] : brick_bonds(kept)) {
        layer.gates.push_back(pair_gate(a, b, slot));
        add_labels(spec.slot_labels, "pre" + std::to_string(round) + ".b" + std::to_string(a) + "_" + std::to_string(b),
                   kPairNames);
        slot += 3;
      }
      spec.layers.push_back(std::move(layer));
    }
  }

  int stage = 0;
  while (kept.size() > 2) {
    const std::string prefix = "stage" + std::to_string(stage);
    for (int l = 0; l < n_l; ++l) {
      LayerSpec layer{LayerKind::Conv, {}, kept};
      for (auto [a, b] : brick_bonds(kept)) layer.gates.push_back(conv_gate(a, b, slot));
      add_labels(spec.slot_labels, prefix + ".conv" + std::to_string(l), kConvNames);
      slot += 9;
      spec.layers.push_back(std::move(layer));
    }
    LayerSpec pool{LayerKind::Pool, {}, {}};
    std::vector<int> next;
    for (std::size_t i = 0; i + 1 < kept.size(); i += 2) {
      pool.gates.push_back(pair_gate(kept[i], kept[i + 1], slot));
      next.push_back(kept[i + 1]);
    }
    if (kept.size() % 2 == 1) next.push_back(kept.back());
    add_labels(spec.slot_labels, prefix + ".pool", kPairNames);
    slot += 3;
    pool.kept_after = next;
    spec.layers.push_back(std::move(pool));
    kept = next;
    ++stage;
  }

  LayerSpec fc{LayerKind::FullyConnected, {}, kept};
  fc.gates.push_back(conv_gate(kept[0], kept[1], slot));
  add_labels(spec.slot_labels, "fc.pair", kConvNames);
  slot += 9;
  fc.gates.push_back(u3_gate(kept[1], slot));
  add_labels(spec.slot_labels, "fc.readout", kU3Names);
  slot += 3;
  spec.layers.push_back(std::move(fc));
  spec.readout = kept[1];
  spec.n_params = slot;
  return spec;
}

CircuitSpec custom_circuit(int qubits, int readout, std::vector<LayerSpec> layers, int n_params) {
  require(qubits >= 1 && readout >= 0 && readout < qubits, ErrorCode::InvalidArgument, "bad custom circuit");
  CircuitSpec spec;
  spec.n_data = qubits;
  spec.n_ancilla = 0;
  spec.readout = readout;
  spec.n_params = n_params;
  spec.layers = std::move(layers);
  for (const auto& l : spec.layers)
    for (const auto& g : l.gates) {
      require(g.first >= 0 && g.first < qubits && g.second < qubits && g.first != g.second, ErrorCode::InvalidArgument,
              "gate qubit out of range");
      for (const auto& p : g.primitives) {
        require(p.slot >= 0 && p.slot < n_params, ErrorCode::InvalidArgument, "primitive slot out of range");
        require(g.two_qubit() || !is_pair_axis(p.axis), ErrorCode::InvalidArgument, "pair rotation on one qubit");
      }
    }
  for (int s = 0; s < n_params; ++s) spec.slot_labels.push_back("slot" + std::to_string(s));
  return spec;
}

CircuitSpec circuit_from_json(const nlohmann::json& j) {
  try {
    auto spec = build_architecture(j.at("n_data").get<int>(), j.at("conv_layers_per_block").get<int>(),
                                   j.at("with_pre").get<bool>(), j.at("n_ancilla").get<int>());
    require(spec.n_params == j.at("n_params").get<int>(), ErrorCode::Config, "stored slot count does not match");
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed architecture record: ") + e.what());
  }
}

ParamVector initial_parameters(const CircuitSpec& spec, std::uint64_t seed) {
  auto rng = make_stream(seed, "qcnn.init");
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  ParamVector theta(spec.n_params);
  for (int k = 0; k < spec.n_params; ++k) theta[k] = angle(rng);
  return theta;
}

Eigen::VectorXcd run_circuit(const CircuitSpec& spec, const ParamVector& theta, const Eigen::VectorXcd& input) {
  check_theta(spec, theta);
  Eigen::VectorXcd psi = padded_input(spec, input);
  for (const auto& layer : spec.layers)
    for (const auto& g : layer.gates) apply_gate(psi, g, theta);
  return psi;
}

double forward(const CircuitSpec& spec, const ParamVector& theta, const Eigen::VectorXcd& input) {
  const auto psi = run_circuit(spec, theta, input);
  return std::clamp(circuit::probability_one(psi, spec.readout) / psi.squaredNorm(), 0.0, 1.0);
}

LossReport loss(const CircuitSpec& spec, const ParamVector& theta, const std::vector<TrainingSample>& batch) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "loss of an empty batch");
  LossReport r;
  r.q.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) r.q[i] = forward(spec, theta, batch[i].state);
  double acc = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) acc += std::abs(batch[i].label - r.q[i]);
  r.loss = acc / static_cast<double>(batch.size());
  return r;
}

Eigen::VectorXd output_gradient_shift(const CircuitSpec& spec, const ParamVector& theta, const Eigen::VectorXcd& input) {
  check_theta(spec, theta);
  const auto gates = flatten(spec);
  const Eigen::VectorXcd start = padded_input(spec, input);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(spec.n_params);
  constexpr double kShift = std::numbers::pi / 2;
  for (std::size_t target = 0; target < gates.size(); ++target) {
    for (std::size_t k = 0; k < gates[target]->primitives.size(); ++k) {
      double plus_minus[2];
      for (int s = 0; s < 2; ++s) {
        Eigen::VectorXcd psi = start;
        for (std::size_t g = 0; g < gates.size(); ++g)
          apply_gate(psi, *gates[g], theta, g == target ? static_cast<int>(k) : -1, s == 0 ? kShift : -kShift);
        plus_minus[s] = circuit::probability_one(psi, spec.readout);
      }
      grad[gates[target]->primitives[k].slot] += 0.5 * (plus_minus[0] - plus_minus[1]);
    }
  }
  return grad;
}

namespace {

// Accumulates coeff * d q / d theta into grad by a backward sweep; returns q.
double adjoint_accumulate(const CircuitSpec& spec, const std::vector<const GateInstance*>& gates,
                          const ParamVector& theta, const Eigen::VectorXcd& input, double coeff_if_known,
                          const std::function<double(double)>& coeff_of_q, Eigen::VectorXd& grad) {
  std::vector<Mat4> u4(gates.size());
  std::vector<Mat2> u2(gates.size());
  Eigen::VectorXcd psi = padded_input(spec, input);
  for (std::size_t g = 0; g < gates.size(); ++g) {
    if (gates[g]->two_qubit()) {
      u4[g] = fused4(*gates[g], theta);
      circuit::apply_2q(psi, gates[g]->first, gates[g]->second, u4[g]);
    } else {
      u2[g] = fused2(*gates[g], theta);
      circuit::apply_1q(psi, gates[g]->first, u2[g]);
    }
  }
  const double q = circuit::probability_one(psi, spec.readout);
  const double coeff = coeff_of_q ? coeff_of_q(q) : coeff_if_known;
  if (coeff == 0.0) return q;

  // lambda = coeff * P1(readout) psi
  Eigen::VectorXcd lambda = psi;
  const std::size_t mask = std::size_t{1} << spec.readout;
  for (std::size_t i = 0; i < static_cast<std::size_t>(lambda.size()); ++i)
    lambda[i] = (i & mask) ? coeff * lambda[i] : Complex{};

  for (std::size_t gi = gates.size(); gi-- > 0;) {
    const auto& g = *gates[gi];
    const std::size_t m = g.primitives.size();
    if (g.two_qubit()) {
      const Mat4 inv = u4[gi].adjoint();
      circuit::apply_2q(psi, g.first, g.second, inv);
      const Mat4 overlap = circuit::pair_overlap(lambda, psi, g.first, g.second);
      // prefix[k] = G_k ... G_1 (after primitive k), suffix via U prefix[k]^-1.
      std::vector<Mat4> prims(m);
      for (std::size_t k = 0; k < m; ++k) prims[k] = primitive4(g.primitives[k], theta[g.primitives[k].slot]);
      Mat4 before = Mat4::Identity();
      std::vector<Mat4> after(m);
      Mat4 acc = Mat4::Identity();
      for (std::size_t k = m; k-- > 0;) {
        after[k] = acc;
        acc = acc * prims[k];
      }
      for (std::size_t k = 0; k < m; ++k) {
        const Mat4 d = after[k] * (-0.5 * I * generator4(g.primitives[k])) * prims[k] * before;
        const Complex val = (d.cwiseProduct(overlap)).sum();
        grad[g.primitives[k].slot] += 2.0 * val.real();
        before = prims[k] * before;
      }
      circuit::apply_2q(lambda, g.first, g.second, inv);
    } else {
      const Mat2 inv = u2[gi].adjoint();
      circuit::apply_1q(psi, g.first, inv);
      const Mat2 overlap = circuit::site_overlap(lambda, psi, g.first);
      std::vector<Mat2> prims(m);
      for (std::size_t k = 0; k < m; ++k) prims[k] = single_rotation(g.primitives[k].axis, theta[g.primitives[k].slot]);
      Mat2 before = Mat2::Identity();
      std::vector<Mat2> after(m);
      Mat2 acc = Mat2::Identity();
      for (std::size_t k = m; k-- > 0;) {
        after[k] = acc;
        acc = acc * prims[k];
      }
      for (std::size_t k = 0; k < m; ++k) {
        const Mat2 d = after[k] * (-0.5 * I * single_pauli(g.primitives[k].axis)) * prims[k] * before;
        const Complex val = (d.cwiseProduct(overlap)).sum();
        grad[g.primitives[k].slot] += 2.0 * val.real();
        before = prims[k] * before;
      }
      circuit::apply_1q(lambda, g.first, inv);
    }
  }
  return q;
}

}  // namespace

Eigen::VectorXd output_gradient_adjoint(const CircuitSpec& spec, const ParamVector& theta,
                                        const Eigen::VectorXcd& input) {
  check_theta(spec, theta);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(spec.n_params);
  adjoint_accumulate(spec, flatten(spec), theta, input, 1.0, nullptr, grad);
  return grad;
}

Eigen::VectorXd gradient(const CircuitSpec& spec, const ParamVector& theta, const std::vector<TrainingSample>& batch) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "gradient of an empty batch");
  check_theta(spec, theta);
  const double inv_d = 1.0 / static_cast<double>(batch.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(spec.n_params);
  for (const auto& s : batch) {
    const double q = forward(spec, theta, s.state);
    const double c = -loss_sign(s.label, q) * inv_d;
    if (c == 0.0) continue;
    grad += c * output_gradient_shift(spec, theta, s.state);
  }
  return grad;
}

Eigen::VectorXd adjoint_gradient(const CircuitSpec& spec, const ParamVector& theta,
                                 const std::vector<TrainingSample>& batch, LossReport* report) {
  require(!batch.empty(), ErrorCode::EmptyBatch, "gradient of an empty batch");
  check_theta(spec, theta);
  const auto gates = flatten(spec);
  const double inv_d = 1.0 / static_cast<double>(batch.size());
  std::vector<Eigen::VectorXd> partial(batch.size());
  std::vector<double> qs(batch.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < batch.size(); ++i) {
    partial[i] = Eigen::VectorXd::Zero(spec.n_params);
    const int label = batch[i].label;
    qs[i] = adjoint_accumulate(spec, gates, theta, batch[i].state, 0.0,
                               [label, inv_d](double q) { return -loss_sign(label, q) * inv_d; }, partial[i]);
  }
  // ordered reduction keeps results independent of the thread schedule
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(spec.n_params);
  for (const auto& p : partial) grad += p;
  if (report) {
    report->q = qs;
    double acc = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) acc += std::abs(batch[i].label - qs[i]);
    report->loss = acc * inv_d;
  }
  return grad;
}

// ---------------------------------------------------------------------------
// Encoding and datasets

QubitEncoding QubitEncoding::all_sites(int n) {
  QubitEncoding e;
  e.n_sites = n;
  for (int s = 0; s < n; ++s) e.sites.push_back(s);
  return e;
}

QubitEncoding QubitEncoding::bulk_sites(int n) {
  QubitEncoding e;
  e.n_sites = n;
  for (int s = 1; s + 1 < n; ++s) e.sites.push_back(s);
  return e;
}

namespace {

Bits outside_mask(const QubitEncoding& enc) {
  Bits inside = 0;
  for (int s : enc.sites) inside |= Bits{1} << s;
  const Bits all = (enc.n_sites >= 32) ? ~Bits{0} : ((Bits{1} << enc.n_sites) - 1);
  return all & ~inside;
}

std::size_t encoded_index(Bits c, const QubitEncoding& enc) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < enc.sites.size(); ++k) idx |= static_cast<std::size_t>((c >> enc.sites[k]) & 1u) << k;
  return idx;
}

}  // namespace

Eigen::VectorXcd encode(const StateVector& psi, const QubitEncoding& enc) {
  require(psi.basis().sites() == enc.n_sites, ErrorCode::DimensionMismatch, "encoding built for another chain length");
  const Bits outside = outside_mask(enc);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(Eigen::Index{1} << enc.data_qubits());
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    const Complex a = psi.amplitudes()[j];
    if (a == Complex{}) continue;
    const Bits c = psi.basis().config(j);
    require((c & outside) == 0, ErrorCode::Incompatible, "state has support on sites outside the qubit encoding");
    out[static_cast<Eigen::Index>(encoded_index(c, enc))] = a;
  }
  return out;
}

Eigen::MatrixXcd encode_columns(const EigenSet& eigs, const QubitEncoding& enc) {
  const auto& basis = *eigs.basis;
  require(basis.sites() == enc.n_sites, ErrorCode::DimensionMismatch, "encoding built for another chain length");
  const Bits outside = outside_mask(enc);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(basis.size()));
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    require((basis.config(j) & outside) == 0, ErrorCode::Incompatible, "basis has configurations outside the encoding");
    rows[static_cast<std::size_t>(j)] = static_cast<Eigen::Index>(encoded_index(basis.config(j), enc));
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(Eigen::Index{1} << enc.data_qubits(), eigs.size());
  for (Eigen::Index c = 0; c < eigs.size(); ++c)
    for (Eigen::Index j = 0; j < basis.size(); ++j) out(rows[static_cast<std::size_t>(j)], c) = eigs.states(j, c);
  return out;
}

DatasetSource make_source(const EigenSet& eigs, const std::vector<Eigen::Index>& scar_indices,
                          const QubitEncoding& enc) {
  require(!scar_indices.empty(), ErrorCode::NoScars, "dataset needs at least one scar index");
  DatasetSource src;
  src.encoded = encode_columns(eigs, enc);
  std::vector<bool> is_scar(static_cast<std::size_t>(eigs.size()), false);
  for (auto j : scar_indices) {
    require(j >= 0 && j < eigs.size(), ErrorCode::InvalidArgument, "scar index out of range");
    is_scar[static_cast<std::size_t>(j)] = true;
  }
  for (Eigen::Index j = 0; j < eigs.size(); ++j)
    (is_scar[static_cast<std::size_t>(j)] ? src.scars : src.others).push_back(j);
  return src;
}

std::vector<TrainingSample> make_dataset(const DatasetSource& source, int d, std::mt19937_64& rng) {
  require(!source.scars.empty(), ErrorCode::NoScars, "dataset needs at least one scar state");
  require(d >= 2 && d % 2 == 0, ErrorCode::InvalidArgument, "dataset size must be a positive even number");
  require(!source.others.empty(), ErrorCode::InvalidArgument, "dataset needs non-scar states");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_other(0, source.others.size() - 1);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> how_many(2, 4);

  std::vector<TrainingSample> out;
  out.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d / 2; ++i) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(source.encoded.rows());
    for (auto j : source.scars) v += Complex(gauss(rng), gauss(rng)) * source.encoded.col(j);
    out.push_back({v.normalized(), 1});
  }
  for (int i = 0; i < d / 2; ++i) {
    if (coin(rng) || source.others.size() == 1) {
      out.push_back({source.encoded.col(source.others[pick_other(rng)]), 0});
      continue;
    }
    const int k = std::min<int>(how_many(rng), static_cast<int>(source.others.size()));
    std::vector<Eigen::Index> chosen;
    while (static_cast<int>(chosen.size()) < k) {
      const auto j = source.others[pick_other(rng)];
      if (std::find(chosen.begin(), chosen.end(), j) == chosen.end()) chosen.push_back(j);
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(source.encoded.rows());
    for (auto j : chosen) v += Complex(gauss(rng), gauss(rng)) * source.encoded.col(j);
    out.push_back({v.normalized(), 0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Optimization

std::string to_string(OptimizerConfig::Kind kind) {
  return kind == OptimizerConfig::Kind::Adam ? "adam" : "gradient_descent";
}

OptimizerConfig::Kind parse_optimizer(const std::string& text) {
  if (text == "gd" || text == "gradient_descent") return OptimizerConfig::Kind::GradientDescent;
  if (text == "adam") return OptimizerConfig::Kind::Adam;
  throw Error(ErrorCode::Config, "unknown optimizer '" + text + "'");
}

void optimizer_update(const OptimizerConfig& config, OptimizerState& state, ParamVector& theta,
                      const Eigen::VectorXd& grad) {
  ++state.step;
  if (config.kind == OptimizerConfig::Kind::GradientDescent) {
    theta -= config.learning_rate * grad;
    return;
  }
  if (state.first_moment.size() != theta.size()) {
    state.first_moment = Eigen::VectorXd::Zero(theta.size());
    state.second_moment = Eigen::VectorXd::Zero(theta.size());
  }
  state.first_moment = config.beta1 * state.first_moment + (1.0 - config.beta1) * grad;
  state.second_moment = config.beta2 * state.second_moment + (1.0 - config.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (Eigen::Index k = 0; k < theta.size(); ++k)
    theta[k] -= config.learning_rate * (state.first_moment[k] / c1) /
                (std::sqrt(state.second_moment[k] / c2) + config.epsilon);
}

TrainResult train(const CircuitSpec& spec, ParamVector theta, const BatchSource& batches,
                  const OptimizerConfig& optimizer, long iterations, OptimizerState state, long start) {
  check_theta(spec, theta);
  require(iterations >= 0, ErrorCode::InvalidArgument, "iteration count must be non-negative");
  TrainResult out;
  out.trace.reserve(static_cast<std::size_t>(iterations));
  for (long t = start; t < start + iterations; ++t) {
    const auto batch = batches(t);
    LossReport report;
    const auto grad = adjoint_gradient(spec, theta, batch, &report);
    report.iteration = t;
    out.trace.push_back(std::move(report));
    optimizer_update(optimizer, state, theta, grad);
  }
  out.theta = std::move(theta);
  out.optimizer = std::move(state);
  return out;
}

double converged_loss(const std::vector<LossReport>& trace, std::size_t window) {
  require(!trace.empty(), ErrorCode::TooFew, "empty loss trace");
  const std::size_t w = std::min(window, trace.size());
  double acc = 0.0;
  for (std::size_t i = trace.size() - w; i < trace.size(); ++i) acc += trace[i].loss;
  return acc / static_cast<double>(w);
}

std::size_t Classification::marked_count() const {
  return static_cast<std::size_t>(std::count(marked.begin(), marked.end(), true));
}

Classification classify_spectrum(const CircuitSpec& spec, const ParamVector& theta, const EigenSet& eigs,
                                 const QubitEncoding& enc) {
  check_theta(spec, theta);
  const auto encoded = encode_columns(eigs, enc);
  Classification c;
  c.q.resize(static_cast<std::size_t>(eigs.size()));
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index j = 0; j < eigs.size(); ++j) c.q[static_cast<std::size_t>(j)] = forward(spec, theta, encoded.col(j));
  c.marked.resize(c.q.size());
  for (std::size_t j = 0; j < c.q.size(); ++j) c.marked[j] = is_marked(c.q[j]);
  return c;
}

}  // namespace scarlab
