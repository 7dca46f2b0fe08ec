#include "scarlab/mitigation.hpp"

#include <algorithm>
#include <cmath>

#include "scarlab/circuit.hpp"
#include "scarlab/error.hpp"
#include "scarlab/models.hpp"
#include "scarlab/random.hpp"

namespace scarlab {

namespace {

using Index = Eigen::Index;

NamedGate make_gate(std::string name, std::vector<int> qubits, Eigen::MatrixXcd matrix) {
  return NamedGate{std::move(name), std::move(qubits), std::move(matrix)};
}

Eigen::MatrixXcd controlled_swap() {
  // qubits (control, a, b): swap a and b when the control is set
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(8, 8);
  for (int j = 0; j < 8; ++j) {
    int i = j;
    if (j & 1) i = (j & 1) | ((j & 2) << 1) | ((j & 4) >> 1);
    m(i, j) = 1.0;
  }
  return m;
}

void apply_local(Eigen::VectorXcd& psi, const std::vector<int>& qubits, const Eigen::MatrixXcd& u) {
  const int k = static_cast<int>(qubits.size());
  const Index local = Index{1} << k;
  Index mask = 0;
  for (int q : qubits) mask |= Index{1} << q;
  std::vector<Index> offsets(static_cast<std::size_t>(local), 0);
  for (Index a = 0; a < local; ++a)
    for (int b = 0; b < k; ++b)
      if ((a >> b) & 1) offsets[static_cast<std::size_t>(a)] |= Index{1} << qubits[static_cast<std::size_t>(b)];
  Eigen::VectorXcd in(local);
  for (Index base = 0; base < psi.size(); ++base) {
    if (base & mask) continue;
    for (Index a = 0; a < local; ++a) in[a] = psi[base + offsets[static_cast<std::size_t>(a)]];
    const Eigen::VectorXcd out = u * in;
    for (Index a = 0; a < local; ++a) psi[base + offsets[static_cast<std::size_t>(a)]] = out[a];
  }
}

// Runs the gates, inserting a random Pauli on each touched qubit of a multi-qubit gate with
// probability p.
void run_with_errors(const std::vector<NamedGate>& gates, Eigen::VectorXcd& psi, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> which(0, 2);
  const circuit::Mat2 paulis[3] = {circuit::pauli_x(), circuit::pauli_y(), circuit::pauli_z()};
  for (const auto& g : gates) {
    apply_local(psi, g.qubits, g.matrix);
    if (!g.multi_qubit() || p <= 0.0) continue;
    for (int q : g.qubits) {
      if (coin(rng) < p) circuit::apply_1q(psi, q, paulis[which(rng)]);
    }
  }
}

struct Estimate {
  double mean = 0.0;
  double stderr = 0.0;
};

// Per-trajectory exact probabilities, optionally replaced by binomial shot counts.
Estimate summarize(const std::vector<double>& probs, long shots, std::uint64_t seed, std::string_view stream) {
  const auto t_count = static_cast<long>(probs.size());
  std::vector<double> est(probs.size());
  double hits = 0.0;
  for (long t = 0; t < t_count; ++t) {
    const double p = std::clamp(probs[static_cast<std::size_t>(t)], 0.0, 1.0);
    if (shots == 0) {
      est[static_cast<std::size_t>(t)] = p;
      continue;
    }
    const long mine = shots / t_count + (t < shots % t_count ? 1 : 0);
    auto rng = make_stream(seed, stream, static_cast<std::uint64_t>(t));
    const long k = std::binomial_distribution<long>(mine, p)(rng);
    hits += static_cast<double>(k);
    est[static_cast<std::size_t>(t)] = static_cast<double>(k) / static_cast<double>(mine);
  }
  Estimate e;
  double sum = 0.0;
  for (double v : est) sum += v;
  e.mean = shots == 0 ? sum / t_count : hits / static_cast<double>(shots);
  if (t_count > 1) {
    const double avg = sum / t_count;
    double var = 0.0;
    for (double v : est) var += (v - avg) * (v - avg);
    e.stderr = std::sqrt(var / (t_count - 1) / t_count);
  }
  return e;
}

void check_options(const NoisyCircuit& c, const NoisyRunOptions& o) {
  require(o.trajectories >= 1, ErrorCode::InvalidArgument, "need at least one trajectory");
  require(o.shots == 0 || o.shots >= o.trajectories, ErrorCode::InvalidArgument,
          "shots must be zero or at least one per trajectory");
  require(c.error_rate >= 0.0 && c.error_rate < 1.0, ErrorCode::InvalidArgument, "error rate must lie in [0, 1)");
  require(c.fold >= 0, ErrorCode::InvalidArgument, "fold factor must be non-negative");
}

}  // namespace

NamedGate dagger(const NamedGate& gate) {
  return make_gate(gate.name + "_dg", gate.qubits, gate.matrix.adjoint());
}

std::vector<NamedGate> NoisyCircuit::folded_gates() const {
  std::vector<NamedGate> inverse;
  inverse.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) inverse.push_back(dagger(*it));
  std::vector<NamedGate> out = gates;
  for (int r = 0; r < fold; ++r) {
    out.insert(out.end(), inverse.begin(), inverse.end());
    out.insert(out.end(), gates.begin(), gates.end());
  }
  return out;
}

std::size_t NoisyCircuit::multi_qubit_count() const {
  return static_cast<std::size_t>(std::count_if(gates.begin(), gates.end(), [](const NamedGate& g) { return g.multi_qubit(); }));
}

NoisyCircuit prep_s1_circuit(int n) {
  require(n >= 4, ErrorCode::InvalidArgument, "preparation circuit needs n >= 4");
  NoisyCircuit c;
  c.sites = n;
  const int last = n - 2;
  const int anc = n;
  c.seed_site = last;
  c.gates.push_back(make_gate("x", {last}, circuit::pauli_x()));
  // sites 1..k still share the excitation with amplitude sqrt(k / (n-2)) on site k
  for (int k = last; k >= 2; --k) {
    const double theta = 2.0 * std::acos(std::sqrt(1.0 / k));
    c.gates.push_back(make_gate("cry", {k, anc}, circuit::controlled(circuit::ry(theta))));
    c.gates.push_back(make_gate("cswap", {anc, k, k - 1}, controlled_swap()));
    c.gates.push_back(make_gate("cx", {k - 1, anc}, circuit::controlled(circuit::pauli_x())));
  }
  // raising operator sign (-1)^(s+1) for 0-based site s
  for (int s = 1; s <= last; s += 1)
    if (s % 2 == 0) c.gates.push_back(make_gate("z", {s}, circuit::pauli_z()));
  return c;
}

Eigen::VectorXcd apply_gates(const std::vector<NamedGate>& gates, Eigen::VectorXcd psi) {
  for (const auto& g : gates) apply_local(psi, g.qubits, g.matrix);
  return psi;
}

Eigen::MatrixXcd circuit_unitary(const std::vector<NamedGate>& gates, int qubits) {
  require(qubits <= 12, ErrorCode::TooLarge, "dense circuit unitary limited to 12 qubits");
  const Index dim = Index{1} << qubits;
  Eigen::MatrixXcd u(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
    e[j] = 1.0;
    u.col(j) = apply_gates(gates, e);
  }
  return u;
}

Eigen::VectorXcd s1_register(int n) {
  const Eigen::VectorXcd chain = exact_scar(1, n).state.embed_full();
  Eigen::VectorXcd reg = Eigen::VectorXcd::Zero(chain.size() * 2);
  reg.head(chain.size()) = chain;
  return reg;
}

double register_readout(const ReadoutModel& model, const Eigen::VectorXcd& reg, int sites) {
  const int qubits = circuit::qubit_count(reg);
  const auto& enc = model.encoding;
  require(enc.n_sites == sites && qubits > sites, ErrorCode::DimensionMismatch, "register does not match the encoding");
  Index data_mask = 0;
  for (int s : enc.sites) data_mask |= Index{1} << s;
  const Index data_dim = Index{1} << enc.data_qubits();
  std::vector<Eigen::VectorXcd> parts;  // one data vector per environment configuration
  std::vector<Index> env_keys;
  for (Index i = 0; i < reg.size(); ++i) {
    if (reg[i] == Complex(0.0)) continue;
    const Index env = i & ~data_mask;
    auto it = std::find(env_keys.begin(), env_keys.end(), env);
    std::size_t slot = static_cast<std::size_t>(it - env_keys.begin());
    if (it == env_keys.end()) {
      env_keys.push_back(env);
      parts.push_back(Eigen::VectorXcd::Zero(data_dim));
    }
    Index local = 0;
    for (int k = 0; k < enc.data_qubits(); ++k)
      if ((i >> enc.sites[static_cast<std::size_t>(k)]) & 1) local |= Index{1} << k;
    parts[slot][local] = reg[i];
  }
  double total = 0.0;
  double weight_sum = 0.0;
  for (const auto& v : parts) {
    const double w = v.squaredNorm();
    if (w == 0.0) continue;
    total += w * forward(model.spec, model.theta, v);
    weight_sum += w;
  }
  require(weight_sum > 0.0, ErrorCode::ZeroState, "empty register state");
  return total / weight_sum;
}

NoisySummary run_noisy(const NoisyCircuit& circuit, const NoisyRunOptions& options, const ReadoutModel* readout) {
  check_options(circuit, options);
  const auto gates = circuit.folded_gates();
  const Eigen::VectorXcd target = s1_register(circuit.sites);
  const Index dim = Index{1} << circuit.qubits();
  const auto t_count = static_cast<std::ptrdiff_t>(options.trajectories);
  std::vector<double> fid(static_cast<std::size_t>(t_count)), anc(fid.size()), p1(fid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < t_count; ++t) {
    auto rng = make_stream(options.seed, "mitigation.trajectory", static_cast<std::uint64_t>(t));
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi[0] = 1.0;
    run_with_errors(gates, psi, circuit.error_rate, rng);
    const auto i = static_cast<std::size_t>(t);
    fid[i] = std::norm(target.dot(psi));
    anc[i] = circuit::probability_one(psi, circuit.ancilla());
    if (readout) p1[i] = register_readout(*readout, psi, circuit.sites);
  }
  NoisySummary s;
  s.error_rate = circuit.error_rate;
  s.fold = circuit.fold;
  s.trajectories = options.trajectories;
  s.shots = options.shots;
  const auto f = summarize(fid, 0, options.seed, "");
  s.fidelity = f.mean;
  s.fidelity_stderr = f.stderr;
  s.ancilla_one = summarize(anc, 0, options.seed, "").mean;
  if (readout) {
    const auto e = summarize(p1, options.shots, options.seed, "mitigation.shots");
    s.p1 = e.mean;
    s.p1_stderr = e.stderr;
  }
  return s;
}

ProxyEstimate fidelity_proxy(const NoisyCircuit& circuit, const NoisyRunOptions& options) {
  check_options(circuit, options);
  const auto gates = circuit.folded_gates();
  const NamedGate flip = make_gate("x", {circuit.seed_site}, circuit::pauli_x());
  // exact inverse of U X_seed
  std::vector<NamedGate> undo;
  for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) undo.push_back(dagger(*it));
  undo.push_back(flip);
  const Index dim = Index{1} << circuit.qubits();
  const auto t_count = static_cast<std::ptrdiff_t>(options.trajectories);
  std::vector<double> zero(static_cast<std::size_t>(t_count));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < t_count; ++t) {
    auto rng = make_stream(options.seed, "mitigation.proxy", static_cast<std::uint64_t>(t));
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi[0] = 1.0;
    apply_local(psi, flip.qubits, flip.matrix);
    run_with_errors(gates, psi, circuit.error_rate, rng);
    psi = apply_gates(undo, std::move(psi));
    zero[static_cast<std::size_t>(t)] = std::norm(psi[0]);
  }
  const auto e = summarize(zero, options.shots, options.seed, "mitigation.proxy_shots");
  return {e.mean, e.stderr};
}

std::string to_string(FitFamily family) { return family == FitFamily::LogLog ? "loglog" : "linear"; }

FitFamily parse_fit_family(const std::string& text) {
  if (text == "loglog") return FitFamily::LogLog;
  if (text == "linear") return FitFamily::Linear;
  throw Error(ErrorCode::InvalidArgument, "unknown fit family '" + text + "'");
}

nlohmann::json ExtrapolationFit::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < points.size(); ++i)
    pts.push_back({{"x", points[i].x}, {"y", points[i].y}, {"y_err", points[i].y_err}, {"used", bool(used[i])}});
  return {{"family", to_string(family)},
          {"coefficients", {{"offset", offset}, {"slope", slope}}},
          {"intercept", intercept},
          {"stderr", stderr},
          {"points", pts}};
}

ExtrapolationFit zne_fit(const std::vector<FitPoint>& points, FitFamily family, double baseline, double knee_sigmas) {
  require(points.size() >= 3, ErrorCode::TooFew, "extrapolation needs at least 3 points");
  ExtrapolationFit fit;
  fit.family = family;
  fit.points = points;
  fit.used.assign(points.size(), true);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (family == FitFamily::LogLog) {
      require(p.x > 0.0 && p.y > 0.0, ErrorCode::InvalidArgument, "log-log fit needs positive data");
      xs.push_back(std::log(p.x));
      ys.push_back(std::log(p.y));
    } else if (std::abs(p.y - baseline) > knee_sigmas * p.y_err) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    } else {
      fit.used[i] = false;
    }
  }
  require(xs.size() >= 3, ErrorCode::TooFew, "fewer than 3 points before saturation");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, sx2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    sx2 += xs[i] * xs[i];
  }
  require(sxx > 1e-14 * std::max(1.0, sx2), ErrorCode::Degenerate, "all abscissae coincide");
  fit.slope = sxy / sxx;
  fit.offset = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.offset - fit.slope * xs[i];
    ssr += r * r;
  }
  // both families extrapolate to zero in the fitted abscissa (ln 1 = 0, or m = 0)
  const double se_offset = std::sqrt(ssr / (n - 2.0) * sx2 / (n * sxx));
  if (family == FitFamily::LogLog) {
    fit.intercept = std::exp(fit.offset);
    fit.stderr = fit.intercept * se_offset;
  } else {
    fit.intercept = fit.offset;
    fit.stderr = se_offset;
  }
  return fit;
}

}  // namespace scarlab
