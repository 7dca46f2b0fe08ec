#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "scarlab/models.hpp"
#include "scarlab/qcnn.hpp"
#include "scarlab/random.hpp"
#include "support.hpp"

using namespace scarlab;

namespace {

const Complex I(0.0, 1.0);

// Full-register matrix of a Pauli word, built entry by entry.
Eigen::MatrixXcd pauli_word(int qubits, const std::vector<std::pair<int, char>>& factors) {
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    Eigen::Index i = j;
    Complex amp = 1.0;
    for (auto [q, p] : factors) {
      const int b = static_cast<int>((j >> q) & 1);
      if (p == 'X' || p == 'Y') i ^= Eigen::Index{1} << q;
      if (p == 'Y') amp *= b ? -I : I;
      if (p == 'Z') amp *= b ? -1.0 : 1.0;
    }
    m(i, j) = amp;
  }
  return m;
}

Eigen::MatrixXcd dense_unitary(const CircuitSpec& spec, const ParamVector& theta) {
  const int nq = spec.qubits();
  const Eigen::Index dim = Eigen::Index{1} << nq;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& layer : spec.layers)
    for (const auto& g : layer.gates)
      for (const auto& p : g.primitives) {
        std::vector<std::pair<int, char>> word;
        const int tq = p.target == 0 ? g.first : g.second;
        switch (p.axis) {
          case Axis::X: word = {{tq, 'X'}}; break;
          case Axis::Y: word = {{tq, 'Y'}}; break;
          case Axis::Z: word = {{tq, 'Z'}}; break;
          case Axis::XX: word = {{g.first, 'X'}, {g.second, 'X'}}; break;
          case Axis::YY: word = {{g.first, 'Y'}, {g.second, 'Y'}}; break;
          case Axis::ZZ: word = {{g.first, 'Z'}, {g.second, 'Z'}}; break;
        }
        const double a = theta[p.slot];
        const Eigen::MatrixXcd r = std::cos(0.5 * a) * Eigen::MatrixXcd::Identity(dim, dim) -
                                   I * std::sin(0.5 * a) * pauli_word(nq, word);
        u = r * u;
      }
  return u;
}

double oracle_q(const CircuitSpec& spec, const ParamVector& theta, const Eigen::VectorXcd& input) {
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(Eigen::Index{1} << spec.qubits());
  full.head(input.size()) = input;
  const Eigen::VectorXcd out = dense_unitary(spec, theta) * full;
  double p = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if ((i >> spec.readout) & 1) p += std::norm(out[i]);
  return p;
}

ParamVector random_theta(int n, std::mt19937_64& rng) {
  ParamVector t(n);
  for (int k = 0; k < n; ++k) t[k] = testing::uniform(rng, -std::numbers::pi, std::numbers::pi);
  return t;
}

Eigen::VectorXcd random_input(int n_data, std::mt19937_64& rng) {
  return testing::random_vector(Eigen::Index{1} << n_data, rng).normalized();
}

// Random circuit with random tying: qubits in [2, max_qubits], slots shared across gates.
CircuitSpec random_circuit(std::mt19937_64& rng, int max_qubits) {
  std::uniform_int_distribution<int> nq_dist(2, max_qubits);
  const int nq = nq_dist(rng);
  const int n_params = std::uniform_int_distribution<int>(3, 10)(rng);
  std::uniform_int_distribution<int> qd(0, nq - 1), sd(0, n_params - 1), ad(0, 5), gd(4, 10), pd(1, 4);
  std::vector<LayerSpec> layers(1);
  const int gates = gd(rng);
  for (int g = 0; g < gates; ++g) {
    GateInstance gi;
    gi.first = qd(rng);
    if (std::bernoulli_distribution(0.6)(rng)) {
      do gi.second = qd(rng);
      while (gi.second == gi.first);
    }
    const int prims = pd(rng);
    for (int k = 0; k < prims; ++k) {
      int a = ad(rng);
      if (!gi.two_qubit()) a %= 3;
      gi.primitives.push_back({static_cast<Axis>(a), std::uniform_int_distribution<int>(0, gi.two_qubit())(rng), sd(rng)});
    }
    layers[0].gates.push_back(gi);
  }
  return custom_circuit(nq, qd(rng), layers, n_params);
}

double fd_q(const CircuitSpec& spec, ParamVector theta, const Eigen::VectorXcd& input, int k, double h) {
  const double t0 = theta[k];
  theta[k] = t0 + h;
  const double plus = forward(spec, theta, input);
  theta[k] = t0 - h;
  const double minus = forward(spec, theta, input);
  return (plus - minus) / (2 * h);
}

CircuitSpec single_rotation_circuit(Axis axis) {
  LayerSpec layer{LayerKind::FullyConnected, {GateInstance{0, -1, {{axis, 0, 0}}}}, {0}};
  return custom_circuit(1, 0, {layer}, 1);
}

}  // namespace

TEST_CASE("architecture slot counts follow 12 + 3 (9 n_l + 3)") {
  CHECK(build_architecture(12, 2).n_params == 75);
  CHECK(build_architecture(12, 3).n_params == 102);
  CHECK(build_architecture(12, 0).n_params == 21);
  CHECK(build_architecture(10, 2).n_params == 75);
  CHECK(build_architecture(10, 3).n_params == 102);
  CHECK_THROWS_AS(build_architecture(3, 2), Error);
  const auto pre = build_architecture(10, 2, true);
  CHECK(pre.n_params > 75);
  CHECK(pre.layers.front().kind == LayerKind::GeneralPre);
}

TEST_CASE("architecture wiring invariants") {
  for (int n_data : {4, 5, 6, 7, 10, 12}) {
    for (int n_l : {0, 1, 2, 3}) {
      const auto spec = build_architecture(n_data, n_l, n_data % 2 == 0);
      CAPTURE(n_data);
      CAPTURE(n_l);
      CHECK(spec.slot_labels.size() == static_cast<std::size_t>(spec.n_params));
      std::set<int> used;
      std::set<int> pooled;
      for (const auto& layer : spec.layers) {
        for (const auto& g : layer.gates) {
          CHECK(pooled.count(g.first) == 0);
          if (g.two_qubit()) CHECK(pooled.count(g.second) == 0);
          for (const auto& p : g.primitives) used.insert(p.slot);
        }
        if (layer.kind == LayerKind::Pool)
          for (const auto& g : layer.gates) pooled.insert(g.first);
        if (layer.kind == LayerKind::Conv) {
          // every gate of a conv layer carries the same slot sequence
          for (const auto& g : layer.gates)
            for (std::size_t k = 0; k < g.primitives.size(); ++k)
              CHECK(g.primitives[k].slot == layer.gates.front().primitives[k].slot);
        }
      }
      CHECK(used.size() == static_cast<std::size_t>(spec.n_params));
      CHECK(pooled.count(spec.readout) == 0);
      CHECK(spec.layers.back().kind == LayerKind::FullyConnected);
      CHECK(spec.layers.back().kept_after.size() == 2);
    }
  }
}

TEST_CASE("architecture descriptor round-trips through JSON") {
  const auto spec = build_architecture(10, 3, true);
  const auto back = circuit_from_json(nlohmann::json::parse(spec.describe().dump()));
  CHECK(back.n_params == spec.n_params);
  CHECK(back.describe() == spec.describe());
  auto broken = spec.describe();
  broken["n_params"] = 7;
  CHECK_THROWS_AS(circuit_from_json(broken), Error);
  CHECK_THROWS_AS(circuit_from_json(nlohmann::json::object()), Error);
}

TEST_CASE("forward: identity circuit and a single flip") {
  const auto spec = build_architecture(4, 2);
  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(16);
  zero[0] = 1.0;
  CHECK(forward(spec, ParamVector::Zero(spec.n_params), zero) == 0.0);

  LayerSpec flip{LayerKind::FullyConnected, {GateInstance{2, -1, {{Axis::X, 0, 0}}}}, {2}};
  const auto one = custom_circuit(3, 2, {flip}, 1);
  Eigen::VectorXcd in = Eigen::VectorXcd::Zero(8);
  in[0] = 1.0;
  CHECK(forward(one, ParamVector::Constant(1, std::numbers::pi), in) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(forward(spec, ParamVector::Zero(spec.n_params), in), Error);
  CHECK_THROWS_AS(forward(spec, ParamVector::Zero(3), zero), Error);
}

TEST_CASE("forward agrees with a dense-unitary oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const auto spec = build_architecture(4 + trial % 3, trial % 3, trial % 2 == 1);
    const auto theta = random_theta(spec.n_params, rng);
    const auto in = random_input(spec.n_data, rng);
    CHECK(std::abs(forward(spec, theta, in) - oracle_q(spec, theta, in)) < 1e-10);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = random_circuit(rng, 5);
    const auto theta = random_theta(spec.n_params, rng);
    const auto in = random_input(spec.n_data, rng);
    CHECK(std::abs(forward(spec, theta, in) - oracle_q(spec, theta, in)) < 1e-10);
  }
}

TEST_CASE("readout marginals sum to one and q stays in [0, 1]") {
  std::mt19937_64 rng(12);
  const auto spec = build_architecture(6, 2, true);
  for (int trial = 0; trial < 5; ++trial) {
    const auto theta = random_theta(spec.n_params, rng);
    const auto out = run_circuit(spec, theta, random_input(6, rng));
    const double p1 = circuit::probability_one(out, spec.readout);
    double p0 = 0.0;
    for (Eigen::Index i = 0; i < out.size(); ++i)
      if (!((i >> spec.readout) & 1)) p0 += std::norm(out[i]);
    CHECK(std::abs(p0 + p1 - 1.0) < 1e-12);
    CHECK(p1 >= 0.0);
    CHECK(p1 <= 1.0);
  }
}

TEST_CASE("single rotation: q = sin^2(theta/2)") {
  const auto spec = single_rotation_circuit(Axis::X);
  Eigen::VectorXcd in(2);
  in << 1.0, 0.0;
  for (double t : {-2.5, -0.3, 0.0, 0.7, 1.9, 3.0}) {
    ParamVector theta = ParamVector::Constant(1, t);
    CHECK(forward(spec, theta, in) == doctest::Approx(std::pow(std::sin(0.5 * t), 2)).epsilon(1e-14));
    CHECK(output_gradient_shift(spec, theta, in)[0] == doctest::Approx(0.5 * std::sin(t)).epsilon(1e-13));
    CHECK(output_gradient_adjoint(spec, theta, in)[0] == doctest::Approx(0.5 * std::sin(t)).epsilon(1e-13));
    if (t != 0.0) {
      // label 1: L = 1 - q, dL = -sin(theta)/2
      const std::vector<TrainingSample> batch = {{in, 1}};
      CHECK(gradient(spec, theta, batch)[0] == doctest::Approx(-0.5 * std::sin(t)).epsilon(1e-13));
    }
  }
}

TEST_CASE("parameter-shift gradient matches finite differences and the adjoint sweep") {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const auto spec = trial % 2 ? random_circuit(rng, 8) : build_architecture(4 + trial % 4, 1 + trial % 3, trial % 4 == 0);
    const auto theta = random_theta(spec.n_params, rng);
    const auto in = random_input(spec.n_data, rng);
    const auto ps = output_gradient_shift(spec, theta, in);
    const auto adj = output_gradient_adjoint(spec, theta, in);
    for (int k = 0; k < spec.n_params; ++k) {
      const double fd5 = fd_q(spec, theta, in, k, 1e-5);
      const double fd6 = fd_q(spec, theta, in, k, 1e-6);
      CHECK(std::abs(ps[k] - fd5) < 1e-6);
      CHECK(std::abs(ps[k] - fd6) < 1e-6);
      CHECK(std::abs(ps[k] - adj[k]) < 1e-10);
    }
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("loss gradient: shift rule, adjoint and finite differences of the loss") {
  std::mt19937_64 rng(14);
  const auto spec = build_architecture(5, 1);
  std::vector<TrainingSample> batch;
  for (int i = 0; i < 6; ++i) batch.push_back({random_input(5, rng), i % 2});
  const auto theta = random_theta(spec.n_params, rng);
  const auto ps = gradient(spec, theta, batch);
  LossReport rep;
  const auto adj = adjoint_gradient(spec, theta, batch, &rep);
  CHECK(rep.loss == doctest::Approx(loss(spec, theta, batch).loss).epsilon(1e-13));
  for (int k = 0; k < spec.n_params; ++k) {
    ParamVector tp = theta, tm = theta;
    tp[k] += 1e-5;
    tm[k] -= 1e-5;
    const double fd = (loss(spec, tp, batch).loss - loss(spec, tm, batch).loss) / 2e-5;
    CHECK(std::abs(ps[k] - fd) < 1e-6);
    CHECK(std::abs(ps[k] - adj[k]) < 1e-10);
  }
}

TEST_CASE("gates after the readout decouples carry zero gradient") {
  // the rotation on qubit 0 acts after everything and never reaches the readout
  LayerSpec body{LayerKind::Conv,
                 {GateInstance{0, 1, {{Axis::XX, 0, 0}, {Axis::Y, 1, 1}}}, GateInstance{0, -1, {{Axis::Y, 0, 2}}}},
                 {0, 1}};
  const auto spec = custom_circuit(2, 1, {body}, 3);
  std::mt19937_64 rng(15);
  const std::vector<TrainingSample> batch = {{random_input(2, rng), 0}, {random_input(2, rng), 1}};
  const auto theta = random_theta(3, rng);
  CHECK(gradient(spec, theta, batch)[2] == 0.0);
  CHECK(std::abs(adjoint_gradient(spec, theta, batch)[2]) < 1e-15);
}

TEST_CASE("loss values and empty batches") {
  LayerSpec half{LayerKind::FullyConnected, {GateInstance{0, -1, {{Axis::Y, 0, 0}}}}, {0}};
  const auto spec = custom_circuit(1, 0, {half}, 1);
  Eigen::VectorXcd zero(2), one(2);
  zero << 1.0, 0.0;
  one << 0.0, 1.0;
  // identity: q = y for computational inputs
  CHECK(loss(spec, ParamVector::Zero(1), {{zero, 0}, {one, 1}}).loss == 0.0);
  // q = 1/2 for |0>
  const auto rep = loss(spec, ParamVector::Constant(1, std::numbers::pi / 2), {{zero, 0}, {zero, 1}});
  CHECK(rep.loss == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rep.q.size() == 2);
  CHECK_THROWS_AS(loss(spec, ParamVector::Zero(1), {}), Error);
  CHECK_THROWS_AS(gradient(spec, ParamVector::Zero(1), {}), Error);
  CHECK_THROWS_AS(adjoint_gradient(spec, ParamVector::Zero(1), {}), Error);
  // q = y exactly: the subgradient is zero
  CHECK(gradient(spec, ParamVector::Zero(1), {{zero, 0}})[0] == 0.0);
}

TEST_CASE("q is invariant under a global phase of the input") {
  std::mt19937_64 rng(16);
  const auto spec = build_architecture(6, 2, true);
  const auto theta = random_theta(spec.n_params, rng);
  for (double phi : {0.3, 1.7, -2.9}) {
    const auto in = random_input(6, rng);
    const Eigen::VectorXcd rotated = std::exp(I * phi) * in;
    CHECK(std::abs(forward(spec, theta, rotated) - forward(spec, theta, in)) < 1e-14);
  }
}

TEST_CASE("tied gates with disjoint support commute") {
  std::mt19937_64 rng(17);
  const auto spec = build_architecture(7, 1);
  const auto theta = random_theta(spec.n_params, rng);
  const auto in = random_input(7, rng);
  auto swapped = spec;
  auto& conv = swapped.layers.front();
  REQUIRE(conv.kind == LayerKind::Conv);
  REQUIRE(conv.gates.size() >= 2);
  // the first two gates sit on bonds (0,1) and (2,3)
  std::swap(conv.gates[0], conv.gates[1]);
  CHECK(std::abs(forward(spec, theta, in) - forward(swapped, theta, in)) < 1e-12);
}

TEST_CASE("marking rule is strict") {
  CHECK_FALSE(is_marked(0.5));
  CHECK(is_marked(std::nextafter(0.5, 1.0)));
  CHECK_FALSE(is_marked(0.0));
}

namespace {

HamiltonianOp random_full_op(int n, std::mt19937_64& rng) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd a(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) a.col(c) = testing::random_vector(dim, rng);
  std::vector<Bits> configs(static_cast<std::size_t>(dim));
  for (std::size_t j = 0; j < configs.size(); ++j) configs[j] = static_cast<Bits>(j);
  auto basis = std::make_shared<const SectorBasis>(configs, SectorConstraint::full(n));
  return {SparseOp::from_dense(a + a.adjoint(), true), basis, {}};
}

}  // namespace

TEST_CASE("dataset composition") {
  std::mt19937_64 rng(18);
  const auto eigs = diagonalize(random_full_op(4, rng));
  const auto enc = QubitEncoding::all_sites(4);
  const std::vector<Eigen::Index> scars = {2, 7, 11};
  const auto src = make_source(eigs, scars, enc);
  CHECK(src.scars.size() == 3);
  CHECK(src.others.size() == 13);

  Eigen::MatrixXcd span(16, 3);
  for (int k = 0; k < 3; ++k) span.col(k) = src.encoded.col(scars[static_cast<std::size_t>(k)]);
  const Eigen::MatrixXcd proj = span * span.adjoint();

  auto stream = make_stream(5, "dataset");
  const auto data = make_dataset(src, 40, stream);
  REQUIRE(data.size() == 40);
  int positives = 0;
  for (const auto& s : data) {
    CHECK(std::abs(s.state.norm() - 1.0) < 1e-12);
    if (s.label == 1) {
      ++positives;
      CHECK((s.state - proj * s.state).norm() < 1e-12);
    } else {
      // negatives live in the complement of the scar span
      CHECK((proj * s.state).norm() < 1e-12);
    }
  }
  CHECK(positives == 20);

  auto again = make_stream(5, "dataset");
  const auto same = make_dataset(src, 40, again);
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(same[i].state == data[i].state);

  const auto single = make_source(eigs, {4}, enc);
  auto s2 = make_stream(6, "dataset");
  for (const auto& s : make_dataset(single, 10, s2))
    if (s.label == 1) CHECK(std::abs(std::abs(s.state.dot(single.encoded.col(4))) - 1.0) < 1e-12);

  CHECK_THROWS_AS(make_source(eigs, {}, enc), Error);
  DatasetSource empty = src;
  empty.scars.clear();
  CHECK_THROWS_AS(make_dataset(empty, 4, s2), Error);
  CHECK_THROWS_AS(make_dataset(src, 5, s2), Error);
}

TEST_CASE("bulk encoding drops frozen boundary sites") {
  const int n = 8;
  const auto h = build_xorx({1.0, 1.0, 0.5, n}, SectorConstraint::frozen(n));
  const auto eigs = diagonalize(h);
  const auto enc = QubitEncoding::bulk_sites(n);
  CHECK(enc.data_qubits() == 6);
  const auto cols = encode_columns(eigs, enc);
  CHECK((cols.adjoint() * cols - Eigen::MatrixXcd::Identity(eigs.size(), eigs.size())).cwiseAbs().maxCoeff() < 1e-12);
  const auto one = encode(eigs.state(3), enc);
  CHECK((one - cols.col(3)).norm() == 0.0);

  const auto full = build_sector(n, SectorConstraint::full(n));
  CHECK_THROWS_AS(encode(StateVector::basis_state(full, 1), enc), Error);
}

TEST_CASE("training: zero iterations, determinism and progress") {
  std::mt19937_64 rng(19);
  const auto eigs = diagonalize(random_full_op(4, rng));
  const auto src = make_source(eigs, {0, 15}, QubitEncoding::all_sites(4));
  const auto spec = build_architecture(4, 1);
  const auto theta0 = initial_parameters(spec, 3);
  CHECK(theta0 == initial_parameters(spec, 3));
  CHECK(theta0 != initial_parameters(spec, 4));
  const BatchSource batches = [&](long t) {
    auto s = make_stream(derive_seed(1, "batch", static_cast<std::uint64_t>(t)), "draw");
    return make_dataset(src, 16, s);
  };
  OptimizerConfig opt;
  const auto none = train(spec, theta0, batches, opt, 0);
  CHECK(none.theta == theta0);
  CHECK(none.trace.empty());

  const auto a = train(spec, theta0, batches, opt, 25);
  const auto b = train(spec, theta0, batches, opt, 25);
  REQUIRE(a.trace.size() == 25);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].loss == b.trace[i].loss);
    CHECK(a.trace[i].iteration == static_cast<long>(i));
  }
  CHECK(a.theta == b.theta);

  // splitting a run and resuming from the saved optimizer state reproduces it
  OptimizerConfig adam;
  adam.kind = OptimizerConfig::Kind::Adam;
  const auto whole = train(spec, theta0, batches, adam, 12);
  const auto first = train(spec, theta0, batches, adam, 5);
  const auto rest = train(spec, first.theta, batches, adam, 7, first.optimizer, 5);
  CHECK(rest.theta == whole.theta);
  CHECK(rest.trace.back().loss == whole.trace.back().loss);
  CHECK(converged_loss(whole.trace, 3) ==
        doctest::Approx((whole.trace[9].loss + whole.trace[10].loss + whole.trace[11].loss) / 3));
}

TEST_CASE("adam first step moves each slot by the learning rate") {
  OptimizerConfig adam;
  adam.kind = OptimizerConfig::Kind::Adam;
  adam.learning_rate = 0.1;
  OptimizerState st;
  ParamVector theta = ParamVector::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 1e-3;
  optimizer_update(adam, st, theta, g);
  CHECK(theta[0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(theta[1] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(theta[2] == doctest::Approx(-0.1).epsilon(1e-4));
  CHECK(parse_optimizer("adam") == OptimizerConfig::Kind::Adam);
  CHECK(parse_optimizer("gd") == OptimizerConfig::Kind::GradientDescent);
  CHECK_THROWS_AS(parse_optimizer("sgd"), Error);
}

TEST_CASE("classify_spectrum evaluates every eigenvector") {
  std::mt19937_64 rng(20);
  const auto eigs = diagonalize(random_full_op(4, rng));
  const auto spec = build_architecture(4, 1);
  const auto theta = random_theta(spec.n_params, rng);
  const auto enc = QubitEncoding::all_sites(4);
  const auto c = classify_spectrum(spec, theta, eigs, enc);
  REQUIRE(c.q.size() == 16);
  std::size_t marked = 0;
  for (Eigen::Index j = 0; j < 16; ++j) {
    CHECK(c.q[static_cast<std::size_t>(j)] == doctest::Approx(forward(spec, theta, encode(eigs.state(j), enc))));
    CHECK(c.marked[static_cast<std::size_t>(j)] == (c.q[static_cast<std::size_t>(j)] > 0.5));
    marked += c.marked[static_cast<std::size_t>(j)];
  }
  CHECK(c.marked_count() == marked);
}
