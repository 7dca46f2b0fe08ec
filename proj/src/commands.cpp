#include "scarlab/commands.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "scarlab/dynamics.hpp"
#include "scarlab/error.hpp"
#include "scarlab/io.hpp"
#include "scarlab/pipeline.hpp"
#include "scarlab/quasiparticle.hpp"
#include "scarlab/random.hpp"

namespace scarlab {

namespace {

namespace fs = std::filesystem;

ArtifactHeader header_for(const std::string& schema, const RunConfig& config) {
  ArtifactHeader h;
  h.schema = schema;
  h.tool_version = tool_version();
  h.config_hash = config.hash;
  h.seed = config.seed;
  return h;
}

void prepare_out(const CommandOptions& options) {
  std::error_code ec;
  fs::create_directories(options.out, ec);
  require(!ec, ErrorCode::Io, "cannot create output directory " + options.out.string());
}

void say(const CommandOptions& options, const std::string& line) {
  if (options.log) *options.log << line << '\n';
}

std::string fmt(double x) { return format_double(x); }

void write_csv(const CommandOptions& options, const std::string& file, const ArtifactHeader& header,
               const CsvTable& table) {
  const auto text = render_csv(header, table);
  validate_csv(parse_csv(text), header.schema);
  write_text_atomic(options.out / file, text);
  say(options, "wrote " + (options.out / file).string());
}

StoredModel load_model(const CommandOptions& options) {
  const auto path = options.out / "model.json";
  require(fs::exists(path), ErrorCode::Config, "no trained model at " + path.string() + " (run train first)");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "corrupt model document " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

StoredModel load_trained_model(const CommandOptions& options) {
  auto m = load_model(options);
  require(m.iterations_done > 0, ErrorCode::Config, "model.json holds an untrained model (0 iterations)");
  return m;
}

void check_model_fits(const StoredModel& m, const ModelSpectrum& ms) {
  require(m.spec.n_data == ms.encoding.data_qubits(), ErrorCode::Config,
          "model has " + std::to_string(m.spec.n_data) + " data qubits but the configured chain needs " +
              std::to_string(ms.encoding.data_qubits()));
}

CsvTable diagnostics_table(const ModelSpectrum& ms, const Classification* cls) {
  DiagnosticsOptions opt;
  opt.references = ms.references;
  opt.subspaces = ms.subspaces;
  if (ms.encoding.data_qubits() == ms.eigs.basis->sites()) {
    opt.sz_first = 0;
    opt.sz_last = ms.eigs.basis->sites();
  }
  const auto rows = compute_diagnostics(ms.eigs, opt);
  CsvTable t;
  t.columns = {"index", "energy", "block", "entropy_nats", "pr", "sz_mean", "sz_var"};
  for (const auto& [label, ref] : ms.references) t.columns.push_back("overlap_" + label);
  for (const auto& [label, configs] : ms.subspaces) t.columns.push_back("weight_" + label);
  t.columns.push_back("marked");
  t.columns.push_back("q");
  for (const auto& r : rows) {
    const auto j = static_cast<std::size_t>(r.index);
    const int block = j < ms.eigs.block.size() ? ms.eigs.block[j] : -1;
    std::vector<std::string> row{std::to_string(r.index), fmt(r.energy), std::to_string(block),
                                 fmt(r.half_chain_entropy), fmt(r.participation_ratio), fmt(r.sz_mean),
                                 fmt(r.sz_variance)};
    for (double o : r.overlaps) row.push_back(fmt(o));
    for (double w : r.subspace_weights) row.push_back(fmt(w));
    row.push_back(cls && cls->marked[j] ? "1" : "0");
    row.push_back(cls ? fmt(cls->q[j]) : "");
    t.add_row(std::move(row));
  }
  return t;
}

// Reads the iteration/loss rows written so far.
std::vector<LossReport> read_loss_trace(const fs::path& path) {
  const auto csv = parse_csv(read_text(path));
  validate_csv(csv, "loss_trace");
  std::vector<LossReport> trace;
  for (const auto& row : csv.table.rows) {
    LossReport r;
    try {
      r.iteration = std::stol(row[0]);
      r.loss = std::stod(row[1]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "corrupt loss trace " + path.string());
    }
    trace.push_back(r);
  }
  return trace;
}

double time_unit(const RunConfig& config) {
  switch (config.model.kind) {
    case ModelKind::XorX: return 1.0 / config.model.xorx.lambda;
    case ModelKind::PXP: return 2.0 / config.model.pxp.omega;
    case ModelKind::SSH: return 1.0 / config.model.ssh.j_even;
  }
  return 1.0;
}

std::string time_unit_label(const RunConfig& config) {
  switch (config.model.kind) {
    case ModelKind::XorX: return "1/lambda";
    case ModelKind::PXP: return "2/omega";
    case ModelKind::SSH: return "1/j_even";
  }
  return "1";
}

}  // namespace

void cmd_spectrum(const RunConfig& config, const CommandOptions& options) {
  config.need("model");
  prepare_out(options);
  const auto ms = model_spectrum(config);
  say(options, "diagonalized " + std::to_string(ms.eigs.size()) + " states");
  auto header = header_for("diagnostics", config);
  header.extra = {{"model", to_string(config.model.kind)}, {"sector", ms.metadata["sector"].get<std::string>()}};
  write_csv(options, "diagnostics.csv", header, diagnostics_table(ms, nullptr));
  write_eigenset(options.out / "eigenset.bin", ms.eigs);
  say(options, "wrote " + (options.out / "eigenset.bin").string());
}

void cmd_train(const RunConfig& config, const CommandOptions& options) {
  config.need("model");
  config.need("training");
  prepare_out(options);
  const auto ms = model_spectrum(config);
  require(!ms.positives.empty(), ErrorCode::Config, "the configured model and sector provide no positive states");
  const auto source = make_source(ms.eigs, ms.positives, ms.encoding);
  const auto& tr = config.training;

  StoredModel model;
  model.spec = build_architecture(ms.encoding.data_qubits(), config.architecture.conv_layers,
                                  config.architecture.with_pre);
  std::vector<LossReport> trace;
  if (options.resume) {
    model = load_model(options);
    require(model.spec.describe() == build_architecture(ms.encoding.data_qubits(), config.architecture.conv_layers,
                                                        config.architecture.with_pre)
                                         .describe(),
            ErrorCode::Config, "stored architecture differs from the configured one");
    trace = read_loss_trace(options.out / "loss_trace.csv");
    require(static_cast<long>(trace.size()) == model.iterations_done, ErrorCode::Config,
            "loss trace length does not match the stored iteration count");
    require(model.iterations_done <= tr.iterations, ErrorCode::Config, "stored model is past the configured iterations");
    say(options, "resuming at iteration " + std::to_string(model.iterations_done));
  } else {
    model.theta = initial_parameters(model.spec, config.seed);
  }

  const auto batches = seeded_batches(source, tr.batch_size, config.seed);
  auto result = train_scheduled(model.spec, model.theta, batches, tr, tr.iterations, model.optimizer,
                                model.iterations_done);
  model.theta = result.theta;
  model.optimizer = result.optimizer;
  model.iterations_done = tr.iterations;
  trace.insert(trace.end(), result.trace.begin(), result.trace.end());

  std::vector<double> positive_q;
  for (auto j : source.scars) positive_q.push_back(forward(model.spec, model.theta, source.encoded.col(j)));
  const double min_q = positive_q.empty() ? 0.0 : *std::min_element(positive_q.begin(), positive_q.end());
  const double conv = trace.empty() ? 0.0 : converged_loss(trace, std::min<std::size_t>(20, trace.size()));

  model.training = {{"seed", config.seed},
                    {"batch_size", tr.batch_size},
                    {"iterations", tr.iterations},
                    {"optimizer", to_string(tr.optimizer.kind)},
                    {"learning_rate", tr.optimizer.learning_rate},
                    {"decay_at", tr.decay_at},
                    {"decay_factor", tr.decay_factor},
                    {"dataset", ms.metadata},
                    {"positive_q", positive_q},
                    {"min_positive_q", min_q},
                    {"converged_loss", conv},
                    {"loss_trace", "loss_trace.csv"}};
  CsvTable t;
  t.columns = {"iteration", "loss"};
  for (const auto& r : trace) t.add_row({std::to_string(r.iteration), fmt(r.loss)});
  write_csv(options, "loss_trace.csv", header_for("loss_trace", config), t);
  write_text_atomic(options.out / "model.json", model_to_json(model, header_for("model", config)).dump(2) + "\n");
  say(options, "wrote " + (options.out / "model.json").string());
  for (std::size_t i = 0; i < positive_q.size(); ++i)
    say(options, "q(positive " + std::to_string(i) + ") = " + fmt(positive_q[i]));
  say(options, "min positive q = " + fmt(min_q) + ", converged loss = " + fmt(conv));
}

void cmd_classify(const RunConfig& config, const CommandOptions& options) {
  config.need("model");
  const auto model = load_trained_model(options);
  const auto ms = model_spectrum(config);
  check_model_fits(model, ms);
  const auto cls = classify_spectrum(model.spec, model.theta, ms.eigs, ms.encoding);
  auto header = header_for("diagnostics", config);
  header.extra = {{"model", to_string(config.model.kind)},
                  {"sector", ms.metadata["sector"].get<std::string>()},
                  {"marked", std::to_string(cls.marked_count())}};
  write_csv(options, "diagnostics.csv", header, diagnostics_table(ms, &cls));
  std::size_t positives_marked = 0;
  for (auto j : ms.positives) positives_marked += cls.marked[static_cast<std::size_t>(j)] ? 1 : 0;
  say(options, "marked " + std::to_string(cls.marked_count()) + " of " + std::to_string(ms.eigs.size()) +
                   " states, " + std::to_string(positives_marked) + " of " + std::to_string(ms.positives.size()) +
                   " positives");
}

void cmd_revival(const RunConfig& config, const CommandOptions& options) {
  config.need("model");
  prepare_out(options);
  const auto ms = model_spectrum(config);
  const auto& rv = config.revival;
  const double unit = time_unit(config);
  std::vector<double> tau = time_grid(rv.t_max, rv.points);
  std::vector<double> times(tau.size());
  std::transform(tau.begin(), tau.end(), times.begin(), [&](double x) { return x * unit; });

  const std::set<Eigen::Index> positive_set(ms.positives.begin(), ms.positives.end());
  std::vector<Eigen::Index> marked;
  const bool wants_marked = std::count(rv.series.begin(), rv.series.end(), "marked") > 0;
  if (wants_marked) {
    const auto model = load_trained_model(options);
    check_model_fits(model, ms);
    const auto cls = classify_spectrum(model.spec, model.theta, ms.eigs, ms.encoding);
    for (Eigen::Index j = 0; j < ms.eigs.size(); ++j)
      if (cls.marked[static_cast<std::size_t>(j)] && !positive_set.count(j)) marked.push_back(j);
  }

  CsvTable t;
  t.columns = {"t", "fidelity", "series"};
  auto header = header_for("revival", config);
  header.extra = {{"time_unit", time_unit_label(config)}};
  auto emit = [&](const std::string& label, const std::vector<Eigen::Index>& cols) {
    header.extra.emplace_back("series_" + label, std::to_string(cols.size()) + " eigenstates");
    if (cols.empty()) return;
    const auto psi = equal_superposition(ms.eigs, cols);
    const auto curve = revival_curve(ms.eigs, psi, times, label);
    for (std::size_t i = 0; i < tau.size(); ++i) t.add_row({fmt(tau[i]), fmt(curve.fidelity[i]), label});
  };
  for (const auto& s : rv.series) {
    if (s == "scars") {
      require(!ms.positives.empty(), ErrorCode::Config, "no positive states for the scars series");
      emit(s, ms.positives);
    } else if (s == "marked") {
      emit(s, marked);
    } else {
      // as many non-positive eigenstates as the marked series (or the positives), drawn at random
      std::vector<Eigen::Index> pool;
      for (Eigen::Index j = 0; j < ms.eigs.size(); ++j)
        if (!positive_set.count(j)) pool.push_back(j);
      auto rng = make_stream(config.seed, "revival.random");
      std::shuffle(pool.begin(), pool.end(), rng);
      const std::size_t count = std::min(pool.size(), wants_marked && !marked.empty() ? marked.size() : ms.positives.size());
      pool.resize(count);
      std::sort(pool.begin(), pool.end());
      emit(s, pool);
    }
  }
  write_csv(options, "revival.csv", header, t);
}

void cmd_quasiparticle(const RunConfig& config, const CommandOptions& options) {
  prepare_out(options);
  const auto& qc = config.quasiparticle;
  const auto grid = k_grid(qc.points);
  CsvTable t;
  t.columns = {"model", "branch", "k", "E", "Sz"};
  for (auto kind : qc.kinds) {
    const EffectiveModel model{kind, qc.lambda, qc.delta};
    for (const auto& branch : branch_names(kind)) {
      const auto curve = dispersion(model, branch, grid, qc.chain_length);
      for (std::size_t i = 0; i < curve.k.size(); ++i)
        t.add_row({to_string(kind), branch, fmt(curve.k[i]), fmt(curve.energy[i]), fmt(curve.sz[i])});
    }
  }
  auto header = header_for("dispersion", config);
  header.extra = {{"lambda", fmt(qc.lambda)}, {"delta", fmt(qc.delta)}, {"chain_length", std::to_string(qc.chain_length)}};
  write_csv(options, "dispersion.csv", header, t);

  if (!config.has("model") || config.model.kind != ModelKind::PXP) return;
  const auto ms = model_spectrum(config);
  const auto k = symmetric_subspace(ms.hamiltonian);
  const auto weights = subspace_weights(k, ms.eigs);
  const auto z2 = ms.references.front().second;
  const auto ov = overlap_scan(ms.eigs, z2);
  CsvTable ks;
  ks.columns = {"index", "energy", "k_weight", "z2_overlap", "quasimode"};
  for (Eigen::Index j = 0; j < ms.eigs.size(); ++j)
    ks.add_row({std::to_string(j), fmt(ms.eigs.energies[j]), fmt(weights[j]), fmt(ov[j]), "0"});
  std::vector<double> qm_energy, qm_overlap;
  for (Eigen::Index j = 0; j < k.quasimode_energies.size(); ++j) {
    const StateVector qm(ms.eigs.basis, k.quasimodes.col(j));
    const double o = std::norm(z2.dot(qm));
    qm_energy.push_back(k.quasimode_energies[j]);
    qm_overlap.push_back(o);
    ks.add_row({std::to_string(j), fmt(k.quasimode_energies[j]), "1", fmt(o), "1"});
  }
  std::vector<double> band;
  for (auto j : ms.positives) band.push_back(ms.eigs.energies[j]);
  const auto report = interlace(band, qm_energy, qm_overlap);
  auto kh = header_for("ksubspace", config);
  kh.extra = {{"labels", std::to_string(k.labels.size())}, {"interlaced", report.interlaced ? "true" : "false"}};
  write_csv(options, "ksubspace.csv", kh, ks);
  say(options, "quasimodes interlace the top band: " + std::string(report.interlaced ? "yes" : "no") + " (" +
                   report.detail + ")");
}

void cmd_mitigate(const RunConfig& config, const CommandOptions& options) {
  config.need("model");
  require(config.model.kind == ModelKind::XorX && sector_constraint(config) == SectorConstraint::frozen(config.model.n()),
          ErrorCode::Config, "mitigation needs the xorX model with frozen boundaries");
  const auto model = load_trained_model(options);
  const int n = config.model.n();
  require(model.spec.n_data == n - 2, ErrorCode::Config, "model does not match the configured chain length");
  const ReadoutModel readout{model.spec, model.theta, QubitEncoding::bulk_sites(n)};
  const auto study = mitigation_study(config.mitigation, readout, config.seed);
  CsvTable t;
  t.columns = {"p", "r", "trajectories", "shots", "proxy_fidelity", "P1", "stderr", "true_fidelity"};
  for (const auto& row : study.rows)
    t.add_row({fmt(row.error_rate), std::to_string(row.fold), std::to_string(row.summary.trajectories),
               std::to_string(row.summary.shots), fmt(row.proxy.value), fmt(row.summary.p1),
               fmt(row.summary.p1_stderr), fmt(row.summary.fidelity)});
  auto header = header_for("mitigation", config);
  header.extra = {{"noiseless_q", fmt(study.noiseless_q)}};
  write_csv(options, "mitigation.csv", header, t);
  const nlohmann::json fits{{"meta", header_for("zne_fit", config).to_json()},
                            {"noiseless_q", study.noiseless_q},
                            {"loglog", study.loglog.to_json()},
                            {"linear", study.linear.to_json()}};
  write_text_atomic(options.out / "zne_fit.json", fits.dump(2) + "\n");
  say(options, "wrote " + (options.out / "zne_fit.json").string());
  say(options, "noiseless q = " + fmt(study.noiseless_q) + ", log-log intercept = " + fmt(study.loglog.intercept) +
                   " +- " + fmt(study.loglog.stderr) + ", linear intercept = " + fmt(study.linear.intercept) + " +- " +
                   fmt(study.linear.stderr));
}

}  // namespace scarlab
