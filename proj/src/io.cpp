#include "scarlab/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "scarlab/error.hpp"
#include "scarlab/random.hpp"

#ifndef SCARLAB_VERSION
#define SCARLAB_VERSION "0.0.0"
#endif

namespace scarlab {

namespace {

constexpr char kArchiveMagic[8] = {'S', 'C', 'A', 'R', 'E', 'I', 'G', '1'};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(bool(is), ErrorCode::Io, "truncated eigenset archive");
  return v;
}

}  // namespace

std::string tool_version() { return SCARLAB_VERSION; }

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  require(ec == std::errc(), ErrorCode::Io, "number formatting failed");
  return std::string(buf, end);
}

std::string hexfloat(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", value);
  return buf;
}

double parse_hexfloat(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  require(!text.empty() && end == text.c_str() + text.size(), ErrorCode::Config, "bad number '" + text + "'");
  return v;
}

std::string content_hash(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

nlohmann::json ArtifactHeader::to_json() const {
  nlohmann::json j{{"schema", schema}, {"tool_version", tool_version}, {"config_hash", config_hash}, {"seed", seed}};
  for (const auto& [k, v] : extra) j[k] = v;
  return j;
}

void CsvTable::add_row(std::vector<std::string> row) {
  require(row.size() == columns.size(), ErrorCode::Io, "row width does not match the header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error(ErrorCode::Io, "no column '" + name + "'");
}

std::string render_csv(const ArtifactHeader& header, const CsvTable& table) {
  std::ostringstream os;
  os << "# schema: " << header.schema << '\n';
  os << "# tool_version: " << header.tool_version << '\n';
  os << "# config_hash: " << header.config_hash << '\n';
  os << "# seed: " << header.seed << '\n';
  for (const auto& [k, v] : header.extra) os << "# " << k << ": " << v << '\n';
  os << join(table.columns, ',') << '\n';
  for (const auto& row : table.rows) os << join(row, ',') << '\n';
  return os.str();
}

ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv out;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    require(line.empty() || line.back() != '\r', ErrorCode::Io, "CRLF line ending");
    if (line.empty()) continue;
    if (line[0] == '#') {
      require(!have_header, ErrorCode::Io, "metadata after the header row");
      const auto colon = line.find(": ");
      require(colon != std::string::npos && colon > 2, ErrorCode::Io, "malformed metadata line '" + line + "'");
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2);
      if (key == "schema") out.header.schema = value;
      else if (key == "tool_version") out.header.tool_version = value;
      else if (key == "config_hash") out.header.config_hash = value;
      else if (key == "seed") out.header.seed = std::stoull(value);
      else out.header.extra.emplace_back(key, value);
      continue;
    }
    if (!have_header) {
      out.table.columns = split(line, ',');
      have_header = true;
    } else {
      out.table.add_row(split(line, ','));
    }
  }
  require(have_header, ErrorCode::Io, "CSV has no header row");
  return out;
}

const CsvSchema& csv_schema(const std::string& name) {
  static const std::vector<CsvSchema> schemas = {
      {"diagnostics", {"index", "energy", "block", "entropy_nats", "pr", "sz_mean", "sz_var"}, {"overlap_", "weight_"},
       {"marked", "q"}},
      {"loss_trace", {"iteration", "loss"}, {}, {}},
      {"revival", {"t", "fidelity", "series"}, {}, {}},
      {"dispersion", {"model", "branch", "k", "E", "Sz"}, {}, {}},
      {"ksubspace", {"index", "energy", "k_weight", "z2_overlap", "quasimode"}, {}, {}},
      {"mitigation", {"p", "r", "trajectories", "shots", "proxy_fidelity", "P1", "stderr", "true_fidelity"}, {}, {}},
  };
  for (const auto& s : schemas)
    if (s.name == name) return s;
  throw Error(ErrorCode::Io, "unknown CSV schema '" + name + "'");
}

void validate_csv(const ParsedCsv& csv, const std::string& schema) {
  const auto& s = csv_schema(schema);
  require(csv.header.schema == s.name, ErrorCode::Io,
          "schema '" + csv.header.schema + "' where '" + s.name + "' was expected");
  const auto& cols = csv.table.columns;
  require(cols.size() >= s.fixed.size() + s.tail.size(), ErrorCode::Io, "too few columns for " + s.name);
  for (std::size_t i = 0; i < s.fixed.size(); ++i)
    require(cols[i] == s.fixed[i], ErrorCode::Io, "column " + std::to_string(i) + " should be '" + s.fixed[i] + "'");
  const std::size_t tail_start = cols.size() - s.tail.size();
  for (std::size_t i = 0; i < s.tail.size(); ++i)
    require(cols[tail_start + i] == s.tail[i], ErrorCode::Io, "trailing column should be '" + s.tail[i] + "'");
  for (std::size_t i = s.fixed.size(); i < tail_start; ++i) {
    bool ok = false;
    for (const auto& p : s.prefixes) ok = ok || (starts_with(cols[i], p) && cols[i].size() > p.size());
    require(ok, ErrorCode::Io, "unexpected column '" + cols[i] + "'");
  }
  for (const auto& row : csv.table.rows)
    require(row.size() == cols.size(), ErrorCode::Io, "row width does not match the header");
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(bool(os), ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    require(bool(os), ErrorCode::Io, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::Io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

nlohmann::json model_to_json(const StoredModel& model, const ArtifactHeader& header) {
  auto hex = [](const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(hexfloat(v[k]));
    return a;
  };
  nlohmann::json opt{{"step", model.optimizer.step}};
  if (model.optimizer.first_moment.size()) {
    opt["first_moment"] = hex(model.optimizer.first_moment);
    opt["second_moment"] = hex(model.optimizer.second_moment);
  }
  return {{"meta", header.to_json()},
          {"architecture", model.spec.describe()},
          {"slot_labels", model.spec.slot_labels},
          {"theta", hex(model.theta)},
          {"iterations_done", model.iterations_done},
          {"optimizer_state", opt},
          {"training", model.training}};
}

StoredModel model_from_json(const nlohmann::json& j) {
  try {
    StoredModel m;
    m.spec = circuit_from_json(j.at("architecture"));
    auto vec = [](const nlohmann::json& a) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
      for (std::size_t k = 0; k < a.size(); ++k) v[static_cast<Eigen::Index>(k)] = parse_hexfloat(a[k].get<std::string>());
      return v;
    };
    m.theta = vec(j.at("theta"));
    require(m.theta.size() == m.spec.n_params, ErrorCode::Config, "parameter count does not match the architecture");
    m.iterations_done = j.at("iterations_done").get<long>();
    require(m.iterations_done >= 0, ErrorCode::Config, "negative iteration count");
    const auto& opt = j.at("optimizer_state");
    m.optimizer.step = opt.at("step").get<long>();
    if (opt.contains("first_moment")) {
      m.optimizer.first_moment = vec(opt.at("first_moment"));
      m.optimizer.second_moment = vec(opt.at("second_moment"));
      require(m.optimizer.first_moment.size() == m.spec.n_params && m.optimizer.second_moment.size() == m.spec.n_params,
              ErrorCode::Config, "optimizer moments do not match the architecture");
    }
    m.training = j.at("training");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed model document: ") + e.what());
  }
}

void write_eigenset(const std::filesystem::path& path, const EigenSet& eigs) {
  require(eigs.basis != nullptr, ErrorCode::Io, "eigenset without a basis");
  std::ostringstream os(std::ios::binary);
  os.write(kArchiveMagic, sizeof(kArchiveMagic));
  const auto& c = eigs.basis->constraint();
  put<std::int32_t>(os, static_cast<std::int32_t>(c.kind));
  for (int v : {c.n, c.left_value, c.right_value, c.domain_walls, c.excitations, int(c.periodic)})
    put<std::int32_t>(os, v);
  put<std::int64_t>(os, eigs.basis->size());
  for (Bits b : eigs.basis->configs()) put<std::uint64_t>(os, static_cast<std::uint64_t>(b));
  put<std::int64_t>(os, eigs.size());
  for (Eigen::Index j = 0; j < eigs.size(); ++j) put<double>(os, eigs.energies[j]);
  for (Eigen::Index j = 0; j < eigs.size(); ++j) {
    put<std::int32_t>(os, j < static_cast<Eigen::Index>(eigs.block.size()) ? eigs.block[static_cast<std::size_t>(j)] : -1);
    for (Eigen::Index i = 0; i < eigs.states.rows(); ++i) {
      put<double>(os, eigs.states(i, j).real());
      put<double>(os, eigs.states(i, j).imag());
    }
  }
  write_text_atomic(path, os.str());
}

EigenSet read_eigenset(const std::filesystem::path& path) {
  std::istringstream is(read_text(path), std::ios::binary);
  char magic[sizeof(kArchiveMagic)];
  is.read(magic, sizeof(magic));
  require(bool(is) && std::equal(magic, magic + sizeof(magic), kArchiveMagic), ErrorCode::Io,
          path.string() + " is not an eigenset archive");
  SectorConstraint c;
  c.kind = static_cast<SectorConstraint::Kind>(get<std::int32_t>(is));
  c.n = get<std::int32_t>(is);
  c.left_value = get<std::int32_t>(is);
  c.right_value = get<std::int32_t>(is);
  c.domain_walls = get<std::int32_t>(is);
  c.excitations = get<std::int32_t>(is);
  c.periodic = get<std::int32_t>(is) != 0;
  const auto dim = get<std::int64_t>(is);
  require(dim > 0 && dim <= (std::int64_t{1} << 30), ErrorCode::Io, "bad basis size in archive");
  std::vector<Bits> configs(static_cast<std::size_t>(dim));
  for (auto& b : configs) b = static_cast<Bits>(get<std::uint64_t>(is));
  EigenSet eigs;
  eigs.basis = std::make_shared<const SectorBasis>(std::move(configs), c);
  const auto count = get<std::int64_t>(is);
  require(count >= 0 && count <= dim, ErrorCode::Io, "bad eigenstate count in archive");
  eigs.energies.resize(count);
  for (Eigen::Index j = 0; j < count; ++j) eigs.energies[j] = get<double>(is);
  eigs.states.resize(dim, count);
  eigs.block.resize(static_cast<std::size_t>(count));
  for (Eigen::Index j = 0; j < count; ++j) {
    eigs.block[static_cast<std::size_t>(j)] = get<std::int32_t>(is);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      eigs.states(i, j) = Complex(re, im);
    }
  }
  is.peek();
  require(is.eof(), ErrorCode::Io, "trailing bytes in eigenset archive");
  return eigs;
}

}  // namespace scarlab
