#include "scarlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <map>
#include <sstream>

#include "scarlab/error.hpp"
#include "scarlab/io.hpp"

namespace scarlab {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"run", {"seed", "threads"}},
      {"model", {"kind", "n", "lambda", "delta", "j", "omega", "boundary", "end_terms", "perturbation", "strength",
                 "j_even", "j_odd", "j_nnn"}},
      {"sector", {"kind", "domain_walls", "left", "right", "excitations"}},
      {"architecture", {"conv_layers", "with_pre"}},
      {"training", {"batch_size", "iterations", "optimizer", "learning_rate", "decay_at", "decay_factor", "window"}},
      {"revival", {"t_max", "points", "series"}},
      {"quasiparticle", {"lambda", "delta", "points", "chain_length", "kinds"}},
      {"mitigation", {"error_rates", "folds", "fold_error_rate", "trajectories", "shots"}},
  };
  return keys;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == v.size() && !v.empty(), ErrorCode::Config, where(section, key) + ": '" + v + "' is not a number");
  return x;
}

long to_long(const std::string& section, const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == v.size() && !v.empty(), ErrorCode::Config, where(section, key) + ": '" + v + "' is not an integer");
  return x;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::Config, where(section, key) + ": '" + v + "' is not a boolean");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void check_positive(bool ok, const std::string& section, const std::string& key, const std::string& what) {
  require(ok, ErrorCode::Config, where(section, key) + " " + what);
}

void apply(RunConfig& c, const std::string& s, const std::string& k, const std::string& v) {
  auto num = [&] { return to_double(s, k, v); };
  auto integer = [&] { return to_long(s, k, v); };
  if (s == "run") {
    if (k == "seed") {
      const long x = integer();
      check_positive(x >= 0, s, k, "must be non-negative");
      c.seed = static_cast<std::uint64_t>(x);
    } else if (k == "threads") {
      c.threads = static_cast<int>(integer());
      check_positive(c.threads >= 0, s, k, "must be non-negative");
    }
  } else if (s == "model") {
    auto& m = c.model;
    if (k == "kind") {
      if (v == "xorx") m.kind = ModelKind::XorX;
      else if (v == "pxp") m.kind = ModelKind::PXP;
      else if (v == "ssh") m.kind = ModelKind::SSH;
      else throw Error(ErrorCode::Config, where(s, k) + ": unknown model '" + v + "'");
    } else if (k == "n") {
      const int n = static_cast<int>(integer());
      check_positive(n >= 3 && n <= 24, s, k, "must lie in [3, 24]");
      m.xorx.n = m.pxp.n = m.ssh.n = n;
    } else if (k == "lambda") {
      m.xorx.lambda = num();
    } else if (k == "delta") {
      m.xorx.delta = num();
    } else if (k == "j") {
      m.xorx.j = num();
    } else if (k == "omega") {
      m.pxp.omega = num();
    } else if (k == "boundary") {
      if (v == "open") m.pxp.boundary = PXPBoundary::Open;
      else if (v == "periodic") m.pxp.boundary = PXPBoundary::Periodic;
      else throw Error(ErrorCode::Config, where(s, k) + ": expected open or periodic");
    } else if (k == "end_terms") {
      m.pxp.end_terms = to_bool(s, k, v);
    } else if (k == "perturbation") {
      using K = PXPPerturbation::Kind;
      if (v == "none") m.pxp.perturbation.kind = K::None;
      else if (v == "pxpz") m.pxp.perturbation.kind = K::PXPZ;
      else if (v == "staggered") m.pxp.perturbation.kind = K::Staggered;
      else if (v == "uniform") m.pxp.perturbation.kind = K::Uniform;
      else throw Error(ErrorCode::Config, where(s, k) + ": unknown perturbation '" + v + "'");
    } else if (k == "strength") {
      m.pxp.perturbation.strength = num();
    } else if (k == "j_even") {
      m.ssh.j_even = num();
    } else if (k == "j_odd") {
      m.ssh.j_odd = num();
    } else if (k == "j_nnn") {
      m.ssh.j_nnn = num();
    }
  } else if (s == "sector") {
    if (k == "kind") {
      static const std::set<std::string> kinds{"frozen", "full", "domain_walls", "rydberg", "magnetization"};
      require(kinds.count(v) > 0, ErrorCode::Config, where(s, k) + ": unknown sector '" + v + "'");
      c.sector.kind = v;
    } else if (k == "domain_walls") {
      c.sector.domain_walls = static_cast<int>(integer());
    } else if (k == "left") {
      c.sector.left = static_cast<int>(integer());
    } else if (k == "right") {
      c.sector.right = static_cast<int>(integer());
    } else if (k == "excitations") {
      c.sector.excitations = static_cast<int>(integer());
    }
  } else if (s == "architecture") {
    if (k == "conv_layers") {
      c.architecture.conv_layers = static_cast<int>(integer());
      check_positive(c.architecture.conv_layers >= 0, s, k, "must be non-negative");
    } else if (k == "with_pre") {
      c.architecture.with_pre = to_bool(s, k, v);
    }
  } else if (s == "training") {
    auto& t = c.training;
    if (k == "batch_size") {
      t.batch_size = static_cast<int>(integer());
      check_positive(t.batch_size >= 2 && t.batch_size % 2 == 0, s, k, "must be even and at least 2");
    } else if (k == "iterations") {
      t.iterations = integer();
      check_positive(t.iterations >= 0, s, k, "must be non-negative");
    } else if (k == "optimizer") {
      try {
        t.optimizer.kind = parse_optimizer(v);
      } catch (const Error&) {
        throw Error(ErrorCode::Config, where(s, k) + ": unknown optimizer '" + v + "'");
      }
    } else if (k == "learning_rate") {
      t.optimizer.learning_rate = num();
      check_positive(t.optimizer.learning_rate > 0.0, s, k, "must be positive");
    } else if (k == "decay_at") {
      t.decay_at.clear();
      for (const auto& item : to_list(v)) {
        const double f = to_double(s, k, item);
        check_positive(f > 0.0 && f < 1.0, s, k, "fractions must lie in (0, 1)");
        t.decay_at.push_back(f);
      }
    } else if (k == "decay_factor") {
      t.decay_factor = num();
      check_positive(t.decay_factor > 0.0, s, k, "must be positive");
    } else if (k == "window") {
      t.window = num();
      check_positive(t.window >= 0.0, s, k, "must be non-negative");
    }
  } else if (s == "revival") {
    if (k == "t_max") {
      c.revival.t_max = num();
      check_positive(c.revival.t_max > 0.0, s, k, "must be positive");
    } else if (k == "points") {
      c.revival.points = static_cast<int>(integer());
      check_positive(c.revival.points >= 2, s, k, "must be at least 2");
    } else if (k == "series") {
      c.revival.series = to_list(v);
      for (const auto& name : c.revival.series)
        require(name == "scars" || name == "marked" || name == "random", ErrorCode::Config,
                where(s, k) + ": unknown series '" + name + "'");
    }
  } else if (s == "quasiparticle") {
    auto& q = c.quasiparticle;
    if (k == "lambda") q.lambda = num();
    else if (k == "delta") q.delta = num();
    else if (k == "points") {
      q.points = static_cast<int>(integer());
      check_positive(q.points >= 2, s, k, "must be at least 2");
    } else if (k == "chain_length") {
      q.chain_length = static_cast<int>(integer());
      check_positive(q.chain_length >= 4, s, k, "must be at least 4");
    } else if (k == "kinds") {
      q.kinds.clear();
      for (const auto& item : to_list(v)) {
        try {
          q.kinds.push_back(parse_quasiparticle_kind(item));
        } catch (const Error&) {
          throw Error(ErrorCode::Config, where(s, k) + ": unknown quasiparticle '" + item + "'");
        }
      }
    }
  } else if (s == "mitigation") {
    auto& m = c.mitigation;
    if (k == "error_rates") {
      m.error_rates.clear();
      for (const auto& item : to_list(v)) {
        const double p = to_double(s, k, item);
        check_positive(p >= 0.0 && p < 1.0, s, k, "rates must lie in [0, 1)");
        m.error_rates.push_back(p);
      }
    } else if (k == "folds") {
      m.folds.clear();
      for (const auto& item : to_list(v)) {
        const long r = to_long(s, k, item);
        check_positive(r >= 0, s, k, "fold factors must be non-negative");
        m.folds.push_back(static_cast<int>(r));
      }
    } else if (k == "fold_error_rate") {
      m.fold_error_rate = num();
      check_positive(m.fold_error_rate >= 0.0 && m.fold_error_rate < 1.0, s, k, "must lie in [0, 1)");
    } else if (k == "trajectories") {
      m.trajectories = static_cast<int>(integer());
      check_positive(m.trajectories >= 1, s, k, "must be at least 1");
    } else if (k == "shots") {
      m.shots = integer();
      check_positive(m.shots >= 0, s, k, "must be non-negative");
    }
  }
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::XorX: return "xorx";
    case ModelKind::PXP: return "pxp";
    case ModelKind::SSH: return "ssh";
  }
  return "?";
}

int ModelConfig::n() const {
  switch (kind) {
    case ModelKind::XorX: return xorx.n;
    case ModelKind::PXP: return pxp.n;
    case ModelKind::SSH: return ssh.n;
  }
  return 0;
}

void RunConfig::need(const std::string& section) const {
  require(has(section), ErrorCode::Config, "missing [" + section + "] section");
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Config, std::string("config syntax: ") + e.what());
  }
  RunConfig c;
  std::map<std::string, std::map<std::string, std::string>> canonical;
  for (const auto& [section, body] : tree) {
    require(body.data().empty(), ErrorCode::Config, "key '" + section + "' outside any section");
    const auto it = known_keys().find(section);
    require(it != known_keys().end(), ErrorCode::Config, "unknown section [" + section + "]");
    c.sections.insert(section);
    for (const auto& [key, value] : body) {
      require(it->second.count(key) > 0, ErrorCode::Config, "unknown key " + where(section, key));
      canonical[section][key] = value.data();
    }
  }
  for (const auto& [section, keys] : canonical)
    for (const auto& [key, value] : keys) apply(c, section, key, value);
  std::string listing;
  for (const auto& [section, keys] : canonical)
    for (const auto& [key, value] : keys) listing += section + "." + key + "=" + value + "\n";
  c.hash = content_hash(listing);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error&) {
    throw Error(ErrorCode::Config, "cannot read config " + path.string());
  }
  return parse_config(text);
}

SectorConstraint sector_constraint(const RunConfig& config) {
  const int n = config.model.n();
  std::string kind = config.sector.kind;
  if (kind.empty()) {
    switch (config.model.kind) {
      case ModelKind::XorX: kind = "frozen"; break;
      case ModelKind::PXP: kind = "rydberg"; break;
      case ModelKind::SSH: kind = "full"; break;
    }
  }
  const auto& s = config.sector;
  if (kind == "frozen") return SectorConstraint::frozen(n, s.left, s.right);
  if (kind == "full") return SectorConstraint::full(n);
  if (kind == "domain_walls") return SectorConstraint::domain_wall_number(n, s.domain_walls, s.left, s.right);
  if (kind == "magnetization") return SectorConstraint::magnetization(n, s.excitations);
  return SectorConstraint::rydberg(n, config.model.pxp.boundary == PXPBoundary::Periodic);
}

}  // namespace scarlab
