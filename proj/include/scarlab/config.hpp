#pragma once

// Run configuration: INI text with [section] headers and key = value lines. Unknown sections
// and keys are rejected.

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "scarlab/models.hpp"
#include "scarlab/qcnn.hpp"
#include "scarlab/quasiparticle.hpp"

namespace scarlab {

enum class ModelKind { XorX, PXP, SSH };

std::string to_string(ModelKind kind);

struct ModelConfig {
  ModelKind kind = ModelKind::XorX;
  XorXParams xorx;
  PXPParams pxp;
  SSHParams ssh;
  int n() const;
};

struct SectorConfig {
  // frozen | full | domain_walls | rydberg | magnetization; empty selects the model default
  // (xorX: frozen, PXP: rydberg with the model boundary, SSH: full)
  std::string kind;
  int domain_walls = 0;
  int left = 0;
  int right = 0;
  int excitations = 0;
};

struct ArchitectureConfig {
  int conv_layers = 2;
  bool with_pre = false;
};

struct TrainingConfig {
  int batch_size = 32;
  long iterations = 1000;
  OptimizerConfig optimizer;
  // learning rate multiplied by decay_factor once the iteration passes each fraction
  std::vector<double> decay_at;
  double decay_factor = 0.2;
  // PXP / SSH positives: overlap-envelope window (0 selects the model default)
  double window = 0.0;
};

struct RevivalConfig {
  double t_max = 10.0;  // in units of 1 / lambda (xorX) or 2 / Omega (PXP)
  int points = 401;
  std::vector<std::string> series{"scars", "marked", "random"};
};

struct QuasiparticleConfig {
  double lambda = 1.0;
  double delta = 0.1;
  int points = 64;
  int chain_length = 12;
  std::vector<QuasiparticleKind> kinds{QuasiparticleKind::SingleDomainWall, QuasiparticleKind::FerroMagnonBound,
                                       QuasiparticleKind::AFMagnonBound};
};

struct MitigationConfig {
  std::vector<double> error_rates{0.005, 0.01, 0.02};
  std::vector<int> folds{0, 1, 2, 3, 4, 5, 6};
  double fold_error_rate = 0.01;
  int trajectories = 1000;
  long shots = 0;
};

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the OpenMP default
  ModelConfig model;
  SectorConfig sector;
  ArchitectureConfig architecture;
  TrainingConfig training;
  RevivalConfig revival;
  QuasiparticleConfig quasiparticle;
  MitigationConfig mitigation;
  std::set<std::string> sections;  // sections present in the text
  std::string hash;                // of the canonical key/value listing

  bool has(const std::string& section) const { return sections.count(section) > 0; }
  // Throws Config naming the section when it is absent.
  void need(const std::string& section) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

SectorConstraint sector_constraint(const RunConfig& config);

}  // namespace scarlab
