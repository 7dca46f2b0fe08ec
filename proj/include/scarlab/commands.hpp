#pragma once

// Command implementations behind the command-line tool. Each reads a RunConfig, writes its
// artifacts into the output directory and throws Error on failure.

#include <filesystem>
#include <ostream>

#include "scarlab/config.hpp"

namespace scarlab {

struct CommandOptions {
  std::filesystem::path out = ".";
  bool resume = false;         // train: continue from out/model.json
  std::ostream* log = nullptr;  // progress and summary lines
};

// diagnostics.csv + eigenset.bin
void cmd_spectrum(const RunConfig& config, const CommandOptions& options);
// model.json + loss_trace.csv
void cmd_train(const RunConfig& config, const CommandOptions& options);
// diagnostics.csv with classifier outputs (needs a trained model.json)
void cmd_classify(const RunConfig& config, const CommandOptions& options);
// revival.csv
void cmd_revival(const RunConfig& config, const CommandOptions& options);
// dispersion.csv, plus ksubspace.csv for PXP models
void cmd_quasiparticle(const RunConfig& config, const CommandOptions& options);
// mitigation.csv + zne_fit.json (needs a trained model.json)
void cmd_mitigate(const RunConfig& config, const CommandOptions& options);

}  // namespace scarlab
