// scarlab: spectra, QCNN training/classification, revivals, quasiparticle dispersions and
// error-mitigation studies from an INI run configuration.

#include <iostream>

#include "CLI11.hpp"
#include "scarlab/commands.hpp"
#include "scarlab/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

constexpr int kUserError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum many-body scar toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  long long seed = -1;
  int threads = 0;
  bool resume = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration (INI)")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "root seed (overrides [run] seed)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--threads", threads, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
  };

  using Command = void (*)(const scarlab::RunConfig&, const scarlab::CommandOptions&);
  std::vector<std::pair<CLI::App*, Command>> commands = {
      {app.add_subcommand("spectrum", "diagonalize and write diagnostics.csv + eigenset.bin"), scarlab::cmd_spectrum},
      {app.add_subcommand("train", "train the QCNN and write model.json + loss_trace.csv"), scarlab::cmd_train},
      {app.add_subcommand("classify", "classify every eigenstate with the trained model"), scarlab::cmd_classify},
      {app.add_subcommand("revival", "return probabilities of superposed initial states"), scarlab::cmd_revival},
      {app.add_subcommand("quasiparticle", "effective-model dispersions and the PXP K subspace"),
       scarlab::cmd_quasiparticle},
      {app.add_subcommand("mitigate", "noisy S1 preparation and zero-noise extrapolation"), scarlab::cmd_mitigate},
  };
  for (auto& [cmd, fn] : commands) add_common(cmd);
  commands[1].first->add_flag("--resume", resume, "continue training from out/model.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  try {
    auto config = scarlab::load_config(config_path);
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    if (threads > 0) config.threads = threads;
#ifdef _OPENMP
    if (config.threads > 0) omp_set_num_threads(config.threads);
#endif
    scarlab::CommandOptions options;
    options.out = out_dir;
    options.resume = resume;
    options.log = &std::cout;
    for (auto& [cmd, fn] : commands)
      if (cmd->parsed()) fn(config, options);
    return 0;
  } catch (const scarlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_user_error() ? kUserError : kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  }
}
