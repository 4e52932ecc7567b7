#include <CLI11.hpp>

#include "ppres/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ppres - parallel-plate resonator spin-detection toolkit"};
  app.require_subcommand(1);

  ppres::cli::RunConfig rc;
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> inputs;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (key = value sections)");
    cmd->add_option("--out", out_dir, "output directory for results.json/CSV/SVG");
    cmd->add_option("--seed", seed, "seed for stochastic steps");
    cmd->add_option("--set", overrides, "override: section.key=value (repeatable)");
    cmd->add_option("inputs", inputs, "input CSV files");
  };

  const char* names[] = {"design", "fit",      "tune",
                         "protocol-count", "protocol-dispersive", "simulate"};
  const char* descs[] = {
      "circuit parameters, field map, couplings and Purcell factors",
      "de-embed and fit reflection traces",
      "quadratic field-tuning fit, hysteresis and vortex events",
      "photon-counting SNR, integration times and regime map",
      "dispersive readout optimization over detuning",
      "generate synthetic trace or sweep data"};
  for (int i = 0; i < 6; ++i) add_common(app.add_subcommand(names[i], descs[i]));

  CLI11_PARSE(app, argc, argv);

  rc.command = app.get_subcommands().front()->get_name();
  if (!config_path.empty()) rc.config_path = config_path;
  rc.output_dir = out_dir;
  for (const auto& in : inputs) rc.inputs.emplace_back(in);
  rc.overrides = overrides;
  if (seed >= 0) rc.seed = static_cast<std::uint64_t>(seed);

  return ppres::cli::run(rc);
}
