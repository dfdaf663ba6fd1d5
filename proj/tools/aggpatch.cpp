#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aggpatch/cli.hpp"

int main(int argc, char** argv) {
  using namespace aggpatch::cli;
  configure_logging();

  CLI::App app{"Contour dynamics for aggregation patches"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run a simulation from a JSON config");
  run->add_option("config", config, "config file")->required();

  std::string snapshot, spec;
  auto* compare = app.add_subcommand("compare", "compare a snapshot with an analytic solution");
  compare->add_option("snapshot", snapshot, "snapshot file")->required();
  compare->add_option("exact-spec", spec, "JSON text or file naming the solution")->required();

  std::string diag_snapshot, grid;
  DiagOptions dopt;
  auto* diag = app.add_subcommand("diag", "diagnostics row for a snapshot");
  diag->add_option("snapshot", diag_snapshot, "snapshot file")->required();
  diag->add_option("grid", grid, "defining-function grid dump");
  diag->add_option("--gamma", dopt.gamma, "Hoelder exponent")->check(CLI::Range(0.0, 1.0));
  diag->add_option("--c-cal", dopt.c_cal, "calibration constant of the log bound");
  diag->add_option("--tube", dopt.tube, "tube half-width for q (0: 0.1 diameter)");
  diag->add_option("--seed", dopt.seed, "seed for pair subsampling");
  diag->add_option("--reference", dopt.reference, "initial snapshot for area ratio and mu");

  std::string exact_spec, out = "-";
  auto* exact = app.add_subcommand("exact", "write an analytic boundary as a snapshot");
  exact->add_option("spec", exact_spec, "JSON text or file naming the solution")->required();
  exact->add_option("-o,--output", out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : user_error;
  }

  if (*run) return cmd_run(config);
  if (*compare) return cmd_compare(snapshot, spec, std::cout);
  if (*diag) {
    return cmd_diag(diag_snapshot, grid.empty() ? std::nullopt : std::optional<std::string>(grid), dopt,
                    std::cout);
  }
  return cmd_exact(exact_spec, out, std::cout);
}
