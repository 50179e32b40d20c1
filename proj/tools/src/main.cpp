#include "commands.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>

using namespace horizonlab::cli;

int main(int argc, char** argv) {
  CLI::App app{"horizonlab: finite- and infinite-horizon optimal control experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "horizonlab 0.1.0");

  std::string spec, control, out = "-", out_dir = ".", matrices, type = "both";
  std::optional<std::size_t> jobs, samples;
  std::optional<double> band;

  auto* sim = app.add_subcommand("simulate", "Integrate the spec's system under a control; writes a trajectory CSV");
  sim->add_option("--spec", spec, "Problem spec (JSON)")->required();
  sim->add_option("--control", control, "Control JSON {breakpoints, values, tail}; defaults to the spec's control");
  sim->add_option("--out", out, "Trajectory CSV path, '-' for stdout")->capture_default_str();

  auto* cond = app.add_subcommand("check-condition", "Check the bang-bang conditions for a commuting pair");
  cond->add_option("--matrices", matrices, "JSON file {A1: [[...]], A2: [[...]]}")->required();
  cond->add_option("--type", type, "one_zero, zero_one or both")->capture_default_str();
  cond->add_option("--samples", samples, "Sphere samples for the sampling route");
  cond->add_option("--band", band, "Near-null band |x'Sx| < band");
  cond->add_option("--out", out, "Report JSON path, '-' for stdout")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "Solve the spec's problem at its horizon T");
  solve->add_option("--spec", spec, "Problem spec (JSON)")->required();
  solve->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Solve over the spec's horizons, classify switching times, certify the limit");
  sweep->add_option("--spec", spec, "Problem spec (JSON) with at least three horizons")->required();
  sweep->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  sweep->add_option("--jobs", jobs, "Worker threads (default: HORIZONLAB_JOBS, else all cores)");

  auto* gamma = app.add_subcommand("gamma-probe", "Weak-star, closure, tails and liminf probes");
  gamma->add_option("--spec", spec, "Problem spec (JSON)")->required();
  gamma->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  auto* vacc = app.add_subcommand("sir-vacc", "Optimal vaccination switching time");
  vacc->add_option("--spec", spec, "sir_vacc spec (JSON)")->required();
  vacc->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  auto* npi = app.add_subcommand("sir-npi", "Optimal NPI schedule for both third-arc modes");
  npi->add_option("--spec", spec, "sir_npi spec (JSON)")->required();
  npi->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (*sim) return guarded([&] { return cmd_simulate(spec, control, out); });
  if (*cond) return guarded([&] { return cmd_check_condition(matrices, type, samples, band, out); });
  if (*solve) return guarded([&] { return cmd_solve(spec, out_dir); });
  if (*sweep) return guarded([&] { return cmd_sweep(spec, out_dir, resolve_jobs(jobs)); });
  if (*gamma) return guarded([&] { return cmd_gamma_probe(spec, out_dir); });
  if (*vacc) return guarded([&] { return cmd_sir_vacc(spec, out_dir); });
  if (*npi) return guarded([&] { return cmd_sir_npi(spec, out_dir); });
  return kExitUsage;
}
