#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

namespace horizonlab::cli {

/// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

/// Runs `body`, printing errors to stderr and mapping them to exit codes:
/// configuration and parse errors give kExitUsage, domain and numerical
/// failures give kExitInfeasible.
int guarded(const std::function<int()>& body);

/// Worker count: the flag if given, else HORIZONLAB_JOBS, else the number of cores.
std::size_t resolve_jobs(std::optional<std::size_t> flag);

int cmd_simulate(const std::string& spec_path, const std::string& control_path, const std::string& out_path);
int cmd_check_condition(const std::string& matrices_path, const std::string& type, std::optional<std::size_t> samples,
                        std::optional<double> band, const std::string& out_path);
int cmd_solve(const std::string& spec_path, const std::string& out_dir);
int cmd_sweep(const std::string& spec_path, const std::string& out_dir, std::size_t jobs);
int cmd_gamma_probe(const std::string& spec_path, const std::string& out_dir);
int cmd_sir_vacc(const std::string& spec_path, const std::string& out_dir);
int cmd_sir_npi(const std::string& spec_path, const std::string& out_dir);

} // namespace horizonlab::cli
