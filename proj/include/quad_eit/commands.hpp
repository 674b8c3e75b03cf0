#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "quad_eit/config.hpp"
#include "quad_eit/oracle.hpp"
#include "quad_eit/sweep.hpp"

namespace qeit {

inline constexpr std::string_view sweep_csv_header =
    "delta_over_omega_m, v_p, v_p_tilde, abs_eps_T, re_eps_out_minus, im_eps_out_minus, "
    "baseline_v_p, baseline_v_p_tilde";

/// Scientific notation, 12 significant digits.
std::string format_number(double value);

void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void write_baseline_csv(std::ostream& out, const SweepResult& sweep);
void write_trajectory_csv(std::ostream& out, const oracle::Trajectory& traj);

/// Single-line JSON object with the dip metrics (no trailing newline).
std::string dip_footer_json(const DipMetrics& metrics, double omega_m);

SweepSpec sweep_spec(const RunConfig& run, const SweepWindow& window);

/// Sweep for dip analysis: the configured window if any, otherwise windows
/// centred on the predicted dip that shrink tenfold until the dip is resolved.
std::pair<SweepResult, DipMetrics> dip_sweep(const RunConfig& run);

/// Dimensionless oracle inputs derived from a run configuration.
oracle::DimensionlessParams verify_params(const RunConfig& run);

struct CommandOptions {
    std::optional<std::string> dump_trajectory;
};

void cmd_steady(const RunConfig& run, std::ostream& out);
void cmd_sweep(const RunConfig& run, std::ostream& out);
void cmd_dip(const RunConfig& run, std::ostream& out);
void cmd_baseline(const RunConfig& run, std::ostream& out);
/// Returns true when both probe strengths agree with the closed form.
bool cmd_verify(const RunConfig& run, const CommandOptions& options, std::ostream& out);

/// Dispatches a command, writing data to run.output (or `out`) and diagnostics
/// to `err`. Returns the process exit status: 0 on success, otherwise the
/// error category code (2 config, 3 convergence, 4 numerical).
int run_command(std::string_view command, const RunConfig& run, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace qeit
