#pragma once

#include <optional>
#include <vector>

#include "quad_eit/params.hpp"
#include "quad_eit/response.hpp"

namespace qeit {

/// Uniform probe-detuning grid, endpoints inclusive (rad/s).
struct SweepSpec {
    double delta_min = 0.0;
    double delta_max = 0.0;
    int points = 0;
    bool include_baseline = true;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct SweepRow {
    double delta = 0.0;
    ProbeResponse response;
    std::optional<complex> baseline;  // uncoupled eps_T at the same Delta, kappa
};

struct SweepResult {
    std::vector<SweepRow> rows;
    SteadyState steady;
    ResponseParams params;
};

std::vector<double> sweep_grid(const SweepSpec& spec);

SweepResult run_sweep(const PhysicalConfig& cfg, const SweepSpec& spec);
SweepResult run_sweep(const ResponseParams& params, const SteadyState& steady,
                      const SweepSpec& spec);

/// Two-phonon resonance 2 omega_m sqrt(1 + 2 alpha), where the shifted
/// mechanical factor vanishes.
double predicted_dip(const ResponseParams& params);

/// Absorptive quadrature with the X0-mediated pathway removed (beta = 0).
double envelope_v_p(double delta, const ResponseParams& params);

struct DipMetrics {
    double delta_dip = 0.0;      // rad/s
    double depth = 0.0;          // envelope v_p minus dip v_p
    double fwhm = 0.0;           // rad/s
    double predicted_dip = 0.0;  // rad/s
    double fwhm_hz() const;      // fwhm / 2 pi
};

/// Locates the transparency dip within +-0.5 omega_m of predicted_dip (clipped
/// to the sweep range). Throws NoDipError when there is no interior minimum and
/// InsufficientSpanError when the half-depth crossings are not bracketed or the
/// grid has fewer than 10 points across the width.
DipMetrics find_dip(const SweepResult& sweep, const SteadyState& steady);

struct DispersionRow {
    double delta = 0.0;
    double v_p_tilde = 0.0;
    double baseline_v_p_tilde = 0.0;
};

struct DispersionProfile {
    std::vector<DispersionRow> rows;
    std::optional<double> dip_delta;
    double slope_at_dip = 0.0;           // d v_p_tilde / d delta, coupled
    double baseline_slope_at_dip = 0.0;  // same for the uncoupled curve
    // Span around the dip where the coupled slope has the opposite sign.
    std::optional<double> anomalous_from;
    std::optional<double> anomalous_to;

    bool inverted() const { return dip_delta && slope_at_dip * baseline_slope_at_dip < 0.0; }
};

DispersionProfile dispersion_profile(const SweepResult& sweep);

}  // namespace qeit
