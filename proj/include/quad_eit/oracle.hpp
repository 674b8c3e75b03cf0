#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "quad_eit/params.hpp"
#include "quad_eit/response.hpp"

namespace qeit::oracle {

/// Mean-value equations in units where time is 1/omega_m, <q^2> is hbar/(m omega_m),
/// <p^2> is m hbar omega_m and <qp+pq> is hbar.
struct DimensionlessParams {
    double kappa_t = 0.0;   // kappa / omega_m
    double gamma_t = 0.0;   // gamma_m / omega_m
    double delta_t = 0.0;   // probe detuning / omega_m
    double Delta0_t = 0.0;  // bare detuning (omega_0 - omega_c) / omega_m
    double g_t = 0.0;       // hbar g / (m omega_m^2); alpha = g_t |c0|^2
    double eps_c_t = 0.0;   // eps_c / omega_m
    double eps_p_t = 0.0;   // eps_p / omega_m
    double n_th = 0.0;
};

/// Conversion factors from scaled to SI quantities.
struct Scales {
    double time = 0.0;       // s per unit tau
    double q2 = 0.0;         // m^2 per unit u
    double p2 = 0.0;         // kg^2 m^2 s^-2 per unit v
    double qp = 0.0;         // kg m^2 s^-1 per unit w
    double rate = 0.0;       // rad/s per unit scaled rate (omega_m)
    double coupling = 0.0;   // rad/(s m^2) per unit g_t
};

Scales scales(const PhysicalConfig& cfg);

/// Scales a physical setup at probe detuning delta (rad/s). The bare detuning is
/// taken from the steady state so Delta0_t + g_t u0 reproduces its Delta.
DimensionlessParams nondimensionalize(const PhysicalConfig& cfg, const DerivedRates& rates,
                                      const SteadyState& steady, double delta);

/// A dimensionless operating point given by its effective detuning and alpha;
/// g_t is a free choice that sets |c0|^2 = alpha / g_t.
DimensionlessParams desk_scale_point(double kappa_t, double gamma_t, double alpha, double n_th,
                                     double Delta_t, double delta_t, double g_t);

/// Analytic zeroth-order state in scaled units.
struct ScaledSteady {
    complex c0;
    double u0 = 0.0;
    double v0 = 0.0;
    double w0 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double Delta_t = 0.0;
};

ScaledSteady scaled_steady_state(const DimensionlessParams& p);

/// Inputs for the analytic response in scaled units (omega_m = 1).
ResponseParams scaled_response_params(const DimensionlessParams& p);

struct MeanFieldState {
    complex c;
    double u = 0.0;
    double v = 0.0;
    double w = 0.0;
};

/// Right-hand side of the scaled mean-value equations at time tau.
MeanFieldState mean_field_rhs(const DimensionlessParams& p, double tau, const MeanFieldState& s);

struct Trajectory {
    DimensionlessParams params;
    std::vector<double> tau;
    std::vector<complex> c;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> w;

    std::size_t size() const { return tau.size(); }
    MeanFieldState state(std::size_t i) const { return {c[i], u[i], v[i], w[i]}; }
};

/// Largest step accepted by integrate_mean_field.
double max_step(const DimensionlessParams& p);

/// Fixed-step RK4 integration of the five-variable system from tau = 0 to tau_end.
///
/// Starts from `initial`, or from the analytic steady state when omitted. Every
/// `record_every`-th step is stored (the endpoints always are). Throws ConfigError
/// if dtau exceeds max_step(p) and DivergenceError on a non-finite state.
Trajectory integrate_mean_field(const DimensionlessParams& p, double tau_end, double dtau,
                                std::optional<MeanFieldState> initial = std::nullopt,
                                std::size_t record_every = 1);

struct HarmonicFit {
    complex A0;
    complex A_plus;   // coefficient of e^{-i delta tau}
    complex A_minus;  // coefficient of e^{+i delta tau}
    double residual_rms = 0.0;
};

struct HarmonicDecomposition {
    HarmonicFit c;
    HarmonicFit c_dag;
    HarmonicFit u;
    HarmonicFit v;
    HarmonicFit w;

    // Probe-normalized estimates (A_pm / eps_p_t), scaled units.
    complex c0_num;
    complex c_plus_num;
    complex c_minus_num;
    double X0_num = 0.0;
    complex X_plus_num;
    complex X_minus_num;
    double Y0_num = 0.0;
    complex Y_plus_num;
    complex Y_minus_num;
    double Z0_num = 0.0;
    complex Z_plus_num;
    complex Z_minus_num;

    std::size_t samples = 0;
    bool poor_separation = false;
};

/// Least-squares fit of A0 + A+ e^{-i delta tau} + A- e^{+i delta tau} to each
/// variable over the last `window_cycles` probe periods of the trajectory.
HarmonicDecomposition extract_harmonics(const Trajectory& traj, double delta_t, int window_cycles);

/// Fit on raw samples; exposed for synthetic checks.
HarmonicFit fit_harmonics(const std::vector<double>& tau, const std::vector<complex>& values,
                          double delta_t);

struct VerifyOptions {
    double probe_ratio_strong = 1e-3;
    double probe_ratio_weak = 1e-4;
    double tau_end = 0.0;  // 0: 30 / gamma_t plus the fit window
    double dtau = 0.0;     // 0: min(0.01, max_step)
    int window_cycles = 100;
};

struct ProbeRun {
    double probe_ratio = 0.0;
    complex c_plus_num;
    complex c_minus_num;
    double rel_err_plus = 0.0;
    double rel_err_minus = 0.0;
    bool poor_separation = false;
};

struct VerificationReport {
    DimensionlessParams params;
    complex c_plus_analytic;
    complex c_minus_analytic;
    ProbeRun strong;
    ProbeRun weak;
    double error_ratio_plus = 0.0;   // strong / weak
    double error_ratio_minus = 0.0;
    double tau_end = 0.0;
    double dtau = 0.0;
};

/// Integrates at two probe strengths (concurrently) and compares the extracted
/// c+ and c- with the closed-form values. Requires gamma_t >= 0.01.
VerificationReport verify_against_analytic(const DimensionlessParams& p,
                                           const VerifyOptions& options = {});

}  // namespace qeit::oracle
