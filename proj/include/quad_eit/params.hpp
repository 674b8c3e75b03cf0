#pragma once

#include <complex>
#include <functional>
#include <optional>

namespace qeit {

using complex = std::complex<double>;

enum class DetuningMode { Effective, Bare };

/// Experiment description in SI units.
///
/// Exactly one of `finesse`/`kappa` and exactly one of `reflectivity`/`g_override`
/// must be set. `detuning_value` is the effective detuning Delta (rad/s) in
/// Effective mode and the bare cavity detuning omega_0 - omega_c in Bare mode.
struct PhysicalConfig {
    double wavelength = 0.0;     // m
    double cavity_length = 0.0;  // m
    double mass = 0.0;           // kg
    double omega_m = 0.0;        // rad/s
    double gamma_m = 0.0;        // 1/s
    std::optional<double> finesse;
    std::optional<double> kappa;  // rad/s
    std::optional<double> reflectivity;
    std::optional<double> g_override;  // rad/(s m^2)
    double pump_power = 0.0;           // W
    double probe_power = 0.0;          // W
    double temperature = 0.0;          // K
    DetuningMode detuning_mode = DetuningMode::Effective;
    double detuning_value = 0.0;  // rad/s

    friend bool operator==(const PhysicalConfig&, const PhysicalConfig&) = default;
};

/// Throws DomainError describing the first violated invariant.
void validate(const PhysicalConfig& cfg);

struct DerivedRates {
    double omega_c = 0.0;  // rad/s, pump carrier
    double kappa = 0.0;    // rad/s, cavity amplitude decay
    double g = 0.0;        // rad/(s m^2)
    double eps_c = 0.0;    // sqrt(photons)/s
    double eps_p = 0.0;    // sqrt(photons)/s
    double n_th = 0.0;
    double quality = 0.0;  // omega_m / gamma_m (infinite for gamma_m = 0)
};

/// Zeroth-order solution of the mean-value equations.
struct SteadyState {
    complex c0;
    double photon_number = 0.0;  // |c0|^2
    double X0 = 0.0;             // <q^2>, m^2
    double Y0 = 0.0;             // <p^2>, kg^2 m^2 / s^2
    double Z0 = 0.0;             // <qp+pq>, kg m^2 / s
    double alpha = 0.0;          // hbar g |c0|^2 / (m omega_m^2)
    double beta = 0.0;           // g X0 / omega_m
    double Delta = 0.0;          // effective detuning, rad/s
    double bare_detuning = 0.0;  // omega_0 - omega_c = Delta - beta omega_m
    double n_th = 0.0;
    int iterations = 0;  // fixed-point iterations used (0 when Delta was given)
};

// Derived quantities.
double thermal_occupation(double omega_m, double temperature);
double cavity_decay_from_finesse(double cavity_length, double finesse);
double coupling_constant_from_geometry(double cavity_length, double wavelength, double reflectivity);
double drive_amplitude(double kappa, double power, double omega);

DerivedRates derive_rates(const PhysicalConfig& cfg);

/// Closed-form steady state at a given effective detuning Delta (rad/s).
SteadyState steady_state_given_detuning(const PhysicalConfig& cfg, const DerivedRates& rates,
                                        double Delta);

/// Steady state honoring the config's detuning mode. In Bare mode Delta is
/// found from Delta = (omega_0 - omega_c) + beta(Delta) omega_m.
SteadyState steady_state_self_consistent(const PhysicalConfig& cfg, const DerivedRates& rates);

struct FixedPointResult {
    double Delta = 0.0;
    int iterations = 0;
};

/// Fixed-point closure for the frequency-shifted detuning.
///
/// Iterates Delta <- bare + shift(Delta) from Delta = bare, under-relaxing by
/// 0.5 once successive changes alternate in sign. Converges when a step is
/// below 1e-10 * scale; throws ConvergenceError after 200 iterations. Shared
/// by the SI solver and the dimensionless oracle (scale = omega_m or 1).
FixedPointResult solve_detuning_fixed_point(double bare, const std::function<double(double)>& shift,
                                            double scale);

}  // namespace qeit
