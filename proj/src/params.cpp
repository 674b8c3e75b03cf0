#include "quad_eit/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "quad_eit/constants.hpp"
#include "quad_eit/errors.hpp"

namespace qeit {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw DomainError(message);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const PhysicalConfig& cfg) {
    require(positive_finite(cfg.wavelength), "wavelength must be positive");
    require(positive_finite(cfg.cavity_length), "cavity_length must be positive");
    require(positive_finite(cfg.mass), "mass must be positive");
    require(positive_finite(cfg.omega_m), "omega_m must be positive");
    require(std::isfinite(cfg.gamma_m) && cfg.gamma_m >= 0.0, "gamma_m must be non-negative");
    require(positive_finite(cfg.pump_power), "pump_power must be positive");
    require(std::isfinite(cfg.probe_power) && cfg.probe_power >= 0.0,
            "probe_power must be non-negative");
    require(positive_finite(cfg.temperature), "temperature must be positive");
    require(std::isfinite(cfg.detuning_value), "detuning must be finite");

    require(cfg.finesse.has_value() != cfg.kappa.has_value(),
            "exactly one of finesse or kappa must be given");
    if (cfg.finesse) require(positive_finite(*cfg.finesse), "finesse must be positive");
    if (cfg.kappa) require(positive_finite(*cfg.kappa), "kappa must be positive");

    require(cfg.reflectivity.has_value() != cfg.g_override.has_value(),
            "exactly one of reflectivity or g_override must be given");
    if (cfg.reflectivity) {
        require(*cfg.reflectivity < 1.0,
                "reflectivity must be < 1: coupling formula singular at unit reflectivity");
        require(*cfg.reflectivity >= 0.0, "reflectivity must be in [0, 1)");
    }
    if (cfg.g_override) {
        require(std::isfinite(*cfg.g_override) && *cfg.g_override >= 0.0,
                "g_override must be non-negative");
    }
}

double thermal_occupation(double omega_m, double temperature) {
    require(positive_finite(omega_m), "thermal_occupation: omega_m must be positive");
    require(!std::isnan(temperature) && temperature >= 0.0,
            "thermal_occupation: negative temperature");
    if (temperature == 0.0) return 0.0;
    const double x = constants::hbar * omega_m / (constants::boltzmann * temperature);
    return 1.0 / std::expm1(x);
}

double cavity_decay_from_finesse(double cavity_length, double finesse) {
    require(positive_finite(cavity_length) && positive_finite(finesse),
            "cavity_decay_from_finesse: length and finesse must be positive");
    return constants::pi * constants::speed_of_light / (2.0 * finesse * cavity_length);
}

double coupling_constant_from_geometry(double cavity_length, double wavelength,
                                       double reflectivity) {
    require(positive_finite(cavity_length) && positive_finite(wavelength),
            "coupling_constant_from_geometry: length and wavelength must be positive");
    require(reflectivity < 1.0, "coupling formula singular at unit reflectivity");
    require(reflectivity >= 0.0, "coupling_constant_from_geometry: reflectivity must be >= 0");
    return 8.0 * constants::pi * constants::pi * constants::speed_of_light /
           (cavity_length * wavelength * wavelength * std::sqrt(2.0 * (1.0 - reflectivity)));
}

double drive_amplitude(double kappa, double power, double omega) {
    require(positive_finite(kappa) && positive_finite(omega),
            "drive_amplitude: kappa and omega must be positive");
    require(!std::isnan(power) && power >= 0.0, "drive_amplitude: negative power");
    return std::sqrt(2.0 * kappa * power / (constants::hbar * omega));
}

DerivedRates derive_rates(const PhysicalConfig& cfg) {
    validate(cfg);
    DerivedRates r;
    r.omega_c = constants::two_pi * constants::speed_of_light / cfg.wavelength;
    r.kappa = cfg.kappa ? *cfg.kappa : cavity_decay_from_finesse(cfg.cavity_length, *cfg.finesse);
    r.g = cfg.g_override ? *cfg.g_override
                         : coupling_constant_from_geometry(cfg.cavity_length, cfg.wavelength,
                                                           *cfg.reflectivity);
    r.eps_c = drive_amplitude(r.kappa, cfg.pump_power, r.omega_c);
    // The probe sits within a few omega_m of the pump; hbar*omega_p ~ hbar*omega_c.
    r.eps_p = drive_amplitude(r.kappa, cfg.probe_power, r.omega_c);
    r.n_th = thermal_occupation(cfg.omega_m, cfg.temperature);
    r.quality = cfg.gamma_m > 0.0 ? cfg.omega_m / cfg.gamma_m
                                  : std::numeric_limits<double>::infinity();
    return r;
}

SteadyState steady_state_given_detuning(const PhysicalConfig& cfg, const DerivedRates& rates,
                                        double Delta) {
    require(std::isfinite(Delta), "steady state: Delta must be finite");
    const double m = cfg.mass;
    const double wm = cfg.omega_m;

    SteadyState s;
    s.Delta = Delta;
    s.n_th = rates.n_th;
    s.c0 = rates.eps_c / complex(rates.kappa, Delta);
    s.photon_number = std::norm(s.c0);
    s.alpha = constants::hbar * rates.g * s.photon_number / (m * wm * wm);
    s.Y0 = (1.0 + 2.0 * rates.n_th) * m * constants::hbar * wm / 2.0;
    s.X0 = s.Y0 / (m * m * wm * wm * (1.0 + 2.0 * s.alpha));
    s.Z0 = 0.0;
    s.beta = rates.g * s.X0 / wm;
    s.bare_detuning = Delta - s.beta * wm;
    return s;
}

FixedPointResult solve_detuning_fixed_point(double bare, const std::function<double(double)>& shift,
                                            double scale) {
    constexpr int max_iterations = 200;
    constexpr double tolerance = 1e-10;

    double current = bare;
    double previous_step = 0.0;
    double relaxation = 1.0;
    for (int k = 1; k <= max_iterations; ++k) {
        const double target = bare + shift(current);
        if (!std::isfinite(target)) {
            throw ConvergenceError("detuning fixed point produced a non-finite iterate", current,
                                   target);
        }
        double step = target - current;
        if (relaxation == 1.0 && previous_step != 0.0 && step * previous_step < 0.0) {
            relaxation = 0.5;
        }
        step *= relaxation;
        const double next = current + step;
        if (std::abs(step) < tolerance * scale) return {next, k};
        previous_step = step;
        if (k == max_iterations) {
            std::ostringstream msg;
            msg << "detuning fixed point did not converge after " << max_iterations
                << " iterations (last iterates " << current << ", " << next << " rad/s)";
            throw ConvergenceError(msg.str(), current, next);
        }
        current = next;
    }
    return {current, max_iterations};  // unreachable
}

SteadyState steady_state_self_consistent(const PhysicalConfig& cfg, const DerivedRates& rates) {
    if (cfg.detuning_mode == DetuningMode::Effective) {
        return steady_state_given_detuning(cfg, rates, cfg.detuning_value);
    }
    const double bare = cfg.detuning_value;
    const auto shift = [&](double Delta) {
        return steady_state_given_detuning(cfg, rates, Delta).beta * cfg.omega_m;
    };
    const FixedPointResult fp = solve_detuning_fixed_point(bare, shift, cfg.omega_m);
    SteadyState s = steady_state_given_detuning(cfg, rates, fp.Delta);
    s.bare_detuning = bare;
    s.iterations = fp.iterations;
    return s;
}

}  // namespace qeit
