#pragma once

#include "quad_eit/constants.hpp"
#include "quad_eit/params.hpp"

namespace qeit::testing {

inline constexpr double omega_m = constants::two_pi * 1e5;

/// 532 nm, 6.7 cm cavity, F = 6940, 1e-9 g membrane at 100 kHz, Delta = 2 omega_m.
inline PhysicalConfig base_config() {
    PhysicalConfig c;
    c.wavelength = 532e-9;
    c.cavity_length = 0.067;
    c.mass = 1e-12;
    c.omega_m = omega_m;
    c.finesse = 6940.0;
    c.detuning_mode = DetuningMode::Effective;
    c.detuning_value = 2.0 * omega_m;
    return c;
}

inline PhysicalConfig set1() {
    PhysicalConfig c = base_config();
    c.gamma_m = 1.0;
    c.reflectivity = 0.42;
    c.pump_power = 20e-6;
    c.temperature = 20.0;
    return c;
}

inline PhysicalConfig set2() {
    PhysicalConfig c = base_config();
    c.gamma_m = 900.0;
    c.reflectivity = 0.999;
    c.pump_power = 10e-6;
    c.temperature = 100.0;
    return c;
}

}  // namespace qeit::testing
