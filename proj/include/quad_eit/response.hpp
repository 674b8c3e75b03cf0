#pragma once

#include <complex>

#include "quad_eit/params.hpp"

namespace qeit {

/// Everything the first-order response depends on. Rates may be in SI (rad/s)
/// or scaled by omega_m (then omega_m = 1); the formulas are unit-agnostic.
struct ResponseParams {
    double kappa = 0.0;
    double gamma_m = 0.0;
    double omega_m = 0.0;
    double Delta = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    complex c0;
    double eps_c = 0.0;
};

ResponseParams response_params(const PhysicalConfig& cfg, const DerivedRates& rates,
                               const SteadyState& steady);

/// First-order amplitudes at one probe detuning delta = omega_p - omega_c.
///
/// c_plus multiplies eps_p e^{-i delta t} and c_minus multiplies eps_p^* e^{+i delta t}
/// in the intracavity mean field; both are per unit probe amplitude.
struct ProbeResponse {
    double delta = 0.0;
    complex c_plus;
    complex c_minus;
    complex eps_T;          // 2 kappa c_plus
    complex eps_out0;       // 2 kappa c0 - eps_c
    complex eps_out_plus;   // 2 kappa c_plus - 1
    complex eps_out_minus;  // 2 kappa c_minus
    double v_p = 0.0;        // Re eps_T
    double v_p_tilde = 0.0;  // Im eps_T
};

complex denominator_d(double delta, const ResponseParams& p);
complex probe_plus_coefficient(double delta, const ResponseParams& p);
complex probe_minus_coefficient(double delta, const ResponseParams& p);
ProbeResponse total_output_field(double delta, const ResponseParams& p);

/// Uncoupled (g = 0) transmission 2 kappa / (kappa + i(Delta - delta)).
complex baseline_response(double delta, double Delta, double kappa);

}  // namespace qeit
