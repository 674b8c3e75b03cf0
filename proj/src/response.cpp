#include "quad_eit/response.hpp"

#include <cmath>
#include <limits>

#include "quad_eit/errors.hpp"

namespace qeit {

namespace {

constexpr complex I{0.0, 1.0};

// Quantities shared between numerator and denominator at one delta.
struct Factors {
    complex mechanical;    // delta^2 - 4 wm^2 + 2i gamma delta - 8 alpha wm^2
    complex damping;       // gamma - i delta
    complex lower_cavity;  // kappa - i(Delta + delta)
    complex upper_cavity;  // kappa + i(Delta - delta)
    complex coupling;      // alpha beta wm^3 (2 gamma - i delta)
};

Factors factors(double delta, const ResponseParams& p) {
    const double wm = p.omega_m;
    const double wm2 = wm * wm;
    Factors f;
    f.mechanical = complex(delta * delta - 4.0 * wm2 - 8.0 * p.alpha * wm2,
                           2.0 * p.gamma_m * delta);
    f.damping = complex(p.gamma_m, -delta);
    f.lower_cavity = complex(p.kappa, -(p.Delta + delta));
    f.upper_cavity = complex(p.kappa, p.Delta - delta);
    f.coupling = p.alpha * p.beta * wm2 * wm * complex(2.0 * p.gamma_m, -delta);
    return f;
}

complex denominator(const Factors& f, double Delta) {
    return f.upper_cavity * f.lower_cavity * f.damping * f.mechanical +
           8.0 * Delta * f.coupling;
}

void guard_denominator(complex d) {
    if (!(std::abs(d) > std::numeric_limits<double>::min()) || !std::isfinite(std::abs(d))) {
        throw NumericalError("response denominator d(delta) vanished or overflowed");
    }
}

}  // namespace

ResponseParams response_params(const PhysicalConfig& cfg, const DerivedRates& rates,
                               const SteadyState& steady) {
    return ResponseParams{rates.kappa, cfg.gamma_m, cfg.omega_m, steady.Delta,
                          steady.alpha, steady.beta,  steady.c0,   rates.eps_c};
}

complex denominator_d(double delta, const ResponseParams& p) {
    return denominator(factors(delta, p), p.Delta);
}

complex probe_plus_coefficient(double delta, const ResponseParams& p) {
    const Factors f = factors(delta, p);
    const complex d = denominator(f, p.Delta);
    guard_denominator(d);
    const complex numerator = f.lower_cavity * f.damping * f.mechanical - 4.0 * I * f.coupling;
    return numerator / d;
}

complex probe_minus_coefficient(double delta, const ResponseParams& p) {
    const double modulus2 = std::norm(p.c0);
    if (!(modulus2 > 0.0)) {
        throw DomainError("c_minus undefined without intracavity pump field (|c0| = 0)");
    }
    const Factors f = factors(delta, p);
    const complex d = denominator(f, p.Delta);
    guard_denominator(d);
    const complex phase = p.c0 * p.c0 / modulus2;
    const double wm = p.omega_m;
    const complex numerator = -4.0 * I * p.alpha * p.beta * wm * wm * wm * phase *
                              complex(2.0 * p.gamma_m, delta);
    return numerator / std::conj(d);
}

ProbeResponse total_output_field(double delta, const ResponseParams& p) {
    ProbeResponse r;
    r.delta = delta;
    r.c_plus = probe_plus_coefficient(delta, p);
    r.c_minus = probe_minus_coefficient(delta, p);
    r.eps_T = 2.0 * p.kappa * r.c_plus;
    r.eps_out0 = 2.0 * p.kappa * p.c0 - p.eps_c;
    r.eps_out_plus = r.eps_T - 1.0;
    r.eps_out_minus = 2.0 * p.kappa * r.c_minus;
    r.v_p = r.eps_T.real();
    r.v_p_tilde = r.eps_T.imag();
    return r;
}

complex baseline_response(double delta, double Delta, double kappa) {
    if (!(kappa > 0.0)) throw DomainError("baseline_response: kappa must be positive");
    return 2.0 * kappa / complex(kappa, Delta - delta);
}

}  // namespace qeit
