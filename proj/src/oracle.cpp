#include "quad_eit/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "quad_eit/constants.hpp"
#include "quad_eit/errors.hpp"
#include "quad_eit/rk4.hpp"

namespace qeit::oracle {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;

Vec5 pack(const MeanFieldState& s) {
    Vec5 y;
    y << s.c.real(), s.c.imag(), s.u, s.v, s.w;
    return y;
}

MeanFieldState unpack(const Vec5& y) { return {complex(y[0], y[1]), y[2], y[3], y[4]}; }

Vec5 rhs(const DimensionlessParams& p, double tau, const Vec5& y) {
    const complex c(y[0], y[1]);
    const double u = y[2];
    const double v = y[3];
    const double w = y[4];
    const complex probe = p.eps_p_t * std::polar(1.0, -p.delta_t * tau);
    const complex dc = -complex(p.kappa_t, p.Delta0_t + p.g_t * u) * c + p.eps_c_t + probe;
    const double stiffness = 1.0 + 2.0 * p.g_t * std::norm(c);
    Vec5 dy;
    dy << dc.real(), dc.imag(), w,
        -stiffness * w - 2.0 * p.gamma_t * v + p.gamma_t * (1.0 + 2.0 * p.n_th),
        2.0 * v - 2.0 * stiffness * u - p.gamma_t * w;
    return dy;
}

void record(Trajectory& traj, double tau, const Vec5& y) {
    traj.tau.push_back(tau);
    traj.c.emplace_back(y[0], y[1]);
    traj.u.push_back(y[2]);
    traj.v.push_back(y[3]);
    traj.w.push_back(y[4]);
}

double expected_second_order(const DimensionlessParams& p, double dc_level) {
    const double r = p.eps_c_t > 0.0 ? p.eps_p_t / p.eps_c_t : 0.0;
    return (r * r + 1e-10) * std::max(dc_level, 1e-300);
}

}  // namespace

Scales scales(const PhysicalConfig& cfg) {
    const double m = cfg.mass;
    const double wm = cfg.omega_m;
    Scales s;
    s.time = 1.0 / wm;
    s.q2 = constants::hbar / (m * wm);
    s.p2 = m * constants::hbar * wm;
    s.qp = constants::hbar;
    s.rate = wm;
    s.coupling = m * wm * wm / constants::hbar;
    return s;
}

DimensionlessParams nondimensionalize(const PhysicalConfig& cfg, const DerivedRates& rates,
                                      const SteadyState& steady, double delta) {
    const double wm = cfg.omega_m;
    DimensionlessParams p;
    p.kappa_t = rates.kappa / wm;
    p.gamma_t = cfg.gamma_m / wm;
    p.delta_t = delta / wm;
    p.Delta0_t = steady.bare_detuning / wm;
    p.g_t = constants::hbar * rates.g / (cfg.mass * wm * wm);
    p.eps_c_t = rates.eps_c / wm;
    p.eps_p_t = rates.eps_p / wm;
    p.n_th = rates.n_th;
    return p;
}

DimensionlessParams desk_scale_point(double kappa_t, double gamma_t, double alpha, double n_th,
                                     double Delta_t, double delta_t, double g_t) {
    if (!(g_t > 0.0) || !(alpha > 0.0)) {
        throw DomainError("desk_scale_point: alpha and g_t must be positive");
    }
    const double u0 = (1.0 + 2.0 * n_th) / (2.0 * (1.0 + 2.0 * alpha));
    DimensionlessParams p;
    p.kappa_t = kappa_t;
    p.gamma_t = gamma_t;
    p.delta_t = delta_t;
    p.Delta0_t = Delta_t - g_t * u0;
    p.g_t = g_t;
    p.eps_c_t = std::sqrt(alpha / g_t) * std::abs(complex(kappa_t, Delta_t));
    p.eps_p_t = 0.0;
    p.n_th = n_th;
    return p;
}

ScaledSteady scaled_steady_state(const DimensionlessParams& p) {
    const auto at = [&](double Delta_t) {
        ScaledSteady s;
        s.Delta_t = Delta_t;
        s.c0 = p.eps_c_t / complex(p.kappa_t, Delta_t);
        s.alpha = p.g_t * std::norm(s.c0);
        s.v0 = (1.0 + 2.0 * p.n_th) / 2.0;
        s.u0 = s.v0 / (1.0 + 2.0 * s.alpha);
        s.w0 = 0.0;
        s.beta = p.g_t * s.u0;
        return s;
    };
    const auto fp =
        solve_detuning_fixed_point(p.Delta0_t, [&](double D) { return at(D).beta; }, 1.0);
    return at(fp.Delta);
}

ResponseParams scaled_response_params(const DimensionlessParams& p) {
    const ScaledSteady s = scaled_steady_state(p);
    return ResponseParams{p.kappa_t, p.gamma_t, 1.0, s.Delta_t, s.alpha, s.beta, s.c0, p.eps_c_t};
}

MeanFieldState mean_field_rhs(const DimensionlessParams& p, double tau, const MeanFieldState& s) {
    return unpack(rhs(p, tau, pack(s)));
}

double max_step(const DimensionlessParams& p) {
    const double fastest =
        std::max({1.0, p.kappa_t, std::abs(p.Delta0_t), std::abs(p.delta_t)});
    return constants::two_pi / (50.0 * fastest);
}

Trajectory integrate_mean_field(const DimensionlessParams& p, double tau_end, double dtau,
                                std::optional<MeanFieldState> initial, std::size_t record_every) {
    if (!(dtau > 0.0) || dtau > max_step(p) * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "integration step " << dtau << " outside (0, " << max_step(p) << "]";
        throw ConfigError(msg.str());
    }
    if (!(tau_end > 0.0) || !std::isfinite(tau_end)) {
        throw ConfigError("integration horizon must be positive and finite");
    }
    if (p.eps_c_t > 0.0 && p.eps_p_t / p.eps_c_t > 1e-2) {
        throw ConfigError("probe must be weak: eps_p / eps_c <= 1e-2");
    }
    if (p.kappa_t < 0.0 || p.gamma_t < 0.0 || p.n_th < 0.0) {
        throw ConfigError("rates and occupation must be non-negative");
    }
    record_every = std::max<std::size_t>(record_every, 1);

    Vec5 y;
    if (initial) {
        y = pack(*initial);
    } else {
        const ScaledSteady s = scaled_steady_state(p);
        y = pack({s.c0, s.u0, s.v0, s.w0});
    }

    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(tau_end / dtau - 1e-9)));
    const auto f = [&p](double tau, const Vec5& state) { return rhs(p, tau, state); };

    Trajectory traj;
    traj.params = p;
    const std::size_t reserve = steps / record_every + 2;
    traj.tau.reserve(reserve);
    traj.c.reserve(reserve);
    traj.u.reserve(reserve);
    traj.v.reserve(reserve);
    traj.w.reserve(reserve);
    record(traj, 0.0, y);

    for (std::size_t k = 1; k <= steps; ++k) {
        const double tau = static_cast<double>(k - 1) * dtau;
        y = rk4_step(f, tau, y, dtau);
        if (!y.allFinite()) {
            std::ostringstream msg;
            msg << "mean-field integration diverged at step " << k << " (tau = " << tau + dtau
                << ")";
            throw DivergenceError(msg.str(), k);
        }
        if (k % record_every == 0 || k == steps) record(traj, static_cast<double>(k) * dtau, y);
    }
    return traj;
}

HarmonicFit fit_harmonics(const std::vector<double>& tau, const std::vector<complex>& values,
                          double delta_t) {
    const auto n = static_cast<Eigen::Index>(tau.size());
    if (n < 3 || values.size() != tau.size()) {
        throw DomainError("harmonic fit needs at least three matching samples");
    }
    Eigen::MatrixXcd design(n, 3);
    Eigen::VectorXcd rhs_values(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = tau[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        design(i, 1) = std::polar(1.0, -delta_t * t);
        design(i, 2) = std::polar(1.0, delta_t * t);
        rhs_values(i) = values[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXcd a = design.colPivHouseholderQr().solve(rhs_values);
    const Eigen::VectorXcd residual = design * a - rhs_values;

    HarmonicFit fit;
    fit.A0 = a(0);
    fit.A_plus = a(1);
    fit.A_minus = a(2);
    fit.residual_rms = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
    return fit;
}

HarmonicDecomposition extract_harmonics(const Trajectory& traj, double delta_t,
                                        int window_cycles) {
    if (window_cycles < 20) throw DomainError("harmonic window needs at least 20 probe cycles");
    if (!(delta_t > 0.0)) throw DomainError("harmonic extraction needs a positive probe detuning");
    if (traj.size() < 3) throw DomainError("trajectory too short for harmonic extraction");

    const double window = window_cycles * constants::two_pi / delta_t;
    const double tau_last = traj.tau.back();
    const double tau_first = tau_last - window;
    if (tau_first < traj.tau.front() - 1e-12) {
        throw DomainError("harmonic window exceeds the trajectory");
    }
    const auto begin = static_cast<std::size_t>(
        std::lower_bound(traj.tau.begin(), traj.tau.end(), tau_first - 1e-12) - traj.tau.begin());

    const std::vector<double> tau(traj.tau.begin() + static_cast<std::ptrdiff_t>(begin),
                                  traj.tau.end());
    const auto slice_complex = [&](const auto& series, auto transform) {
        std::vector<complex> out;
        out.reserve(tau.size());
        for (std::size_t i = begin; i < series.size(); ++i) out.push_back(transform(series[i]));
        return out;
    };
    const auto as_complex = [](double x) { return complex(x, 0.0); };

    HarmonicDecomposition h;
    h.samples = tau.size();
    h.c = fit_harmonics(tau, slice_complex(traj.c, [](complex z) { return z; }), delta_t);
    h.c_dag = fit_harmonics(tau, slice_complex(traj.c, [](complex z) { return std::conj(z); }),
                            delta_t);
    h.u = fit_harmonics(tau, slice_complex(traj.u, as_complex), delta_t);
    h.v = fit_harmonics(tau, slice_complex(traj.v, as_complex), delta_t);
    h.w = fit_harmonics(tau, slice_complex(traj.w, as_complex), delta_t);

    const DimensionlessParams& p = traj.params;
    const double eps = p.eps_p_t;
    const auto per_probe = [eps](complex a) { return eps > 0.0 ? a / eps : complex(0.0, 0.0); };

    h.c0_num = h.c.A0;
    h.c_plus_num = per_probe(h.c.A_plus);
    h.c_minus_num = per_probe(h.c.A_minus);
    h.X0_num = h.u.A0.real();
    h.X_plus_num = per_probe(h.u.A_plus);
    h.X_minus_num = per_probe(h.u.A_minus);
    h.Y0_num = h.v.A0.real();
    h.Y_plus_num = per_probe(h.v.A_plus);
    h.Y_minus_num = per_probe(h.v.A_minus);
    h.Z0_num = h.w.A0.real();
    h.Z_plus_num = per_probe(h.w.A_plus);
    h.Z_minus_num = per_probe(h.w.A_minus);

    for (const HarmonicFit* fit : {&h.c, &h.u, &h.v}) {
        if (fit->residual_rms > 10.0 * expected_second_order(p, std::abs(fit->A0))) {
            h.poor_separation = true;
        }
    }
    return h;
}

VerificationReport verify_against_analytic(const DimensionlessParams& p,
                                           const VerifyOptions& options) {
    if (!(p.gamma_t >= 0.01)) {
        throw ConfigError("oracle verification needs gamma_m / omega_m >= 0.01 so transients decay");
    }
    if (!(p.delta_t > 0.0)) throw ConfigError("oracle verification needs delta > 0");

    VerificationReport report;
    report.params = p;
    const double window = options.window_cycles * constants::two_pi / p.delta_t;
    report.tau_end = options.tau_end > 0.0 ? options.tau_end : 30.0 / p.gamma_t + window;
    report.dtau = options.dtau > 0.0 ? options.dtau : std::min(0.01, max_step(p));
    if (report.tau_end - window < 10.0 / p.gamma_t) {
        throw ConfigError("fit window starts before 10 / gamma_t; transients would leak into the fit");
    }

    const ResponseParams analytic = scaled_response_params(p);
    report.c_plus_analytic = probe_plus_coefficient(p.delta_t, analytic);
    report.c_minus_analytic = probe_minus_coefficient(p.delta_t, analytic);

    const auto run = [&](double ratio) {
        DimensionlessParams probed = p;
        probed.eps_p_t = ratio * p.eps_c_t;
        const Trajectory traj = integrate_mean_field(probed, report.tau_end, report.dtau);
        const HarmonicDecomposition h = extract_harmonics(traj, p.delta_t, options.window_cycles);
        ProbeRun r;
        r.probe_ratio = ratio;
        r.c_plus_num = h.c_plus_num;
        r.c_minus_num = h.c_minus_num;
        r.rel_err_plus =
            std::abs(h.c_plus_num - report.c_plus_analytic) / std::abs(report.c_plus_analytic);
        // Without coupling c- vanishes; measure against |c+| instead.
        const double minus_scale = std::abs(report.c_minus_analytic) > 0.0
                                       ? std::abs(report.c_minus_analytic)
                                       : std::abs(report.c_plus_analytic);
        r.rel_err_minus = std::abs(h.c_minus_num - report.c_minus_analytic) / minus_scale;
        r.poor_separation = h.poor_separation;
        return r;
    };

    auto strong = std::async(std::launch::async, run, options.probe_ratio_strong);
    report.weak = run(options.probe_ratio_weak);
    report.strong = strong.get();
    report.error_ratio_plus = report.strong.rel_err_plus / report.weak.rel_err_plus;
    report.error_ratio_minus = report.strong.rel_err_minus / report.weak.rel_err_minus;
    return report;
}

}  // namespace qeit::oracle
