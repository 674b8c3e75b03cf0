#include "quad_eit/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>

#include "json.hpp"
#include "quad_eit/constants.hpp"
#include "quad_eit/errors.hpp"

namespace qeit {

namespace {

constexpr const char* sep = ", ";

double predicted_dip_over_omega_m(const SteadyState& steady) {
    return 2.0 * std::sqrt(1.0 + 2.0 * steady.alpha);
}

struct Setup {
    DerivedRates rates;
    SteadyState steady;
    ResponseParams params;
};

Setup setup(const RunConfig& run) {
    Setup s;
    s.rates = derive_rates(run.physical);
    s.steady = steady_state_self_consistent(run.physical, s.rates);
    s.params = response_params(run.physical, s.rates, s.steady);
    return s;
}

void row(std::ostream& out, const char* name, double si, const char* unit, double scaled) {
    char line[160];
    std::snprintf(line, sizeof line, "%-16s %20s  %-14s %20s\n", name, format_number(si).c_str(),
                  unit, format_number(scaled).c_str());
    out << line;
}

}  // namespace

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.11e", value);
    return buffer;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    const double wm = sweep.params.omega_m;
    out << sweep_csv_header << '\n';
    for (const SweepRow& r : sweep.rows) {
        const ProbeResponse& p = r.response;
        const double nan = std::nan("");
        const double bv = r.baseline ? r.baseline->real() : nan;
        const double bt = r.baseline ? r.baseline->imag() : nan;
        out << format_number(r.delta / wm) << sep << format_number(p.v_p) << sep
            << format_number(p.v_p_tilde) << sep << format_number(std::abs(p.eps_T)) << sep
            << format_number(p.eps_out_minus.real()) << sep
            << format_number(p.eps_out_minus.imag()) << sep << format_number(bv) << sep
            << format_number(bt) << '\n';
    }
}

void write_baseline_csv(std::ostream& out, const SweepResult& sweep) {
    const ResponseParams& params = sweep.params;
    out << "delta_over_omega_m, baseline_v_p, baseline_v_p_tilde\n";
    for (const SweepRow& r : sweep.rows) {
        const complex b =
            r.baseline ? *r.baseline : baseline_response(r.delta, params.Delta, params.kappa);
        out << format_number(r.delta / params.omega_m) << sep << format_number(b.real()) << sep
            << format_number(b.imag()) << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const oracle::Trajectory& traj) {
    out << "tau, re_c, im_c, u, v, w\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << format_number(traj.tau[i]) << sep << format_number(traj.c[i].real()) << sep
            << format_number(traj.c[i].imag()) << sep << format_number(traj.u[i]) << sep
            << format_number(traj.v[i]) << sep << format_number(traj.w[i]) << '\n';
    }
}

std::string dip_footer_json(const DipMetrics& m, double omega_m) {
    nlohmann::ordered_json j;
    j["delta_dip_over_omega_m"] = m.delta_dip / omega_m;
    j["fwhm_rad_s"] = m.fwhm;
    j["fwhm_hz"] = m.fwhm_hz();
    j["depth"] = m.depth;
    j["predicted_dip_over_omega_m"] = m.predicted_dip / omega_m;
    return j.dump();
}

SweepSpec sweep_spec(const RunConfig& run, const SweepWindow& window) {
    const double wm = run.physical.omega_m;
    return SweepSpec{window.from * wm, window.to * wm, window.points, window.include_baseline,
                     run.threads};
}

std::pair<SweepResult, DipMetrics> dip_sweep(const RunConfig& run) {
    const Setup s = setup(run);
    if (run.sweep) {
        SweepResult sweep = run_sweep(s.params, s.steady, sweep_spec(run, *run.sweep));
        DipMetrics metrics = find_dip(sweep, s.steady);
        return {std::move(sweep), metrics};
    }

    constexpr int points = 20001;
    const double center = predicted_dip_over_omega_m(s.steady);
    double half = 0.5;
    for (int attempt = 0;; ++attempt) {
        const SweepWindow window{center - half, center + half, points, true};
        SweepResult sweep = run_sweep(s.params, s.steady, sweep_spec(run, window));
        try {
            DipMetrics metrics = find_dip(sweep, s.steady);
            return {std::move(sweep), metrics};
        } catch (const NumericalError&) {
            if (attempt >= 8) throw;
        }
        half /= 10.0;
    }
}

oracle::DimensionlessParams verify_params(const RunConfig& run) {
    const Setup s = setup(run);
    const double delta_t = run.verify.delta_over_omega_m
                               ? *run.verify.delta_over_omega_m
                               : predicted_dip_over_omega_m(s.steady);
    oracle::DimensionlessParams p = oracle::nondimensionalize(
        run.physical, s.rates, s.steady, delta_t * run.physical.omega_m);
    if (run.verify.gamma_over_omega_m) {
        p.gamma_t = *run.verify.gamma_over_omega_m;
    } else if (p.gamma_t < 0.01) {
        p.gamma_t = 0.05;
    }
    return p;
}

void cmd_steady(const RunConfig& run, std::ostream& out) {
    const Setup s = setup(run);
    const PhysicalConfig& cfg = run.physical;
    const oracle::Scales sc = oracle::scales(cfg);
    const double wm = cfg.omega_m;
    const SteadyState& st = s.steady;

    out << "quantity         SI                    unit           scaled\n";
    row(out, "re_c0", st.c0.real(), "1", st.c0.real());
    row(out, "im_c0", st.c0.imag(), "1", st.c0.imag());
    row(out, "photon_number", st.photon_number, "1", st.photon_number);
    row(out, "alpha", st.alpha, "1", st.alpha);
    row(out, "beta", st.beta, "1", st.beta);
    row(out, "X0", st.X0, "m^2", st.X0 / sc.q2);
    row(out, "Y0", st.Y0, "kg^2m^2/s^2", st.Y0 / sc.p2);
    row(out, "Z0", st.Z0, "kg m^2/s", st.Z0 / sc.qp);
    row(out, "n_th", st.n_th, "1", st.n_th);
    row(out, "Delta", st.Delta, "rad/s", st.Delta / wm);
    row(out, "bare_detuning", st.bare_detuning, "rad/s", st.bare_detuning / wm);
    row(out, "kappa", s.rates.kappa, "rad/s", s.rates.kappa / wm);
    row(out, "g", s.rates.g, "rad/(s m^2)", s.rates.g / sc.coupling);
    row(out, "eps_c", s.rates.eps_c, "1/s", s.rates.eps_c / wm);
    row(out, "quality", s.rates.quality, "1", s.rates.quality);
    row(out, "predicted_dip", 2.0 * wm * std::sqrt(1.0 + 2.0 * st.alpha), "rad/s",
        predicted_dip_over_omega_m(st));
}

void cmd_sweep(const RunConfig& run, std::ostream& out) {
    const Setup s = setup(run);
    const SweepWindow window = run.sweep.value_or(SweepWindow{});
    write_sweep_csv(out, run_sweep(s.params, s.steady, sweep_spec(run, window)));
}

void cmd_dip(const RunConfig& run, std::ostream& out) {
    const auto [sweep, metrics] = dip_sweep(run);
    write_sweep_csv(out, sweep);
    out << dip_footer_json(metrics, sweep.params.omega_m) << '\n';
}

void cmd_baseline(const RunConfig& run, std::ostream& out) {
    const Setup s = setup(run);
    SweepWindow window = run.sweep.value_or(SweepWindow{});
    window.include_baseline = true;
    write_baseline_csv(out, run_sweep(s.params, s.steady, sweep_spec(run, window)));
}

bool cmd_verify(const RunConfig& run, const CommandOptions& options, std::ostream& out) {
    const oracle::DimensionlessParams p = verify_params(run);
    oracle::VerifyOptions vo;
    vo.tau_end = run.verify.tau_end;
    vo.dtau = run.verify.dtau;
    vo.window_cycles = run.verify.window_cycles;
    const oracle::VerificationReport rep = oracle::verify_against_analytic(p, vo);

    if (options.dump_trajectory) {
        oracle::DimensionlessParams probed = p;
        probed.eps_p_t = vo.probe_ratio_strong * p.eps_c_t;
        std::ofstream dump(*options.dump_trajectory, std::ios::binary);
        if (!dump) throw ConfigError("cannot open trajectory dump '" + *options.dump_trajectory + "'");
        write_trajectory_csv(dump, oracle::integrate_mean_field(probed, rep.tau_end, rep.dtau));
    }

    const auto cplx = [](complex z) { return format_number(z.real()) + " " + format_number(z.imag()) + "i"; };
    out << "oracle verification (scaled units, time 1/omega_m)\n";
    out << "  kappa_t        " << format_number(p.kappa_t) << '\n';
    out << "  gamma_t        " << format_number(p.gamma_t);
    if (!run.verify.gamma_over_omega_m && p.gamma_t != run.physical.gamma_m / run.physical.omega_m) {
        out << "  (inflated from " << format_number(run.physical.gamma_m / run.physical.omega_m) << ")";
    }
    out << '\n';
    out << "  delta_t        " << format_number(p.delta_t) << '\n';
    out << "  Delta0_t       " << format_number(p.Delta0_t) << '\n';
    out << "  g_t            " << format_number(p.g_t) << '\n';
    out << "  eps_c_t        " << format_number(p.eps_c_t) << '\n';
    out << "  n_th           " << format_number(p.n_th) << '\n';
    out << "  tau_end        " << format_number(rep.tau_end) << "  dtau " << format_number(rep.dtau) << '\n';
    out << "  c_plus  analytic " << cplx(rep.c_plus_analytic) << '\n';
    out << "  c_minus analytic " << cplx(rep.c_minus_analytic) << '\n';

    bool ok = true;
    for (const oracle::ProbeRun* r : {&rep.strong, &rep.weak}) {
        const double tol = std::max(1e-3, 5.0 * r->probe_ratio);
        const bool pass = r->rel_err_plus <= tol && r->rel_err_minus <= tol;
        ok = ok && pass;
        out << "  eps_p/eps_c = " << format_number(r->probe_ratio) << '\n';
        out << "    c_plus  numeric  " << cplx(r->c_plus_num) << "  rel_err "
            << format_number(r->rel_err_plus) << '\n';
        out << "    c_minus numeric  " << cplx(r->c_minus_num) << "  rel_err "
            << format_number(r->rel_err_minus) << '\n';
        out << "    tolerance " << format_number(tol) << (pass ? "  PASS" : "  FAIL")
            << (r->poor_separation ? "  (poor harmonic separation)" : "") << '\n';
    }
    out << "  error ratio strong/weak: c_plus " << format_number(rep.error_ratio_plus)
        << ", c_minus " << format_number(rep.error_ratio_minus) << '\n';
    out << (ok ? "verification PASSED\n" : "verification FAILED\n");
    return ok;
}

int run_command(std::string_view command, const RunConfig& run, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
    try {
        std::ofstream file;
        std::ostream* sink = &out;
        if (run.output) {
            file.open(*run.output, std::ios::binary | std::ios::trunc);
            if (!file) throw ConfigError("cannot open output file '" + *run.output + "'");
            sink = &file;
        }
        if (command == "steady") {
            cmd_steady(run, *sink);
        } else if (command == "sweep") {
            cmd_sweep(run, *sink);
        } else if (command == "dip") {
            cmd_dip(run, *sink);
        } else if (command == "baseline") {
            cmd_baseline(run, *sink);
        } else if (command == "verify") {
            if (!cmd_verify(run, options, *sink)) {
                err << "numerical error: oracle and closed form disagree beyond tolerance\n";
                return static_cast<int>(ErrorCategory::Numerical);
            }
        } else {
            throw ConfigError("unknown command '" + std::string(command) + "'");
        }
        sink->flush();
        if (!*sink) throw NumericalError("failed writing output");
        return 0;
    } catch (const ConvergenceError& e) {
        err << "convergence error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return e.exit_code();
    }
}

}  // namespace qeit
