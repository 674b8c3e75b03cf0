#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "quad_eit/commands.hpp"
#include "quad_eit/config.hpp"
#include "quad_eit/errors.hpp"
#include "quad_eit/oracle.hpp"
#include "quad_eit/sweep.hpp"

namespace py = pybind11;
using namespace qeit;

namespace {

py::dict steady_dict(const RunConfig& run) {
    const DerivedRates r = derive_rates(run.physical);
    const SteadyState s = steady_state_self_consistent(run.physical, r);
    py::dict d;
    d["kappa"] = r.kappa;
    d["g"] = r.g;
    d["eps_c"] = r.eps_c;
    d["eps_p"] = r.eps_p;
    d["n_th"] = r.n_th;
    d["quality"] = r.quality;
    d["c0"] = s.c0;
    d["photon_number"] = s.photon_number;
    d["X0"] = s.X0;
    d["Y0"] = s.Y0;
    d["Z0"] = s.Z0;
    d["alpha"] = s.alpha;
    d["beta"] = s.beta;
    d["Delta"] = s.Delta;
    d["bare_detuning"] = s.bare_detuning;
    d["iterations"] = s.iterations;
    return d;
}

py::dict sweep_dict(const RunConfig& run, std::optional<double> from, std::optional<double> to,
                    std::optional<int> points) {
    SweepWindow w = run.sweep.value_or(SweepWindow{});
    if (from) w.from = *from;
    if (to) w.to = *to;
    if (points) w.points = *points;
    const SweepResult s = run_sweep(run.physical, sweep_spec(run, w));
    const auto n = static_cast<py::ssize_t>(s.rows.size());
    py::array_t<double> delta(n);
    py::array_t<std::complex<double>> eps_T(n);
    py::array_t<std::complex<double>> eps_out_minus(n);
    py::array_t<std::complex<double>> baseline(n);
    auto dv = delta.mutable_unchecked<1>();
    auto ev = eps_T.mutable_unchecked<1>();
    auto mv = eps_out_minus.mutable_unchecked<1>();
    auto bv = baseline.mutable_unchecked<1>();
    const double omega_m = run.physical.omega_m;
    for (py::ssize_t i = 0; i < n; ++i) {
        const SweepRow& row = s.rows[static_cast<std::size_t>(i)];
        dv(i) = row.delta / omega_m;
        ev(i) = row.response.eps_T;
        mv(i) = row.response.eps_out_minus;
        bv(i) = row.baseline.value_or(std::complex<double>(NAN, NAN));
    }
    py::dict d;
    d["delta_over_omega_m"] = delta;
    d["eps_T"] = eps_T;
    d["eps_out_minus"] = eps_out_minus;
    d["baseline"] = baseline;
    return d;
}

py::dict dip_dict(const RunConfig& run) {
    const auto [sweep, m] = dip_sweep(run);
    const double omega_m = run.physical.omega_m;
    py::dict d;
    d["delta_dip_over_omega_m"] = m.delta_dip / omega_m;
    d["fwhm_rad_s"] = m.fwhm;
    d["fwhm_hz"] = m.fwhm_hz();
    d["depth"] = m.depth;
    d["predicted_dip_over_omega_m"] = m.predicted_dip / omega_m;
    return d;
}

py::dict field_dict(const RunConfig& run, double delta_over_omega_m) {
    const DerivedRates r = derive_rates(run.physical);
    const SteadyState s = steady_state_self_consistent(run.physical, r);
    const ProbeResponse p =
        total_output_field(delta_over_omega_m * run.physical.omega_m, response_params(run.physical, r, s));
    py::dict d;
    d["c_plus"] = p.c_plus;
    d["c_minus"] = p.c_minus;
    d["eps_T"] = p.eps_T;
    d["eps_out_minus"] = p.eps_out_minus;
    d["v_p"] = p.v_p;
    d["v_p_tilde"] = p.v_p_tilde;
    return d;
}

py::dict verify_dict(const RunConfig& run) {
    oracle::VerifyOptions opts;
    opts.tau_end = run.verify.tau_end;
    opts.dtau = run.verify.dtau;
    opts.window_cycles = run.verify.window_cycles;
    const oracle::VerificationReport v = oracle::verify_against_analytic(verify_params(run), opts);
    const auto probe = [](const oracle::ProbeRun& r) {
        py::dict d;
        d["probe_ratio"] = r.probe_ratio;
        d["c_plus"] = r.c_plus_num;
        d["c_minus"] = r.c_minus_num;
        d["rel_err_plus"] = r.rel_err_plus;
        d["rel_err_minus"] = r.rel_err_minus;
        d["poor_separation"] = r.poor_separation;
        return d;
    };
    py::dict d;
    d["c_plus"] = v.c_plus_analytic;
    d["c_minus"] = v.c_minus_analytic;
    d["strong"] = probe(v.strong);
    d["weak"] = probe(v.weak);
    d["error_ratio_plus"] = v.error_ratio_plus;
    d["error_ratio_minus"] = v.error_ratio_minus;
    return d;
}

RunConfig from_dict(const py::dict& d) {
    const py::object json = py::module_::import("json");
    return parse_config(py::str(json.attr("dumps")(d, py::arg("indent") = 2)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Probe response of a quadratically coupled membrane-in-the-middle cavity";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<RunConfig>(m, "RunConfig")
        .def_property_readonly("omega_m", [](const RunConfig& r) { return r.physical.omega_m; })
        .def_property_readonly("detuning_over_omega_m",
                               [](const RunConfig& r) { return r.detuning_over_omega_m; })
        .def("to_json", &serialize_config)
        .def(py::self == py::self);

    m.def("parse_config", &parse_config, py::arg("text"), "Parse a JSON run configuration.");
    m.def("parse_config", &from_dict, py::arg("config"), "Build a run configuration from a dict.");
    m.def("load_config", &load_config, py::arg("path"));
    m.def("steady_state", &steady_dict, py::arg("config"), "Derived rates and the zeroth-order state (SI).");
    m.def("total_output_field", &field_dict, py::arg("config"), py::arg("delta_over_omega_m"));
    m.def("sweep", &sweep_dict, py::arg("config"), py::arg("from_over_omega_m") = py::none(),
          py::arg("to_over_omega_m") = py::none(), py::arg("points") = py::none());
    m.def("dip", &dip_dict, py::arg("config"));
    m.def("verify", &verify_dict, py::arg("config"));
}
