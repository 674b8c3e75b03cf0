#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "quad_eit/commands.hpp"
#include "quad_eit/config.hpp"
#include "quad_eit/constants.hpp"
#include "quad_eit/errors.hpp"

using namespace qeit;

namespace {

const std::string set1_text = R"({
  "wavelength_m": 532e-9,
  "cavity_length_m": 0.067,
  "mass_kg": 1e-12,
  "omega_m_hz": 1e5,
  "gamma_m_rad_s": 1.0,
  "finesse": 6940,
  "reflectivity": 0.42,
  "pump_power_w": 20e-6,
  "temperature_k": 20,
  "detuning_mode": "effective",
  "detuning_over_omega_m": 2.0
})";

std::string with(const std::string& base, const std::string& from, const std::string& to) {
    std::string s = base;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse the set 1 configuration") {
    const RunConfig rc = parse_config(set1_text);
    const PhysicalConfig& p = rc.physical;
    CHECK(p.wavelength == 532e-9);
    CHECK(p.omega_m == constants::two_pi * 1e5);
    CHECK(p.gamma_m == 1.0);
    CHECK(p.finesse == 6940.0);
    CHECK_FALSE(p.kappa);
    CHECK(p.reflectivity == 0.42);
    CHECK(p.detuning_mode == DetuningMode::Effective);
    CHECK(p.detuning_value == 2.0 * p.omega_m);
    CHECK(p.probe_power == 0.0);
    CHECK_FALSE(rc.sweep);

    std::ostringstream out;
    cmd_steady(rc, out);
    CHECK(out.str().find("alpha") != std::string::npos);
    const auto pos = out.str().find("alpha");
    const double alpha = std::stod(out.str().substr(pos + 5));
    CHECK(alpha == doctest::Approx(0.013).epsilon(0.001 / 0.013));
}

TEST_CASE("config rejections") {
    const std::string singular = config_error(with(set1_text, "0.42", "1.0"));
    CHECK(singular.find("singular") != std::string::npos);
    CHECK(singular.find("line 8") != std::string::npos);

    CHECK(config_error(with(set1_text, R"("finesse": 6940,)", R"("finesse": 6940, "kappa_hz": 1.6e5,)"))
              .find("exactly one of finesse") != std::string::npos);
    CHECK(config_error(with(set1_text, R"("finesse": 6940,)", "")).find("exactly one of finesse") !=
          std::string::npos);
    CHECK(config_error(with(set1_text, R"("reflectivity": 0.42,)", "")).find("reflectivity") !=
          std::string::npos);

    const std::string unknown =
        config_error(with(set1_text, R"("mass_kg": 1e-12,)", R"("mass_kg": 1e-12, "colour": 3,)"));
    CHECK(unknown.find("unknown key 'colour'") != std::string::npos);
    CHECK(unknown.find("line 4") != std::string::npos);

    CHECK(config_error(with(set1_text, R"("pump_power_w": 20e-6,)", "")).find("pump_power_w") !=
          std::string::npos);
    CHECK(config_error(with(set1_text, R"("temperature_k": 20)", R"("temperature_k": -4)"))
              .find("temperature_k must be positive") != std::string::npos);
    CHECK(config_error(with(set1_text, R"("effective")", R"("sideways")")).find("detuning_mode") !=
          std::string::npos);
    CHECK(config_error(with(set1_text, R"("omega_m_hz": 1e5,)", R"("omega_m_hz": 1e5, "omega_m_rad_s": 6e5,)"))
              .find("only one of") != std::string::npos);
    CHECK(config_error("{ \"wavelength_m\": ").find("malformed JSON") != std::string::npos);
    CHECK(config_error("[1, 2]").find("JSON object") != std::string::npos);

    const std::string bad_sweep = with(set1_text, R"("detuning_over_omega_m": 2.0)",
                                       R"("detuning_over_omega_m": 2.0, "sweep": {"from_over_omega_m": 3, "to_over_omega_m": 1})");
    CHECK(config_error(bad_sweep).find("from < to") != std::string::npos);
    const std::string nested_unknown = with(set1_text, R"("detuning_over_omega_m": 2.0)",
                                            R"("detuning_over_omega_m": 2.0, "sweep": {"step": 3})");
    CHECK(config_error(nested_unknown).find("unknown key 'step' in sweep") != std::string::npos);
}

TEST_CASE("frequency keys accept Hz or rad/s") {
    const RunConfig hz = parse_config(with(set1_text, R"("finesse": 6940,)", R"("kappa_hz": 1.61e5,)"));
    REQUIRE(hz.physical.kappa);
    CHECK(*hz.physical.kappa == constants::two_pi * 1.61e5);
    const RunConfig rad = parse_config(
        with(set1_text, R"("reflectivity": 0.42,)", R"("g_override_hz_per_m2": 1.85e23,)"));
    CHECK(*rad.physical.g_override == constants::two_pi * 1.85e23);
}

TEST_CASE("serialize and re-parse is value-identical") {
    RunConfig rc = parse_config(set1_text);
    CHECK(parse_config(serialize_config(rc)) == rc);

    rc.sweep = SweepWindow{1.9, 2.1, 1234, false};
    rc.output = "out.csv";
    rc.threads = 3;
    rc.verify.gamma_over_omega_m = 0.07;
    rc.verify.delta_over_omega_m = 2.17;
    rc.verify.window_cycles = 40;
    rc.physical.detuning_mode = DetuningMode::Bare;
    rc.detuning_over_omega_m = 1.987654321;
    rc.physical.detuning_value = rc.detuning_over_omega_m * rc.physical.omega_m;
    rc.physical.probe_power = 1e-9;
    CHECK(parse_config(serialize_config(rc)) == rc);
}

TEST_CASE("sweep CSV format") {
    RunConfig rc = parse_config(set1_text);
    rc.sweep = SweepWindow{1.0, 3.0, 5, true};
    std::ostringstream out;
    cmd_sweep(rc, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "delta_over_omega_m, v_p, v_p_tilde, abs_eps_T, re_eps_out_minus, "
                    "im_eps_out_minus, baseline_v_p, baseline_v_p_tilde");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(rows == 5);
    CHECK(format_number(1.0) == "1.00000000000e+00");
    CHECK(format_number(-0.000123456789012345) == "-1.23456789012e-04");
}

TEST_CASE("uncoupled sweep CSV response columns match the baseline") {
    RunConfig rc = parse_config(with(set1_text, R"("reflectivity": 0.42,)", R"("g_override_rad_s_per_m2": 0,)"));
    rc.sweep = SweepWindow{0.0, 4.0, 401, true};
    std::ostringstream out;
    cmd_sweep(rc, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::istringstream fields(line);
        std::string f;
        while (std::getline(fields, f, ',')) cols.push_back(f.substr(f.find_first_not_of(' ')));
        REQUIRE(cols.size() == 8);
        CHECK(std::abs(std::stod(cols[1]) - std::stod(cols[6])) <= 1e-12);
        CHECK(std::abs(std::stod(cols[2]) - std::stod(cols[7])) <= 1e-12);
    }
}

TEST_CASE("dip command footer") {
    RunConfig rc = parse_config(with(with(with(set1_text, "0.42", "0.999"), "20e-6", "10e-6"),
                                     R"("temperature_k": 20)", R"("temperature_k": 100)"));
    rc.physical.gamma_m = 900.0;
    rc.sweep = SweepWindow{2.2, 2.4, 8001, true};
    std::ostringstream out;
    cmd_dip(rc, out);
    const std::string text = out.str();
    const auto last_start = text.rfind('\n', text.size() - 2) + 1;
    const auto footer = nlohmann::json::parse(text.substr(last_start));
    CHECK(footer["delta_dip_over_omega_m"].get<double>() == doctest::Approx(2.285).epsilon(0.01 / 2.285));
    CHECK(footer.contains("fwhm_rad_s"));
    CHECK(footer.contains("fwhm_hz"));
    CHECK(footer.contains("depth"));
    CHECK(footer.contains("predicted_dip_over_omega_m"));
    CHECK(text.substr(last_start).find("{\"delta_dip_over_omega_m\"") == 0);
}

TEST_CASE("dip command without a configured window zooms in") {
    const RunConfig rc = parse_config(set1_text);
    const auto [sweep, metrics] = dip_sweep(rc);
    CHECK(metrics.fwhm == doctest::Approx(12.758).epsilon(0.02));
}

TEST_CASE("exit codes") {
    const RunConfig rc = parse_config(set1_text);
    std::ostringstream out;
    std::ostringstream err;
    CHECK(run_command("steady", rc, {}, out, err) == 0);
    CHECK(run_command("frobnicate", rc, {}, out, err) == 2);

    RunConfig coarse = rc;
    coarse.sweep = SweepWindow{0.0, 4.0, 4001, true};
    err.str("");
    CHECK(run_command("dip", coarse, {}, out, err) == 4);
    CHECK(err.str().find("numerical error") != std::string::npos);

    RunConfig frozen = rc;
    frozen.physical.temperature = -1.0;
    err.str("");
    CHECK(run_command("steady", frozen, {}, out, err) == 2);
    CHECK(err.str().find("config error") != std::string::npos);
}

TEST_CASE("verify command") {
    RunConfig rc = parse_config(with(with(with(set1_text, "0.42", "0.999"), "20e-6", "10e-6"),
                                     R"("temperature_k": 20)", R"("temperature_k": 100)"));
    const oracle::DimensionlessParams p = verify_params(rc);
    CHECK(p.gamma_t == 0.05);  // inflated for a desk-scale run
    rc.verify.gamma_over_omega_m = 0.1;
    rc.verify.delta_over_omega_m = 2.25;
    const oracle::DimensionlessParams q = verify_params(rc);
    CHECK(q.gamma_t == 0.1);
    CHECK(q.delta_t == 2.25);

    std::ostringstream out;
    CHECK(cmd_verify(rc, {}, out));
    CHECK(out.str().find("verification PASSED") != std::string::npos);
}
