#pragma once

#include <optional>
#include <string>

#include "quad_eit/params.hpp"

namespace qeit {

/// Sweep bounds in units of omega_m.
struct SweepWindow {
    double from = 0.0;
    double to = 4.0;
    int points = 4001;
    bool include_baseline = true;

    friend bool operator==(const SweepWindow&, const SweepWindow&) = default;
};

struct VerifySettings {
    std::optional<double> gamma_over_omega_m;  // inflated damping for desk-scale runs
    std::optional<double> delta_over_omega_m;  // probe detuning; default: predicted dip
    double tau_end = 0.0;                      // 0: oracle default
    double dtau = 0.0;                         // 0: oracle default
    int window_cycles = 100;

    friend bool operator==(const VerifySettings&, const VerifySettings&) = default;
};

struct RunConfig {
    PhysicalConfig physical;
    double detuning_over_omega_m = 0.0;
    std::optional<SweepWindow> sweep;
    std::optional<std::string> output;
    unsigned threads = 0;
    VerifySettings verify;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates the JSON run configuration. Errors are ConfigError with
/// the offending line where one can be identified.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

}  // namespace qeit
