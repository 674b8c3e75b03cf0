#include "quad_eit/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "quad_eit/constants.hpp"
#include "quad_eit/errors.hpp"

namespace qeit {

namespace {

using json = nlohmann::json;

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(std::string_view key, const std::string& message) const {
        std::ostringstream msg;
        msg << "config";
        if (const auto line = line_of(key)) msg << " line " << *line;
        msg << ": " << message;
        throw ConfigError(msg.str());
    }

    void reject_unknown(const json& object, std::initializer_list<std::string_view> allowed,
                        std::string_view where) const {
        for (const auto& item : object.items()) {
            if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
                fail(item.key(), "unknown key '" + item.key() + "' in " + std::string(where));
            }
        }
    }

    std::optional<double> number(const json& object, std::string_view key) const {
        const auto it = object.find(std::string(key));
        if (it == object.end()) return std::nullopt;
        if (!it->is_number()) fail(key, "'" + std::string(key) + "' must be a number");
        const double value = it->get<double>();
        if (!std::isfinite(value)) fail(key, "'" + std::string(key) + "' must be finite");
        return value;
    }

    double required(const json& object, std::string_view key) const {
        const auto value = number(object, key);
        if (!value) fail(key, "missing required key '" + std::string(key) + "'");
        return *value;
    }

    /// Accepts `<stem>_rad_s` or `<stem>_hz` (times 2 pi), never both.
    std::optional<double> frequency(const json& object, const std::string& stem,
                                    const std::string& rad_suffix = "_rad_s",
                                    const std::string& hz_suffix = "_hz") const {
        const auto rad = number(object, stem + rad_suffix);
        const auto hz = number(object, stem + hz_suffix);
        if (rad && hz) fail(stem + hz_suffix, "give only one of " + stem + rad_suffix + " or " + stem + hz_suffix);
        if (hz) return constants::two_pi * *hz;
        return rad;
    }

    std::optional<int> integer(const json& object, std::string_view key) const {
        const auto it = object.find(std::string(key));
        if (it == object.end()) return std::nullopt;
        if (!it->is_number_integer()) fail(key, "'" + std::string(key) + "' must be an integer");
        return it->get<int>();
    }

    template <class Check>
    void check(bool ok, std::string_view key, Check&& message) const {
        if (!ok) fail(key, message());
    }

private:
    // Line of the first occurrence of "key" in the source text.
    std::optional<int> line_of(std::string_view key) const {
        const std::string quoted = "\"" + std::string(key) + "\"";
        const auto pos = text_.find(quoted);
        if (pos == std::string::npos) return std::nullopt;
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    const std::string& text_;
};

int line_at_byte(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream msg;
        msg << "config line " << line_at_byte(text, e.byte == 0 ? 0 : e.byte - 1)
            << ": malformed JSON (" << e.what() << ")";
        throw ConfigError(msg.str());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");

    const Reader r(text);
    r.reject_unknown(doc,
                     {"wavelength_m", "cavity_length_m", "mass_kg", "omega_m_rad_s", "omega_m_hz",
                      "gamma_m_rad_s", "gamma_m_hz", "finesse", "kappa_rad_s", "kappa_hz",
                      "reflectivity", "g_override_rad_s_per_m2", "g_override_hz_per_m2",
                      "pump_power_w", "probe_power_w", "temperature_k", "detuning_mode",
                      "detuning_over_omega_m", "sweep", "output", "threads", "verify"},
                     "top level");

    RunConfig rc;
    PhysicalConfig& p = rc.physical;
    p.wavelength = r.required(doc, "wavelength_m");
    p.cavity_length = r.required(doc, "cavity_length_m");
    p.mass = r.required(doc, "mass_kg");

    const auto omega_m = r.frequency(doc, "omega_m");
    if (!omega_m) r.fail("omega_m_rad_s", "missing required key 'omega_m_rad_s' or 'omega_m_hz'");
    p.omega_m = *omega_m;
    const auto gamma_m = r.frequency(doc, "gamma_m");
    if (!gamma_m) r.fail("gamma_m_rad_s", "missing required key 'gamma_m_rad_s' or 'gamma_m_hz'");
    p.gamma_m = *gamma_m;

    p.finesse = r.number(doc, "finesse");
    p.kappa = r.frequency(doc, "kappa");
    if (p.finesse.has_value() == p.kappa.has_value()) {
        r.fail(p.finesse ? "finesse" : "kappa_rad_s",
               "exactly one of finesse or kappa_rad_s/kappa_hz must be given");
    }
    p.reflectivity = r.number(doc, "reflectivity");
    p.g_override = r.frequency(doc, "g_override", "_rad_s_per_m2", "_hz_per_m2");
    if (p.reflectivity.has_value() == p.g_override.has_value()) {
        r.fail(p.reflectivity ? "reflectivity" : "g_override_rad_s_per_m2",
               "exactly one of reflectivity or g_override_* must be given");
    }

    p.pump_power = r.required(doc, "pump_power_w");
    p.probe_power = r.number(doc, "probe_power_w").value_or(0.0);
    p.temperature = r.required(doc, "temperature_k");

    const auto mode_it = doc.find("detuning_mode");
    if (mode_it == doc.end() || !mode_it->is_string()) {
        r.fail("detuning_mode", "'detuning_mode' must be \"effective\" or \"bare\"");
    }
    const std::string mode = mode_it->get<std::string>();
    if (mode == "effective") {
        p.detuning_mode = DetuningMode::Effective;
    } else if (mode == "bare") {
        p.detuning_mode = DetuningMode::Bare;
    } else {
        r.fail("detuning_mode", "'detuning_mode' must be \"effective\" or \"bare\", got \"" + mode + "\"");
    }
    rc.detuning_over_omega_m = r.required(doc, "detuning_over_omega_m");
    p.detuning_value = rc.detuning_over_omega_m * p.omega_m;

    // Physical preconditions, reported against the responsible key.
    r.check(p.wavelength > 0.0, "wavelength_m", [] { return "wavelength_m must be positive"; });
    r.check(p.cavity_length > 0.0, "cavity_length_m", [] { return "cavity_length_m must be positive"; });
    r.check(p.mass > 0.0, "mass_kg", [] { return "mass_kg must be positive"; });
    r.check(p.omega_m > 0.0, doc.contains("omega_m_hz") ? "omega_m_hz" : "omega_m_rad_s",
            [] { return "omega_m must be positive"; });
    r.check(p.gamma_m >= 0.0, doc.contains("gamma_m_hz") ? "gamma_m_hz" : "gamma_m_rad_s",
            [] { return "gamma_m must be non-negative"; });
    if (p.finesse) r.check(*p.finesse > 0.0, "finesse", [] { return "finesse must be positive"; });
    if (p.kappa) {
        r.check(*p.kappa > 0.0, doc.contains("kappa_hz") ? "kappa_hz" : "kappa_rad_s",
                [] { return "kappa must be positive"; });
    }
    if (p.reflectivity) {
        r.check(*p.reflectivity < 1.0, "reflectivity", [] {
            return "reflectivity must be < 1: coupling formula singular at unit reflectivity";
        });
        r.check(*p.reflectivity >= 0.0, "reflectivity", [] { return "reflectivity must be in [0, 1)"; });
    }
    if (p.g_override) {
        r.check(*p.g_override >= 0.0, "g_override_rad_s_per_m2",
                [] { return "g_override must be non-negative"; });
    }
    r.check(p.pump_power > 0.0, "pump_power_w", [] { return "pump_power_w must be positive"; });
    r.check(p.probe_power >= 0.0, "probe_power_w", [] { return "probe_power_w must be non-negative"; });
    r.check(p.temperature > 0.0, "temperature_k", [] { return "temperature_k must be positive"; });

    if (const auto it = doc.find("sweep"); it != doc.end()) {
        if (!it->is_object()) r.fail("sweep", "'sweep' must be an object");
        r.reject_unknown(*it, {"from_over_omega_m", "to_over_omega_m", "points", "include_baseline"},
                         "sweep");
        SweepWindow s;
        s.from = r.number(*it, "from_over_omega_m").value_or(s.from);
        s.to = r.number(*it, "to_over_omega_m").value_or(s.to);
        s.points = r.integer(*it, "points").value_or(s.points);
        if (const auto b = it->find("include_baseline"); b != it->end()) {
            if (!b->is_boolean()) r.fail("include_baseline", "'include_baseline' must be a boolean");
            s.include_baseline = b->get<bool>();
        }
        r.check(s.from < s.to, "to_over_omega_m", [] { return "sweep requires from < to"; });
        r.check(s.points >= 2, "points", [] { return "sweep requires at least 2 points"; });
        rc.sweep = s;
    }

    if (const auto it = doc.find("output"); it != doc.end()) {
        if (!it->is_string()) r.fail("output", "'output' must be a string path");
        rc.output = it->get<std::string>();
    }
    if (const auto threads = r.integer(doc, "threads")) {
        r.check(*threads >= 0, "threads", [] { return "threads must be non-negative"; });
        rc.threads = static_cast<unsigned>(*threads);
    }

    if (const auto it = doc.find("verify"); it != doc.end()) {
        if (!it->is_object()) r.fail("verify", "'verify' must be an object");
        r.reject_unknown(*it,
                         {"gamma_over_omega_m", "delta_over_omega_m", "tau_end", "dtau",
                          "window_cycles"},
                         "verify");
        VerifySettings& v = rc.verify;
        v.gamma_over_omega_m = r.number(*it, "gamma_over_omega_m");
        v.delta_over_omega_m = r.number(*it, "delta_over_omega_m");
        v.tau_end = r.number(*it, "tau_end").value_or(0.0);
        v.dtau = r.number(*it, "dtau").value_or(0.0);
        v.window_cycles = r.integer(*it, "window_cycles").value_or(v.window_cycles);
        if (v.gamma_over_omega_m) {
            r.check(*v.gamma_over_omega_m >= 0.01, "gamma_over_omega_m",
                    [] { return "verify.gamma_over_omega_m must be >= 0.01"; });
        }
        if (v.delta_over_omega_m) {
            r.check(*v.delta_over_omega_m > 0.0, "delta_over_omega_m",
                    [] { return "verify.delta_over_omega_m must be positive"; });
        }
        r.check(v.tau_end >= 0.0, "tau_end", [] { return "verify.tau_end must be non-negative"; });
        r.check(v.dtau >= 0.0, "dtau", [] { return "verify.dtau must be non-negative"; });
        r.check(v.window_cycles >= 20, "window_cycles",
                [] { return "verify.window_cycles must be at least 20"; });
    }

    try {
        validate(p);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& rc) {
    const PhysicalConfig& p = rc.physical;
    json doc;
    doc["wavelength_m"] = p.wavelength;
    doc["cavity_length_m"] = p.cavity_length;
    doc["mass_kg"] = p.mass;
    doc["omega_m_rad_s"] = p.omega_m;
    doc["gamma_m_rad_s"] = p.gamma_m;
    if (p.finesse) doc["finesse"] = *p.finesse;
    if (p.kappa) doc["kappa_rad_s"] = *p.kappa;
    if (p.reflectivity) doc["reflectivity"] = *p.reflectivity;
    if (p.g_override) doc["g_override_rad_s_per_m2"] = *p.g_override;
    doc["pump_power_w"] = p.pump_power;
    doc["probe_power_w"] = p.probe_power;
    doc["temperature_k"] = p.temperature;
    doc["detuning_mode"] = p.detuning_mode == DetuningMode::Effective ? "effective" : "bare";
    doc["detuning_over_omega_m"] = rc.detuning_over_omega_m;
    if (rc.sweep) {
        doc["sweep"] = {{"from_over_omega_m", rc.sweep->from},
                        {"to_over_omega_m", rc.sweep->to},
                        {"points", rc.sweep->points},
                        {"include_baseline", rc.sweep->include_baseline}};
    }
    if (rc.output) doc["output"] = *rc.output;
    if (rc.threads != 0) doc["threads"] = rc.threads;
    json verify = {{"tau_end", rc.verify.tau_end},
                   {"dtau", rc.verify.dtau},
                   {"window_cycles", rc.verify.window_cycles}};
    if (rc.verify.gamma_over_omega_m) verify["gamma_over_omega_m"] = *rc.verify.gamma_over_omega_m;
    if (rc.verify.delta_over_omega_m) verify["delta_over_omega_m"] = *rc.verify.delta_over_omega_m;
    doc["verify"] = verify;
    return doc.dump(2) + "\n";
}

}  // namespace qeit
