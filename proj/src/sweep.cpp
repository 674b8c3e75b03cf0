#include "quad_eit/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "quad_eit/constants.hpp"
#include "quad_eit/errors.hpp"

namespace qeit {

namespace {

struct Window {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

// Grid indices inside [predicted - 0.5 wm, predicted + 0.5 wm].
std::optional<Window> search_window(const SweepResult& sweep, double predicted) {
    const double half = 0.5 * sweep.params.omega_m;
    const auto& rows = sweep.rows;
    const auto first = std::lower_bound(rows.begin(), rows.end(), predicted - half,
                                        [](const SweepRow& r, double d) { return r.delta < d; });
    const auto last = std::upper_bound(rows.begin(), rows.end(), predicted + half,
                                       [](double d, const SweepRow& r) { return d < r.delta; });
    if (last - first < 3) return std::nullopt;
    return Window{static_cast<std::size_t>(first - rows.begin()),
                  static_cast<std::size_t>(last - rows.begin()) - 1};
}

std::size_t argmin_v_p(const SweepResult& sweep, Window w) {
    std::size_t best = w.lo;
    for (std::size_t i = w.lo; i <= w.hi; ++i) {
        if (sweep.rows[i].response.v_p < sweep.rows[best].response.v_p) best = i;
    }
    return best;
}

double linear_crossing(double x0, double f0, double x1, double f1) {
    return x0 + (x1 - x0) * f0 / (f0 - f1);
}

}  // namespace

double DipMetrics::fwhm_hz() const { return fwhm / constants::two_pi; }

std::vector<double> sweep_grid(const SweepSpec& spec) {
    if (spec.points < 2) throw DomainError("sweep needs at least 2 points");
    if (!(spec.delta_min < spec.delta_max) || !std::isfinite(spec.delta_min) ||
        !std::isfinite(spec.delta_max)) {
        throw DomainError("sweep bounds must satisfy from < to");
    }
    const auto n = static_cast<std::size_t>(spec.points);
    const double span = spec.delta_max - spec.delta_min;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = spec.delta_min + span * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    grid.back() = spec.delta_max;
    return grid;
}

SweepResult run_sweep(const PhysicalConfig& cfg, const SweepSpec& spec) {
    const DerivedRates rates = derive_rates(cfg);
    const SteadyState steady = steady_state_self_consistent(cfg, rates);
    return run_sweep(response_params(cfg, rates, steady), steady, spec);
}

SweepResult run_sweep(const ResponseParams& params, const SteadyState& steady,
                      const SweepSpec& spec) {
    const std::vector<double> grid = sweep_grid(spec);

    SweepResult result;
    result.steady = steady;
    result.params = params;
    result.rows.resize(grid.size());

    const auto evaluate = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            SweepRow& row = result.rows[i];
            row.delta = grid[i];
            row.response = total_output_field(grid[i], params);
            if (spec.include_baseline) {
                row.baseline = baseline_response(grid[i], params.Delta, params.kappa);
            }
        }
    };

    unsigned workers = spec.threads != 0 ? spec.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, 64u);
    const std::size_t n = grid.size();
    if (workers == 1 || n < 4096) {
        evaluate(0, n);
        return result;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (std::size_t begin = 0; begin < n; begin += chunk) {
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back([&, begin, end] {
                try {
                    evaluate(begin, end);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return result;
}

double predicted_dip(const ResponseParams& params) {
    return 2.0 * params.omega_m * std::sqrt(1.0 + 2.0 * params.alpha);
}

double envelope_v_p(double delta, const ResponseParams& params) {
    ResponseParams off = params;
    off.beta = 0.0;
    return (2.0 * off.kappa * probe_plus_coefficient(delta, off)).real();
}

DipMetrics find_dip(const SweepResult& sweep, const SteadyState& steady) {
    const ResponseParams& params = sweep.params;
    const double wm = params.omega_m;
    const auto& rows = sweep.rows;

    DipMetrics m;
    m.predicted_dip = 2.0 * wm * std::sqrt(1.0 + 2.0 * steady.alpha);

    if (rows.size() < 3 || m.predicted_dip < rows.front().delta ||
        m.predicted_dip > rows.back().delta) {
        throw InsufficientSpanError("sweep does not cover the predicted two-phonon dip");
    }
    const auto window = search_window(sweep, m.predicted_dip);
    if (!window) throw InsufficientSpanError("too few sweep points near the predicted dip");

    const std::size_t i = argmin_v_p(sweep, *window);
    if (i == window->lo || i == window->hi) {
        throw NoDipError("no interior minimum of v_p in the two-phonon window");
    }

    // Parabola through the minimum and its neighbours.
    const double h = rows[i + 1].delta - rows[i].delta;
    const double fl = rows[i - 1].response.v_p;
    const double f0 = rows[i].response.v_p;
    const double fr = rows[i + 1].response.v_p;
    const double curvature = fl - 2.0 * f0 + fr;
    double offset = 0.0;
    double v_dip = f0;
    if (curvature > 0.0) {
        offset = std::clamp(0.5 * (fl - fr) / curvature, -1.0, 1.0);
        v_dip = f0 - 0.25 * (fl - fr) * offset;
    }
    m.delta_dip = rows[i].delta + offset * h;
    m.depth = envelope_v_p(m.delta_dip, params) - v_dip;
    if (!(m.depth > 0.0)) throw NoDipError("v_p minimum does not fall below the envelope");

    const auto excess = [&](std::size_t j) {
        return rows[j].response.v_p - (envelope_v_p(rows[j].delta, params) - 0.5 * m.depth);
    };

    std::optional<double> left;
    for (std::size_t j = i; j > window->lo; --j) {
        const double a = excess(j - 1);
        if (a >= 0.0) {
            left = linear_crossing(rows[j - 1].delta, a, rows[j].delta, excess(j));
            break;
        }
    }
    std::optional<double> right;
    for (std::size_t j = i; j < window->hi; ++j) {
        const double b = excess(j + 1);
        if (b >= 0.0) {
            right = linear_crossing(rows[j].delta, excess(j), rows[j + 1].delta, b);
            break;
        }
    }
    if (!left || !right) {
        throw InsufficientSpanError("half-depth crossings of the dip are not bracketed by the grid");
    }
    m.fwhm = *right - *left;

    if (m.fwhm < 10.0 * h) {
        std::ostringstream msg;
        msg << "sweep resolves the dip with only " << m.fwhm / h
            << " points across its width (need >= 10)";
        throw InsufficientSpanError(msg.str());
    }
    return m;
}

DispersionProfile dispersion_profile(const SweepResult& sweep) {
    DispersionProfile profile;
    const auto& rows = sweep.rows;
    const ResponseParams& params = sweep.params;
    profile.rows.reserve(rows.size());
    for (const SweepRow& row : rows) {
        const complex base =
            row.baseline ? *row.baseline : baseline_response(row.delta, params.Delta, params.kappa);
        profile.rows.push_back({row.delta, row.response.v_p_tilde, base.imag()});
    }
    if (rows.size() < 3) return profile;

    const auto window = search_window(sweep, predicted_dip(params));
    if (!window) return profile;
    const std::size_t i = argmin_v_p(sweep, *window);
    if (i == 0 || i + 1 >= rows.size()) return profile;

    const auto slope = [&](std::size_t j, bool baseline) {
        const std::size_t a = j == 0 ? 0 : j - 1;
        const std::size_t b = std::min(j + 1, rows.size() - 1);
        const auto value = [&](std::size_t k) {
            return baseline ? profile.rows[k].baseline_v_p_tilde : profile.rows[k].v_p_tilde;
        };
        return (value(b) - value(a)) / (rows[b].delta - rows[a].delta);
    };
    const auto inverted_at = [&](std::size_t j) { return slope(j, false) * slope(j, true) < 0.0; };

    profile.dip_delta = rows[i].delta;
    profile.slope_at_dip = slope(i, false);
    profile.baseline_slope_at_dip = slope(i, true);
    if (inverted_at(i)) {
        std::size_t lo = i;
        while (lo > 0 && inverted_at(lo - 1)) --lo;
        std::size_t hi = i;
        while (hi + 1 < rows.size() && inverted_at(hi + 1)) ++hi;
        profile.anomalous_from = rows[lo].delta;
        profile.anomalous_to = rows[hi].delta;
    }
    return profile;
}

}  // namespace qeit
