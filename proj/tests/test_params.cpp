#include <cmath>
#include <random>

#include "doctest.h"
#include "reference_sets.hpp"
#include "quad_eit/constants.hpp"
#include "quad_eit/errors.hpp"
#include "quad_eit/params.hpp"

using namespace qeit;
using qeit::testing::omega_m;

namespace {

// Extended-precision Bose-Einstein occupation, independent of the double path.
long double occupation_oracle(long double w, long double T) {
    const long double x = 1.054571817e-34L * w / (1.380649e-23L * T);
    return 1.0L / std::expm1(x);
}

}  // namespace

TEST_CASE("thermal occupation") {
    CHECK(thermal_occupation(omega_m, 0.0) == 0.0);
    CHECK(thermal_occupation(123.0, 0.0) == 0.0);

    const double n20 = thermal_occupation(omega_m, 20.0);
    const double n100 = thermal_occupation(omega_m, 100.0);
    CHECK(n20 == doctest::Approx(static_cast<double>(occupation_oracle(omega_m, 20.0))).epsilon(1e-12));
    CHECK(n100 == doctest::Approx(static_cast<double>(occupation_oracle(omega_m, 100.0))).epsilon(1e-12));
    CHECK(n20 == doctest::Approx(4.167e6).epsilon(1e-3));
    CHECK(n100 == doctest::Approx(2.083e7).epsilon(1e-3));

    const double x = constants::hbar * omega_m / (constants::boltzmann * 20.0);
    CHECK(x == doctest::Approx(2.400e-7).epsilon(1e-3));

    CHECK_THROWS_AS(thermal_occupation(omega_m, -1.0), DomainError);
}

TEST_CASE("cavity decay from finesse") {
    const double kappa = cavity_decay_from_finesse(0.067, 6940.0);
    CHECK(kappa / constants::two_pi == doctest::Approx(1.61e5).epsilon(5e-3));
    CHECK(cavity_decay_from_finesse(0.067, 2 * 6940.0) == doctest::Approx(kappa / 2).epsilon(1e-15));
    const double tenfold = constants::pi * 2.99792458e8 / (2.0 * 694.0 * 0.067);
    CHECK(cavity_decay_from_finesse(0.067, 694.0) == doctest::Approx(tenfold).epsilon(1e-15));
    CHECK(cavity_decay_from_finesse(0.067, 694.0) / constants::two_pi ==
          doctest::Approx(1.61e6).epsilon(5e-3));
    CHECK_THROWS_AS(cavity_decay_from_finesse(0.0, 10.0), DomainError);
    CHECK_THROWS_AS(cavity_decay_from_finesse(0.1, -1.0), DomainError);
}

TEST_CASE("quadratic coupling from geometry") {
    CHECK(coupling_constant_from_geometry(0.067, 532e-9, 0.42) / constants::two_pi ==
          doctest::Approx(1.85e23).epsilon(1e-2));
    CHECK(coupling_constant_from_geometry(0.067, 532e-9, 0.999) / constants::two_pi ==
          doctest::Approx(4.44e24).epsilon(1e-2));
    const double L = 0.05;
    const double lambda = 1064e-9;
    const double half = 8.0 * constants::pi * constants::pi * constants::speed_of_light /
                        (L * lambda * lambda);
    CHECK(coupling_constant_from_geometry(L, lambda, 0.5) == doctest::Approx(half).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(coupling_constant_from_geometry(L, lambda, 1.0),
                         doctest::Contains("singular at unit reflectivity"), DomainError);
    CHECK_THROWS_AS(coupling_constant_from_geometry(L, lambda, 1.5), DomainError);
}

TEST_CASE("drive amplitude") {
    const double kappa = constants::two_pi * 1.61e5;
    const double omega_c = constants::two_pi * constants::speed_of_light / 532e-9;
    CHECK(drive_amplitude(kappa, 0.0, omega_c) == 0.0);
    const double eps = drive_amplitude(kappa, 20e-6, omega_c);
    CHECK(eps == doctest::Approx(1.04e10).epsilon(5e-3));
    CHECK(eps * eps == doctest::Approx(1.085e20).epsilon(2e-3));
    CHECK(drive_amplitude(kappa, 80e-6, omega_c) == doctest::Approx(2.0 * eps).epsilon(1e-15));
    CHECK_THROWS_AS(drive_amplitude(kappa, -1e-6, omega_c), DomainError);
}

TEST_CASE("config validation") {
    PhysicalConfig c = testing::set1();
    CHECK_NOTHROW(validate(c));

    PhysicalConfig both = c;
    both.kappa = 1e6;
    CHECK_THROWS_AS(validate(both), DomainError);

    PhysicalConfig neither = c;
    neither.reflectivity.reset();
    CHECK_THROWS_AS(validate(neither), DomainError);

    PhysicalConfig unit = c;
    unit.reflectivity = 1.0;
    CHECK_THROWS_WITH(validate(unit), doctest::Contains("singular"));

    PhysicalConfig cold = c;
    cold.temperature = 0.0;
    CHECK_THROWS_AS(validate(cold), DomainError);

    PhysicalConfig undamped = c;
    undamped.gamma_m = 0.0;
    CHECK_NOTHROW(validate(undamped));
    CHECK(std::isinf(derive_rates(undamped).quality));
}

TEST_CASE("steady state at the reference operating points") {
    SUBCASE("set 1") {
        const PhysicalConfig c = testing::set1();
        const DerivedRates r = derive_rates(c);
        const SteadyState s = steady_state_given_detuning(c, r, 2.0 * omega_m);
        CHECK(s.alpha == doctest::Approx(0.013).epsilon(0.001 / 0.013));
        CHECK(constants::hbar * r.g * s.photon_number == doctest::Approx(0.005).epsilon(0.05));
        CHECK(c.mass * omega_m * omega_m == doctest::Approx(0.4).epsilon(0.02));
        CHECK(r.quality == doctest::Approx(6.28e5).epsilon(1e-3));
        CHECK(s.Z0 == 0.0);
    }
    SUBCASE("set 2") {
        const PhysicalConfig c = testing::set2();
        const DerivedRates r = derive_rates(c);
        const SteadyState s = steady_state_given_detuning(c, r, 2.0 * omega_m);
        CHECK(s.alpha == doctest::Approx(0.155).epsilon(0.005 / 0.155));
        CHECK(r.quality == doctest::Approx(698).epsilon(1e-3));
    }
    SUBCASE("no coupling is a free thermal oscillator") {
        PhysicalConfig c = testing::set1();
        c.reflectivity.reset();
        c.g_override = 0.0;
        const DerivedRates r = derive_rates(c);
        const SteadyState s = steady_state_given_detuning(c, r, 2.0 * omega_m);
        CHECK(s.alpha == 0.0);
        CHECK(s.beta == 0.0);
        const double expected = (1.0 + 2.0 * r.n_th) * constants::hbar / (2.0 * c.mass * omega_m);
        CHECK(s.X0 == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("self-consistent detuning") {
    SUBCASE("effective mode is the closed form") {
        const PhysicalConfig c = testing::set2();
        const DerivedRates r = derive_rates(c);
        const SteadyState a = steady_state_self_consistent(c, r);
        const SteadyState b = steady_state_given_detuning(c, r, c.detuning_value);
        CHECK(a.Delta == b.Delta);
        CHECK(a.alpha == b.alpha);
        CHECK(a.X0 == b.X0);
        CHECK(a.c0 == b.c0);
        CHECK(a.iterations == 0);
    }
    SUBCASE("no coupling converges in one iteration") {
        PhysicalConfig c = testing::set1();
        c.reflectivity.reset();
        c.g_override = 0.0;
        c.detuning_mode = DetuningMode::Bare;
        c.detuning_value = 1.7 * omega_m;
        const SteadyState s = steady_state_self_consistent(c, derive_rates(c));
        CHECK(s.Delta == c.detuning_value);
        CHECK(s.iterations == 1);
    }
    SUBCASE("bare round trip on set 2") {
        PhysicalConfig c = testing::set2();
        const DerivedRates r = derive_rates(c);
        const SteadyState eff = steady_state_given_detuning(c, r, 2.0 * omega_m);
        c.detuning_mode = DetuningMode::Bare;
        c.detuning_value = 2.0 * omega_m - eff.beta * omega_m;
        const SteadyState s = steady_state_self_consistent(c, r);
        CHECK(std::abs(s.Delta - 2.0 * omega_m) < 1e-8 * omega_m);
        CHECK(std::abs(s.Delta - c.detuning_value - s.beta * omega_m) < 1e-9 * omega_m);
        CHECK(s.bare_detuning == c.detuning_value);
    }
    SUBCASE("non-convergence carries the last iterates") {
        // shift(D) = -3 D: the relaxed map D -> 0.5 - D cycles forever.
        const auto shift = [](double D) { return -3.0 * D; };
        try {
            solve_detuning_fixed_point(1.0, shift, 1.0);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            CHECK(e.previous_iterate() != e.last_iterate());
            CHECK(e.exit_code() == 3);
        }
    }
}

TEST_CASE("steady-state properties over random configurations") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        PhysicalConfig c = testing::set1();
        c.reflectivity = 0.999 * unit(rng);
        c.pump_power = 1e-6 + 50e-6 * unit(rng);
        c.temperature = 1.0 + 300.0 * unit(rng);
        c.mass = 1e-13 * std::pow(10.0, 2.0 * unit(rng));
        c.detuning_mode = DetuningMode::Bare;
        c.detuning_value = (0.5 + 3.0 * unit(rng)) * omega_m;
        const DerivedRates r = derive_rates(c);
        const SteadyState s = steady_state_self_consistent(c, r);

        const double m = c.mass;
        CHECK(s.X0 * m * m * omega_m * omega_m * (1.0 + 2.0 * s.alpha) ==
              doctest::Approx(s.Y0).epsilon(1e-14));
        CHECK(s.X0 > 0.0);
        CHECK(s.Y0 >= m * constants::hbar * omega_m / 2.0);
        CHECK(s.alpha >= 0.0);
        CHECK(s.beta >= 0.0);
        CHECK(std::abs(s.Delta - c.detuning_value - s.beta * omega_m) < 1e-9 * omega_m);

        // Rebuild the bare detuning from an effective-mode solution and solve back.
        PhysicalConfig eff = c;
        eff.detuning_mode = DetuningMode::Effective;
        eff.detuning_value = s.Delta;
        const SteadyState e = steady_state_self_consistent(eff, r);
        PhysicalConfig back = c;
        back.detuning_value = e.bare_detuning;
        CHECK(std::abs(steady_state_self_consistent(back, r).Delta - s.Delta) < 1e-8 * omega_m);

        // Hotter bath: larger n, Y0, X0, beta.
        PhysicalConfig hot = c;
        hot.detuning_mode = DetuningMode::Effective;
        hot.detuning_value = s.Delta;
        PhysicalConfig hotter = hot;
        hotter.temperature *= 1.5;
        const SteadyState h1 = steady_state_self_consistent(hot, r);
        const DerivedRates r2 = derive_rates(hotter);
        const SteadyState h2 = steady_state_self_consistent(hotter, r2);
        CHECK(r2.n_th > r.n_th);
        CHECK(h2.Y0 > h1.Y0);
        CHECK(h2.X0 > h1.X0);
        CHECK(h2.beta > h1.beta);

        // Stronger pump at fixed Delta: larger alpha, smaller X0.
        PhysicalConfig pumped = hot;
        pumped.pump_power *= 1.3;
        const SteadyState p2 = steady_state_self_consistent(pumped, derive_rates(pumped));
        CHECK(p2.alpha > h1.alpha);
        CHECK(p2.X0 < h1.X0);
    }
}
