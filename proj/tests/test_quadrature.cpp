#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gpsim/errors.hpp"
#include "gpsim/quadrature.hpp"

using namespace gpsim;

TEST_CASE("polynomials integrate to machine precision on one panel") {
    // The 15-point Kronrod rule is exact for these; any typo in the
    // node/weight tables would show up immediately.
    auto r = integrate([](double x) { return x * x * x * x * x * x * x * x; },
                       0.0, 1.0);
    CHECK(r.value == Catch::Approx(1.0 / 9.0).epsilon(1e-14));

    r = integrate([](double x) { return (3.0 * x - 1.0) * (x + 2.0); }, -1.0,
                  2.0);
    CHECK(r.value == Catch::Approx(10.5).epsilon(1e-13));

    r = integrate([](double) { return 2.5; }, 0.25, 0.75);
    CHECK(r.value == Catch::Approx(1.25).epsilon(1e-13));
}

TEST_CASE("smooth transcendental integrals hit the requested tolerance") {
    auto r = integrate([](double x) { return std::exp(-x * x); }, -6.0, 6.0);
    CHECK(r.value == Catch::Approx(std::sqrt(std::numbers::pi)).margin(1e-10));

    r = integrate([](double x) { return std::cos(2.0 * std::numbers::pi * x); },
                  0.0, 1.0);
    CHECK(std::abs(r.value) < 1e-12);

    r = integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0);
    CHECK(r.value == Catch::Approx(std::numbers::pi / 4.0).margin(1e-12));
}

TEST_CASE("adaptive refinement handles a sharp bump") {
    const double s = 1e-3;
    auto r = integrate(
        [&](double x) {
            const double z = (x - 0.3) / s;
            return std::exp(-0.5 * z * z);
        },
        0.0, 1.0, 1e-10);
    const double exact = s * std::sqrt(2.0 * std::numbers::pi);
    CHECK(r.value == Catch::Approx(exact).margin(1e-10));
}

TEST_CASE("empty and invalid intervals") {
    CHECK(integrate([](double x) { return x; }, 0.5, 0.5).value == 0.0);
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0),
                    DomainError);
}

TEST_CASE("non-convergence reports the achieved tolerance") {
    // A discontinuity keeps the error estimate from reaching an absurdly
    // tight tolerance within the evaluation budget.
    CHECK_THROWS_AS(integrate([](double x) { return x < 0.315423 ? 0.0 : 1.0; },
                              0.0, 1.0, 1e-300, 5000),
                    NumericalError);
}

TEST_CASE("interval unions add up") {
    const double v = integrate_over([](double x) { return x; },
                                    {{0.0, 0.25}, {0.5, 1.0}});
    CHECK(v == Catch::Approx(0.03125 + 0.375).epsilon(1e-13));
}
