#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gpsim/distributions.hpp"
#include "gpsim/rng.hpp"
#include "gpsim/wasserstein.hpp"

using namespace gpsim;

namespace {

std::vector<double> gaussian_sample(const CounterRng& rng, std::uint64_t tag,
                                    std::size_t n, double mean, double sd) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = mean + sd * rng.normal(Stream::test, tag, i);
    return v;
}

// assignment-problem optimum by explicit enumeration, n <= 8
double w2_bruteforce(std::vector<double> a, std::vector<double> b) {
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[perm[i]];
            cost += d * d;
        }
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::sqrt(best / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("elementary exact values") {
    const auto a = MeasureSnapshot::empirical({0.3, -1.0, 2.0});
    CHECK(wasserstein2(a, a) == 0.0);

    const auto p = MeasureSnapshot::empirical({1.0});
    const auto q = MeasureSnapshot::empirical({-2.5});
    CHECK(wasserstein2(p, q) == Catch::Approx(3.5));
}

TEST_CASE("order coupling equals the assignment optimum") {
    const CounterRng rng(17);
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + trial % 7;  // up to 8
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 4.0 * rng.uniform(Stream::test, trial, i, 0) - 2.0;
            b[i] = 4.0 * rng.uniform(Stream::test, trial, i, 1) - 2.0;
        }
        const double viaSort = wasserstein2(MeasureSnapshot::empirical(a),
                                            MeasureSnapshot::empirical(b));
        CHECK(viaSort == Catch::Approx(w2_bruteforce(a, b)).margin(1e-12));
    }
}

TEST_CASE("gaussian closed form within sampling error") {
    const CounterRng rng(99);
    const std::size_t n = 10000;
    const auto a =
        MeasureSnapshot::empirical(gaussian_sample(rng, 1, n, 0.0, 1.0));
    const auto b =
        MeasureSnapshot::empirical(gaussian_sample(rng, 2, n, 1.0, 1.0));
    // W2(N(m1,s1), N(m2,s2)) = sqrt((m1-m2)^2 + (s1-s2)^2)
    CHECK(wasserstein2(a, b) ==
          Catch::Approx(1.0).margin(3.0 / std::sqrt(double(n))));

    const auto c =
        MeasureSnapshot::empirical(gaussian_sample(rng, 3, n, -0.5, 2.0));
    const double oracle = std::sqrt(0.25 + 1.0);
    CHECK(wasserstein2(a, c) ==
          Catch::Approx(oracle).margin(4.0 / std::sqrt(double(n))));
}

TEST_CASE("metric axioms on random triples") {
    const CounterRng rng(7);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const std::size_t n = 16;
        std::vector<double> x(n), y(n), z(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.normal(Stream::test, trial, i, 0);
            y[i] = rng.normal(Stream::test, trial, i, 1);
            z[i] = rng.normal(Stream::test, trial, i, 2);
        }
        const auto A = MeasureSnapshot::empirical(x);
        const auto B = MeasureSnapshot::empirical(y);
        const auto C = MeasureSnapshot::empirical(z);
        const double ab = wasserstein2(A, B);
        const double ba = wasserstein2(B, A);
        const double ac = wasserstein2(A, C);
        const double cb = wasserstein2(C, B);
        CHECK(ab >= 0.0);
        CHECK(ab == ba);
        CHECK(ab <= ac + cb + 1e-12);
        CHECK(wasserstein2(A, A) == 0.0);
    }
}

TEST_CASE("unequal sizes go through the quantile mesh") {
    const CounterRng rng(23);
    // same law, so the distance is pure sampling noise (~ 0.03-0.08 for
    // unit-sd gaussians at these sizes)
    const auto big =
        MeasureSnapshot::empirical(gaussian_sample(rng, 4, 20000, 0.0, 1.0));
    const auto small =
        MeasureSnapshot::empirical(gaussian_sample(rng, 5, 3000, 0.0, 1.0));
    CHECK(wasserstein2(big, small) < 0.12);
}

TEST_CASE("gridded snapshots: CDF inversion against exact quantiles") {
    // discretized standard gaussian on [-8, 8)
    const std::size_t M = 1600;
    const double L = 8.0, h = 2.0 * L / M;
    const Distribution g = Distribution::gaussian(0.0, 1.0);
    std::vector<double> rho(M);
    for (std::size_t c = 0; c < M; ++c) {
        const double lo = -L + c * h;
        rho[c] = (g.cdf(lo + h) - g.cdf(lo)) / h;
    }
    const auto snap = MeasureSnapshot::gridded(rho, -L, h);
    CHECK(snap.quantile(0.5) == Catch::Approx(0.0).margin(h));
    CHECK(snap.quantile(0.975) == Catch::Approx(1.959964).margin(2 * h));
    CHECK(snap.mean() == Catch::Approx(0.0).margin(1e-6));
    CHECK(snap.variance() == Catch::Approx(1.0).margin(1e-3));

    // empirical vs gridded representation of the same law
    const CounterRng rng(31);
    const auto emp =
        MeasureSnapshot::empirical(gaussian_sample(rng, 6, 20000, 0.0, 1.0));
    CHECK(wasserstein2(snap, emp) < 0.05);

    // two grids with shifted mass
    std::vector<double> rho2(M);
    for (std::size_t c = 0; c < M; ++c) {
        const double lo = -L + c * h;
        rho2[c] = (g.cdf(lo + h - 0.75) - g.cdf(lo - 0.75)) / h;
    }
    const auto snap2 = MeasureSnapshot::gridded(rho2, -L, h);
    CHECK(wasserstein2(snap, snap2) == Catch::Approx(0.75).margin(0.01));
}

TEST_CASE("lipschitz test functions are dominated by W2") {
    const CounterRng rng(41);
    const auto f_sin = [](double x) { return std::sin(x); };
    const auto f_tanh = [](double x) { return std::tanh(x); };
    const auto f_clamp = [](double x) { return std::clamp(x, -1.0, 1.0); };
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const auto A = MeasureSnapshot::empirical(
            gaussian_sample(rng, 100 + trial, 256, 0.0, 1.0));
        const auto B = MeasureSnapshot::empirical(gaussian_sample(
            rng, 200 + trial, 256, 0.4, 1.3));
        const double w = wasserstein2(A, B);
        CHECK(std::abs(A.expect(f_sin) - B.expect(f_sin)) <= w + 1e-12);
        CHECK(std::abs(A.expect(f_tanh) - B.expect(f_tanh)) <= w + 1e-12);
        CHECK(std::abs(A.expect(f_clamp) - B.expect(f_clamp)) <= w + 1e-12);
    }
}

TEST_CASE("empty samples are rejected") {
    CHECK_THROWS_AS(MeasureSnapshot::empirical({}), DomainError);
}

TEST_CASE("mismatched time grids are a shape error") {
    const auto snap = MeasureSnapshot::empirical({0.0, 1.0});
    const std::vector<MeasureSnapshot> two{snap, snap};
    const std::vector<MeasureSnapshot> three{snap, snap, snap};
    CHECK_THROWS_AS(d_T_lower_bound(two, three), ShapeError);
}
