#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "gpsim/registry.hpp"
#include "gpsim/simulate.hpp"

using namespace gpsim;

namespace {

InitialDatum two_block_pointmass(double a, double b, double cut = 0.5) {
    return InitialDatum(LabelPartition::from_breakpoints({0.0, cut, 1.0}),
                        {Distribution::point_mass(a),
                         Distribution::point_mass(b)});
}

// High-order oracle for the two-population phase ODE
//   y0' = m0 sin(y0-y0) + m1 sin(y1-y0),  y1' = m0 sin(y0-y1)
// (all-to-all coupling with unit strength).
std::array<double, 2> rk4_two_population(double a, double b, double m0,
                                         double m1, double T, double dt) {
    std::array<double, 2> y{a, b};
    auto f = [&](const std::array<double, 2>& v) {
        return std::array<double, 2>{m1 * std::sin(v[1] - v[0]),
                                     m0 * std::sin(v[0] - v[1])};
    };
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t n = 0; n < steps; ++n) {
        const auto k1 = f(y);
        const auto k2 = f({y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]});
        const auto k3 = f({y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]});
        const auto k4 = f({y[0] + dt * k3[0], y[1] + dt * k3[1]});
        y[0] += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        y[1] += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    }
    return y;
}

double block_mean(const TrajectoryEnsemble& e, std::size_t n, double lo,
                  double hi) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < e.particles(); ++i)
        if (e.labels[i] >= lo && e.labels[i] < hi) {
            sum += e.state(n, i);
            ++count;
        }
    return sum / static_cast<double>(count);
}

}  // namespace

TEST_CASE("zero dynamics leaves the initial draws untouched") {
    SimConfig cfg;
    cfg.N = 64;
    cfg.T = 0.5;
    cfg.dt = 1e-2;
    cfg.seed = 5;
    const auto ens = simulate_finite(
        Kernel::constant(0.7), make_coefficients("zero", 0.0),
        InitialDatum::iid(Distribution::gaussian(0.0, 1.0)), cfg);
    for (std::size_t n = 0; n <= ens.steps; ++n)
        for (std::size_t i = 0; i < ens.particles(); ++i)
            CHECK(ens.state(n, i) == ens.state(0, i));
}

TEST_CASE("symmetric sine interaction from a common point is a fixed point") {
    SimConfig cfg;
    cfg.N = 128;
    cfg.T = 0.2;
    cfg.dt = 1e-2;
    const auto ens = simulate_finite(
        Kernel::constant(1.0), make_coefficients("kuramoto", 0.0),
        InitialDatum::iid(Distribution::point_mass(0.0)), cfg);
    for (std::size_t i = 0; i < ens.particles(); ++i)
        CHECK(ens.state(ens.steps, i) == 0.0);
}

TEST_CASE("two point clouds attract along the two-population ODE") {
    SimConfig cfg;
    cfg.N = 2000;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    cfg.seed = 11;
    const double b0 = 0.0, b1 = std::numbers::pi / 2.0;
    const auto ens = simulate_finite(Kernel::constant(1.0),
                                     make_coefficients("kuramoto", 0.0),
                                     two_block_pointmass(b0, b1), cfg);

    const auto oracle = rk4_two_population(b0, b1, 0.5, 0.5, cfg.T, 1e-5);
    CHECK(block_mean(ens, ens.steps, 0.0, 0.5) ==
          Catch::Approx(oracle[0]).margin(5e-3));
    CHECK(block_mean(ens, ens.steps, 0.5, 1.0) ==
          Catch::Approx(oracle[1]).margin(5e-3));

    // the gap closes monotonically
    double prev = b1 - b0;
    for (std::size_t n = 100; n <= ens.steps; n += 100) {
        const double gap = block_mean(ens, n, 0.5, 1.0) -
                           block_mean(ens, n, 0.0, 0.5);
        CHECK(gap < prev + 1e-12);
        CHECK(gap > 0.0);
        prev = gap;
    }
}

TEST_CASE("fixed seed means bitwise-identical ensembles") {
    SimConfig cfg;
    cfg.N = 300;
    cfg.T = 0.3;
    cfg.dt = 1e-2;
    cfg.seed = 99;
    const auto init = InitialDatum::iid(Distribution::gaussian(0.2, 0.8));
    const auto coeffs = make_coefficients("kuramoto", 0.5);
    const Kernel W = make_registry_kernel("fig1-disconnected");
    const auto a = simulate_finite(W, coeffs, init, cfg);
    const auto b = simulate_finite(W, coeffs, init, cfg);
    REQUIRE(a.states.size() == b.states.size());
    CHECK(std::memcmp(a.states.data(), b.states.data(),
                      a.states.size() * sizeof(double)) == 0);

    cfg.seed = 100;
    const auto c = simulate_finite(W, coeffs, init, cfg);
    CHECK(std::memcmp(a.states.data(), c.states.data(),
                      a.states.size() * sizeof(double)) != 0);
}

TEST_CASE("deterministic drift growth stays under the coefficient bounds") {
    SimConfig cfg;
    cfg.N = 400;
    cfg.T = 2.0;
    cfg.dt = 1e-2;
    // |F| <= 1 and graphon-weighted |Gamma| <= 1 give |theta' | <= 2
    const auto ens = simulate_finite(
        Kernel::constant(1.0), make_coefficients("kuramoto-tanh", 0.0),
        InitialDatum::iid(Distribution::uniform(-2.0, 2.0)), cfg);
    for (std::size_t i = 0; i < ens.particles(); ++i)
        CHECK(std::abs(ens.state(ens.steps, i) - ens.state(0, i)) <=
              2.0 * cfg.T + 1e-9);
}

TEST_CASE("phase-sine fast path agrees with the generic interaction") {
    SimConfig cfg;
    cfg.N = 150;
    cfg.T = 0.2;
    cfg.dt = 2e-3;
    cfg.seed = 3;
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 1.0));
    auto fast = make_coefficients("kuramoto", 0.4, 0.8);
    auto slow = fast;
    slow.gamma_kind = GammaKind::generic;
    for (const auto& W :
         {make_registry_kernel("fig1-disconnected"),
          make_registry_kernel("fig1-cayley"), Kernel::constant(0.6)}) {
        const auto a = simulate_finite(W, fast, init, cfg);
        const auto b = simulate_finite(W, slow, init, cfg);
        double worst = 0.0;
        for (std::size_t idx = 0; idx < a.states.size(); ++idx)
            worst = std::max(worst,
                             std::abs(a.states[idx] - b.states[idx]));
        CHECK(worst < 1e-11);
    }
}

TEST_CASE("one-block reduced system is the classical McKean-Vlasov cloud") {
    const double p = 0.35;
    const auto coeffs = make_coefficients("kuramoto", 0.6);
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 1.0));
    const std::size_t M = 256;

    SimConfig cfg;
    cfg.N = M;
    cfg.T = 0.4;
    cfg.dt = 2e-3;
    cfg.seed = 17;
    const auto full = simulate_finite(Kernel::constant(p), coeffs, init, cfg);
    const auto red = simulate_reduced(StepKernel({0.0, 1.0}, {{p}}), coeffs,
                                      init, M, cfg.T, cfg.dt, cfg.seed);
    REQUIRE(red.ensemble.states.size() == full.states.size());
    CHECK(std::memcmp(red.ensemble.states.data(), full.states.data(),
                      full.states.size() * sizeof(double)) == 0);
}

TEST_CASE("zero coupling matrix decouples the reduced blocks") {
    const auto init = two_block_pointmass(-1.0, 2.0);
    const std::size_t M = 128;
    const double T = 0.3, dt = 2e-3;
    const std::uint64_t seed = 23;

    const auto coupled = simulate_reduced(
        StepKernel({0.0, 0.5, 1.0}, {{0.0, 0.0}, {0.0, 0.0}}),
        make_coefficients("kuramoto", 0.5), init, M, T, dt, seed);
    const auto free = simulate_reduced(
        StepKernel({0.0, 0.5, 1.0}, {{0.0, 0.0}, {0.0, 0.0}}),
        make_coefficients("zero", 0.5), init, M, T, dt, seed);
    CHECK(std::memcmp(coupled.ensemble.states.data(),
                      free.ensemble.states.data(),
                      free.ensemble.states.size() * sizeof(double)) == 0);
}

TEST_CASE("reduced system refines the kernel by the init partition") {
    // kernel has one block, init has two classes: the simulation must run
    // on the two-block refinement
    const auto red = simulate_reduced(
        StepKernel({0.0, 1.0}, {{1.0}}), make_coefficients("kuramoto", 0.0),
        two_block_pointmass(0.0, 1.0), 32, 0.1, 1e-2, 7);
    CHECK(red.block_count() == 2);
    CHECK(red.ensemble.state(0, 0) == 0.0);
    CHECK(red.ensemble.state(0, 32) == 1.0);
}

TEST_CASE("within-block exchangeability under substream permutation") {
    // Particle (b, m) draws its initial value and noise from substream
    // b*M + m. Re-running with the substreams permuted inside block 0 must
    // leave each block's empirical measure unchanged: the state multiset is
    // permuted, so the low moments agree up to summation reordering.
    const StepKernel W({0.0, 0.5, 1.0}, {{0.9, 0.3}, {0.3, 0.5}});
    const auto coeffs = make_coefficients("kuramoto", 0.5);
    const InitialDatum init(LabelPartition::from_breakpoints({0.0, 0.5, 1.0}),
                            {Distribution::gaussian(0.0, 0.5),
                             Distribution::gaussian(1.0, 0.5)});
    const std::size_t M = 64;
    const double T = 0.2, dt = 2e-3;
    const std::uint64_t seed = 31;

    const auto base = simulate_reduced(W, coeffs, init, M, T, dt, seed);
    const std::size_t last = base.ensemble.steps;
    auto moments = [&](const TrajectoryEnsemble& e, std::size_t b) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double v = e.state(last, b * M + m);
            m1 += v;
            m2 += v * v;
        }
        return std::array<double, 2>{m1 / M, m2 / M};
    };
    const auto base0 = moments(base.ensemble, 0);
    const auto base1 = moments(base.ensemble, 1);

    // mirror of the reduced update loop with a permuted stream assignment
    auto run_permuted = [&](const std::vector<std::size_t>& perm) {
        const CounterRng rng(seed);
        const double sqdt = std::sqrt(dt);
        auto stream_of = [&](std::size_t g) {
            return g < M ? perm[g] : g;  // permute block 0 only
        };
        std::vector<double> cur(2 * M), next(2 * M);
        const double means[2] = {0.0, 1.0};
        for (std::size_t g = 0; g < 2 * M; ++g)
            cur[g] = means[g / M] +
                     0.5 * CounterRng::inverse_normal_cdf(
                               rng.uniform(Stream::init, stream_of(g)));
        const double inv_m = 1.0 / static_cast<double>(M);
        const auto steps = static_cast<std::size_t>(std::llround(T / dt));
        for (std::size_t n = 0; n < steps; ++n) {
            double s_blk[2] = {0.0, 0.0}, c_blk[2] = {0.0, 0.0};
            for (std::size_t g = 0; g < 2 * M; ++g) {
                s_blk[g / M] += std::sin(cur[g]);
                c_blk[g / M] += std::cos(cur[g]);
            }
            for (std::size_t g = 0; g < 2 * M; ++g) {
                const std::size_t b = g / M;
                double ws = 0.0, wc = 0.0;
                for (std::size_t j = 0; j < 2; ++j) {
                    const double coef = W.value(b, j) * 0.5 * inv_m;
                    ws += coef * s_blk[j];
                    wc += coef * c_blk[j];
                }
                const double inter =
                    std::cos(cur[g]) * ws - std::sin(cur[g]) * wc;
                const double xi =
                    rng.normal(Stream::brownian, stream_of(g), n);
                next[g] = cur[g] + inter * dt + 0.5 * sqdt * xi;
            }
            std::swap(cur, next);
        }
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            m1 += cur[m];
            m2 += cur[m] * cur[m];
        }
        double n1 = 0.0, n2 = 0.0;
        for (std::size_t m = M; m < 2 * M; ++m) {
            n1 += cur[m];
            n2 += cur[m] * cur[m];
        }
        return std::array<double, 4>{m1 / M, m2 / M, n1 / M, n2 / M};
    };

    const CounterRng perm_rng(555);
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> perm(M);
        for (std::size_t m = 0; m < M; ++m) perm[m] = m;
        for (std::size_t m = M; m > 1; --m) {
            const auto j = static_cast<std::size_t>(
                perm_rng.uniform(Stream::test, trial, m) * double(m));
            std::swap(perm[m - 1], perm[std::min(j, m - 1)]);
        }
        const auto got = run_permuted(perm);
        CHECK(got[0] == Catch::Approx(base0[0]).margin(1e-10));
        CHECK(got[1] == Catch::Approx(base0[1]).margin(1e-10));
        CHECK(got[2] == Catch::Approx(base1[0]).margin(1e-10));
        CHECK(got[3] == Catch::Approx(base1[1]).margin(1e-10));
    }
}

TEST_CASE("coupled pair: identical labels and constant kernels couple exactly") {
    SimConfig cfg;
    cfg.N = 200;
    cfg.T = 0.3;
    cfg.dt = 2e-3;
    cfg.seed = 41;
    const auto coeffs = make_coefficients("kuramoto", 0.5);
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 1.0));

    const auto same = coupled_pair(make_registry_kernel("fig1-disconnected"),
                                   0.2, 0.2, coeffs, init, 50, cfg);
    CHECK(same.mean_sup_sq == 0.0);

    const auto constant =
        coupled_pair(Kernel::constant(0.8), 0.1, 0.9, coeffs, init, 50, cfg);
    CHECK(constant.mean_sup_sq == 0.0);
    CHECK(constant.d_T_upper() == 0.0);
}

TEST_CASE("coupled pair detects a broken equi-connection condition") {
    SimConfig cfg;
    cfg.N = 500;
    cfg.T = 0.5;
    cfg.dt = 2e-3;
    cfg.seed = 43;
    const auto coeffs = make_coefficients("kuramoto", 0.4);
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 1.0));
    const Kernel bad = Kernel::step(
        StepKernel({0.0, 0.5, 1.0}, {{1.0, 0.0}, {0.0, 0.0}}));

    const auto res = coupled_pair(bad, 0.25, 0.75, coeffs, init, 200, cfg);
    CHECK(res.mean_sup_sq > 3.0 * res.stderr_sup_sq);
    CHECK(res.mean_sup_sq > 0.0);

    // labels from different classes are rejected
    const auto split_init = two_block_pointmass(0.0, 1.0);
    CHECK_THROWS_AS(
        coupled_pair(bad, 0.25, 0.75, coeffs, split_init, 10, cfg),
        DomainError);
}

TEST_CASE("equi-degree reduced blocks reproduce the mean-field cloud") {
    // constant-degree kernel + iid init behaves like the single-block
    // system at the common degree; agreement is statistical
    const auto coeffs = make_coefficients("kuramoto", 0.3);
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 0.5));
    const double T = 0.5, dt = 1e-3;
    const auto disc = simulate_reduced(
        make_registry_kernel("fig1-disconnected").as_step(), coeffs, init,
        1000, T, dt, 51);
    const auto mf = simulate_reduced(StepKernel({0.0, 1.0}, {{1.0 / 3.0}}),
                                     coeffs, init, 1000, T, dt, 52);
    const auto mf_marg = mf.block_marginal(0).back();
    for (std::size_t b = 0; b < 2; ++b) {
        const auto blk = disc.block_marginal(b).back();
        CHECK(wasserstein2(blk, mf_marg) < 0.06);
    }
}

TEST_CASE("d_T bounds bracket: lower below coupled upper") {
    SimConfig cfg;
    cfg.N = 500;
    cfg.T = 0.5;
    cfg.dt = 2e-3;
    cfg.seed = 53;
    const auto coeffs = make_coefficients("kuramoto", 0.4);
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 1.0));
    const Kernel bad = Kernel::step(
        StepKernel({0.0, 0.5, 1.0}, {{1.0, 0.0}, {0.0, 0.0}}));

    // marginal route: same-law block sub-ensembles of one simulation
    const auto ens = simulate_finite(bad, coeffs, init, cfg);
    const auto left = restricted_marginal(ens, IntervalSet(0.0, 0.5));
    const auto right = restricted_marginal(ens, IntervalSet(0.5, 1.0));
    // coupled route: shared-noise pair across the two blocks
    const auto coupled = coupled_pair(bad, 0.25, 0.75, coeffs, init, 200, cfg);
    const auto bounds = d_T_bounds(left, right, coupled);
    CHECK(bounds.has_upper);
    CHECK(bounds.lower >= 0.0);
    CHECK(bounds.lower_stderr > 0.0);
    // both routes see the same path-law gap up to their sampling errors
    CHECK(bounds.lower <=
          bounds.upper + 3.0 * bounds.combined_stderr() + 1e-12);

    // identical families collapse the bracket
    const auto self_bounds = d_T_bounds(left, left);
    CHECK(self_bounds.lower == 0.0);
}

TEST_CASE("weighted and sampled-graph modes approach each other with N") {
    const Kernel W = make_registry_kernel("fig1-disconnected");
    const auto coeffs = make_coefficients("kuramoto", 0.3);
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 0.5));
    auto gap_at = [&](std::size_t N) {
        SimConfig cfg;
        cfg.N = N;
        cfg.T = 0.5;
        cfg.dt = 2e-3;
        cfg.seed = 7;
        const auto weighted = simulate_finite(W, coeffs, init, cfg);
        cfg.coupling = SimConfig::Coupling::sampled_graph;
        const auto sampled = simulate_finite(W, coeffs, init, cfg);
        const auto ma = pooled_marginal(weighted);
        const auto mb = pooled_marginal(sampled);
        return wasserstein2(ma.back(), mb.back());
    };
    const double g250 = gap_at(250);
    const double g1000 = gap_at(1000);
    const double g4000 = gap_at(4000);
    CHECK(g4000 < g250);
    CHECK(g1000 < 1.5 * g250);
    CHECK(g4000 < 1.5 * g1000);
}

TEST_CASE("sampled-graph mode requires a graphon") {
    SimConfig cfg;
    cfg.N = 50;
    cfg.T = 0.1;
    cfg.dt = 1e-2;
    cfg.coupling = SimConfig::Coupling::sampled_graph;
    CHECK_THROWS_AS(
        simulate_finite(Kernel::constant(1.5), make_coefficients("zero"),
                        InitialDatum::iid(Distribution::point_mass(0.0)), cfg),
        ConfigError);
}

TEST_CASE("numerical blow-up reports the first offending step") {
    SimConfig cfg;
    cfg.N = 8;
    cfg.T = 10.0;
    cfg.dt = 0.1;
    CoefficientSet runaway = make_coefficients("zero", 0.0);
    runaway.F = [](double x) { return 1e6 * x; };
    try {
        simulate_finite(Kernel::constant(0.0), runaway,
                        InitialDatum::iid(Distribution::point_mass(1.0)), cfg);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("a vanishing kernel makes every coupling mode and kernel moot") {
    // the interaction term drops out entirely, so all zero-valued kernels
    // produce bitwise the same paths as the interaction-free coefficients
    SimConfig cfg;
    cfg.N = 120;
    cfg.T = 0.2;
    cfg.dt = 2e-3;
    cfg.seed = 61;
    const auto init = InitialDatum::iid(Distribution::gaussian(0.0, 1.0));
    const auto kuramoto = make_coefficients("kuramoto", 0.5);
    const auto none = make_coefficients("zero", 0.5);
    const auto base = simulate_finite(Kernel::constant(0.0), none, init, cfg);
    for (const auto& spec :
         {std::string("constant:0"), std::string("stepinline:0,0;0,0:0,0.5,1"),
          std::string("cayley:cos:0,0")}) {
        const auto run = simulate_finite(parse_kernel(spec), kuramoto, init,
                                         cfg);
        CHECK(std::memcmp(run.states.data(), base.states.data(),
                          base.states.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("pooled marginal of a single-block ensemble is the block marginal") {
    SimConfig cfg;
    cfg.N = 90;
    cfg.T = 0.1;
    cfg.dt = 1e-2;
    const auto ens = simulate_finite(
        Kernel::constant(0.4), make_coefficients("kuramoto", 0.5),
        InitialDatum::iid(Distribution::gaussian(0.0, 1.0)), cfg);
    const auto pooled = pooled_marginal(ens);
    const auto block = restricted_marginal(ens, IntervalSet(0.0, 1.0));
    REQUIRE(pooled.size() == block.size());
    for (std::size_t n = 0; n < pooled.size(); ++n)
        CHECK(wasserstein2(pooled[n], block[n]) == 0.0);
}

TEST_CASE("ensembles carry provenance") {
    SimConfig cfg;
    cfg.N = 16;
    cfg.T = 0.1;
    cfg.dt = 1e-2;
    const auto a = simulate_finite(
        Kernel::constant(0.4), make_coefficients("zero"),
        InitialDatum::iid(Distribution::point_mass(0.0)), cfg);
    CHECK(a.kernel_id == "constant:0.400000");
    CHECK(a.config_digest.size() == 16);
    cfg.seed = 1;
    const auto b = simulate_finite(
        Kernel::constant(0.4), make_coefficients("zero"),
        InitialDatum::iid(Distribution::point_mass(0.0)), cfg);
    CHECK(a.config_digest != b.config_digest);
}

TEST_CASE("uniform-random labels stay reproducible") {
    SimConfig cfg;
    cfg.N = 100;
    cfg.T = 0.1;
    cfg.dt = 1e-2;
    cfg.labels = SimConfig::Labels::uniform_random;
    cfg.seed = 77;
    const auto a = simulate_finite(
        make_registry_kernel("fig1-disconnected"),
        make_coefficients("kuramoto", 0.2),
        InitialDatum::iid(Distribution::gaussian(0.0, 1.0)), cfg);
    const auto b = simulate_finite(
        make_registry_kernel("fig1-disconnected"),
        make_coefficients("kuramoto", 0.2),
        InitialDatum::iid(Distribution::gaussian(0.0, 1.0)), cfg);
    CHECK(a.labels == b.labels);
    for (double x : a.labels) {
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
    CHECK(std::memcmp(a.states.data(), b.states.data(),
                      a.states.size() * sizeof(double)) == 0);
}
