#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "gpsim/kernel.hpp"
#include "gpsim/registry.hpp"

using namespace gpsim;

TEST_CASE("registry contents are present and stable") {
    auto contains = [](const auto& reg, const std::string& name) {
        for (const auto& [n, d] : reg)
            if (n == name) return true;
        return false;
    };
    const auto coeffs = coefficient_registry();
    CHECK(contains(coeffs, "kuramoto"));
    CHECK(contains(coeffs, "zero"));
    CHECK(contains(coeffs, "tanh-drift"));

    const auto kernels = kernel_registry();
    CHECK(contains(kernels, "fig1-disconnected"));
    CHECK(contains(kernels, "fig1-cayley"));
    CHECK(contains(kernels, "fig2-step3"));

    // listing is deterministic
    CHECK(kernel_registry() == kernel_registry());
    CHECK(coefficient_registry() == coefficient_registry());
    CHECK(distribution_registry() == distribution_registry());

    for (const auto& [name, desc] : kernels) {
        const Kernel W = make_registry_kernel(name);
        CHECK(W.id() == name);
        CHECK(W.graphon());
    }
}

TEST_CASE("built-in kernels have the advertised degrees") {
    // all three constant-degree kernels sit at degree 1/3
    for (const std::string name :
         {"fig1-constant", "fig1-disconnected", "fig1-cayley"}) {
        const Kernel W = make_registry_kernel(name);
        for (double x : {0.05, 0.4, 0.77})
            CHECK(degree(W, x) == Catch::Approx(1.0 / 3.0).margin(1e-9));
    }
    // the 3-block step kernel averages the scale-free kernel
    const Kernel fig2 = make_registry_kernel("fig2-step3");
    const StepKernel oracle =
        step_approximate(make_registry_kernel("fig2-scalefree"), 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(fig2.as_step().value(i, j) ==
                  Catch::Approx(oracle.value(i, j)).margin(1e-9));
}

TEST_CASE("registry coefficients honor their declared constants") {
    for (const auto& [name, desc] : coefficient_registry()) {
        const auto c = make_coefficients(name, 0.7, 1.0);
        const auto rep = c.check(11, 2000);
        INFO(name);
        CHECK(rep.ok);
    }
}

TEST_CASE("kernel grammar round trips") {
    const Kernel c = parse_kernel("constant:0.25");
    CHECK(c.eval(0.1, 0.9) == 0.25);

    const Kernel cay = parse_kernel("cayley:cos:0.5,0.25");
    CHECK(cay.eval(0.25, 0.25) == Catch::Approx(0.75));
    CHECK(cay.graphon());

    const Kernel sf = parse_kernel("scalefree:1");
    CHECK(sf.eval(0.0, 0.0) == Catch::Approx(1.0));
    CHECK(sf.eval(1.0, 0.3) == Catch::Approx(0.0));

    // step kernel from a matrix file
    const std::string path = "test_step_matrix.csv";
    {
        std::ofstream out(path);
        out << "1.0,0.0\n0.0,0.5\n";
    }
    const Kernel step = parse_kernel("step:" + path + ":0,0.3333333333333333,1");
    CHECK(step.is_step());
    CHECK(step.eval(0.1, 0.1) == 1.0);
    CHECK(step.eval(0.9, 0.9) == 0.5);
    std::remove(path.c_str());

    CHECK_THROWS_AS(parse_kernel("constant:abc"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("nosuchkernel"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("step:/nonexistent.csv:0,1"), ConfigError);
    CHECK_THROWS_AS(parse_kernel("cayley:sin:1,2"), ConfigError);
}

TEST_CASE("distribution grammar") {
    CHECK(parse_distribution("pointmass:2").quantile(0.3) == 2.0);
    CHECK(parse_distribution("gaussian:1,0.5").mean() == Catch::Approx(1.0));
    CHECK(parse_distribution("uniform:0,2").quantile(0.25) ==
          Catch::Approx(0.5));
    CHECK(parse_distribution("empirical:0;2").mean() == Catch::Approx(1.0));
    CHECK(parse_distribution("std-normal").sd() == Catch::Approx(1.0));
    CHECK_THROWS_AS(parse_distribution("gaussian:1"), ConfigError);
    CHECK_THROWS_AS(parse_distribution("mystery"), ConfigError);
}

TEST_CASE("config-backed scenario pieces") {
    const Config cfg = Config::parse_string(R"(
[sim]
T = 0.5
dt = 0.01
N = 100
seed = 9
coupling = sampled-graph
labels = uniform-random

[coeffs]
name = kuramoto
sigma = 0.3

[init]
classes = 2
class0.intervals = 0,0.5
class0.dist = pointmass:0
class1.intervals = 0.5,1
class1.dist = gaussian:2,0.1
)");
    const SimConfig sc = parse_sim_config(cfg);
    CHECK(sc.N == 100);
    CHECK(sc.coupling == SimConfig::Coupling::sampled_graph);
    CHECK(sc.labels == SimConfig::Labels::uniform_random);
    CHECK(sc.steps() == 50);

    const CoefficientSet co = parse_coefficients(cfg);
    CHECK(co.name == "kuramoto");
    CHECK(co.sigma_constant == 0.3);

    const InitialDatum init = parse_initial(cfg);
    CHECK(init.partition().size() == 2);
    CHECK(init.law_at(0.25).quantile(0.9) == 0.0);
    CHECK(init.law_at(0.75).mean() == Catch::Approx(2.0));

    CHECK_THROWS_AS(parse_sim_config(Config::parse_string(
                        "[sim]\ncoupling = telepathy\n")),
                    ConfigError);
    CHECK_THROWS_AS(parse_initial(Config::parse_string("[init]\nx = 1\n")),
                    ConfigError);
}
