#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gpsim/coefficients.hpp"
#include "gpsim/config.hpp"
#include "gpsim/distributions.hpp"
#include "gpsim/errors.hpp"
#include "gpsim/kernel.hpp"
#include "gpsim/simulate.hpp"

namespace gpsim {

// ---------------------------------------------------------------------------
// built-in kernels

inline Kernel make_cayley_kernel(double base, double amp, double freq = 1.0,
                                 std::string id = "") {
    if (id.empty())
        id = "cayley:cos:" + std::to_string(base) + "," + std::to_string(amp);
    const bool graphon = base - std::abs(amp) >= 0.0 && base + std::abs(amp) <= 1.0;
    return Kernel::analytic(
        [base, amp, freq](double x, double y) {
            return base +
                   amp * std::cos(2.0 * std::numbers::pi * freq * (x - y));
        },
        std::abs(base) + std::abs(amp), graphon, std::move(id));
}

inline Kernel make_scalefree_kernel(double alpha = 1.0, std::string id = "") {
    if (id.empty()) id = "scalefree:" + std::to_string(alpha);
    return Kernel::analytic(
        [alpha](double x, double y) {
            return std::pow((1.0 - x) * (1.0 - y), alpha);
        },
        1.0, alpha > 0.0, std::move(id));
}

inline Kernel make_registry_kernel(const std::string& name) {
    if (name == "fig1-constant") return Kernel::constant(1.0 / 3.0, "fig1-constant");
    if (name == "fig1-disconnected")
        // two components with degrees balanced at 1/3
        return Kernel::step(
            StepKernel({0.0, 1.0 / 3.0, 1.0}, {{1.0, 0.0}, {0.0, 0.5}}),
            "fig1-disconnected");
    if (name == "fig1-cayley")
        // cosine ring profile with mean degree 1/3
        return make_cayley_kernel(1.0 / 3.0, 0.25, 1.0, "fig1-cayley");
    if (name == "fig2-scalefree") return make_scalefree_kernel(1.0, "fig2-scalefree");
    if (name == "fig2-step3") {
        // 3-block averaging of the scale-free kernel: entries a_i a_j with
        // a = (5/6, 1/2, 1/6)
        const double a0 = 5.0 / 6.0, a1 = 0.5, a2 = 1.0 / 6.0;
        return Kernel::step(StepKernel({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0},
                                       {{a0 * a0, a0 * a1, a0 * a2},
                                        {a1 * a0, a1 * a1, a1 * a2},
                                        {a2 * a0, a2 * a1, a2 * a2}}),
                            "fig2-step3");
    }
    throw ConfigError("unknown kernel name: " + name);
}

inline std::vector<std::pair<std::string, std::string>> kernel_registry() {
    return {
        {"fig1-constant", "constant kernel p = 1/3"},
        {"fig1-disconnected",
         "two disconnected blocks (measures 1/3, 2/3) with constant degree 1/3"},
        {"fig1-cayley", "cosine ring kernel 1/3 + 1/4 cos(2 pi (x-y))"},
        {"fig2-step3", "3-block averaging of the scale-free kernel"},
        {"fig2-scalefree", "scale-free kernel (1-x)(1-y)"},
    };
}

// Kernel specification grammar:
//   constant:p
//   step:<matrix-csv-path>:<b0,b1,...,bk>
//   stepinline:<r11,r12;r21,r22;...>:<b0,b1,...,bk>
//   cayley:cos:<base>,<amp>[,<freq>]
//   scalefree:<alpha>
//   <registry-name>
inline Kernel parse_kernel(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return make_registry_kernel(spec);
    const std::string head = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (head == "constant") {
        try {
            return Kernel::constant(std::stod(rest));
        } catch (const std::exception&) {
            throw ConfigError("constant kernel needs a numeric value: " + spec);
        }
    }
    if (head == "cayley") {
        const auto c2 = rest.find(':');
        if (c2 == std::string::npos)
            throw ConfigError("cayley kernel spec needs profile:params");
        const std::string profile = rest.substr(0, c2);
        if (profile != "cos")
            throw ConfigError("unknown cayley profile: " + profile);
        const auto params = parse_number_list(rest.substr(c2 + 1));
        if (params.size() < 2 || params.size() > 3)
            throw ConfigError("cayley:cos needs base,amp[,freq]");
        return make_cayley_kernel(params[0], params[1],
                                  params.size() == 3 ? params[2] : 1.0, spec);
    }
    if (head == "scalefree") {
        const auto params = parse_number_list(rest);
        if (params.size() != 1)
            throw ConfigError("scalefree kernel needs one exponent");
        return make_scalefree_kernel(params[0], spec);
    }
    if (head == "step") {
        const auto c2 = rest.rfind(':');
        if (c2 == std::string::npos)
            throw ConfigError("step kernel spec needs path:breakpoints");
        const std::string path = rest.substr(0, c2);
        const auto breaks = parse_number_list(rest.substr(c2 + 1));
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open step-kernel matrix " + path);
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
            rows.push_back(parse_number_list(line));
        }
        return Kernel::step(StepKernel(breaks, rows), spec);
    }
    if (head == "stepinline") {
        const auto c2 = rest.rfind(':');
        if (c2 == std::string::npos)
            throw ConfigError("stepinline kernel spec needs matrix:breakpoints");
        const auto breaks = parse_number_list(rest.substr(c2 + 1));
        std::vector<std::vector<double>> rows;
        std::istringstream in(rest.substr(0, c2));
        std::string row;
        while (std::getline(in, row, ';'))
            rows.push_back(parse_number_list(row));
        return Kernel::step(StepKernel(breaks, rows), spec);
    }
    throw ConfigError("unknown kernel spec: " + spec);
}

// ---------------------------------------------------------------------------
// built-in coefficient sets

// sigma rescales the (constant) diffusion; coupling scales the interaction.
inline CoefficientSet make_coefficients(const std::string& name,
                                        double sigma = 1.0,
                                        double coupling = 1.0) {
    CoefficientSet c;
    c.name = name;
    c.sigma = [sigma](double) { return sigma; };
    c.sigma_is_constant = true;
    c.sigma_constant = sigma;
    c.lipschitz_sigma = 0.0;
    c.bound_sigma = std::abs(sigma);
    if (name == "kuramoto") {
        c.F = [](double) { return 0.0; };
        c.lipschitz_F = 0.0;
        c.bound_F = 0.0;
        c.Gamma = [coupling](double a, double b) {
            return coupling * std::sin(b - a);
        };
        c.gamma_kind = GammaKind::phase_sine;
        c.sine_coupling = coupling;
        c.lipschitz_Gamma = std::abs(coupling);
        c.bound_Gamma = std::abs(coupling);
        return c;
    }
    if (name == "zero") {
        c.F = [](double) { return 0.0; };
        c.lipschitz_F = 0.0;
        c.bound_F = 0.0;
        c.Gamma = [](double, double) { return 0.0; };
        c.gamma_kind = GammaKind::zero;
        c.sine_coupling = 0.0;
        c.lipschitz_Gamma = 0.0;
        c.bound_Gamma = 0.0;
        return c;
    }
    if (name == "tanh-drift") {
        // mean-reverting drift, no interaction
        c.F = [](double x) { return -std::tanh(x); };
        c.lipschitz_F = 1.0;
        c.bound_F = 1.0;
        c.Gamma = [](double, double) { return 0.0; };
        c.gamma_kind = GammaKind::zero;
        c.sine_coupling = 0.0;
        c.lipschitz_Gamma = 0.0;
        c.bound_Gamma = 0.0;
        return c;
    }
    if (name == "kuramoto-tanh") {
        // tanh drift plus sine interaction, for scenarios needing both terms
        c.F = [](double x) { return -std::tanh(x); };
        c.lipschitz_F = 1.0;
        c.bound_F = 1.0;
        c.Gamma = [coupling](double a, double b) {
            return coupling * std::sin(b - a);
        };
        c.gamma_kind = GammaKind::phase_sine;
        c.sine_coupling = coupling;
        c.lipschitz_Gamma = std::abs(coupling);
        c.bound_Gamma = std::abs(coupling);
        return c;
    }
    throw ConfigError("unknown coefficient set: " + name);
}

inline std::vector<std::pair<std::string, std::string>> coefficient_registry() {
    return {
        {"kuramoto", "F = 0, Gamma = sin(theta' - theta), constant sigma"},
        {"zero", "all coefficients identically zero"},
        {"tanh-drift", "F = -tanh(theta), no interaction, constant sigma"},
        {"kuramoto-tanh", "F = -tanh(theta) with sine interaction"},
    };
}

// ---------------------------------------------------------------------------
// distributions

// Grammar: pointmass:a | gaussian:m,sd | uniform:a,b | empirical:v1;v2;...
// or a registry name.
inline Distribution parse_distribution(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        if (spec == "std-normal") return Distribution::gaussian(0.0, 1.0);
        if (spec == "point0") return Distribution::point_mass(0.0);
        throw ConfigError("unknown distribution name: " + spec);
    }
    const std::string head = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (head == "pointmass") {
        const auto p = parse_number_list(rest);
        if (p.size() != 1) throw ConfigError("pointmass needs one value");
        return Distribution::point_mass(p[0]);
    }
    if (head == "gaussian") {
        const auto p = parse_number_list(rest);
        if (p.size() != 2) throw ConfigError("gaussian needs mean,sd");
        return Distribution::gaussian(p[0], p[1]);
    }
    if (head == "uniform") {
        const auto p = parse_number_list(rest);
        if (p.size() != 2) throw ConfigError("uniform needs lo,hi");
        return Distribution::uniform(p[0], p[1]);
    }
    if (head == "empirical") {
        std::vector<double> samples;
        std::istringstream in(rest);
        std::string item;
        while (std::getline(in, item, ';')) {
            try {
                samples.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("empirical distribution: bad sample " + item);
            }
        }
        return Distribution::empirical(samples);
    }
    throw ConfigError("unknown distribution spec: " + spec);
}

inline std::vector<std::pair<std::string, std::string>>
distribution_registry() {
    return {
        {"std-normal", "gaussian with mean 0 and sd 1"},
        {"point0", "point mass at 0"},
    };
}

// ---------------------------------------------------------------------------
// config-backed constructors

// [init] section: either `dist = <spec>` for an iid datum, or
//   classes = k
//   class0.intervals = a,b[,c,d...]
//   class0.dist = <spec>
inline InitialDatum parse_initial(const Config& cfg,
                                  const std::string& section = "init") {
    if (cfg.has(section, "dist"))
        return InitialDatum::iid(parse_distribution(cfg.get(section, "dist")));
    const auto k =
        static_cast<std::size_t>(cfg.get_double_or(section, "classes", 0));
    if (k == 0)
        throw ConfigError("config: [" + section +
                          "] needs `dist` or `classes`");
    std::vector<LabelPartition::Class> classes;
    std::vector<Distribution> laws;
    for (std::size_t i = 0; i < k; ++i) {
        const std::string prefix = "class" + std::to_string(i);
        const auto nums =
            parse_number_list(cfg.get(section, prefix + ".intervals"));
        if (nums.size() < 2 || nums.size() % 2 != 0)
            throw ConfigError("config: " + prefix +
                              ".intervals needs lo,hi pairs");
        IntervalSet support;
        for (std::size_t p = 0; p < nums.size(); p += 2)
            support.add(nums[p], nums[p + 1]);
        classes.push_back(
            {support, 0.5 * (nums[0] + nums[1])});
        laws.push_back(parse_distribution(cfg.get(section, prefix + ".dist")));
    }
    return InitialDatum(LabelPartition(std::move(classes)), std::move(laws));
}

inline SimConfig parse_sim_config(const Config& cfg,
                                  const std::string& section = "sim") {
    SimConfig sc;
    sc.T = cfg.get_double_or(section, "T", sc.T);
    sc.dt = cfg.get_double_or(section, "dt", sc.dt);
    sc.N = static_cast<std::size_t>(
        cfg.get_double_or(section, "N", static_cast<double>(sc.N)));
    sc.seed = cfg.get_u64_or(section, "seed", sc.seed);
    const std::string coupling = cfg.get_or(section, "coupling", "weighted");
    if (coupling == "weighted")
        sc.coupling = SimConfig::Coupling::weighted;
    else if (coupling == "sampled-graph")
        sc.coupling = SimConfig::Coupling::sampled_graph;
    else
        throw ConfigError("config: unknown coupling mode " + coupling);
    const std::string labels = cfg.get_or(section, "labels", "equispaced");
    if (labels == "equispaced")
        sc.labels = SimConfig::Labels::equispaced;
    else if (labels == "uniform-random")
        sc.labels = SimConfig::Labels::uniform_random;
    else
        throw ConfigError("config: unknown label mode " + labels);
    sc.steps();  // validate
    return sc;
}

inline CoefficientSet parse_coefficients(const Config& cfg,
                                         const std::string& section = "coeffs") {
    return make_coefficients(cfg.get_or(section, "name", "kuramoto"),
                             cfg.get_double_or(section, "sigma", 1.0),
                             cfg.get_double_or(section, "coupling", 1.0));
}

}  // namespace gpsim
