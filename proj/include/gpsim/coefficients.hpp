#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "gpsim/rng.hpp"

namespace gpsim {

// Structural tags for the interaction term. The generic path evaluates
// Gamma pointwise; phase_sine marks Gamma(a,b) = coupling * sin(b - a),
// which simulators and the PDE solver may factor through one sin/cos pass
// per sweep (algebraically the same sums). `zero` skips the interaction
// entirely.
enum class GammaKind { generic, zero, phase_sine };

// Drift F, interaction Gamma (first argument is the particle's own state),
// diffusion sigma, with declared Lipschitz constants and sup-bounds.
struct CoefficientSet {
    std::string name;
    std::function<double(double)> F;
    std::function<double(double, double)> Gamma;
    std::function<double(double)> sigma;

    double lipschitz_F = 1.0;
    double lipschitz_Gamma = 1.0;  // per argument
    double lipschitz_sigma = 1.0;
    double bound_F = 1.0;
    double bound_Gamma = 1.0;
    double bound_sigma = 1.0;

    GammaKind gamma_kind = GammaKind::generic;
    double sine_coupling = 1.0;  // meaningful when gamma_kind == phase_sine

    bool sigma_is_constant = false;
    double sigma_constant = 0.0;

    struct CheckReport {
        bool ok = true;
        double worst_lipschitz_ratio = 0.0;  // max observed |df|/(L |dx|)
        double worst_bound_ratio = 0.0;      // max observed |f|/bound
    };

    // Randomized verification of the declared Lipschitz constants and
    // bounds on `pairs` sampled argument pairs in [-range, range].
    CheckReport check(std::uint64_t seed = 7, std::size_t pairs = 10000,
                      double range = 6.0) const {
        const CounterRng rng(seed);
        CheckReport rep;
        auto ratio = [](double num, double den) {
            return den > 0.0 ? num / den : (num > 0.0 ? 1e300 : 0.0);
        };
        auto track1 = [&](const std::function<double(double)>& f, double L,
                          double B, std::uint64_t tag) {
            for (std::size_t i = 0; i < pairs; ++i) {
                const double a =
                    range * (2.0 * rng.uniform(Stream::test, tag, i, 0) - 1.0);
                const double b =
                    range * (2.0 * rng.uniform(Stream::test, tag, i, 1) - 1.0);
                const double fa = f(a), fb = f(b);
                rep.worst_bound_ratio = std::max(
                    rep.worst_bound_ratio,
                    ratio(std::max(std::abs(fa), std::abs(fb)), B));
                if (a != b)
                    rep.worst_lipschitz_ratio = std::max(
                        rep.worst_lipschitz_ratio,
                        ratio(std::abs(fa - fb), L * std::abs(a - b)));
            }
        };
        track1(F, lipschitz_F, bound_F, 1);
        track1(sigma, lipschitz_sigma, bound_sigma, 2);
        for (std::size_t i = 0; i < pairs; ++i) {
            const double x =
                range * (2.0 * rng.uniform(Stream::test, 3, i, 0) - 1.0);
            const double y =
                range * (2.0 * rng.uniform(Stream::test, 3, i, 1) - 1.0);
            const double z =
                range * (2.0 * rng.uniform(Stream::test, 3, i, 2) - 1.0);
            const double g = Gamma(x, y);
            rep.worst_bound_ratio =
                std::max(rep.worst_bound_ratio, ratio(std::abs(g), bound_Gamma));
            // per-argument Lipschitz
            if (x != z)
                rep.worst_lipschitz_ratio = std::max(
                    rep.worst_lipschitz_ratio,
                    ratio(std::abs(g - Gamma(z, y)),
                          lipschitz_Gamma * std::abs(x - z)));
            if (y != z)
                rep.worst_lipschitz_ratio = std::max(
                    rep.worst_lipschitz_ratio,
                    ratio(std::abs(g - Gamma(x, z)),
                          lipschitz_Gamma * std::abs(y - z)));
        }
        rep.ok = rep.worst_lipschitz_ratio <= 1.0 + 1e-9 &&
                 rep.worst_bound_ratio <= 1.0 + 1e-9;
        return rep;
    }
};

}  // namespace gpsim
