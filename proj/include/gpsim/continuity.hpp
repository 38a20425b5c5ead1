#pragma once

#include <cmath>
#include <vector>

#include "gpsim/cutnorm.hpp"
#include "gpsim/errors.hpp"
#include "gpsim/kernel.hpp"
#include "gpsim/simulate.hpp"
#include "gpsim/wasserstein.hpp"

namespace gpsim {

struct ContinuityRow {
    double cut_norm_diff = 0.0;  // ||W - V||_cut, exact enumeration
    double d_T_lower = 0.0;      // matched-seed pooled-marginal estimate
};

struct ContinuityReport {
    std::vector<ContinuityRow> rows;
    // smallest constant consistent with the observed pairs:
    // max over rows of d_T^2 / cut_norm. A heuristic fit: the lower bound
    // stands in for the path distance.
    double c_hat = 0.0;
};

// Empirical continuity-in-cut-norm table: simulate the same scenario (same
// seed, so the noise and initial draws cancel) under W and each
// perturbation, and pair the cut norm of the difference with the pooled
// marginal D_T lower bound.
inline ContinuityReport continuity_diagnostic(
    const StepKernel& W, const std::vector<StepKernel>& perturbations,
    const CoefficientSet& coeffs, const InitialDatum& init,
    const SimConfig& cfg) {
    for (const auto& V : perturbations)
        if (V.breakpoints() != W.breakpoints())
            throw ShapeError(
                "continuity_diagnostic: perturbations must share the block "
                "structure of the base kernel");

    const auto base = simulate_finite(Kernel::step(W, "base"), coeffs, init,
                                      cfg);
    const auto base_marginals = pooled_marginal(base);

    ContinuityReport report;
    for (const auto& V : perturbations) {
        ContinuityRow row;
        const CutNormMode mode = W.block_count() <= 20
                                     ? CutNormMode::exact
                                     : CutNormMode::heuristic;
        row.cut_norm_diff = cut_norm(W - V, mode);
        const auto other =
            simulate_finite(Kernel::step(V, "perturbed"), coeffs, init, cfg);
        row.d_T_lower = d_T_lower_bound(base_marginals, pooled_marginal(other));
        report.rows.push_back(row);
        if (row.cut_norm_diff > 0.0)
            report.c_hat = std::max(
                report.c_hat,
                row.d_T_lower * row.d_T_lower / row.cut_norm_diff);
    }
    return report;
}

}  // namespace gpsim
