#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gpsim/coefficients.hpp"
#include "gpsim/distributions.hpp"
#include "gpsim/errors.hpp"
#include "gpsim/kernel.hpp"
#include "gpsim/wasserstein.hpp"

namespace gpsim {

// Uniform cell grid on the truncated state space [-L, L].
struct SpatialGrid {
    double L = 8.0;
    std::size_t M = 400;

    void validate() const {
        if (!(L > 0.0) || M < 8)
            throw ConfigError("SpatialGrid: need L > 0 and M >= 8");
    }
    double h() const { return 2.0 * L / static_cast<double>(M); }
    double left() const { return -L; }
    double center(std::size_t c) const {
        return -L + (static_cast<double>(c) + 0.5) * h();
    }
};

// Suggested truncation: bounded drift plus the initial spread confine the
// mass well inside a box that grows linearly with the horizon.
inline SpatialGrid default_grid(const CoefficientSet& coeffs,
                                const InitialDatum& init, double T,
                                std::size_t M = 400) {
    double sd = 0.0, mean_span = 0.0;
    for (const auto& law : init.laws()) {
        sd = std::max(sd, law.sd());
        mean_span = std::max(mean_span, std::abs(law.mean()));
    }
    SpatialGrid g;
    g.L = mean_span +
          8.0 * (sd + coeffs.bound_F + coeffs.bound_Gamma) * std::max(1.0, T);
    g.M = M;
    return g;
}

// Per-block cell-average densities at snapshot times.
struct DensityGrid {
    SpatialGrid grid;
    std::vector<double> times;
    // snapshots[t][block][cell]
    std::vector<std::vector<std::vector<double>>> snapshots;
    std::size_t clipped_cells = 0;  // diagnostic: tiny negatives zeroed

    std::size_t block_count() const {
        return snapshots.empty() ? 0 : snapshots.front().size();
    }

    const std::vector<double>& density(std::size_t t, std::size_t b) const {
        return snapshots[t][b];
    }

    MeasureSnapshot snapshot(std::size_t t, std::size_t b) const {
        return MeasureSnapshot::gridded(snapshots[t][b], grid.left(),
                                        grid.h());
    }

    double mass(std::size_t t, std::size_t b) const {
        double m = 0.0;
        for (double v : snapshots[t][b]) m += v;
        return m * grid.h();
    }
};

// Cell averages of a law on the grid via CDF differences, normalized to
// unit mass on the truncated domain.
inline std::vector<double> project_density(const Distribution& law,
                                           const SpatialGrid& grid) {
    const double h = grid.h();
    std::vector<double> rho(grid.M);
    double total = 0.0;
    for (std::size_t c = 0; c < grid.M; ++c) {
        const double lo = grid.left() + static_cast<double>(c) * h;
        const double mass = law.cdf(lo + h) - law.cdf(lo);
        rho[c] = mass / h;
        total += mass;
    }
    if (total <= 0.0)
        throw DomainError("project_density: no mass inside the grid");
    for (double& v : rho) v /= total;
    return rho;
}

namespace detail {

// Chang-Cooper face coefficients: the flux through face c+1/2 is
// J = P rho_c + Q rho_{c+1} with P >= 0 >= Q, so the implicit update matrix
// is an M-matrix (positivity) with zero column sums (exact mass balance).
// The exponential fitting weight makes discrete equilibria of the
// drift-diffusion balance exact; with zero diffusion it degenerates to the
// first-order upwind flux.
inline void face_coefficients(double drift, double diffusion, double h,
                              double& P, double& Q) {
    if (diffusion <= 0.0) {
        P = std::max(drift, 0.0);
        Q = std::min(drift, 0.0);
        return;
    }
    const double g = diffusion / h;
    const double w = drift * h / diffusion;
    if (w > 500.0) {
        P = drift;
        Q = 0.0;
    } else if (w < -500.0) {
        P = 0.0;
        Q = drift;
    } else if (std::abs(w) < 1e-12) {
        P = g * (1.0 + 0.5 * w);
        Q = -g * (1.0 - 0.5 * w);
    } else {
        P = g * w / (-std::expm1(-w));
        Q = -g * w / std::expm1(w);
    }
}

// Tridiagonal solve (Thomas), overwriting rhs with the solution.
inline void solve_tridiagonal(std::vector<double>& sub,
                              std::vector<double>& diag,
                              std::vector<double>& super,
                              std::vector<double>& rhs) {
    const std::size_t m = diag.size();
    for (std::size_t c = 1; c < m; ++c) {
        const double w = sub[c] / diag[c - 1];
        diag[c] -= w * super[c - 1];
        rhs[c] -= w * rhs[c - 1];
    }
    rhs[m - 1] /= diag[m - 1];
    for (std::size_t c = m - 1; c-- > 0;)
        rhs[c] = (rhs[c] - super[c] * rhs[c + 1]) / diag[c];
}

}  // namespace detail

// Deterministic solver for the k coupled nonlinear Fokker-Planck equations
// on a step kernel: drift F plus sum_j w_ij m_j int Gamma(theta, .) drho_j,
// diffusion sigma^2/2, no-flux boundaries. Interaction integrals use
// midpoint quadrature on the cells and are recomputed every step from the
// current densities (explicit coupling); the flux itself is advanced
// implicitly, one tridiagonal solve per block per step.
inline DensityGrid solve_fp_system(const StepKernel& W,
                                   const CoefficientSet& coeffs,
                                   std::vector<std::vector<double>> init,
                                   const SpatialGrid& grid, double T,
                                   double dt, std::size_t snapshot_stride = 1) {
    grid.validate();
    const std::size_t k = W.block_count();
    const std::size_t M = grid.M;
    const double h = grid.h();
    if (init.size() != k)
        throw ShapeError("solve_fp_system: one initial density per block");
    if (!(dt > 0.0) || !(T >= dt))
        throw ConfigError("solve_fp_system: need dt > 0 and T >= dt");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (snapshot_stride < 1) snapshot_stride = 1;

    std::vector<double> initial_mass(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& rho = init[i];
        if (rho.size() != M)
            throw ShapeError("solve_fp_system: initial density has wrong size");
        double mass = 0.0;
        for (double v : rho) {
            if (v < 0.0)
                throw DomainError("solve_fp_system: negative initial density");
            mass += v * h;
        }
        if (std::abs(mass - 1.0) > 1e-8)
            throw DomainError("solve_fp_system: initial density not normalized");
        initial_mass[i] = mass;
    }

    // time-independent tables
    std::vector<double> center(M), drift_F(M), diff(M);
    for (std::size_t c = 0; c < M; ++c) {
        center[c] = grid.center(c);
        drift_F[c] = coeffs.F(center[c]);
        const double s = coeffs.sigma(center[c]);
        diff[c] = 0.5 * s * s;
    }
    std::vector<double> sin_c(M), cos_c(M);
    const bool sine = coeffs.gamma_kind == GammaKind::phase_sine;
    const bool zero = coeffs.gamma_kind == GammaKind::zero;
    if (sine)
        for (std::size_t c = 0; c < M; ++c) {
            sin_c[c] = std::sin(center[c]);
            cos_c[c] = std::cos(center[c]);
        }
    // coef_ij = w_ij * m_j: the kernel integral over block-j labels
    std::vector<std::vector<double>> coef(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            coef[i][j] = W.value(i, j) * W.block_measure(j);

    DensityGrid out;
    out.grid = grid;
    auto record = [&](std::size_t step,
                      const std::vector<std::vector<double>>& rho) {
        out.times.push_back(static_cast<double>(step) * dt);
        out.snapshots.push_back(rho);
    };

    std::vector<std::vector<double>> rho = std::move(init);
    record(0, rho);

    std::vector<std::vector<double>> inter(k, std::vector<double>(M, 0.0));
    std::vector<double> sub(M), dia(M), sup(M), rhs(M), btilde(M > 0 ? M - 1 : 0);

    for (std::size_t step = 1; step <= steps; ++step) {
        // interaction integrals I_j(theta_c) = int Gamma(theta_c, y) rho_j(y) dy
        if (!zero) {
            if (sine) {
                for (std::size_t j = 0; j < k; ++j) {
                    double S = 0.0, C = 0.0;
                    for (std::size_t c = 0; c < M; ++c) {
                        S += sin_c[c] * rho[j][c];
                        C += cos_c[c] * rho[j][c];
                    }
                    S *= h * coeffs.sine_coupling;
                    C *= h * coeffs.sine_coupling;
                    for (std::size_t c = 0; c < M; ++c)
                        inter[j][c] = cos_c[c] * S - sin_c[c] * C;
                }
            } else {
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t c = 0; c < M; ++c) {
                        double acc = 0.0;
                        for (std::size_t cc = 0; cc < M; ++cc)
                            acc += coeffs.Gamma(center[c], center[cc]) *
                                   rho[j][cc];
                        inter[j][c] = acc * h;
                    }
            }
        }

        for (std::size_t i = 0; i < k; ++i) {
            // cell-center drift for this block
            for (std::size_t c = 0; c < M; ++c) rhs[c] = drift_F[c];
            if (!zero)
                for (std::size_t j = 0; j < k; ++j) {
                    const double w = coef[i][j];
                    if (w == 0.0) continue;
                    for (std::size_t c = 0; c < M; ++c)
                        rhs[c] += w * inter[j][c];
                }
            // face drift corrected for non-constant diffusion:
            // d/dtheta (D rho) - b rho = D d rho - (b - D') rho
            double max_face = 0.0;
            for (std::size_t c = 0; c + 1 < M; ++c) {
                btilde[c] = 0.5 * (rhs[c] + rhs[c + 1]) -
                            (diff[c + 1] - diff[c]) / h;
                max_face = std::max(max_face, std::abs(btilde[c]));
            }
            if (dt * max_face / h > 1.0)
                throw NumericalError(
                    "solve_fp_system: drift CFL violated for the explicit "
                    "interaction coupling; suggested dt <= " +
                    std::to_string(0.9 * h / max_face));

            // assemble I - dt A and solve
            for (std::size_t c = 0; c < M; ++c) {
                sub[c] = 0.0;
                sup[c] = 0.0;
                dia[c] = 1.0;
            }
            for (std::size_t c = 0; c + 1 < M; ++c) {
                const double Dface = 0.5 * (diff[c] + diff[c + 1]);
                double P = 0.0, Q = 0.0;
                detail::face_coefficients(btilde[c], Dface, h, P, Q);
                const double r = dt / h;
                // flux out of cell c through face c+1/2
                dia[c] += r * P;
                sup[c] += r * Q;
                // same flux into cell c+1
                sub[c + 1] -= r * P;
                dia[c + 1] -= r * Q;
            }
            for (std::size_t c = 0; c < M; ++c) rhs[c] = rho[i][c];
            detail::solve_tridiagonal(sub, dia, sup, rhs);

            double mass = 0.0;
            for (std::size_t c = 0; c < M; ++c) {
                if (rhs[c] < 0.0) {
                    if (rhs[c] < -1e-14)
                        throw NumericalError(
                            "solve_fp_system: negative density " +
                            std::to_string(rhs[c]) + " at step " +
                            std::to_string(step));
                    rhs[c] = 0.0;
                    ++out.clipped_cells;
                }
                mass += rhs[c];
            }
            mass *= h;
            if (std::abs(mass - initial_mass[i]) > 1e-10)
                throw NumericalError(
                    "solve_fp_system: mass drifted to " +
                    std::to_string(mass) + " at step " + std::to_string(step));
            rho[i] = rhs;
        }

        if (step % snapshot_stride == 0 || step == steps) record(step, rho);
    }
    return out;
}

inline DensityGrid solve_fp_system(const StepKernel& W,
                                   const CoefficientSet& coeffs,
                                   const std::vector<Distribution>& init,
                                   const SpatialGrid& grid, double T,
                                   double dt, std::size_t snapshot_stride = 1) {
    std::vector<std::vector<double>> densities;
    densities.reserve(init.size());
    for (const auto& law : init) densities.push_back(project_density(law, grid));
    return solve_fp_system(W, coeffs, std::move(densities), grid, T, dt,
                           snapshot_stride);
}

// Classical McKean-Vlasov equation: the one-block system with coupling p.
inline DensityGrid solve_mckean_vlasov(double p, const CoefficientSet& coeffs,
                                       const std::vector<double>& init,
                                       const SpatialGrid& grid, double T,
                                       double dt,
                                       std::size_t snapshot_stride = 1) {
    return solve_fp_system(StepKernel({0.0, 1.0}, {{p}}), coeffs, {init},
                           grid, T, dt, snapshot_stride);
}

inline DensityGrid solve_mckean_vlasov(double p, const CoefficientSet& coeffs,
                                       const Distribution& init,
                                       const SpatialGrid& grid, double T,
                                       double dt,
                                       std::size_t snapshot_stride = 1) {
    return solve_mckean_vlasov(p, coeffs, project_density(init, grid), grid, T,
                               dt, snapshot_stride);
}

// Splitting block `block` into two sub-blocks with identical rows must not
// change the solution: the sub-block equations are the parent equation.
// Returns true when the refined solve reproduces the parent densities
// within `tol` on every cell of every snapshot.
inline bool split_block_refinement_check(const StepKernel& W,
                                         std::size_t block, double ratio,
                                         const CoefficientSet& coeffs,
                                         const std::vector<Distribution>& init,
                                         const SpatialGrid& grid, double T,
                                         double dt, double tol = 1e-12) {
    const std::size_t k = W.block_count();
    if (block >= k)
        throw ShapeError("split_block_refinement_check: bad block index");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw DomainError("split_block_refinement_check: ratio must be in (0,1)");
    if (init.size() != k)
        throw ShapeError("split_block_refinement_check: one law per block");

    const double cut = W.breakpoints()[block] + ratio * W.block_measure(block);
    const StepKernel refined = W.refined({cut});
    std::vector<Distribution> refined_init;
    for (std::size_t i = 0; i < k; ++i) {
        refined_init.push_back(init[i]);
        if (i == block) refined_init.push_back(init[i]);
    }

    const DensityGrid parent =
        solve_fp_system(W, coeffs, init, grid, T, dt);
    const DensityGrid child =
        solve_fp_system(refined, coeffs, refined_init, grid, T, dt);

    double worst = 0.0;
    for (std::size_t t = 0; t < parent.times.size(); ++t)
        for (std::size_t i = 0; i < k; ++i) {
            const auto& p = parent.snapshots[t][i];
            const std::size_t child_a = i <= block ? i : i + 1;
            for (std::size_t part = 0; part < (i == block ? 2u : 1u); ++part) {
                const auto& q = child.snapshots[t][child_a + part];
                for (std::size_t c = 0; c < p.size(); ++c)
                    worst = std::max(worst, std::abs(p[c] - q[c]));
            }
        }
    return worst <= tol;
}

}  // namespace gpsim
