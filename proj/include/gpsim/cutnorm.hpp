#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "gpsim/errors.hpp"
#include "gpsim/kernel.hpp"
#include "gpsim/rng.hpp"

namespace gpsim {

enum class CutNormMode { exact, heuristic };

namespace detail {

// Measure-weighted block matrix a_ij = w_ij * m_i * m_j. The cut norm of a
// step kernel is max over s, t in {0,1}^k of |s^T a t|: the objective is
// bilinear in the (fractional) block selections, so the maximum over the
// unit box is attained at a vertex.
inline std::vector<std::vector<double>> weighted_blocks(const StepKernel& W) {
    const std::size_t k = W.block_count();
    std::vector<std::vector<double>> a(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            a[i][j] = W.value(i, j) * (W.block_measure(i) * W.block_measure(j));
    return a;
}

// For a fixed row selection with column scores c_j = sum_i a_ij s_i, the
// best |objective| over t in {0,1}^k is max(sum of positive c_j, -sum of
// negative c_j).
inline double best_over_columns(const std::vector<double>& c) {
    double pos = 0.0, neg = 0.0;
    for (double v : c) {
        if (v > 0.0) pos += v;
        else neg -= v;
    }
    return std::max(pos, neg);
}

inline double cut_norm_exact(const std::vector<std::vector<double>>& a) {
    const std::size_t k = a.size();
    if (k > 20)
        throw CapabilityError(
            "cut_norm: exact enumeration supports at most 20 blocks; use "
            "heuristic mode");
    std::vector<double> c(k, 0.0);
    std::vector<bool> in(k, false);
    double best = 0.0;  // s = 0 gives 0
    // Gray-code walk over row subsets, updating column scores by one row.
    const std::size_t total = static_cast<std::size_t>(1) << k;
    std::size_t gray = 0;
    for (std::size_t step = 1; step < total; ++step) {
        const std::size_t next = step ^ (step >> 1);
        const std::size_t row =
            static_cast<std::size_t>(std::countr_zero(gray ^ next));
        gray = next;
        const double sign = in[row] ? -1.0 : 1.0;
        in[row] = !in[row];
        for (std::size_t j = 0; j < k; ++j) c[j] += sign * a[row][j];
        best = std::max(best, best_over_columns(c));
    }
    return best;
}

// Alternating maximization from random restarts: single-row flips on the
// row selection, with the column selection re-optimized exactly after every
// move (t_j responds per coordinate to the column scores). Always a lower
// bound on the exact value; each restart tries both signs of the objective.
inline double cut_norm_heuristic(const std::vector<std::vector<double>>& a,
                                 std::uint64_t seed, int restarts) {
    const std::size_t k = a.size();
    const CounterRng rng(seed);
    double best = 0.0;
    auto response = [&](const std::vector<double>& c, double sign) {
        double v = 0.0;
        for (double x : c) v += std::max(sign * x, 0.0);
        return v;
    };
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> s(k);
        for (std::size_t i = 0; i < k; ++i)
            s[i] = rng.uniform(Stream::cutnorm, r, i) < 0.5 ? 0.0 : 1.0;
        std::vector<double> c(k, 0.0);  // column scores sum_i a_ij s_i
        for (std::size_t i = 0; i < k; ++i)
            if (s[i] == 1.0)
                for (std::size_t j = 0; j < k; ++j) c[j] += a[i][j];
        for (double sign : {1.0, -1.0}) {
            std::vector<double> cs = c, ss = s;
            double cur = response(cs, sign);
            bool improved = true;
            while (improved) {
                improved = false;
                for (std::size_t i = 0; i < k; ++i) {
                    const double d = ss[i] == 1.0 ? -1.0 : 1.0;
                    double trial = 0.0;
                    for (std::size_t j = 0; j < k; ++j)
                        trial += std::max(sign * (cs[j] + d * a[i][j]), 0.0);
                    if (trial > cur + 1e-15) {
                        for (std::size_t j = 0; j < k; ++j)
                            cs[j] += d * a[i][j];
                        ss[i] = 1.0 - ss[i];
                        cur = trial;
                        improved = true;
                    }
                }
            }
            best = std::max(best, cur);
        }
    }
    return best;
}

}  // namespace detail

// Cut norm of a step kernel: max over measurable S, T of |int_{SxT} W|.
// Exact vertex enumeration up to 20 blocks, alternating maximization with 8
// random restarts beyond (always a lower bound on the exact value).
inline double cut_norm(const StepKernel& W,
                       CutNormMode mode = CutNormMode::exact,
                       std::uint64_t seed = 0x5eedu, int restarts = 8) {
    const auto a = detail::weighted_blocks(W);
    if (mode == CutNormMode::exact) return detail::cut_norm_exact(a);
    return detail::cut_norm_heuristic(a, seed, restarts);
}

namespace detail {

inline StepKernel permuted_difference(const StepKernel& W, const StepKernel& V,
                                      const std::vector<std::size_t>& perm) {
    const std::size_t k = W.block_count();
    std::vector<std::vector<double>> vals(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            vals[i][j] = W.value(i, j) - V.value(perm[i], perm[j]);
    return StepKernel(W.breakpoints(), std::move(vals));
}

}  // namespace detail

// Cut distance restricted to block permutations of equal-measure step
// kernels: min over permutations phi of ||W - V^phi||_cut. An upper bound on
// the full cut distance (which minimizes over all measure-preserving maps);
// exact whenever the optimal relabeling is a block permutation. Exhaustive
// over permutations for k <= 8, sampled permutations with pairwise-swap
// descent beyond.
inline double cut_distance_step(const StepKernel& W, const StepKernel& V,
                                std::uint64_t seed = 0x5eedu) {
    if (W.block_count() != V.block_count())
        throw ShapeError("cut_distance_step: block counts differ");
    if (!W.equal_measure_blocks() || !V.equal_measure_blocks() ||
        W.breakpoints() != V.breakpoints())
        throw ShapeError(
            "cut_distance_step: kernels need matching equal-measure blocks");
    const std::size_t k = W.block_count();
    const CutNormMode inner_mode =
        k <= 20 ? CutNormMode::exact : CutNormMode::heuristic;
    auto objective = [&](const std::vector<std::size_t>& perm) {
        return cut_norm(detail::permuted_difference(W, V, perm), inner_mode,
                        seed);
    };

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    if (k <= 8) {
        double best = objective(perm);
        while (std::next_permutation(perm.begin(), perm.end()))
            best = std::min(best, objective(perm));
        return best;
    }

    // Heuristic: random permutations plus pairwise-swap descent.
    const CounterRng rng(seed);
    double best = objective(perm);
    const int samples = 64;
    for (int r = 0; r < samples; ++r) {
        std::vector<std::size_t> p(k);
        std::iota(p.begin(), p.end(), 0);
        for (std::size_t i = k; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(
                rng.uniform(Stream::permutation, r, i) *
                static_cast<double>(i));
            std::swap(p[i - 1], p[std::min(j, i - 1)]);
        }
        double val = objective(p);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i < k && !improved; ++i)
                for (std::size_t j = i + 1; j < k && !improved; ++j) {
                    std::swap(p[i], p[j]);
                    const double v = objective(p);
                    if (v < val - 1e-15) {
                        val = v;
                        improved = true;
                    } else {
                        std::swap(p[i], p[j]);
                    }
                }
        }
        best = std::min(best, val);
    }
    return best;
}

}  // namespace gpsim
