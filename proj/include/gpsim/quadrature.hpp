#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "gpsim/errors.hpp"

namespace gpsim {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
// Nodes/weights for the positive half; node 0 listed once.
inline constexpr double kKronrodNodes[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
};
inline constexpr double kKronrodWeights[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785,
    0.169004726639267, 0.140653259715525, 0.104790010322250,
    0.063092092629979, 0.022935322010529,
};
// Gauss weights attach to Kronrod nodes 0, 2, 4, 6.
inline constexpr double kGaussWeights[4] = {
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
};

template <typename F>
inline void gauss_kronrod_panel(const F& f, double a, double b, double& value,
                                double& error) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double fsum =
            (i == 0) ? f(mid) : f(mid - dx) + f(mid + dx);
        kronrod += kKronrodWeights[i] * fsum;
        if (i % 2 == 0) gauss += kGaussWeights[i / 2] * fsum;
    }
    value = kronrod * half;
    error = std::abs((kronrod - gauss) * half);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a, b] to an absolute
// tolerance. Splits the interval with the largest error estimate until the
// total estimate drops below abs_tol or the evaluation budget runs out.
template <typename F>
QuadratureResult integrate(const F& f, double a, double b,
                           double abs_tol = 1e-10,
                           std::size_t max_evaluations = 1000000) {
    if (!(b >= a)) throw DomainError("integrate: interval end before start");
    QuadratureResult res;
    if (a == b) return res;

    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    std::priority_queue<Panel> queue;

    Panel root{a, b, 0.0, 0.0};
    detail::gauss_kronrod_panel(f, a, b, root.value, root.error);
    res.evaluations = 15;
    double total_value = root.value;
    double total_error = root.error;
    queue.push(root);

    while (total_error > abs_tol && res.evaluations + 30 <= max_evaluations) {
        const Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left{worst.a, mid, 0.0, 0.0};
        Panel right{mid, worst.b, 0.0, 0.0};
        detail::gauss_kronrod_panel(f, left.a, left.b, left.value, left.error);
        detail::gauss_kronrod_panel(f, right.a, right.b, right.value,
                                    right.error);
        res.evaluations += 30;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        if (mid == worst.a || mid == worst.b) break;  // interval exhausted
    }

    if (total_error > abs_tol) {
        throw NumericalError(
            "integrate: quadrature did not converge, achieved tolerance " +
            std::to_string(total_error) + " > requested " +
            std::to_string(abs_tol));
    }
    res.value = total_value;
    res.error_estimate = total_error;
    return res;
}

// Integral of f over a union of intervals.
template <typename F>
double integrate_over(const F& f,
                      const std::vector<std::pair<double, double>>& intervals,
                      double abs_tol = 1e-10) {
    double total = 0.0;
    for (const auto& [lo, hi] : intervals)
        total += integrate(f, lo, hi, abs_tol).value;
    return total;
}

}  // namespace gpsim
