#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gpsim/errors.hpp"
#include "gpsim/intervals.hpp"
#include "gpsim/quadrature.hpp"

namespace gpsim {

// Kernel constant on products of partition blocks; the finite matrix
// representation all reduced systems run on.
class StepKernel {
public:
    StepKernel(std::vector<double> breakpoints,
               std::vector<std::vector<double>> values)
        : breaks_(std::move(breakpoints)), values_(std::move(values)) {
        validate();
    }

    std::size_t block_count() const { return values_.size(); }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<std::vector<double>>& values() const { return values_; }
    double value(std::size_t i, std::size_t j) const { return values_[i][j]; }

    double block_measure(std::size_t i) const {
        return breaks_[i + 1] - breaks_[i];
    }

    std::vector<double> block_measures() const {
        std::vector<double> m(block_count());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = block_measure(i);
        return m;
    }

    bool equal_measure_blocks(double tol = 1e-12) const {
        const double target = 1.0 / static_cast<double>(block_count());
        for (std::size_t i = 0; i < block_count(); ++i)
            if (std::abs(block_measure(i) - target) > tol) return false;
        return true;
    }

    std::size_t block_of(double x) const {
        if (!(x >= 0.0 && x <= 1.0))
            throw DomainError("StepKernel: label outside [0,1]");
        // Blocks are half-open [b_{i-1}, b_i); x = 1 belongs to the last one.
        const auto it =
            std::upper_bound(breaks_.begin(), breaks_.end(), x);
        const std::size_t idx =
            static_cast<std::size_t>(it - breaks_.begin());
        return std::min(idx == 0 ? 0 : idx - 1, block_count() - 1);
    }

    double eval(double x, double y) const {
        return values_[block_of(x)][block_of(y)];
    }

    double max_abs_value() const {
        double m = 0.0;
        for (const auto& row : values_)
            for (double v : row) m = std::max(m, std::abs(v));
        return m;
    }

    bool values_in_unit_interval() const {
        for (const auto& row : values_)
            for (double v : row)
                if (v < 0.0 || v > 1.0) return false;
        return true;
    }

    StepKernel operator-(const StepKernel& other) const {
        if (breaks_ != other.breaks_)
            throw ShapeError("StepKernel: subtraction needs equal blocks");
        auto vals = values_;
        for (std::size_t i = 0; i < vals.size(); ++i)
            for (std::size_t j = 0; j < vals.size(); ++j)
                vals[i][j] -= other.values_[i][j];
        return StepKernel(breaks_, std::move(vals));
    }

    StepKernel scaled(double c) const {
        auto vals = values_;
        for (auto& row : vals)
            for (double& v : row) v *= c;
        return StepKernel(breaks_, std::move(vals));
    }

    // Refine onto a superset of breakpoints; values are copied blockwise.
    StepKernel refined(const std::vector<double>& cuts) const {
        std::vector<double> merged = breaks_;
        merged.insert(merged.end(), cuts.begin(), cuts.end());
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        const std::size_t k = merged.size() - 1;
        std::vector<std::vector<double>> vals(k, std::vector<double>(k));
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t bi = block_of(0.5 * (merged[i] + merged[i + 1]));
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t bj =
                    block_of(0.5 * (merged[j] + merged[j + 1]));
                vals[i][j] = values_[bi][bj];
            }
        }
        return StepKernel(std::move(merged), std::move(vals));
    }

    LabelPartition block_partition() const {
        return LabelPartition::from_breakpoints(breaks_);
    }

private:
    void validate() const {
        const std::size_t k = values_.size();
        if (k == 0 || breaks_.size() != k + 1)
            throw ShapeError("StepKernel: need k+1 breakpoints for k blocks");
        if (breaks_.front() != 0.0 || breaks_.back() != 1.0)
            throw ShapeError("StepKernel: breakpoints must span [0,1]");
        for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
            if (!(breaks_[i] < breaks_[i + 1]))
                throw ShapeError(
                    "StepKernel: breakpoints must be strictly increasing");
        for (const auto& row : values_)
            if (row.size() != k)
                throw ShapeError("StepKernel: value matrix must be k x k");
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                if (values_[i][j] != values_[j][i])
                    throw ShapeError("StepKernel: value matrix not symmetric");
    }

    std::vector<double> breaks_;
    std::vector<std::vector<double>> values_;
};

// Bounded symmetric kernel on [0,1]^2. Constant and step kernels are exact;
// analytic kernels carry an evaluator plus declared bound. graphon() is true
// only when values are certified to lie in [0,1].
class Kernel {
public:
    static Kernel constant(double p, std::string id = "") {
        Kernel k;
        k.kind_ = Kind::constant;
        k.constant_ = p;
        k.bound_ = std::abs(p);
        k.graphon_ = (p >= 0.0 && p <= 1.0);
        k.id_ = id.empty() ? "constant:" + std::to_string(p) : std::move(id);
        return k;
    }

    static Kernel step(StepKernel sk, std::string id = "step") {
        Kernel k;
        k.kind_ = Kind::step;
        k.bound_ = sk.max_abs_value();
        k.graphon_ = sk.values_in_unit_interval();
        k.step_ = std::make_shared<StepKernel>(std::move(sk));
        k.id_ = std::move(id);
        return k;
    }

    static Kernel analytic(std::function<double(double, double)> eval,
                           double bound, bool graphon, std::string id) {
        Kernel k;
        k.kind_ = Kind::analytic;
        k.eval_ = std::move(eval);
        k.bound_ = bound;
        k.graphon_ = graphon;
        k.id_ = std::move(id);
        return k;
    }

    enum class Kind { constant, step, analytic };

    Kind kind() const { return kind_; }
    double bound() const { return bound_; }
    bool graphon() const { return graphon_; }
    const std::string& id() const { return id_; }

    bool is_step() const { return kind_ == Kind::step; }
    const StepKernel& as_step() const {
        if (!step_) throw ShapeError("Kernel: not a step kernel");
        return *step_;
    }

    double eval(double x, double y) const {
        if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0))
            throw DomainError("Kernel: label outside [0,1]");
        switch (kind_) {
            case Kind::constant:
                return constant_;
            case Kind::step:
                return step_->eval(x, y);
            case Kind::analytic:
                // Canonical argument order keeps evaluation symmetric even
                // under floating-point asymmetries of the evaluator.
                return x <= y ? eval_(x, y) : eval_(y, x);
        }
        return 0.0;
    }

private:
    Kind kind_ = Kind::constant;
    double constant_ = 0.0;
    std::shared_ptr<const StepKernel> step_;
    std::function<double(double, double)> eval_;
    double bound_ = 0.0;
    bool graphon_ = false;
    std::string id_;
};

// d_A(x): connection mass of label x toward the label set A. Exact block
// arithmetic for constant/step kernels, adaptive quadrature otherwise.
inline double degree_wrt(const Kernel& W, double x, const IntervalSet& A,
                         double quad_tol = 1e-10) {
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("degree_wrt: label outside [0,1]");
    switch (W.kind()) {
        case Kernel::Kind::constant: {
            double d = 0.0;
            for (const auto& [lo, hi] : A.parts())
                d += W.eval(x, lo) * (hi - lo);
            return d;
        }
        case Kernel::Kind::step: {
            const StepKernel& sk = W.as_step();
            const std::size_t bi = sk.block_of(x);
            double d = 0.0;
            for (std::size_t j = 0; j < sk.block_count(); ++j)
                d += sk.value(bi, j) *
                     A.overlap(sk.breakpoints()[j], sk.breakpoints()[j + 1]);
            return d;
        }
        case Kernel::Kind::analytic:
            return integrate_over([&](double y) { return W.eval(x, y); },
                                  A.parts(), quad_tol);
    }
    return 0.0;
}

inline double degree(const Kernel& W, double x, double quad_tol = 1e-10) {
    return degree_wrt(W, x, IntervalSet(0.0, 1.0), quad_tol);
}

// Equipartition block averaging: the step kernel whose (i,j) entry is the
// mean of W over S_i x S_j. This is the block construction behind weak
// regularity approximations.
inline StepKernel step_approximate(const Kernel& W, std::size_t k,
                                   double quad_tol = 1e-10) {
    if (k < 1) throw DomainError("step_approximate: k must be >= 1");
    std::vector<double> breaks(k + 1);
    for (std::size_t i = 0; i <= k; ++i)
        breaks[i] = static_cast<double>(i) / static_cast<double>(k);
    breaks.back() = 1.0;

    std::vector<std::vector<double>> vals(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const double xlo = breaks[i], xhi = breaks[i + 1];
            const double ylo = breaks[j], yhi = breaks[j + 1];
            const double area = (xhi - xlo) * (yhi - ylo);
            double mean = 0.0;
            switch (W.kind()) {
                case Kernel::Kind::constant:
                    mean = W.eval(xlo, ylo);
                    break;
                case Kernel::Kind::step: {
                    const StepKernel& sk = W.as_step();
                    const IntervalSet sx(xlo, xhi), sy(ylo, yhi);
                    double acc = 0.0;
                    for (std::size_t a = 0; a < sk.block_count(); ++a) {
                        const double mx = sx.overlap(sk.breakpoints()[a],
                                                     sk.breakpoints()[a + 1]);
                        if (mx == 0.0) continue;
                        for (std::size_t b = 0; b < sk.block_count(); ++b) {
                            const double my =
                                sy.overlap(sk.breakpoints()[b],
                                           sk.breakpoints()[b + 1]);
                            if (my == 0.0) continue;
                            acc += sk.value(a, b) * mx * my;
                        }
                    }
                    mean = acc / area;
                    break;
                }
                case Kernel::Kind::analytic: {
                    const auto outer = integrate(
                        [&](double x) {
                            return integrate(
                                       [&](double y) { return W.eval(x, y); },
                                       ylo, yhi, quad_tol * 0.25)
                                .value;
                        },
                        xlo, xhi, quad_tol);
                    mean = outer.value / area;
                    break;
                }
            }
            vals[i][j] = mean;
            vals[j][i] = mean;
        }
    }
    return StepKernel(std::move(breaks), std::move(vals));
}

// V(x,y) = W(phi(x), phi(y)) for the measure-preserving map phi permuting
// equal-measure blocks.
inline StepKernel relabel(const StepKernel& W,
                          const std::vector<std::size_t>& perm) {
    const std::size_t k = W.block_count();
    if (perm.size() != k)
        throw ShapeError("relabel: permutation size mismatch");
    std::vector<bool> seen(k, false);
    for (std::size_t p : perm) {
        if (p >= k || seen[p])
            throw ShapeError("relabel: not a permutation");
        seen[p] = true;
    }
    if (!W.equal_measure_blocks())
        throw ShapeError(
            "relabel: blocks must have equal measure to permute labels");
    std::vector<std::vector<double>> vals(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            vals[i][j] = W.value(perm[i], perm[j]);
    return StepKernel(W.breakpoints(), std::move(vals));
}

struct ConditionHReport {
    bool holds = false;
    double max_deviation = 0.0;
};

// Checks the equi-connection condition: for every pair of classes, the
// degree toward class [ybar] must be constant across labels of class [xbar].
// Step kernels are handled by exact per-block arithmetic (one representative
// per sub-piece of the class); analytic kernels by sampled quadrature.
inline ConditionHReport check_condition_H(const Kernel& W,
                                          const LabelPartition& P,
                                          std::size_t samples_per_class = 8,
                                          double tol = 1e-8) {
    if (samples_per_class < 2)
        throw DomainError("check_condition_H: need samples_per_class >= 2");
    double max_dev = 0.0;
    for (const auto& target : P.classes()) {
        for (const auto& source : P.classes()) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            auto consider = [&](double x) {
                const double d = degree_wrt(W, x, target.support);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            };
            if (W.is_step()) {
                // One sample per sub-piece of the class against the kernel
                // blocks; the degree is constant inside each sub-piece.
                const StepKernel& sk = W.as_step();
                for (const auto& [a, b] : source.support.parts())
                    for (std::size_t j = 0; j < sk.block_count(); ++j) {
                        const double l = std::max(a, sk.breakpoints()[j]);
                        const double h = std::min(b, sk.breakpoints()[j + 1]);
                        if (l < h) consider(0.5 * (l + h));
                    }
            } else {
                for (const auto& [a, b] : source.support.parts())
                    for (std::size_t s = 0; s < samples_per_class; ++s) {
                        const double u =
                            (static_cast<double>(s) + 0.5) /
                            static_cast<double>(samples_per_class);
                        consider(a + u * (b - a));
                    }
            }
            max_dev = std::max(max_dev, hi - lo);
        }
    }
    return {max_dev <= tol, max_dev};
}

}  // namespace gpsim
