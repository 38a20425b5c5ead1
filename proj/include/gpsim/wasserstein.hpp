#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "gpsim/errors.hpp"
#include "gpsim/rng.hpp"

namespace gpsim {

// Number of evenly spaced quantiles used whenever two snapshots cannot be
// coupled exactly (unequal sample counts, gridded densities).
inline constexpr std::size_t kQuantileMesh = 2048;

// A law at a fixed time: either a sorted sample vector or a density given
// as cell averages on a uniform grid.
class MeasureSnapshot {
public:
    static MeasureSnapshot empirical(std::vector<double> samples) {
        if (samples.empty())
            throw DomainError("MeasureSnapshot: empty sample");
        for (double v : samples)
            if (!std::isfinite(v))
                throw DomainError("MeasureSnapshot: non-finite sample");
        std::sort(samples.begin(), samples.end());
        MeasureSnapshot s;
        s.samples_ = std::move(samples);
        return s;
    }

    // density[c] is the cell average on [left + c h, left + (c+1) h).
    static MeasureSnapshot gridded(std::vector<double> density, double left,
                                   double h) {
        if (density.empty() || h <= 0.0)
            throw DomainError("MeasureSnapshot: bad grid");
        double mass = 0.0;
        for (double v : density) {
            if (v < -1e-12) throw DomainError("MeasureSnapshot: negative density");
            mass += v * h;
        }
        if (std::abs(mass - 1.0) > 1e-6)
            throw DomainError("MeasureSnapshot: density not normalized");
        MeasureSnapshot s;
        s.density_ = std::move(density);
        s.left_ = left;
        s.h_ = h;
        // cumulative mass at cell right edges, forced to end at exactly 1
        s.cdf_.resize(s.density_.size());
        double acc = 0.0;
        for (std::size_t c = 0; c < s.density_.size(); ++c) {
            acc += s.density_[c] * h;
            s.cdf_[c] = acc;
        }
        for (double& v : s.cdf_) v /= acc;
        return s;
    }

    bool is_empirical() const { return !samples_.empty(); }
    const std::vector<double>& samples() const { return samples_; }

    double quantile(double u) const {
        if (is_empirical()) {
            const std::size_t n = samples_.size();
            const std::size_t i = std::min(
                static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
            return samples_[i];
        }
        // invert the piecewise-linear CDF of the cell-average density
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        const std::size_t c = std::min(
            static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
        const double below = c == 0 ? 0.0 : cdf_[c - 1];
        const double cell_mass = cdf_[c] - below;
        const double frac =
            cell_mass > 0.0 ? std::clamp((u - below) / cell_mass, 0.0, 1.0)
                            : 0.5;
        return left_ + (static_cast<double>(c) + frac) * h_;
    }

    double mean() const {
        if (is_empirical()) {
            double s = 0.0;
            for (double v : samples_) s += v;
            return s / static_cast<double>(samples_.size());
        }
        double s = 0.0;
        for (std::size_t c = 0; c < density_.size(); ++c)
            s += (left_ + (static_cast<double>(c) + 0.5) * h_) * density_[c] *
                 h_;
        return s;
    }

    double variance() const {
        const double m = mean();
        if (is_empirical()) {
            double s = 0.0;
            for (double v : samples_) s += (v - m) * (v - m);
            return s / static_cast<double>(samples_.size());
        }
        double s = 0.0;
        for (std::size_t c = 0; c < density_.size(); ++c) {
            const double x = left_ + (static_cast<double>(c) + 0.5) * h_;
            s += (x - m) * (x - m) * density_[c] * h_;
        }
        return s;
    }

    // mean of f under the snapshot (exact for empirical, midpoint for grids)
    template <typename F>
    double expect(const F& f) const {
        if (is_empirical()) {
            double s = 0.0;
            for (double v : samples_) s += f(v);
            return s / static_cast<double>(samples_.size());
        }
        double s = 0.0;
        for (std::size_t c = 0; c < density_.size(); ++c)
            s += f(left_ + (static_cast<double>(c) + 0.5) * h_) * density_[c] *
                 h_;
        return s;
    }

private:
    std::vector<double> samples_;
    std::vector<double> density_;
    std::vector<double> cdf_;
    double left_ = 0.0;
    double h_ = 0.0;
};

// 2-Wasserstein distance between one-dimensional laws. Equal-size samples
// use the order coupling, which is optimal in one dimension; every other
// pairing goes through quantile functions on the common mesh.
inline double wasserstein2(const MeasureSnapshot& a, const MeasureSnapshot& b) {
    if (a.is_empirical() && b.is_empirical() &&
        a.samples().size() == b.samples().size()) {
        const auto& xs = a.samples();
        const auto& ys = b.samples();
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double d = xs[i] - ys[i];
            acc += d * d;
        }
        return std::sqrt(acc / static_cast<double>(xs.size()));
    }
    double acc = 0.0;
    for (std::size_t q = 0; q < kQuantileMesh; ++q) {
        const double u = (static_cast<double>(q) + 0.5) /
                         static_cast<double>(kQuantileMesh);
        const double d = a.quantile(u) - b.quantile(u);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(kQuantileMesh));
}

struct DTBounds {
    double lower = 0.0;   // max over grid times of the marginal W2
    double lower_stderr = 0.0;  // bootstrap error of the estimate at argmax
    double upper = 0.0;   // sqrt of a coupled pathwise sup-square estimate
    double upper_stderr = 0.0;
    bool has_upper = false;

    // the ordering lower <= upper holds up to the combined Monte Carlo error
    double combined_stderr() const { return lower_stderr + upper_stderr; }
};

// Lower bound for the path-law distance D_T from two time-indexed marginal
// families on a common grid: sup over times of the time-t W2 never exceeds
// the pathwise sup-norm transport cost.
inline double d_T_lower_bound(const std::vector<MeasureSnapshot>& a,
                              const std::vector<MeasureSnapshot>& b,
                              std::size_t* argmax = nullptr) {
    if (a.size() != b.size() || a.empty())
        throw ShapeError("d_T_lower_bound: snapshot grids differ");
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double w = wasserstein2(a[t], b[t]);
        if (w > worst) {
            worst = w;
            at = t;
        }
    }
    if (argmax) *argmax = at;
    return worst;
}

// Bootstrap standard error of the empirical W2 between two sample sets.
inline double bootstrap_w2_stderr(const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  std::size_t resamples, std::uint64_t seed,
                                  std::uint64_t tag = 0) {
    const CounterRng rng(seed);
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> ra(a.size()), rb(b.size());
    for (std::size_t r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < a.size(); ++i)
            ra[i] = a[static_cast<std::size_t>(
                rng.uniform(Stream::bootstrap, tag, r, 2 * i) *
                static_cast<double>(a.size()))];
        for (std::size_t i = 0; i < b.size(); ++i)
            rb[i] = b[static_cast<std::size_t>(
                rng.uniform(Stream::bootstrap, tag, r, 2 * i + 1) *
                static_cast<double>(b.size()))];
        const double w = wasserstein2(MeasureSnapshot::empirical(ra),
                                      MeasureSnapshot::empirical(rb));
        sum += w;
        sumsq += w * w;
    }
    const double n = static_cast<double>(resamples);
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sumsq / n - mean * mean));
}

}  // namespace gpsim
