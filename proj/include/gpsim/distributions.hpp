#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gpsim/errors.hpp"
#include "gpsim/intervals.hpp"
#include "gpsim/rng.hpp"

namespace gpsim {

// One-dimensional law with finite second moment. Sampling goes through the
// quantile function so a single uniform from a counter stream fully
// determines the draw.
class Distribution {
public:
    enum class Kind { point_mass, gaussian, uniform, empirical };

    static Distribution point_mass(double a) {
        Distribution d;
        d.kind_ = Kind::point_mass;
        d.a_ = a;
        return d;
    }

    static Distribution gaussian(double mean, double sd) {
        if (!(sd >= 0.0)) throw DomainError("gaussian: sd must be >= 0");
        Distribution d;
        d.kind_ = Kind::gaussian;
        d.a_ = mean;
        d.b_ = sd;
        return d;
    }

    static Distribution uniform(double lo, double hi) {
        if (!(lo < hi)) throw DomainError("uniform: need lo < hi");
        Distribution d;
        d.kind_ = Kind::uniform;
        d.a_ = lo;
        d.b_ = hi;
        return d;
    }

    static Distribution empirical(std::vector<double> samples) {
        if (samples.empty())
            throw DomainError("empirical: need at least one sample");
        for (double v : samples)
            if (!std::isfinite(v))
                throw DomainError("empirical: non-finite sample");
        std::sort(samples.begin(), samples.end());
        Distribution d;
        d.kind_ = Kind::empirical;
        d.samples_ = std::move(samples);
        return d;
    }

    Kind kind() const { return kind_; }

    double quantile(double u) const {
        switch (kind_) {
            case Kind::point_mass:
                return a_;
            case Kind::gaussian:
                return a_ + b_ * CounterRng::inverse_normal_cdf(u);
            case Kind::uniform:
                return a_ + (b_ - a_) * u;
            case Kind::empirical: {
                const std::size_t n = samples_.size();
                const std::size_t i = std::min(
                    static_cast<std::size_t>(u * static_cast<double>(n)),
                    n - 1);
                return samples_[i];
            }
        }
        return 0.0;
    }

    double cdf(double x) const {
        switch (kind_) {
            case Kind::point_mass:
                return x >= a_ ? 1.0 : 0.0;
            case Kind::gaussian:
                if (b_ == 0.0) return x >= a_ ? 1.0 : 0.0;
                return 0.5 * std::erfc(-(x - a_) / (b_ * 1.4142135623730951));
            case Kind::uniform:
                return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0);
            case Kind::empirical: {
                const auto it = std::upper_bound(samples_.begin(),
                                                 samples_.end(), x);
                return static_cast<double>(it - samples_.begin()) /
                       static_cast<double>(samples_.size());
            }
        }
        return 0.0;
    }

    double mean() const {
        switch (kind_) {
            case Kind::point_mass:
                return a_;
            case Kind::gaussian:
                return a_;
            case Kind::uniform:
                return 0.5 * (a_ + b_);
            case Kind::empirical: {
                double s = 0.0;
                for (double v : samples_) s += v;
                return s / static_cast<double>(samples_.size());
            }
        }
        return 0.0;
    }

    double second_moment() const {
        switch (kind_) {
            case Kind::point_mass:
                return a_ * a_;
            case Kind::gaussian:
                return a_ * a_ + b_ * b_;
            case Kind::uniform:
                return (a_ * a_ + a_ * b_ + b_ * b_) / 3.0;
            case Kind::empirical: {
                double s = 0.0;
                for (double v : samples_) s += v * v;
                return s / static_cast<double>(samples_.size());
            }
        }
        return 0.0;
    }

    double sd() const {
        return std::sqrt(std::max(0.0, second_moment() - mean() * mean()));
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::point_mass:
                return "pointmass:" + std::to_string(a_);
            case Kind::gaussian:
                return "gaussian:" + std::to_string(a_) + "," +
                       std::to_string(b_);
            case Kind::uniform:
                return "uniform:" + std::to_string(a_) + "," +
                       std::to_string(b_);
            case Kind::empirical:
                return "empirical[" + std::to_string(samples_.size()) + "]";
        }
        return "";
    }

private:
    Kind kind_ = Kind::point_mass;
    double a_ = 0.0;
    double b_ = 0.0;
    std::vector<double> samples_;
};

// Label-to-law map mu_0(x), piecewise constant on a finite partition. The
// piecewise-constant structure is what realizes measurability of x -> mu_0(x).
class InitialDatum {
public:
    InitialDatum(LabelPartition partition, std::vector<Distribution> laws)
        : partition_(std::move(partition)), laws_(std::move(laws)) {
        if (laws_.size() != partition_.size())
            throw ShapeError("InitialDatum: one law per class required");
    }

    static InitialDatum iid(Distribution law) {
        return InitialDatum(LabelPartition::whole(), {std::move(law)});
    }

    const LabelPartition& partition() const { return partition_; }
    const std::vector<Distribution>& laws() const { return laws_; }
    const Distribution& law_of_class(std::size_t c) const { return laws_[c]; }
    const Distribution& law_at(double x) const {
        return laws_[partition_.class_of(x)];
    }

    bool single_class() const { return laws_.size() == 1; }

private:
    LabelPartition partition_;
    std::vector<Distribution> laws_;
};

}  // namespace gpsim
