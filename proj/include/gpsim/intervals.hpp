#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gpsim/errors.hpp"

namespace gpsim {

// Finite union of half-open intervals [lo, hi) inside [0,1]. Kept sorted
// and disjoint; the measurable label sets the library works with.
class IntervalSet {
public:
    IntervalSet() = default;

    IntervalSet(double lo, double hi) { add(lo, hi); }

    explicit IntervalSet(std::vector<std::pair<double, double>> intervals) {
        for (const auto& [lo, hi] : intervals) add(lo, hi);
    }

    void add(double lo, double hi) {
        if (!(lo >= 0.0 && hi <= 1.0 + 1e-12 && lo < hi))
            throw DomainError("IntervalSet: interval [" + std::to_string(lo) +
                              ", " + std::to_string(hi) +
                              ") not inside [0,1] or empty");
        parts_.emplace_back(lo, std::min(hi, 1.0));
        normalize();
    }

    bool empty() const { return parts_.empty(); }

    const std::vector<std::pair<double, double>>& parts() const {
        return parts_;
    }

    double measure() const {
        double m = 0.0;
        for (const auto& [lo, hi] : parts_) m += hi - lo;
        return m;
    }

    bool contains(double x) const {
        for (const auto& [lo, hi] : parts_)
            if (x >= lo && (x < hi || (hi == 1.0 && x == 1.0))) return true;
        return false;
    }

    // Lebesgue measure of the overlap with [lo, hi).
    double overlap(double lo, double hi) const {
        double m = 0.0;
        for (const auto& [a, b] : parts_)
            m += std::max(0.0, std::min(b, hi) - std::max(a, lo));
        return m;
    }

    IntervalSet intersect(double lo, double hi) const {
        IntervalSet out;
        for (const auto& [a, b] : parts_) {
            const double l = std::max(a, lo);
            const double h = std::min(b, hi);
            if (l < h) out.parts_.emplace_back(l, h);
        }
        return out;
    }

    bool disjoint_from(const IntervalSet& other) const {
        for (const auto& [a, b] : parts_)
            if (other.overlap(a, b) > 0.0) return false;
        return true;
    }

private:
    void normalize() {
        std::sort(parts_.begin(), parts_.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& p : parts_) {
            if (!merged.empty() && p.first <= merged.back().second) {
                if (p.first < merged.back().second - 1e-15)
                    throw DomainError("IntervalSet: overlapping intervals");
                merged.back().second = std::max(merged.back().second, p.second);
            } else {
                merged.push_back(p);
            }
        }
        parts_ = std::move(merged);
    }

    std::vector<std::pair<double, double>> parts_;
};

// Partition of [0,1] into finitely many classes, each a finite union of
// intervals, with one representative label per class. Realizes the
// initial-law equivalence classes the reduction theorem quantifies over.
class LabelPartition {
public:
    struct Class {
        IntervalSet support;
        double representative = 0.0;
    };

    LabelPartition() = default;

    explicit LabelPartition(std::vector<Class> classes)
        : classes_(std::move(classes)) {
        validate();
    }

    // Contiguous partition from breakpoints 0 = b0 < b1 < ... < bk = 1.
    static LabelPartition from_breakpoints(const std::vector<double>& breaks) {
        if (breaks.size() < 2 || breaks.front() != 0.0 || breaks.back() != 1.0)
            throw PartitionError(
                "LabelPartition: breakpoints must start at 0 and end at 1");
        std::vector<Class> classes;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            if (!(breaks[i] < breaks[i + 1]))
                throw PartitionError(
                    "LabelPartition: breakpoints must be strictly increasing");
            classes.push_back(
                {IntervalSet(breaks[i], breaks[i + 1]),
                 0.5 * (breaks[i] + breaks[i + 1])});
        }
        return LabelPartition(std::move(classes));
    }

    static LabelPartition whole() { return from_breakpoints({0.0, 1.0}); }

    std::size_t size() const { return classes_.size(); }
    const Class& cls(std::size_t i) const { return classes_[i]; }
    const std::vector<Class>& classes() const { return classes_; }

    std::size_t class_of(double x) const {
        for (std::size_t i = 0; i < classes_.size(); ++i)
            if (classes_[i].support.contains(x)) return i;
        throw DomainError("LabelPartition: label " + std::to_string(x) +
                          " not covered by any class");
    }

    // All breakpoints appearing in any class, with 0 and 1 included.
    std::vector<double> breakpoints() const {
        std::vector<double> cuts{0.0, 1.0};
        for (const auto& c : classes_)
            for (const auto& [lo, hi] : c.support.parts()) {
                cuts.push_back(lo);
                cuts.push_back(hi);
            }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        return cuts;
    }

private:
    void validate() const {
        if (classes_.empty())
            throw PartitionError("LabelPartition: no classes");
        double total = 0.0;
        for (std::size_t i = 0; i < classes_.size(); ++i) {
            if (classes_[i].support.empty())
                throw PartitionError("LabelPartition: empty class");
            total += classes_[i].support.measure();
            for (std::size_t j = i + 1; j < classes_.size(); ++j)
                if (!classes_[i].support.disjoint_from(classes_[j].support))
                    throw PartitionError(
                        "LabelPartition: classes overlap");
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw PartitionError(
                "LabelPartition: classes do not cover [0,1], total measure " +
                std::to_string(total));
    }

    std::vector<Class> classes_;
};

}  // namespace gpsim
