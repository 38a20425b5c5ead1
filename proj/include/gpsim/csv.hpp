#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gpsim/errors.hpp"
#include "gpsim/fokker_planck.hpp"
#include "gpsim/simulate.hpp"

namespace gpsim {

// Shortest round-trippable decimal text for a double, so reruns of the same
// experiment produce byte-identical files.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char trial[40];
            std::snprintf(trial, sizeof(trial), "%.*g", prec, v);
            std::sscanf(trial, "%lf", &back);
            if (back == v) return trial;
        }
    }
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw ConfigError("cannot open output file " + path);
    }

    void header(const std::string& line) { out_ << line << "\n"; }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

// Per-block trajectory summaries. Blocks follow the given breakpoints; a
// single block [0,1] pools everything.
inline void write_trajectory_summary(const std::string& path,
                                     const TrajectoryEnsemble& ens,
                                     const std::vector<double>& block_breaks) {
    CsvWriter csv(path);
    csv.header("time,block,mean,var,q05,q25,q50,q75,q95");
    const std::size_t blocks = block_breaks.size() - 1;
    std::vector<std::vector<std::size_t>> members(blocks);
    for (std::size_t i = 0; i < ens.particles(); ++i) {
        const double x = ens.labels[i];
        for (std::size_t b = 0; b < blocks; ++b)
            if (x >= block_breaks[b] &&
                (x < block_breaks[b + 1] || b + 1 == blocks)) {
                members[b].push_back(i);
                break;
            }
    }
    std::vector<double> buf;
    for (std::size_t n = 0; n <= ens.steps; ++n) {
        for (std::size_t b = 0; b < blocks; ++b) {
            if (members[b].empty()) continue;
            buf.clear();
            for (std::size_t i : members[b]) buf.push_back(ens.state(n, i));
            std::sort(buf.begin(), buf.end());
            double mean = 0.0;
            for (double v : buf) mean += v;
            mean /= static_cast<double>(buf.size());
            double var = 0.0;
            for (double v : buf) var += (v - mean) * (v - mean);
            var /= static_cast<double>(buf.size());
            auto q = [&](double u) {
                return buf[std::min(
                    static_cast<std::size_t>(u * static_cast<double>(buf.size())),
                    buf.size() - 1)];
            };
            csv.row({format_number(ens.time(n)), std::to_string(b),
                     format_number(mean), format_number(var),
                     format_number(q(0.05)), format_number(q(0.25)),
                     format_number(q(0.50)), format_number(q(0.75)),
                     format_number(q(0.95))});
        }
    }
}

// Full particle states at one requested grid time.
inline void write_state_snapshot(const std::string& path,
                                 const TrajectoryEnsemble& ens, double t) {
    const auto n = static_cast<std::size_t>(std::llround(t / ens.dt));
    if (n > ens.steps)
        throw ConfigError("snapshot time beyond the horizon");
    CsvWriter csv(path);
    csv.header("label,state");
    for (std::size_t i = 0; i < ens.particles(); ++i)
        csv.row({format_number(ens.labels[i]),
                 format_number(ens.state(n, i))});
}

inline void write_density_series(const std::string& path,
                                 const DensityGrid& dg) {
    CsvWriter csv(path);
    csv.header("time,block,cell_center,density");
    for (std::size_t t = 0; t < dg.times.size(); ++t)
        for (std::size_t b = 0; b < dg.snapshots[t].size(); ++b)
            for (std::size_t c = 0; c < dg.snapshots[t][b].size(); ++c)
                csv.row({format_number(dg.times[t]), std::to_string(b),
                         format_number(dg.grid.center(c)),
                         format_number(dg.snapshots[t][b][c])});
}

struct MetricRow {
    std::string experiment;
    double t_or_T = 0.0;
    std::string quantity;
    double value = 0.0;
    double stderr_value = 0.0;
};

inline void write_metric_table(const std::string& path,
                               const std::vector<MetricRow>& rows) {
    CsvWriter csv(path);
    csv.header("experiment,t_or_T,quantity,value,stderr");
    for (const auto& r : rows)
        csv.row({r.experiment, format_number(r.t_or_T), r.quantity,
                 format_number(r.value), format_number(r.stderr_value)});
}

}  // namespace gpsim
