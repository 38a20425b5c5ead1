// Command-line front end: config-driven simulations, solvers and the
// scripted experiments, all emitting deterministic CSV artifacts.
//
// Exit codes: 0 success, 1 tolerance failure, 2 config error, 3 numerical
// error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpsim/gpsim.hpp"

namespace {

using namespace gpsim;

Config load_config(const std::string& path) {
    if (path.empty()) return Config{};
    return Config::parse_file(path);
}

void apply_common_overrides(Config& cfg, const std::string& seed_str) {
    if (!seed_str.empty()) cfg.set("sim", "seed", seed_str);
}

std::string out_file(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir.empty() ? "." : dir);
    return (std::filesystem::path(dir.empty() ? "." : dir) / name).string();
}

int cmd_simulate(const Config& cfg, const std::string& out_dir) {
    const Kernel W = parse_kernel(cfg.get("kernel", "spec"));
    const auto coeffs = parse_coefficients(cfg);
    const auto init = parse_initial(cfg);
    const auto sim = parse_sim_config(cfg);
    const auto ens = simulate_finite(W, coeffs, init, sim);
    const std::vector<double> breaks =
        W.is_step() ? W.as_step().breakpoints()
                    : std::vector<double>{0.0, 1.0};
    const std::string summary = out_file(out_dir, "trajectory-summary.csv");
    write_trajectory_summary(summary, ens, breaks);
    std::printf("wrote %s (N=%zu, steps=%zu, kernel=%s)\n", summary.c_str(),
                ens.particles(), ens.steps, W.id().c_str());
    if (cfg.has("output", "snapshot_times")) {
        for (double t :
             parse_number_list(cfg.get("output", "snapshot_times"))) {
            const std::string snaps = out_file(
                out_dir, "state-snapshot-t" + format_number(t) + ".csv");
            write_state_snapshot(snaps, ens, t);
            std::printf("wrote %s\n", snaps.c_str());
        }
    }
    return 0;
}

int cmd_reduce(const Config& cfg, const std::string& out_dir) {
    const Kernel W = parse_kernel(cfg.get("kernel", "spec"));
    if (!W.is_step())
        throw ConfigError("reduce: kernel must be a step kernel");
    const auto coeffs = parse_coefficients(cfg);
    const auto init = parse_initial(cfg);
    const auto sim = parse_sim_config(cfg);
    const auto M = static_cast<std::size_t>(
        cfg.get_double_or("reduced", "M", 1000));
    const auto red = simulate_reduced(W.as_step(), coeffs, init, M, sim.T,
                                      sim.dt, sim.seed);
    const std::string summary = out_file(out_dir, "reduced-summary.csv");
    write_trajectory_summary(summary, red.ensemble, red.block_breaks);
    std::printf("wrote %s (blocks=%zu, M=%zu)\n", summary.c_str(),
                red.block_count(), M);
    return 0;
}

int cmd_pde(const Config& cfg, const std::string& out_dir) {
    const Kernel W = parse_kernel(cfg.get("kernel", "spec"));
    if (!W.is_step()) throw ConfigError("pde: kernel must be a step kernel");
    const StepKernel& sk = W.as_step();
    const auto coeffs = parse_coefficients(cfg);
    const double T = cfg.get_double_or("sim", "T", 1.0);
    SpatialGrid grid{0.0, static_cast<std::size_t>(
                              cfg.get_double_or("grid", "M", 400))};
    if (cfg.has("grid", "L")) {
        grid.L = cfg.get_double("grid", "L");
    } else {
        const auto init = parse_initial(cfg);
        grid.L = default_grid(coeffs, init, T, grid.M).L;
    }
    const double dt = cfg.get_double_or("grid", "dt_pde", 1e-3);
    std::vector<Distribution> laws;
    if (cfg.has("pde", "init0")) {
        for (std::size_t b = 0; b < sk.block_count(); ++b)
            laws.push_back(parse_distribution(
                cfg.get("pde", "init" + std::to_string(b))));
    } else {
        const auto init = parse_initial(cfg);
        for (std::size_t b = 0; b < sk.block_count(); ++b)
            laws.push_back(init.law_at(
                0.5 * (sk.breakpoints()[b] + sk.breakpoints()[b + 1])));
    }
    const auto stride = static_cast<std::size_t>(
        cfg.get_double_or("grid", "snapshot_stride", 25));
    const auto dg = solve_fp_system(sk, coeffs, laws, grid, T, dt, stride);
    const std::string path = out_file(out_dir, "densities.csv");
    write_density_series(path, dg);
    std::printf("wrote %s (blocks=%zu, M=%zu cells, %zu snapshots)\n",
                path.c_str(), dg.block_count(), grid.M, dg.times.size());
    return 0;
}

int cmd_cutnorm(const std::string& spec_a, const std::string& spec_b,
                const std::string& mode_str, std::size_t approx_blocks) {
    const CutNormMode mode = mode_str == "heuristic" ? CutNormMode::heuristic
                                                     : CutNormMode::exact;
    auto as_step = [&](const std::string& spec) {
        const Kernel W = parse_kernel(spec);
        if (W.is_step()) return W.as_step();
        if (W.kind() == Kernel::Kind::constant)
            return StepKernel({0.0, 1.0}, {{W.eval(0.0, 0.0)}});
        return step_approximate(W, approx_blocks);
    };
    const StepKernel A = as_step(spec_a);
    if (spec_b.empty()) {
        std::printf("cut_norm = %s\n", format_number(cut_norm(A, mode)).c_str());
        return 0;
    }
    const StepKernel B = as_step(spec_b);
    std::printf("cut_distance = %s\n",
                format_number(cut_distance_step(A, B)).c_str());
    return 0;
}

int cmd_degree(const std::string& spec, const std::string& labels_str,
               const std::string& set_str) {
    const Kernel W = parse_kernel(spec);
    IntervalSet A(0.0, 1.0);
    if (!set_str.empty()) {
        const auto nums = parse_number_list(set_str);
        if (nums.size() < 2 || nums.size() % 2 != 0)
            throw ConfigError("--set needs lo,hi pairs");
        A = IntervalSet{};
        for (std::size_t i = 0; i < nums.size(); i += 2)
            A.add(nums[i], nums[i + 1]);
    }
    std::vector<double> labels;
    if (labels_str.empty())
        for (int i = 0; i < 21; ++i) labels.push_back(i / 20.0);
    else
        labels = parse_number_list(labels_str);
    std::printf("label,degree\n");
    for (double x : labels)
        std::printf("%s,%s\n", format_number(x).c_str(),
                    format_number(degree_wrt(W, x, A)).c_str());
    return 0;
}

int cmd_check_h(const Config& cfg, const std::string& spec, double tol,
                std::size_t samples) {
    const Kernel W =
        parse_kernel(spec.empty() ? cfg.get("kernel", "spec") : spec);
    const InitialDatum init = parse_initial(cfg);
    if (tol <= 0.0)
        tol = W.is_step() || W.kind() == Kernel::Kind::constant ? 1e-8 : 1e-6;
    const auto rep = check_condition_H(W, init.partition(), samples, tol);
    std::printf("holds = %s, max_deviation = %s (tol %s)\n",
                rep.holds ? "true" : "false",
                format_number(rep.max_deviation).c_str(),
                format_number(tol).c_str());
    return rep.holds ? 0 : 1;
}

int cmd_compare(const Config& cfg, const std::string& out_dir) {
    const Kernel A = parse_kernel(cfg.get("kernel", "a"));
    const Kernel B = parse_kernel(cfg.get("kernel", "b"));
    const auto coeffs = parse_coefficients(cfg);
    const auto init = parse_initial(cfg);
    const auto sim = parse_sim_config(cfg);
    const auto ea = simulate_finite(A, coeffs, init, sim);
    const auto eb = simulate_finite(B, coeffs, init, sim);
    const auto ma = pooled_marginal(ea);
    const auto mb = pooled_marginal(eb);
    const std::string path = out_file(out_dir, "compare-w2.csv");
    CsvWriter csv(path);
    csv.header("time,w2_pooled");
    for (std::size_t n = 0; n <= ea.steps; ++n)
        csv.row({format_number(ea.time(n)),
                 format_number(wasserstein2(ma[n], mb[n]))});
    const double dT = d_T_lower_bound(ma, mb);
    std::printf("wrote %s\nd_T lower bound = %s\n", path.c_str(),
                format_number(dT).c_str());
    if (cfg.has("tolerances", "w2")) {
        const double tol = cfg.get_double("tolerances", "w2");
        if (dT > tol) {
            std::fprintf(stderr, "tolerance failure: %s > %s\n",
                         format_number(dT).c_str(), format_number(tol).c_str());
            return 1;
        }
    }
    return 0;
}

int cmd_experiment(const Config& cfg, const std::string& id,
                   const std::string& out_dir) {
    Config with_id = cfg;
    with_id.set("experiment", "id", canonical_experiment_id(id));
    const auto outcome =
        run_experiment(with_id, out_dir.empty() ? "out" : out_dir);
    for (const auto& c : outcome.checks)
        std::printf("%s %s: %s %s %s\n", c.pass() ? "PASS" : "FAIL",
                    c.name.c_str(), format_number(c.value).c_str(),
                    c.upper_bound ? "<=" : ">=",
                    format_number(c.threshold).c_str());
    if (!outcome.passed()) {
        std::fprintf(stderr, "experiment %s failed its declared tolerances\n",
                     outcome.id.c_str());
        return 1;
    }
    std::printf("experiment %s passed (%zu files in %s)\n", outcome.id.c_str(),
                outcome.files.size(), out_dir.empty() ? "out" : out_dir.c_str());
    return 0;
}

int cmd_registry() {
    std::printf("kernels:\n");
    for (const auto& [name, desc] : kernel_registry())
        std::printf("  %-18s %s\n", name.c_str(), desc.c_str());
    std::printf("coefficient sets:\n");
    for (const auto& [name, desc] : coefficient_registry())
        std::printf("  %-18s %s\n", name.c_str(), desc.c_str());
    std::printf("distributions:\n");
    for (const auto& [name, desc] : distribution_registry())
        std::printf("  %-18s %s\n", name.c_str(), desc.c_str());
    std::printf("experiments:\n");
    for (const auto& id : experiment_ids()) std::printf("  %s\n", id.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "graphon particle systems: particle simulation, coupled "
        "Fokker-Planck solving, cut-norm and Wasserstein diagnostics"};
    app.require_subcommand(1);

    std::string config_path, out_dir, seed_str, mode = "exact";

    auto add_common = [&](CLI::App* sub, bool with_mode = false) {
        sub->add_option("--config", config_path, "scenario config file");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed_str, "override [sim] seed");
        if (with_mode)
            sub->add_option("--mode", mode, "exact|heuristic")
                ->check(CLI::IsMember({"exact", "heuristic"}));
    };

    auto* simulate = app.add_subcommand("simulate",
                                        "finite particle system run");
    add_common(simulate);
    auto* reduce = app.add_subcommand("reduce", "reduced per-block system run");
    add_common(reduce);
    auto* pde = app.add_subcommand("pde", "coupled Fokker-Planck solve");
    add_common(pde);

    auto* cutnorm_cmd = app.add_subcommand("cutnorm",
                                           "cut norm / cut distance");
    std::string spec_a, spec_b;
    std::size_t approx_blocks = 8;
    cutnorm_cmd->add_option("kernel", spec_a, "kernel spec")->required();
    cutnorm_cmd->add_option("kernel2", spec_b,
                            "second kernel (cut distance mode)");
    cutnorm_cmd->add_option("--approx-blocks", approx_blocks,
                            "block count used to average analytic kernels");
    add_common(cutnorm_cmd, true);

    auto* degree_cmd = app.add_subcommand("degree", "degrees d_A(x)");
    std::string labels_str, set_str;
    degree_cmd->add_option("kernel", spec_a, "kernel spec")->required();
    degree_cmd->add_option("--labels", labels_str, "comma-separated labels");
    degree_cmd->add_option("--set", set_str, "interval union lo,hi[,lo,hi...]");

    auto* checkh = app.add_subcommand("check-h",
                                      "equi-connection condition check");
    double h_tol = 0.0;
    std::size_t h_samples = 8;
    checkh->add_option("kernel", spec_a, "kernel spec (else [kernel] spec)");
    checkh->add_option("--tol", h_tol, "deviation tolerance");
    checkh->add_option("--samples", h_samples, "samples per class");
    add_common(checkh);

    auto* compare = app.add_subcommand("compare",
                                       "matched-seed two-kernel comparison");
    add_common(compare);

    auto* experiment = app.add_subcommand("experiment",
                                          "run a scripted experiment");
    std::string exp_id;
    experiment->add_option("id", exp_id, "E1..E6 or full id")->required();
    add_common(experiment);

    app.add_subcommand("registry", "list built-in names");

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = load_config(config_path);
        apply_common_overrides(cfg, seed_str);
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
        if (reduce->parsed()) return cmd_reduce(cfg, out_dir);
        if (pde->parsed()) return cmd_pde(cfg, out_dir);
        if (cutnorm_cmd->parsed())
            return cmd_cutnorm(spec_a, spec_b, mode, approx_blocks);
        if (degree_cmd->parsed())
            return cmd_degree(spec_a, labels_str, set_str);
        if (checkh->parsed()) return cmd_check_h(cfg, spec_a, h_tol, h_samples);
        if (compare->parsed()) return cmd_compare(cfg, out_dir);
        if (experiment->parsed()) return cmd_experiment(cfg, exp_id, out_dir);
        return cmd_registry();
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
}
