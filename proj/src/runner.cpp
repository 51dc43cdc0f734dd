#include "qew/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "qew/bounds.hpp"
#include "qew/continuum.hpp"
#include "qew/discrete.hpp"
#include "qew/martingale.hpp"

namespace qew {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kSweepStream = 0x53574550;

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + name + " under " + dir);
    return f;
}

ordered_json manifest_base(const ExperimentConfig& cfg) {
    ordered_json m;
    m["tool"] = "qewlab";
    m["version"] = kVersion;
    m["mode"] = mode_name(cfg.mode);
    ordered_json raw;
    for (const auto& [k, v] : cfg.raw) raw[k] = v;
    m["config"] = raw;
    m["master_seed"] = cfg.seed;
    return m;
}

void write_manifest(const ExperimentConfig& cfg, ordered_json m, double wall_seconds) {
    m["wall_clock_seconds"] = wall_seconds;
    auto f = open_out(cfg.out, "manifest.json");
    f << m.dump(2) << "\n";
}

int cmd_bounds(const ExperimentConfig& cfg, ordered_json& manifest) {
    std::vector<double> grid = cfg.F_grid;
    if (grid.empty() && cfg.F) grid.push_back(*cfg.F);
    const double beta = cfg.beta();
    const double f_star = positivity_threshold(cfg.lambda, beta);

    bool v_enabled = false;
    double beta_tilde = 0.0;
    if (cfg.lambda_tilde) {
        if (cfg.beta_tilde_override) {
            beta_tilde = *cfg.beta_tilde_override;
            v_enabled = true;
        } else if (*cfg.lambda_tilde < cfg.lambda / 180.0) {
            beta_tilde = beta_tilde_180(cfg.lambda, beta, *cfg.lambda_tilde);
            v_enabled = true;
        } else {
            std::cout << "note: lambda_tilde >= lambda/180 and no beta_tilde given; "
                         "V column disabled\n";
        }
    }

    auto csv = open_out(cfg.out, "bounds.csv");
    csv << "F,Wbar,W,V,F_star,mu_star\n";
    for (const double F : grid) {
        const SupResult wb = wbar(F, cfg.lambda, beta);
        const SupResult w = w_discrete(F, cfg.lambda, beta);
        std::string v_text;
        if (v_enabled)
            v_text = fmt_double(
                v_continuum(F, *cfg.lambda_tilde, beta_tilde, cfg.delta).value);
        csv << fmt_double(F) << ',' << fmt_double(wb.value) << ',' << fmt_double(w.value)
            << ',' << v_text << ',' << fmt_double(f_star) << ','
            << (wb.positive ? fmt_double(wb.mu_star) : std::string()) << "\n";
    }
    ordered_json summary;
    summary["rows"] = grid.size();
    summary["F_star"] = f_star;
    manifest["summary"] = summary;
    std::cout << "bounds: wrote " << grid.size() << " rows (F* = " << f_star << ")\n";
    return 0;
}

int cmd_simulate_discrete(const ExperimentConfig& cfg, ordered_json& manifest) {
    DiscreteSimConfig sim;
    sim.L = cfg.L;
    sim.F = *cfg.F;
    sim.dt = cfg.dt.value_or(1e-3);
    sim.t_end = cfg.t_end;
    sim.seed = cfg.seed;
    sim.source = cfg.obstacles;
    sim.dist = cfg.dist;
    sim.delta = cfg.delta;
    sim.g_params.m_max = cfg.m_max;

    const std::vector<RunResult> runs = run_replicas(sim, cfg.replicas);
    const VelocityStats stats = collect_velocity_stats(runs);

    auto csv = open_out(cfg.out, "velocity.csv");
    csv << "replica,seed,t,u0_over_t,mean_u_over_t,max_grad_over_t,min_H\n";
    ordered_json seeds = ordered_json::array();
    for (int rep = 0; rep < cfg.replicas; ++rep) {
        const std::uint64_t s = replica_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        seeds.push_back(s);
        for (const TraceRow& row : runs[static_cast<std::size_t>(rep)].trace)
            csv << rep << ',' << s << ',' << fmt_double(row.t) << ','
                << fmt_double(row.u0_over_t) << ',' << fmt_double(row.mean_u_over_t) << ','
                << fmt_double(row.max_grad_over_t) << ',' << fmt_double(row.min_H) << "\n";
    }
    manifest["replica_seeds"] = seeds;
    ordered_json summary;
    summary["mean_velocity"] = stats.mean;
    summary["std_error"] = stats.std_error;
    summary["late_min_ratio"] = stats.late_min_ratio;
    summary["late_max_ratio"] = stats.late_max_ratio;
    if (cfg.obstacles != ObstacleSource::none || cfg.beta_override) {
        const double W = w_discrete(sim.F, cfg.lambda, cfg.beta()).value;
        const BoundCheckResult bc = bound_check(stats, W);
        summary["W"] = W;
        summary["bound_margin"] = bc.margin;
        summary["bound_pass"] = bc.pass;
        std::cout << "discrete: mean u0/t = " << stats.mean << " +- " << stats.std_error
                  << ", W(F) = " << W << (bc.pass ? "  [bound PASS]" : "  [bound FAIL]")
                  << "\n";
    } else {
        std::cout << "discrete: mean u0/t = " << stats.mean << " +- " << stats.std_error
                  << "\n";
    }
    manifest["summary"] = summary;
    return 0;
}

int cmd_simulate_continuum(const ExperimentConfig& cfg, ordered_json& manifest) {
    ContinuumConfig sim;
    sim.F = *cfg.F;
    sim.dt = cfg.dt.value_or(0.0);
    sim.t_end = cfg.t_end;
    sim.modified = cfg.modified;
    sim.grid = Grid1D{cfg.n_cells, cfg.L_int};
    sim.field = ContinuumField{ObstacleLattice{cfg.seed, cfg.dist},
                               BumpProfile::cosine(cfg.delta), cfg.L_int};
    sim.snapshots = cfg.snapshots;

    const ContinuumRun run = run_continuum(sim);
    const double dx = sim.grid.dx();
    const double eps = 10.0 * (dx * dx + sim.effective_dt());

    auto csv = open_out(cfg.out, "snapshots.csv");
    csv << "t,U,min_ut,spread_over_t,laplacian_margin,obstacle_margin,corollary_margin\n";
    double worst[3] = {1e300, 1e300, 1e300};
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        std::string margins[3];
        if (sim.modified) {
            const HatDiscretization hat = hat_discretize(run.snapshots[s], sim);
            const MarginReport m1 = check_laplacian_estimate(hat, sim.F);
            const MarginReport m2 = check_obstacle_estimate(hat, sim.field);
            const MarginReport m3 = check_corollary_velocity(hat, sim.F);
            margins[0] = fmt_double(m1.worst_margin);
            margins[1] = fmt_double(m2.worst_margin);
            margins[2] = fmt_double(m3.worst_margin);
            worst[0] = std::min(worst[0], m1.worst_margin);
            worst[1] = std::min(worst[1], m2.worst_margin);
            worst[2] = std::min(worst[2], m3.worst_margin);
        }
        const ContinuumTraceRow& row = run.trace[s];
        csv << fmt_double(row.t) << ',' << fmt_double(row.U) << ',' << fmt_double(row.min_ut)
            << ',' << fmt_double(row.spread_over_t) << ',' << margins[0] << ',' << margins[1]
            << ',' << margins[2] << "\n";
    }
    if (cfg.dump_profiles) {
        auto prof = open_out(cfg.out, "profiles.csv");
        prof << "t,x,u\n";
        for (const auto& snap : run.snapshots)
            for (std::size_t k = 0; k < snap.u.size(); ++k)
                prof << fmt_double(snap.t) << ',' << fmt_double(k * dx) << ','
                     << fmt_double(snap.u[k]) << "\n";
    }

    ordered_json summary;
    summary["min_ut"] = run.min_ut;
    summary["final_U"] = averaged_height(run.final_state, sim.grid);
    int rc = 0;
    if (sim.modified) {
        summary["worst_laplacian_margin"] = worst[0];
        summary["worst_obstacle_margin"] = worst[1];
        summary["worst_corollary_margin"] = worst[2];
        const bool pass = run.min_ut >= -eps && worst[0] >= -eps && worst[1] >= -eps &&
                          worst[2] >= -eps;
        summary["margins_pass"] = pass;
        rc = pass ? 0 : 1;
        std::cout << "continuum: min du/dt = " << run.min_ut << ", worst margins "
                  << worst[0] << " / " << worst[1] << " / " << worst[2]
                  << (pass ? "  [PASS]" : "  [FAIL]") << "\n";
    }
    if (cfg.compare) {
        ContinuumConfig plain = sim;
        plain.modified = !sim.modified;
        const ContinuumRun other = run_continuum(plain);
        const ComparisonReport cmp = sim.modified ? comparison_check(other, run, eps)
                                                  : comparison_check(run, other, eps);
        summary["comparison_min_gap"] = cmp.min_gap;
        summary["comparison_pass"] = cmp.pass;
        std::cout << "continuum: comparison min(u - u~) = " << cmp.min_gap
                  << (cmp.pass ? "  [PASS]" : "  [FAIL]") << "\n";
        if (!cmp.pass) rc = 1;
    }
    manifest["summary"] = summary;
    return rc;
}

int cmd_verify(const ExperimentConfig& cfg, ordered_json& manifest) {
    EnsembleConfig ens;
    ens.n = cfg.n;
    ens.lam = cfg.lambda;
    ens.mu = cfg.mu.value_or(2.0 * cfg.lambda);
    ens.F = cfg.F.value_or(4.0);
    ens.w_min = -cfg.window;
    ens.w_max = cfg.window;
    ens.eps_tail = cfg.eps_tail;

    ordered_json summary;
    bool pass = false;
    if (cfg.check == "supermartingale") {
        const SupermartingaleReport rep =
            supermartingale_check(ens, cfg.dist, cfg.replicas, cfg.seed, cfg.inner_samples);
        auto csv = open_out(cfg.out, "ratios.csv");
        csv << "replica,field_seed,ratio,inner_se\n";
        for (std::size_t r = 0; r < rep.ratios.size(); ++r)
            csv << r << ',' << realization_seed(cfg.seed, r) << ','
                << fmt_double(rep.ratios[r]) << ',' << fmt_double(rep.inner_se[r]) << "\n";
        pass = rep.exact ? rep.max_ratio <= rep.gamma * (1.0 + 1e-12)
                         : rep.ucb95 <= 1.01 * rep.gamma;
        summary["gamma"] = rep.gamma;
        summary["mean_ratio"] = rep.mean;
        summary["ucb95"] = rep.ucb95;
        summary["max_ratio"] = rep.max_ratio;
        std::cout << "supermartingale: mean ratio " << rep.mean << ", ucb95 " << rep.ucb95
                  << ", gamma " << rep.gamma << (pass ? "  [PASS]" : "  [FAIL]") << "\n";
    } else if (cfg.check == "growth") {
        const GrowthReport rep =
            growth_rate_check(ens, cfg.dist, cfg.n_list, cfg.replicas, cfg.seed);
        auto csv = open_out(cfg.out, "rates.csv");
        csv << "replica,field_seed,n,rate,bound,flagged\n";
        for (const GrowthRow& row : rep.rows)
            csv << row.replica << ','
                << realization_seed(cfg.seed, static_cast<std::uint64_t>(row.replica))
                << ',' << row.n << ',' << fmt_double(row.rate) << ','
                << fmt_double(row.bound) << ',' << (row.flagged ? 1 : 0) << "\n";
        pass = rep.flagged_count == 0;
        summary["log_gamma"] = rep.log_gamma;
        summary["flagged"] = rep.flagged_count;
        std::cout << "growth: " << rep.rows.size() << " rates, " << rep.flagged_count
                  << " flagged" << (pass ? "  [PASS]" : "  [FAIL]") << "\n";
    } else if (cfg.check == "dp-brute") {
        double worst = 0.0;
        auto csv = open_out(cfg.out, "dp_brute.csv");
        csv << "replica,Y_dp,Y_brute,rel_diff\n";
        for (int rep = 0; rep < cfg.replicas; ++rep) {
            const ObstacleLattice lattice{
                realization_seed(cfg.seed, static_cast<std::uint64_t>(rep)), cfg.dist};
            EnsembleConfig small = ens;
            small.enforce_tail = false;
            const double y_dp = y_n_exact(small, strength_fn(lattice)).Y;
            const double y_bf = brute_force_y(small, strength_fn(lattice));
            const double rel = std::fabs(y_dp - y_bf) / y_bf;
            worst = std::max(worst, rel);
            csv << rep << ',' << fmt_double(y_dp) << ',' << fmt_double(y_bf) << ','
                << fmt_double(rel) << "\n";
        }
        pass = worst <= 1e-12;
        summary["worst_rel_diff"] = worst;
        std::cout << "dp-brute: worst relative difference " << worst
                  << (pass ? "  [PASS]" : "  [FAIL]") << "\n";
    } else if (cfg.check == "moment") {
        const MomentReport rep = sup_avg_moment_check(cfg.dist, cfg.lambda, *cfg.lambda_tilde,
                                                      cfg.N_max, cfg.samples, cfg.seed);
        auto csv = open_out(cfg.out, "moment.csv");
        csv << "estimate,std_error,bound\n";
        csv << fmt_double(rep.estimate) << ',' << fmt_double(rep.std_error) << ','
            << fmt_double(rep.bound) << "\n";
        pass = rep.pass;
        summary["estimate"] = rep.estimate;
        summary["std_error"] = rep.std_error;
        summary["bound"] = rep.bound;
        std::cout << "moment: estimate " << rep.estimate << " + 3 SE vs bound " << rep.bound
                  << (pass ? "  [PASS]" : "  [FAIL]") << "\n";
    }
    summary["pass"] = pass;
    manifest["summary"] = summary;
    return pass ? 0 : 1;
}

int cmd_sweep(const ExperimentConfig& cfg, ordered_json& manifest) {
    auto csv = open_out(cfg.out, "sweep.csv");
    csv << "F,cell_seed,replicas,mean_velocity,std_error,bound,margin,pass,status\n";
    ordered_json cells = ordered_json::array();
    int failures = 0;
    for (std::size_t fi = 0; fi < cfg.F_grid.size(); ++fi) {
        const double F = cfg.F_grid[fi];
        const std::uint64_t cell_seed = derive_seed(cfg.seed, fi, kSweepStream);
        std::string status = "ok";
        double mean = 0, se = 0, bound = 0, margin = 0;
        bool pass = false;
        try {
            if (cfg.model == "discrete") {
                DiscreteSimConfig sim;
                sim.L = cfg.L;
                sim.F = F;
                sim.dt = cfg.dt.value_or(1e-3);
                sim.t_end = cfg.t_end;
                sim.seed = cell_seed;
                sim.source = cfg.obstacles;
                sim.dist = cfg.dist;
                sim.delta = cfg.delta;
                const VelocityStats stats =
                    collect_velocity_stats(run_replicas(sim, cfg.replicas));
                bound = cfg.obstacles == ObstacleSource::none
                            ? 0.0
                            : w_discrete(F, cfg.lambda, cfg.beta()).value;
                const BoundCheckResult bc = bound_check(stats, bound);
                mean = stats.mean;
                se = stats.std_error;
                margin = bc.margin;
                pass = bc.pass;
            } else {
                ContinuumConfig sim;
                sim.F = F;
                sim.dt = cfg.dt.value_or(0.0);
                sim.t_end = cfg.t_end;
                sim.modified = false;
                sim.grid = Grid1D{cfg.n_cells, cfg.L_int};
                sim.snapshots = 1;
                double beta_tilde = cfg.beta_tilde_override
                                        ? *cfg.beta_tilde_override
                                        : beta_tilde_180(cfg.lambda, cfg.beta(),
                                                         *cfg.lambda_tilde);
                bound = v_continuum(F, *cfg.lambda_tilde, beta_tilde, cfg.delta).value;
                std::vector<double> vels;
                for (int rep = 0; rep < cfg.replicas; ++rep) {
                    sim.field = ContinuumField{
                        ObstacleLattice{derive_seed(cell_seed,
                                                    static_cast<std::uint64_t>(rep),
                                                    0x52455053),
                                        cfg.dist},
                        BumpProfile::cosine(cfg.delta), cfg.L_int};
                    const ContinuumRun run = run_continuum(sim);
                    vels.push_back(averaged_height(run.final_state, sim.grid) /
                                   run.final_state.t);
                }
                for (const double v : vels) mean += v;
                mean /= static_cast<double>(vels.size());
                double ss = 0;
                for (const double v : vels) ss += (v - mean) * (v - mean);
                se = std::sqrt(ss / (vels.size() - 1.0) / vels.size());
                margin = mean - 2.0 * se - bound;
                pass = margin >= 0.0;
            }
        } catch (const std::exception& e) {
            status = std::string("error: ") + e.what();
            ++failures;
        }
        csv << fmt_double(F) << ',' << cell_seed << ',' << cfg.replicas << ','
            << fmt_double(mean) << ',' << fmt_double(se) << ',' << fmt_double(bound) << ','
            << fmt_double(margin) << ',' << (pass ? 1 : 0) << ',' << status << "\n";
        ordered_json cell;
        cell["F"] = F;
        cell["status"] = status;
        cell["pass"] = pass;
        cells.push_back(cell);
        if (!pass && status == "ok") ++failures;
    }
    manifest["cells"] = cells;
    std::cout << "sweep: " << cfg.F_grid.size() << " cells, " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
}

} // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int run_experiment(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ordered_json manifest = manifest_base(cfg);
    int rc = 0;
    switch (cfg.mode) {
        case Mode::bounds: rc = cmd_bounds(cfg, manifest); break;
        case Mode::simulate_discrete: rc = cmd_simulate_discrete(cfg, manifest); break;
        case Mode::simulate_continuum: rc = cmd_simulate_continuum(cfg, manifest); break;
        case Mode::verify: rc = cmd_verify(cfg, manifest); break;
        case Mode::sweep: rc = cmd_sweep(cfg, manifest); break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(cfg, std::move(manifest), wall);
    return rc;
}

} // namespace qew
