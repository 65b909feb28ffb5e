#include "wavelab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>

namespace wavelab {

namespace {

namespace fs = std::filesystem;

void write_json_file(const fs::path& file, const json& j) {
    fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + file.string());
    out << j.dump(2) << "\n";
}

fs::path resolve_relative(const ExperimentConfig& cfg, const std::string& p) {
    fs::path path = p;
    return path.is_relative() ? cfg.base_dir / path : path;
}

std::string ray_file_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ray_%03zu.csv", i);
    return buf;
}

} // namespace

json condition_report_to_json(const ConditionReport& rep) {
    json j;
    j["verdict"] = to_string(rep.verdict);
    j["margin"] = rep.margin;
    j["method"] = rep.method;
    j["scale"] = rep.scale;
    if (rep.method == "grid") {
        j["n_theta"] = rep.n_theta;
        j["n_y"] = rep.n_y;
    }
    if (rep.witness) {
        j["witness"] = {{"theta", rep.witness->theta},
                        {"y", rep.witness->y},
                        {"value", rep.witness->value}};
    }
    return j;
}

int cmd_check(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const SystemSpec sys = resolve_system(cfg);
    const auto weight = resolve_weight(cfg);
    const WeightMatrix a = weight ? *weight : WeightMatrix::identity(sys.n_components);
    if (a.size() != sys.n_components)
        throw ConfigError("weight matrix dimension " + std::to_string(a.size()) +
                          " does not match the system (" + std::to_string(sys.n_components) + ")");
    const SweepOptions& opt = cfg.check.sweep;

    json rep;
    rep["task"] = "check";
    rep["n_components"] = sys.n_components;
    rep["grid"] = {{"n_theta", opt.n_theta}, {"n_y", opt.n_y}};
    rep["weight"] = weight ? cfg.weight : json("identity");

    rep["null_quadratic"] = condition_report_to_json(check_null_quadratic(sys.quadratic, opt));
    rep["null_cubic"] = condition_report_to_json(check_null_cubic(sys.cubic, opt));

    const auto pd = check_positive_definite(a, opt.n_theta, opt.pd_tol);
    rep["positive_definite"] = {{"verdict", to_string(pd.verdict)},
                                {"min_eigenvalue", pd.min_eigenvalue},
                                {"max_eigenvalue", pd.max_eigenvalue},
                                {"M0", pd.m0},
                                {"theta_at_min", pd.theta_at_min},
                                {"n_theta", pd.n_theta}};

    if (pd.verdict == Verdict::holds) {
        const auto agemi = check_agemi(sys.cubic, a, opt);
        const auto strict = check_strict(sys.cubic, a, opt);
        rep["agemi"] = condition_report_to_json(agemi);
        rep["strict"] = condition_report_to_json(strict);
        if (strict.verdict == Verdict::holds) {
            rep["C0"] = estimate_c0(sys.cubic, a, opt);
        } else {
            rep["C0"] = nullptr;
            rep["C0_skipped"] = "strict Agemi condition does not hold";
        }
    } else {
        rep["agemi"] = {{"skipped", "weight matrix is not positive definite"}};
        rep["strict"] = {{"skipped", "weight matrix is not positive definite"}};
        rep["C0"] = nullptr;
        rep["C0_skipped"] = "weight matrix is not positive definite";
    }

    write_json_file(out_dir / "report.json", rep);
    return 0;
}

namespace {

std::vector<RaySpec> assemble_rays(const ExperimentConfig& cfg, int n_comp) {
    std::vector<RaySpec> rays = cfg.profile.rays;
    for (auto& r : rays)
        if (static_cast<int>(r.v0.size()) != n_comp)
            throw ConfigError("profile ray v0 must have " + std::to_string(n_comp) + " entries");
    const auto& rr = cfg.profile.random;
    if (rr.count > 0) {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int i = 0; i < rr.count; ++i) {
            RaySpec r;
            r.sigma = rr.sigma_min + (rr.sigma_max - rr.sigma_min) * u01(rng);
            r.theta = 2.0 * std::numbers::pi * u01(rng);
            // uniform in the ball |v0| <= v0_max, by rejection
            r.v0.assign(n_comp, 0.0);
            while (true) {
                double s = 0.0;
                for (int c = 0; c < n_comp; ++c) {
                    r.v0[c] = rr.v0_max * (2.0 * u01(rng) - 1.0);
                    s += r.v0[c] * r.v0[c];
                }
                if (s <= rr.v0_max * rr.v0_max) break;
            }
            rays.push_back(std::move(r));
        }
    }
    return rays;
}

} // namespace

int cmd_profile(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const SystemSpec sys = resolve_system(cfg);
    const int n = sys.n_components;
    const auto weight = resolve_weight(cfg);
    const WeightMatrix a = weight ? *weight : WeightMatrix::identity(n);
    if (a.size() != n) throw ConfigError("weight matrix dimension does not match the system");
    const SweepOptions& opt = cfg.check.sweep;

    // Dissipation constant for the logarithmic bound, when the strict
    // condition holds.
    std::optional<double> c0;
    std::string c0_skipped;
    const auto pd = check_positive_definite(a, opt.n_theta, opt.pd_tol);
    if (pd.verdict != Verdict::holds) {
        c0_skipped = "weight matrix is not positive definite";
    } else if (check_strict(sys.cubic, a, opt).verdict != Verdict::holds) {
        c0_skipped = "strict Agemi condition does not hold";
    } else {
        c0 = estimate_c0(sys.cubic, a, opt);
    }

    const auto rays = assemble_rays(cfg, n);
    json summary;
    summary["task"] = "profile";
    summary["seed"] = cfg.seed;
    summary["t1"] = cfg.profile.t1;
    summary["steps_per_decade"] = cfg.profile.steps_per_decade;
    summary["C0"] = c0 ? json(*c0) : json(nullptr);
    if (!c0) summary["C0_skipped"] = c0_skipped;
    summary["rays"] = json::array();

    std::vector<std::string> cols = {"t", "s"};
    for (int c = 0; c < n; ++c) cols.push_back("V_" + std::to_string(c + 1));
    cols.push_back("Phi");
    cols.push_back("bound");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < rays.size(); ++i) {
        const RaySpec& r = rays[i];
        const RayCoordinate coord{r.sigma, r.theta};
        const double t0 = coord.t_start();
        const double t1 = cfg.profile.t1;
        if (!(t1 > t0))
            throw ConfigError("profile t1 = " + std::to_string(t1) +
                              " does not exceed the ray start time " + std::to_string(t0));
        const int n_steps = std::max(
            1, static_cast<int>(std::ceil(cfg.profile.steps_per_decade * std::log10(t1 / t0))));

        RayTrajectory traj;
        if (cfg.profile.variational) {
            std::vector<double> w0(static_cast<std::size_t>(n) * n, 0.0);
            for (int c = 0; c < n; ++c) w0[c * n + c] = 1.0;
            traj = integrate_variational(sys.cubic, Direction(r.theta), r.v0, w0, t0, t1, n_steps,
                                         cfg.profile.overflow_limit);
        } else {
            traj = integrate_profile(sys.cubic, Direction(r.theta), r.v0, t0, t1, n_steps,
                                     cfg.profile.overflow_limit);
        }
        traj.sigma = r.sigma;

        const auto phi = lyapunov_track(a, traj);
        std::optional<MatsReport> mats;
        if (c0 && traj.complete() && traj.n_samples() > 0) mats = verify_mats(traj, a, *c0);

        CsvWriter csv(out_dir / "rays" / ray_file_name(i), cols);
        std::vector<double> row(cols.size());
        for (int s = 0; s < traj.n_samples(); ++s) {
            row[0] = traj.times[s];
            row[1] = traj.log_times[s];
            for (int c = 0; c < n; ++c) row[2 + c] = traj.values[s][c];
            row[2 + n] = phi[s];
            row[3 + n] = mats ? mats->c2 / std::log(traj.times[s]) : nan;
            csv.row(row);
        }

        json ray_summary = {{"sigma", r.sigma}, {"theta", r.theta},      {"v0", r.v0},
                            {"t0", t0},         {"n_steps", n_steps},    {"file", "rays/" + ray_file_name(i)},
                            {"complete", traj.complete()}};
        if (traj.truncated_at) ray_summary["truncated_at"] = *traj.truncated_at;
        if (mats)
            ray_summary["mats"] = {{"C2", mats->c2},
                                   {"max_ratio", mats->max_ratio},
                                   {"t_at_max", mats->t_at_max},
                                   {"pass", mats->pass}};
        summary["rays"].push_back(std::move(ray_summary));
    }

    write_json_file(out_dir / "summary.json", summary);
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const SystemSpec sys = resolve_system(cfg);
    SimulateParams params = cfg.simulate;

    if (params.data.kind == DataKind::custom) {
        const FieldArchive fa = read_field_archive(resolve_relative(cfg, params.f_file));
        const FieldArchive ga = read_field_archive(resolve_relative(cfg, params.g_file));
        for (int c = 0; c < sys.n_components; ++c) {
            const auto* f = fa.find("f" + std::to_string(c));
            const auto* g = ga.find("g" + std::to_string(c));
            if (!f || !g)
                throw ConfigError("custom data archives must hold arrays f<i>/g<i> per component");
            params.data.f_samples.push_back(*f);
            params.data.g_samples.push_back(*g);
        }
    }

    FieldState state = initialize(params.grid, params.data, sys);
    const double dt = state.dt;
    const long obs_steps = std::max(1L, std::lround(params.output_every / dt));
    long ghost_steps = params.ghost_every == 0 ? obs_steps : params.ghost_every;
    const bool ghost_on = ghost_steps > 0;
    const long base = ghost_on ? std::gcd(obs_steps, ghost_steps) : obs_steps;

    const GhostWeight ghost_weight(params.ghost_rho, -params.grid.t_end - 4.0,
                                   std::numbers::sqrt2 * state.grid.length() + 4.0);

    CsvWriter obs_csv(out_dir / "observers.csv",
                      {"t", "energy", "max_du", "weighted_norm", "support_radius"});
    std::optional<CsvWriter> ghost_csv;
    if (ghost_on)
        ghost_csv.emplace(out_dir / "ghost.csv", std::vector<std::string>{"t", "ghost_energy",
                                                                          "z_flux", "source_integral",
                                                                          "eta_min", "eta_max"});

    std::vector<std::string> ray_cols = {"t"};
    for (int c = 0; c < sys.n_components; ++c) ray_cols.push_back("U_" + std::to_string(c + 1));
    std::vector<std::optional<CsvWriter>> ray_csv(params.rays.size());
    std::vector<bool> ray_started(params.rays.size(), false);
    std::vector<bool> ray_truncated(params.rays.size(), false);
    for (std::size_t i = 0; i < params.rays.size(); ++i)
        ray_csv[i].emplace(out_dir / "rays" / ray_file_name(i), ray_cols);

    std::vector<double> snapshot_times = params.snapshot_times;
    std::sort(snapshot_times.begin(), snapshot_times.end());
    std::size_t next_snapshot = 0;
    int snapshot_index = 0;

    double energy_initial = 0.0, energy_final = 0.0;
    bool first_obs = true;

    auto observer = [&](const FieldWindow& w) {
        const long level = std::lround(w.t / dt);
        if (level % obs_steps == 0) {
            const double en = energy(w);
            const SupNorms sn = sup_norms(w, params.mu);
            const double sr = support_radius(w);
            obs_csv.row(std::array<double, 5>{w.t, en, sn.max_du, sn.weighted, sr});
            if (first_obs) {
                energy_initial = en;
                first_obs = false;
            }
            energy_final = en;

            std::vector<double> row(ray_cols.size());
            for (std::size_t i = 0; i < params.rays.size(); ++i) {
                const RaySpec& r = params.rays[i];
                if (w.t < RayCoordinate{r.sigma, r.theta}.t_start()) continue;
                if (w.t + r.sigma <= 2.0 * w.grid->h) continue;
                const auto u = extract_profile_point(w, r.sigma, Direction(r.theta));
                if (!u) {
                    if (ray_started[i]) ray_truncated[i] = true;
                    continue;
                }
                ray_started[i] = true;
                row[0] = w.t;
                for (int c = 0; c < sys.n_components; ++c) row[1 + c] = (*u)[c];
                ray_csv[i]->row(row);
            }

            while (next_snapshot < snapshot_times.size() &&
                   snapshot_times[next_snapshot] <= w.t + 1e-9) {
                char name[32];
                std::snprintf(name, sizeof(name), "snap_%03d.bin", snapshot_index++);
                json header = {{"t", w.t},
                               {"dt", w.dt},
                               {"h", w.grid->h},
                               {"shape", {w.grid->n, w.grid->n}},
                               {"components", w.n_comp}};
                std::vector<std::pair<std::string, const std::vector<double>*>> arrays;
                for (int c = 0; c < w.n_comp; ++c)
                    arrays.emplace_back("u" + std::to_string(c), &(*w.center)[c]);
                for (int c = 0; c < w.n_comp; ++c)
                    arrays.emplace_back("u_prev" + std::to_string(c), &(*w.before)[c]);
                write_field_archive(out_dir / "snapshots" / name, header, arrays);
                ++next_snapshot;
            }
        }
        if (ghost_on && level % ghost_steps == 0) {
            const GhostIntegrals gi = ghost_integrals(w, sys, ghost_weight);
            ghost_csv->row(std::array<double, 6>{w.t, gi.ghost, gi.flux, gi.source, gi.eta_min,
                                                 gi.eta_max});
        }
    };

    const RunResult res = run_simulation(state, sys, params.grid, base, observer);

    json summary;
    summary["task"] = "simulate";
    summary["verdict"] = res.blew_up ? "blow-up" : "completed";
    if (res.blew_up) summary["blow_up_time"] = res.blow_up_time;
    summary["eps"] = params.data.eps;
    summary["mu"] = params.mu;
    summary["ghost_rho"] = params.ghost_rho;
    summary["steps"] = res.steps;
    summary["final_time"] = res.final_time;
    summary["observations"] = res.observations;
    summary["output_every_steps"] = obs_steps;
    summary["dt"] = dt;
    summary["h"] = params.grid.h;
    summary["half_width"] = state.grid.length();
    summary["t_end"] = params.grid.t_end;
    summary["cfl"] = params.grid.cfl();
    summary["energy_initial"] = energy_initial;
    summary["energy_final"] = energy_final;
    json rays = json::array();
    for (std::size_t i = 0; i < params.rays.size(); ++i)
        rays.push_back({{"sigma", params.rays[i].sigma},
                        {"theta", params.rays[i].theta},
                        {"file", "rays/" + ray_file_name(i)},
                        {"left_grid", static_cast<bool>(ray_truncated[i])}});
    summary["rays"] = rays;
    write_json_file(out_dir / "summary.json", summary);
    return 0;
}

int cmd_report(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const fs::path input = resolve_relative(cfg, cfg.report.input_dir);
    if (!fs::exists(input / "observers.csv"))
        throw MissingInputError("no recorded run at " + input.string());
    const RunSeries run = load_run_series(input);

    DecayReport rep;
    try {
        rep = decay_report(run, cfg.report.delta, cfg.report.mu, cfg.report.headroom,
                           cfg.report.monotone_tol);
    } catch (const std::invalid_argument& e) {
        throw MissingInputError(std::string("recorded series unusable: ") + e.what());
    }

    json j;
    j["task"] = "report";
    j["input"] = cfg.report.input_dir;
    j["verdict"] = rep.verdict;
    if (rep.verdict == "blow-up") j["blow_up_time"] = rep.blow_up_time;
    j["eps"] = rep.eps;
    j["delta"] = rep.delta;
    j["mu"] = rep.mu;
    j["headroom"] = rep.headroom;
    j["monotone_tol"] = rep.monotone_tol;
    j["reference_time"] = rep.reference_time;
    j["r_ref"] = rep.r_ref;
    j["r_sup"] = rep.r_sup;
    j["r_sup_time"] = rep.r_sup_time;
    j["r_bounded"] = rep.r_bounded;
    j["q_ref"] = rep.q_ref;
    j["q_sup"] = rep.q_sup;
    j["q_bounded"] = rep.q_bounded;
    j["energy_monotone"] = rep.energy_monotone;
    j["monotone_violations"] = rep.monotone_violations;
    j["energy_initial"] = rep.energy_initial;
    j["energy_final"] = rep.energy_final;
    if (rep.ghost_residual) j["ghost_residual_max"] = rep.ghost_residual->max_abs;

    write_json_file(out_dir / "report.json", j);

    auto write_series = [&](const std::string& name, const std::vector<double>& t,
                            const std::vector<double>& v) {
        CsvWriter csv(out_dir / "series" / (name + ".csv"), {"t", name});
        std::ofstream dat(out_dir / "series" / (name + ".dat"), std::ios::binary);
        for (std::size_t i = 0; i < t.size(); ++i) {
            csv.row(std::array<double, 2>{t[i], v[i]});
            dat << format_real(t[i]) << " " << format_real(v[i]) << "\n";
        }
    };
    write_series("energy", run.t, run.energy);
    write_series("r_ratio", rep.t, rep.r);
    write_series("q_ratio", rep.t, rep.q);
    if (rep.ghost_residual)
        write_series("ghost_residual", rep.ghost_residual->t, rep.ghost_residual->residual);
    return 0;
}

int run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
    try {
        fs::create_directories(out_dir);
        if (cfg.task == "check") return cmd_check(cfg, out_dir);
        if (cfg.task == "profile") return cmd_profile(cfg, out_dir);
        if (cfg.task == "simulate") return cmd_simulate(cfg, out_dir);
        if (cfg.task == "report") return cmd_report(cfg, out_dir);
        throw ConfigError("unknown task: " + cfg.task);
    } catch (const MissingInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_command(const std::string& task, const fs::path& config_file, const fs::path& out_dir,
                std::optional<std::uint64_t> seed_override) {
    ExperimentConfig cfg;
    try {
        cfg = load_experiment_config(config_file);
        if (cfg.task != task)
            throw ConfigError("config task '" + cfg.task + "' does not match the subcommand '" +
                              task + "'");
    } catch (const MissingInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (seed_override) cfg.seed = *seed_override;
    return run_experiment(cfg, out_dir);
}

} // namespace wavelab
