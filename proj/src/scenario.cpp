#include "lob/scenario.hpp"

#include "lob/analysis.hpp"
#include "lob/csv.hpp"
#include "lob/errors.hpp"
#include "lob/exact.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

namespace lob {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Cell averages of `depth` over [lo, hi).
BookProfile block(const PriceGrid& grid, Side side, double depth, double lo, double hi) {
    BookProfile p = BookProfile::zeros(grid, side);
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        const double overlap = std::min(hi, grid.edge(i + 1)) - std::max(lo, grid.edge(i));
        if (overlap > 0.0) p.h[i] = depth * overlap / grid.dx();
    }
    return p;
}

std::vector<double> read_tabulated(const fs::path& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw RangeError("cannot read tabulated initial data " + path.string());
    std::vector<double> h;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.empty()) continue;
        const std::string& field = cells.size() >= 2 ? cells[1] : cells[0];
        char* end = nullptr;
        const double v = std::strtod(field.c_str(), &end);
        if (end == field.c_str()) continue;  // header row
        h.push_back(v);
    }
    if (h.size() != n) {
        throw RangeError("tabulated initial data has " + std::to_string(h.size()) + " values, grid has " +
                         std::to_string(n) + " cells");
    }
    return h;
}

double find_threshold(std::size_t n_cells) {
    const auto table = builtin_file("barenblatt_thresholds.csv");
    if (!table) return -1.0;
    std::stringstream ss{std::string(*table)};
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        char* end = nullptr;
        const double n = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) continue;
        if (static_cast<std::size_t>(n) == n_cells) return std::strtod(line.c_str() + comma + 1, nullptr);
    }
    return -1.0;
}

// First cell above the support threshold, counted from the touch side.
std::size_t touch_cell(const BookProfile& p, double eps) {
    const double thr = eps * p.max_depth();
    const std::size_t n = p.h.size();
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = p.side == Side::Ask ? k : n - 1 - k;
        if (p.h[i] > thr) return i;
    }
    return n;
}

std::string time_note(double t) { return "t=" + csv::number(t); }

}  // namespace

PreparedScenario prepare_scenario(const ScenarioConfig& cfg) {
    const PriceGrid grid = cfg.grid();
    const auto& ini = cfg.initial;
    PreparedScenario out{BookProfile::zeros(grid, cfg.side), cfg.params, cfg.bc, cfg.solver, 0.0, std::nullopt, {}};
    switch (ini.kind) {
        case InitialKind::UniformAboveCutoff: {
            if (cfg.side == Side::Ask) {
                const double hi = ini.extent ? ini.cutoff + *ini.extent : grid.s_max();
                out.initial = block(grid, cfg.side, ini.depth, ini.cutoff, hi);
            } else {
                const double lo = ini.extent ? ini.cutoff - *ini.extent : grid.s_min();
                out.initial = block(grid, cfg.side, ini.depth, lo, ini.cutoff);
            }
            break;
        }
        case InitialKind::Steady:
            out.initial = exact::steady_profile(ini.a, ini.s_b, grid, exact::Sampling::CellCenter, cfg.side);
            break;
        case InitialKind::ParabolicCap:
            out.initial = exact::parabolic_cap(ini.c_mass, ini.t0, ini.center, grid, exact::Sampling::CellAverage);
            out.initial.side = cfg.side;
            out.initial.t = ini.t0;
            break;
        case InitialKind::Tabulated: {
            fs::path path(ini.file);
            if (path.is_relative() && !cfg.base_dir.empty()) path = fs::path(cfg.base_dir) / path;
            out.initial.h = read_tabulated(path, grid.n_cells());
            break;
        }
    }
    out.initial.validate();
    if (cfg.take_liquidity > 0.0) {
        auto exec = take_liquidity(out.initial, cfg.take_liquidity);
        out.initial = std::move(exec.book);
        out.executed = std::move(exec.levels);
    }
    if (cfg.source.kind == SourceKind::Relaxation) {
        out.params.source = SourceTerm::relaxation(cfg.source.kappa, cfg.source.target);
    }
    if (ini.kind == InitialKind::ParabolicCap) {
        out.t_origin = 0.0;
        out.touch_origin = ini.center;
    } else {
        out.t_origin = out.initial.t;
        out.touch_origin = find_touch(out.initial, cfg.solver);
    }
    return out;
}

std::vector<AnalysisRow> analyse(const ScenarioConfig& cfg, const Trajectory& traj) {
    std::vector<AnalysisRow> rows;
    auto add = [&](std::string metric, std::optional<double> value, std::string note = "") {
        if (value && !std::isfinite(*value)) {
            note = "non-finite result" + (note.empty() ? "" : "; " + note);
            value.reset();
        }
        rows.push_back({std::move(metric), value, std::move(note)});
    };
    auto attempt = [&](const std::string& metric, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const Error& e) {
            add(metric, std::nullopt, csv::text(e.what()));
        }
    };

    add("steps", static_cast<double>(traj.steps));
    add("dt_min", traj.dt_min);
    add("dt_max", traj.dt_max);
    if (!traj.mass_series.empty()) {
        const double m0 = traj.mass_series.front().value;
        const double m1 = traj.mass_series.back().value;
        add("mass_initial", m0);
        add("mass_final", m1);
        const double balance = m1 - m0 + traj.outflow_touch + traj.outflow_deep - traj.clipped_mass;
        add("mass_balance_relative", m0 > 0.0 ? balance / m0 : balance,
            cfg.source.kind == SourceKind::Zero ? "boundary outflow and clipping included"
                                                : "source creation not included");
    }
    add("outflow_touch", traj.outflow_touch);
    add("outflow_deep", traj.outflow_deep);
    add("clipped_mass", traj.clipped_mass);

    if (!traj.touch_series.empty()) {
        add("final_touch", traj.touch_series.back().value);
        const double t_end = traj.touch_series.back().t;
        const double t_mid = 0.5 * (traj.touch_series.front().t + t_end);
        double lo = traj.touch_series.back().value, hi = lo;
        for (const auto& p : traj.touch_series) {
            if (p.t < t_mid) continue;
            lo = std::min(lo, p.value);
            hi = std::max(hi, p.value);
        }
        add("touch_motion_final_half", hi - lo, "max minus min touch over the second half of the run");
    }
    if (!traj.snapshots.empty()) {
        const BookProfile& last = traj.snapshots.back();
        const std::size_t tc = touch_cell(last, cfg.solver.support_epsilon);
        if (tc < last.h.size()) {
            add("pressure_peak_at_touch", last.argmax() == tc ? 1.0 : 0.0, time_note(last.t));
        }
    }

    const analysis::FitWindow window = cfg.analysis.window ? *cfg.analysis.window : analysis::default_window(traj);
    const std::string window_note = "window=[" + csv::number(window.t_lo) + "; " + csv::number(window.t_hi) + "]";
    if (cfg.analysis.touch_exponent) {
        attempt("touch_exponent", [&] {
            const auto fit = analysis::fit_touch_exponent(traj, window);
            add("touch_exponent", fit.exponent, window_note);
            add("touch_prefactor", fit.prefactor);
            add("touch_r_squared", fit.r_squared);
        });
    }
    if (cfg.analysis.height_exponent) {
        attempt("height_exponent", [&] {
            const auto fit = analysis::fit_height_exponent(traj, window);
            add("height_exponent", fit.exponent, window_note);
            add("height_prefactor", fit.prefactor);
            add("height_r_squared", fit.r_squared);
        });
    }
    if (!cfg.analysis.collapse_times.empty()) {
        attempt("collapse_max_distance", [&] {
            const auto rep = analysis::collapse(traj, cfg.analysis.collapse_times);
            add("collapse_max_distance", rep.max_distance);
        });
    }
    if (cfg.analysis.gamma) {
        attempt("gamma", [&] {
            const auto est = analysis::estimate_gamma(traj, window);
            add("gamma", est.gamma, std::string(analysis::to_string(est.status)));
            add("gamma_ratio", est.ratio, "touch speed over peak offset scale");
        });
    }
    if (cfg.analysis.steady_distance) {
        std::vector<double> d;
        for (const auto& snap : traj.snapshots) {
            try {
                d.push_back(analysis::steady_distance(snap, cfg.solver));
                add("steady_distance", d.back(), time_note(snap.t));
            } catch (const Error& e) {
                add("steady_distance", std::nullopt, time_note(snap.t) + "; " + csv::text(e.what()));
            }
        }
        if (d.size() >= 3) {
            const std::size_t n = d.size();
            add("steady_distance_decreasing_last3", (d[n - 3] > d[n - 2] && d[n - 2] > d[n - 1]) ? 1.0 : 0.0);
        }
    }
    if (cfg.analysis.exact_error) {
        double final_err = 0.0;
        for (const auto& snap : traj.snapshots) {
            const auto ref = exact::parabolic_cap(cfg.initial.c_mass, snap.t, cfg.initial.center, snap.grid);
            final_err = l1_distance(snap.h, ref.h, snap.grid.dx());
            add("exact_l1_error", final_err, time_note(snap.t));
        }
        if (!traj.snapshots.empty()) {
            add("exact_l1_error_final", final_err, time_note(traj.snapshots.back().t));
            const double thr = find_threshold(cfg.n_cells);
            if (thr > 0.0) {
                add("exact_l1_threshold", thr, "n_cells=" + std::to_string(cfg.n_cells));
                add("exact_l1_within_threshold", final_err < thr ? 1.0 : 0.0);
            }
        }
    }
    return rows;
}

ScenarioOutcome simulate(const ScenarioConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const PreparedScenario prep = prepare_scenario(cfg);
    ScenarioOutcome out{.trajectory = run(prep.initial, prep.params, prep.bc, prep.solver)};
    out.trajectory.t_origin = prep.t_origin;
    out.trajectory.touch_origin = prep.touch_origin;
    out.analysis = analyse(cfg, out.trajectory);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["status"] = m.status;
    j["code_version"] = m.code_version;
    nlohmann::ordered_json echo = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.config_echo) echo[k] = v;
    j["config"] = echo;
    if (m.grid) {
        j["grid"] = {{"s_min", m.grid->s_min()}, {"s_max", m.grid->s_max()}, {"n_cells", m.grid->n_cells()},
                     {"dx", m.grid->dx()}};
        j["cfl_safety"] = m.cfl_safety;
        j["steps"] = m.steps;
        j["dt_min"] = m.dt_min;
        j["dt_max"] = m.dt_max;
    }
    j["wall_clock_seconds"] = m.wall_clock_seconds;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : m.files) files.push_back({{"path", f.path}, {"role", f.role}});
    j["files"] = files;
    return j.dump(2) + "\n";
}

namespace {

bool is_generated(const std::string& name) {
    const bool csv_file = name.ends_with(".csv");
    return name == "manifest.json" || name == "touch.csv" || name == "analysis.csv" ||
           (csv_file && (name.starts_with("snapshot_") || name.starts_with("similarity_")));
}

void prepare_dir(const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_generated(entry.path().filename().string())) fs::remove(entry.path());
    }
}

void finish_manifest(RunManifest& m, const fs::path& dir, std::chrono::steady_clock::time_point start) {
    m.files.push_back({"manifest.json", "manifest"});
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    csv::write_file(dir / "manifest.json", manifest_json(m));
}

void write_trajectory(RunManifest& m, const fs::path& dir, const Trajectory& traj, const PhysicalParams& params) {
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%04zu.csv", k);
        csv::write_file(dir / name, csv::snapshot(traj.snapshots[k], params));
        m.files.push_back({name, "snapshot"});
    }
    csv::write_file(dir / "touch.csv", csv::touch_table(traj));
    m.files.push_back({"touch.csv", "touch_series"});
    m.steps = traj.steps;
    m.dt_min = traj.dt_min;
    m.dt_max = traj.dt_max;
}

}  // namespace

RunManifest run_scenario(const ScenarioConfig& cfg, std::optional<std::string> output_dir) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = output_dir ? fs::path(*output_dir) : fs::path(cfg.output_dir);
    RunManifest m;
    m.name = cfg.name;
    m.output_dir = dir.string();
    m.config_echo = cfg.echo;
    m.grid = cfg.grid();
    m.cfl_safety = cfg.solver.cfl_safety;
    prepare_dir(dir);

    const PreparedScenario prep = prepare_scenario(cfg);
    Trajectory traj = [&] {
        try {
            return run(prep.initial, prep.params, prep.bc, prep.solver);
        } catch (const NumericalBlowupError& e) {
            m.status = "blowup: " + std::string(e.what());
            if (e.partial()) write_trajectory(m, dir, *e.partial(), prep.params);
            finish_manifest(m, dir, start);
            throw;
        }
    }();
    traj.t_origin = prep.t_origin;
    traj.touch_origin = prep.touch_origin;
    write_trajectory(m, dir, traj, prep.params);

    std::string table = "metric,value,note\n";
    for (const auto& row : analyse(cfg, traj)) {
        table += csv::text(row.metric) + ',' + (row.value ? csv::number(*row.value) : std::string()) + ',' +
                 csv::text(row.note) + '\n';
    }
    csv::write_file(dir / "analysis.csv", table);
    m.files.push_back({"analysis.csv", "analysis"});
    finish_manifest(m, dir, start);
    return m;
}

std::vector<SweepEntry> solve_sweep(const std::vector<double>& gammas, const similarity::ShootingConfig& cfg) {
    std::vector<std::future<SweepEntry>> jobs;
    jobs.reserve(gammas.size());
    for (double g : gammas) {
        jobs.push_back(std::async(std::launch::async, [g, cfg] {
            SweepEntry e{g, std::nullopt, "ok"};
            try {
                e.profile = similarity::solve_similarity(g, cfg);
            } catch (const std::exception& ex) {
                e.status = "failed: " + std::string(ex.what());
            }
            return e;
        }));
    }
    std::vector<SweepEntry> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

RunManifest run_similarity_sweep(const std::vector<double>& gammas, const similarity::ShootingConfig& cfg,
                                 const std::string& output_dir) {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir(output_dir);
    RunManifest m;
    m.name = "similarity_sweep";
    m.output_dir = dir.string();
    m.config_echo = {{"s_max", csv::number(cfg.s_max)},
                     {"series_terms", std::to_string(cfg.series_terms)},
                     {"v_inf", csv::number(cfg.v_inf)},
                     {"rel_tol", csv::number(cfg.rel_tol)},
                     {"n_points", std::to_string(cfg.n_points)}};
    std::string list;
    for (double g : gammas) list += (list.empty() ? "" : ",") + csv::number(g);
    m.config_echo.emplace_back("gammas", list);
    prepare_dir(dir);

    std::string summary = "gamma,v_inf,s_peak,residual,status\n";
    std::vector<std::string> written;
    bool any_failed = false;
    for (const auto& e : solve_sweep(gammas, cfg)) {
        if (e.profile) {
            const std::string name = "similarity_gamma_" + fmt(e.gamma) + ".csv";
            if (std::find(written.begin(), written.end(), name) == written.end()) {
                csv::write_file(dir / name, csv::similarity_profile(*e.profile));
                m.files.push_back({name, "similarity_profile"});
                written.push_back(name);
            }
            summary += csv::number(e.gamma) + ',' + csv::number(e.profile->v_inf) + ',' +
                       csv::number(e.profile->s_peak) + ',' + csv::number(e.profile->residual) + ",ok\n";
        } else {
            any_failed = true;
            summary += (std::isfinite(e.gamma) ? csv::number(e.gamma) : std::string()) + ",,,," + csv::text(e.status) + '\n';
        }
    }
    csv::write_file(dir / "similarity_summary.csv", summary);
    m.files.push_back({"similarity_summary.csv", "similarity_summary"});
    if (any_failed) m.status = "partial";
    finish_manifest(m, dir, start);
    return m;
}

}  // namespace lob
