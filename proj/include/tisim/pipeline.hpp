#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tisim/behavior.hpp"
#include "tisim/calibration.hpp"
#include "tisim/config.hpp"
#include "tisim/csv.hpp"
#include "tisim/demo.hpp"
#include "tisim/dynamics.hpp"
#include "tisim/emissions.hpp"
#include "tisim/modes.hpp"
#include "tisim/scenario.hpp"
#include "tisim/synthetic.hpp"

namespace tisim {

namespace fs = std::filesystem;

struct StageTiming {
    std::string stage;
    double milliseconds = 0.0;
};

struct RunOutputs {
    fs::path out_dir;
    std::vector<fs::path> files;              // everything written, manifest last
    std::vector<StageTiming> timings;
    Trajectory trajectory;
    EmissionReport emissions;
    SalesTable sales;
    std::vector<csv::ComparisonRow> comparison_rows;
};

namespace detail {

inline std::string file_digest_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open())
        throw IoError("cannot open '" + path.string() + "' for digest");
    Fnv1a64 digest;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        digest.update(buf, static_cast<std::size_t>(in.gcount()));
    return digest.hex();
}

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    template <typename F>
    auto run(const std::string& stage, F&& fn) -> decltype(fn()) {
        auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(stage, t0);
        } else {
            auto result = fn();
            record(stage, t0);
            return result;
        }
    }

private:
    void record(const std::string& stage,
                std::chrono::steady_clock::time_point t0) {
        auto t1 = std::chrono::steady_clock::now();
        sink_.push_back(
            {stage,
             std::chrono::duration<double, std::milli>(t1 - t0).count()});
    }

    std::vector<StageTiming>& sink_;
};

/// Window coverage derived from a parameter timeline: each block covers
/// from its start (clamped to the horizon) until the next block begins.
inline std::vector<WindowBlock> timeline_windows(const ParameterTimeline& tl,
                                                 int year_start,
                                                 int year_end) {
    std::vector<WindowBlock> windows;
    const auto& entries = tl.entries();
    for (std::size_t k = 0; k < entries.size(); ++k) {
        WindowBlock w;
        double start = entries[k].start;
        w.window_start = start < static_cast<double>(year_start)
                             ? year_start
                             : static_cast<int>(start);
        w.window_end = k + 1 < entries.size()
                           ? static_cast<int>(entries[k + 1].start) - 1
                           : year_end;
        if (w.window_end > year_end) w.window_end = year_end;
        if (w.window_end < w.window_start) continue;
        w.available = true;
        w.block = entries[k].block;
        windows.push_back(std::move(w));
    }
    return windows;
}

/// The parameters CSV for a run whose blocks were configured rather than
/// fitted: r2 is reported as 1 (the parameters are the model by
/// definition) and nothing is marked filled.
inline FitResult fit_result_from_windows(
    const std::vector<WindowBlock>& windows, std::size_t n_tech,
    std::size_t n_sub) {
    FitResult fit;
    fit.n_tech = n_tech;
    fit.n_sub = n_sub;
    for (const auto& w : windows) {
        WindowFit wf;
        wf.window_start = w.window_start;
        wf.window_end = w.window_end;
        wf.any_fitted = true;
        wf.cells.assign(n_tech * n_sub, CellFit{});
        for (std::size_t i = 0; i < n_tech; ++i)
            for (std::size_t d = 0; d < n_sub; ++d) {
                CellFit& cell = wf.cells[i * n_sub + d];
                cell.fitted = true;
                cell.a = w.block.a_at(i, d);
                cell.b = w.block.b_at(i, d);
                cell.c.assign(n_tech, 0.0);
                for (std::size_t j = 0; j < n_tech; ++j)
                    if (j != i) cell.c[j] = w.block.c_at(i, j, d);
                cell.r2 = 1.0;
            }
        fit.windows.push_back(std::move(wf));
    }
    return fit;
}

inline void remove_outputs(const std::vector<fs::path>& files) {
    std::error_code ec;
    for (const auto& f : files) fs::remove(f, ec);
}

}  // namespace detail

/// Executes one scenario end to end and writes the full output file set
/// into out_dir. On failure: partial outputs are removed, a manifest
/// recording the failing stage is still written, and the error rethrown.
inline RunOutputs run_pipeline(const RunConfig& cfg, ScenarioKind kind,
                               const fs::path& out_dir,
                               const std::string& config_digest_hex = "") {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir.string() +
                      "': " + ec.message());

    RunOutputs out;
    out.out_dir = out_dir;
    detail::StageClock clock(out.timings);
    const std::vector<std::string> tech_names = cfg.tech_names();
    const std::vector<std::string> sub_names = cfg.catalog.names();
    const int y0 = static_cast<int>(cfg.simulation.t_start);
    const int y1 = static_cast<int>(cfg.simulation.t_end);
    std::string stage_now = "scenario";
    std::string failed_stage;
    std::string failure;

    auto manifest_path = out_dir / "manifest.json";
    auto write_manifest = [&]() {
        nlohmann::json m;
        m["artifact_version"] = kArtifactVersion;
        m["scenario"] = std::string(to_string(kind));
        m["config"] = config_to_json(cfg);
        if (!config_digest_hex.empty())
            m["input_digests"] = {{"config", config_digest_hex}};
        m["status"] = failed_stage.empty() ? "ok" : "failed";
        if (!failed_stage.empty()) {
            m["failed_stage"] = failed_stage;
            m["error"] = failure;
        }
        nlohmann::json timings = nlohmann::json::object();
        for (const auto& t : out.timings) timings[t.stage] = t.milliseconds;
        m["timings_ms"] = timings;
        nlohmann::json digests = nlohmann::json::object();
        for (const auto& f : out.files)
            digests[f.filename().string()] = detail::file_digest_hex(f);
        m["output_digests"] = digests;
        std::ofstream mo(manifest_path, std::ios::binary);
        if (!mo.is_open())
            throw IoError("cannot write manifest '" +
                          manifest_path.string() + "'");
        mo << m.dump(2) << '\n';
    };

    try {
        // scenario transform
        ScenarioInputs inputs;
        inputs.timeline = cfg.timeline;
        inputs.init = cfg.init;
        inputs.drivers = cfg.drivers;
        inputs.elasticity = cfg.elasticity;
        inputs.technologies = cfg.technologies;
        inputs.share_sub = cfg.share_sub;
        inputs.n_sub = cfg.catalog.size();
        ScenarioSpec spec = cfg.scenario_defaults;
        spec.kind = kind;
        stage_now = "scenario";
        ScenarioOutcome outcome = clock.run("scenario", [&] {
            return apply_scenario(inputs, spec);
        });

        // simulate
        stage_now = "simulate";
        SimulationProblem problem;
        problem.config = cfg.simulation;
        problem.timeline = outcome.timeline;
        problem.init = outcome.init;
        problem.active = outcome.active;
        problem.share_sub = cfg.share_sub;
        problem.hook = outcome.hook;
        problem.record = cfg.record;
        out.trajectory = clock.run("simulate", [&] {
            return simulate(problem);
        });

        // emissions accounting
        stage_now = "emissions";
        clock.run("emissions", [&] {
            MarketSizeSeries market =
                make_market_size(outcome.drivers, cfg.base_sales, y0, y1);
            out.sales = sales_from_share(out.trajectory, cfg.share_sub,
                                         market);
            StockTable stocks = stock_from_sales(out.sales,
                                                 cfg.lifetime_years);
            EmissionFactors factors = EmissionFactors::constant(
                y0, y1, cfg.emission_factors);
            out.emissions = emissions(stocks, factors);
        });

        // classification over the effective (scenario-transformed) blocks
        stage_now = "classify";
        std::vector<WindowBlock> windows = detail::timeline_windows(
            outcome.timeline, y0, y1);
        ModeSeries modes = clock.run("classify", [&] {
            ModeSeries per_sub = mode_series(windows, cfg.epsilon);
            ModeSeries per_side = side_mode_series(
                windows, out.trajectory, cfg.grouping, cfg.side_aggregation,
                cfg.epsilon);
            per_sub.records.insert(per_sub.records.end(),
                                   per_side.records.begin(),
                                   per_side.records.end());
            return per_sub;
        });
        std::vector<std::tuple<int, std::string, Side, BehaviorLabel>>
            behavior_rows;
        for (const auto& w : windows) {
            for (std::size_t i = 0; i < cfg.technologies.size(); ++i) {
                for (Side side : {Side::technology, Side::market}) {
                    auto [sum_a, sum_b] =
                        side_sum(w.block, cfg.grouping, side, i);
                    BehaviorLabel label =
                        classify_behavior(sum_a, sum_b, cfg.epsilon);
                    label.window_start = w.window_start;
                    label.window_end = w.window_end;
                    behavior_rows.emplace_back(w.window_start, tech_names[i],
                                               side, label);
                }
            }
        }

        // serialize
        stage_now = "write";
        clock.run("write", [&] {
            auto add = [&](const fs::path& p) { out.files.push_back(p); };
            fs::path p;

            p = out_dir / "trajectory.csv";
            csv::write_trajectory_csv(p.string(), out.trajectory, tech_names,
                                      sub_names);
            add(p);

            p = out_dir / "parameters.csv";
            FitResult as_fit = detail::fit_result_from_windows(
                windows, cfg.technologies.size(), cfg.catalog.size());
            csv::write_parameters_csv(p.string(), as_fit, tech_names,
                                      sub_names);
            add(p);

            p = out_dir / "modes.csv";
            csv::write_modes_csv(p.string(), modes, tech_names, sub_names);
            add(p);

            p = out_dir / "emissions.csv";
            csv::write_emissions_csv(p.string(),
                                     std::string(to_string(kind)),
                                     out.emissions, tech_names);
            add(p);

            p = out_dir / "plot_behavior.csv";
            csv::write_behavior_plot_csv(p.string(), behavior_rows);
            add(p);

            p = out_dir / "plot_modes.csv";
            csv::write_modes_plot_csv(p.string(), modes, tech_names,
                                      sub_names);
            add(p);

            p = out_dir / "plot_dimensions.csv";
            csv::write_dimensions_plot_csv(p.string(),
                                           std::string(to_string(kind)),
                                           out.trajectory, tech_names,
                                           cfg.catalog);
            add(p);

            p = out_dir / "plot_ghg.csv";
            csv::write_emissions_csv(p.string(),
                                     std::string(to_string(kind)),
                                     out.emissions, tech_names);
            add(p);
        });

        // comparison rows for multi-scenario assembly
        for (int y = y0; y <= y1; ++y) {
            for (std::size_t i = 0; i < cfg.technologies.size(); ++i) {
                csv::ComparisonRow row;
                row.scenario = std::string(to_string(kind));
                row.year = y;
                row.technology = tech_names[i];
                row.share = out.trajectory.at_year(y, i, cfg.share_sub);
                row.sales = out.sales.at(y, i);
                row.cumulative_ghg = out.emissions.cumulative_at(y, i);
                out.comparison_rows.push_back(std::move(row));
            }
        }
    } catch (const std::exception& e) {
        failed_stage = stage_now;
        failure = e.what();
        detail::remove_outputs(out.files);
        out.files.clear();
        try {
            write_manifest();
        } catch (...) {
            // the original error matters more than a broken manifest write
        }
        throw;
    }

    write_manifest();
    out.files.push_back(manifest_path);
    return out;
}

/// Runs all seven scenarios concurrently into per-scenario subdirectories
/// and assembles the cross-scenario comparison table afterwards.
inline std::vector<RunOutputs> run_all_scenarios(const RunConfig& cfg,
                                                 const fs::path& out_dir,
                                                 const std::string&
                                                     config_digest_hex = "") {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir.string() +
                      "': " + ec.message());

    const ScenarioKind kinds[] = {
        ScenarioKind::baseline,          ScenarioKind::landscape_pressure,
        ScenarioKind::niche_incumbent,   ScenarioKind::hybrid_incumbent,
        ScenarioKind::sociotechnical_transition,
        ScenarioKind::niche_favoured,    ScenarioKind::predator_prey};

    std::vector<std::future<RunOutputs>> futures;
    futures.reserve(std::size(kinds));
    for (ScenarioKind kind : kinds) {
        fs::path sub = out_dir / std::string(to_string(kind));
        futures.push_back(std::async(std::launch::async, [&cfg, kind, sub,
                                                          config_digest_hex] {
            return run_pipeline(cfg, kind, sub, config_digest_hex);
        }));
    }

    std::vector<RunOutputs> results;
    std::vector<std::string> failures;
    for (auto& f : futures) {
        try {
            results.push_back(f.get());
        } catch (const std::exception& e) {
            failures.push_back(e.what());
        }
    }
    if (!failures.empty()) throw ValidationError(std::move(failures));

    std::vector<csv::ComparisonRow> rows;
    for (const auto& r : results)
        rows.insert(rows.end(), r.comparison_rows.begin(),
                    r.comparison_rows.end());
    fs::path comparison = out_dir / "comparison.csv";
    csv::write_comparison_csv(comparison.string(), rows);
    return results;
}

/// Calibration pipeline: fit windows from an observed series, write the
/// parameter CSV plus goodness summary, and return the fit.
inline FitResult run_calibration(const RunConfig& cfg,
                                 const ObservedSeries& observed,
                                 const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out_dir.string() +
                      "': " + ec.message());
    FitResult fit = fit_all(observed, cfg.window, cfg.fit_options);
    csv::write_parameters_csv((out_dir / "parameters.csv").string(), fit,
                              cfg.tech_names(), cfg.catalog.names());

    GoodnessSummary goodness = goodness_of_fit(fit, observed,
                                               cfg.simulation.dt);
    nlohmann::json g;
    g["overall_rmse"] = goodness.overall_rmse;
    nlohmann::json per_window = nlohmann::json::array();
    for (const auto& w : goodness.windows) {
        nlohmann::json row;
        row["window_start"] = w.window_start;
        row["window_end"] = w.window_end;
        row["mean_r2"] = w.mean_r2;
        row["rmse_per_sub"] = w.rmse_per_sub;
        per_window.push_back(row);
    }
    g["windows"] = per_window;
    std::ofstream go(out_dir / "goodness.json", std::ios::binary);
    if (!go.is_open())
        throw IoError("cannot write '" +
                      (out_dir / "goodness.json").string() + "'");
    go << g.dump(2) << '\n';

    // modes over the fitted windows (per sub-dimension; no trajectory here)
    ModeSeries modes = mode_series(fit.to_window_blocks(), cfg.epsilon);
    csv::write_modes_csv((out_dir / "modes.csv").string(), modes,
                         cfg.tech_names(), cfg.catalog.names());
    return fit;
}

/// Recomputes the emissions tables of a completed run directory from its
/// manifest snapshot and trajectory file, overwriting emissions.csv and
/// plot_ghg.csv in place.
inline EmissionReport recompute_emissions(const fs::path& run_dir) {
    fs::path mpath = run_dir / "manifest.json";
    std::ifstream in(mpath, std::ios::binary);
    if (!in.is_open())
        throw IoError("cannot open '" + mpath.string() + "'");
    nlohmann::json m;
    try {
        in >> m;
    } catch (const std::exception& e) {
        throw IoError("cannot parse '" + mpath.string() + "': " + e.what());
    }

    std::string scenario;
    std::vector<std::string> tech_names;
    std::vector<double> factors;
    int y0 = 0, y1 = 0, lifetime = 0;
    double base_sales = 0.0;
    DriverSeries gdp;
    try {
        if (m.at("status").get<std::string>() != "ok")
            throw ValidationError(std::string(
                "run directory records a failed run; nothing to recompute"));
        scenario = m.at("scenario").get<std::string>();
        const auto& cj = m.at("config");
        y0 = static_cast<int>(cj.at("run").at("t_start").get<double>());
        y1 = static_cast<int>(cj.at("run").at("t_end").get<double>());
        for (const auto& t : cj.at("technologies"))
            tech_names.push_back(t.at("name").get<std::string>());
        const auto& em = cj.at("emissions");
        lifetime = em.at("lifetime_years").get<int>();
        base_sales = em.at("base_sales").get<double>();
        for (const auto& name : tech_names)
            factors.push_back(em.at("factors").at(name).get<double>());
        const auto& gj = cj.at("drivers").at("gdp_growth");
        gdp.year_start = gj.at("year_start").get<int>();
        gdp.baseline = gj.at("values").get<std::vector<double>>();
        gdp.multiplier = gj.at("multiplier").get<double>();
        if (cj.at("catalog").at("name").get<std::string>() != "powertrain-16")
            throw ValidationError(std::string(
                "unknown catalog in manifest snapshot"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest snapshot is incomplete: " +
                              std::string(e.what()));
    }

    DimensionCatalog catalog = DimensionCatalog::builtin();
    std::size_t share_sub = catalog.share_index();
    ObservedSeries obs = csv::read_observed_csv(
        (run_dir / "trajectory.csv").string(), tech_names, catalog.names());
    std::vector<std::string> issues;
    if (obs.year_start > y0 || obs.year_end() < y1)
        issues.push_back("trajectory does not cover the configured horizon");
    else
        for (int y = y0; y <= y1; ++y)
            for (std::size_t i = 0; i < tech_names.size(); ++i)
                if (!obs.has(y, i, share_sub)) {
                    issues.push_back("trajectory is missing the share of '" +
                                     tech_names[i] + "' in " +
                                     std::to_string(y));
                    y = y1;
                    break;
                }
    if (!issues.empty()) throw ValidationError(std::move(issues));

    ExogenousDrivers drivers;
    drivers.gdp_growth = gdp;
    MarketSizeSeries market = make_market_size(drivers, base_sales, y0, y1);
    SalesTable sales;
    sales.year_start = y0;
    sales.n_tech = tech_names.size();
    sales.sales.reserve(static_cast<std::size_t>(y1 - y0 + 1) *
                        tech_names.size());
    for (int y = y0; y <= y1; ++y) {
        double total = market.at(y);
        for (std::size_t i = 0; i < tech_names.size(); ++i)
            sales.sales.push_back(obs.at(y, i, share_sub) * total);
    }
    StockTable stocks = stock_from_sales(sales, lifetime);
    EmissionReport report =
        emissions(stocks, EmissionFactors::constant(y0, y1, factors));
    csv::write_emissions_csv((run_dir / "emissions.csv").string(), scenario,
                             report, tech_names);
    csv::write_emissions_csv((run_dir / "plot_ghg.csv").string(), scenario,
                             report, tech_names);
    return report;
}

}  // namespace tisim
