#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tisim/pipeline.hpp"

namespace {

void print_error(const char* klass, const std::string& what) {
    std::fprintf(stderr, "%s error:\n", klass);
    std::size_t start = 0;
    while (start <= what.size()) {
        std::size_t end = what.find('\n', start);
        if (end == std::string::npos) end = what.size();
        std::fprintf(stderr, "  %s\n",
                     what.substr(start, end - start).c_str());
        start = end + 1;
    }
}

int run(int argc, char** argv) {
    CLI::App app{"coupled technology-interaction simulator"};
    app.require_subcommand(1);

    std::string config_path, data_path, params_path, run_dir, out_dir;
    std::string scenario_name = "baseline";

    CLI::App* simulate = app.add_subcommand(
        "simulate", "run one scenario and write its output tables");
    simulate->add_option("--config", config_path, "configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--scenario", scenario_name,
                         "scenario name (default: baseline)");
    simulate->add_option("--out", out_dir, "output directory")->required();

    CLI::App* calibrate = app.add_subcommand(
        "calibrate", "fit window parameters from an observed trajectory");
    calibrate->add_option("--config", config_path, "configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--data", data_path, "observed trajectory CSV")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--out", out_dir, "output directory")->required();

    CLI::App* scenarios = app.add_subcommand(
        "scenarios", "run every scenario and write the comparison table");
    scenarios->add_option("--config", config_path, "configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    scenarios->add_option("--out", out_dir, "output directory")->required();

    CLI::App* modes = app.add_subcommand(
        "modes", "classify interaction modes from a parameters CSV");
    modes->add_option("--params", params_path, "parameters CSV")
        ->required()
        ->check(CLI::ExistingFile);
    modes->add_option("--out", out_dir, "output directory")->required();

    CLI::App* emissions_cmd = app.add_subcommand(
        "emissions", "recompute emission tables for a completed run");
    emissions_cmd->add_option("--run", run_dir, "run directory")
        ->required()
        ->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(tisim::ExitCode::validation);
    }

    try {
        if (simulate->parsed()) {
            auto kind = tisim::scenario_from_string(scenario_name);
            if (!kind)
                throw tisim::ValidationError(
                    "unknown scenario '" + scenario_name +
                    "'; expected one of baseline, landscape-pressure, "
                    "niche-incumbent, hybrid-incumbent, "
                    "sociotechnical-transition, niche-favoured, "
                    "predator-prey");
            tisim::RunConfig cfg = tisim::load_config(config_path);
            std::string digest = tisim::detail::file_digest_hex(config_path);
            tisim::RunOutputs out =
                tisim::run_pipeline(cfg, *kind, out_dir, digest);
            std::printf("wrote %zu files to %s\n", out.files.size(),
                        out.out_dir.string().c_str());
        } else if (calibrate->parsed()) {
            tisim::RunConfig cfg = tisim::load_config(config_path);
            tisim::ObservedSeries observed = tisim::csv::read_observed_csv(
                data_path, cfg.tech_names(), cfg.catalog.names());
            tisim::FitResult fit =
                tisim::run_calibration(cfg, observed, out_dir);
            std::size_t fitted = 0, filled = 0;
            for (const auto& w : fit.windows)
                for (const auto& cell : w.cells) {
                    if (cell.fitted) ++fitted;
                    if (cell.filled) ++filled;
                }
            std::printf(
                "fitted %zu windows (%zu cells fitted, %zu filled); wrote "
                "parameters.csv, goodness.json, modes.csv to %s\n",
                fit.windows.size(), fitted, filled, out_dir.c_str());
        } else if (scenarios->parsed()) {
            tisim::RunConfig cfg = tisim::load_config(config_path);
            std::string digest = tisim::detail::file_digest_hex(config_path);
            auto results = tisim::run_all_scenarios(cfg, out_dir, digest);
            std::printf("ran %zu scenarios into %s\n", results.size(),
                        out_dir.c_str());
        } else if (modes->parsed()) {
            tisim::csv::ParameterImport import =
                tisim::csv::read_parameters_csv(params_path);
            tisim::ModeSeries series =
                tisim::mode_series(import.windows, tisim::EpsilonPolicy{});
            std::error_code ec;
            tisim::fs::create_directories(out_dir, ec);
            if (ec)
                throw tisim::IoError("cannot create output directory '" +
                                     out_dir + "': " + ec.message());
            tisim::csv::write_modes_csv(
                (tisim::fs::path(out_dir) / "modes.csv").string(), series,
                import.tech_names, import.sub_names);
            tisim::csv::write_modes_plot_csv(
                (tisim::fs::path(out_dir) / "plot_modes.csv").string(),
                series, import.tech_names, import.sub_names);
            std::printf("classified %zu windows; wrote modes.csv, "
                        "plot_modes.csv to %s\n",
                        import.windows.size(), out_dir.c_str());
        } else if (emissions_cmd->parsed()) {
            tisim::EmissionReport report = tisim::recompute_emissions(run_dir);
            std::printf(
                "recomputed emissions %d..%d; total %.6g Mt cumulative\n",
                report.year_start, report.year_end(),
                report.total_cumulative.back());
        }
    } catch (const tisim::ValidationError& e) {
        print_error("validation", e.what());
        return static_cast<int>(tisim::ExitCode::validation);
    } catch (const tisim::NumericalError& e) {
        print_error("numerical", e.what());
        return static_cast<int>(tisim::ExitCode::numerical);
    } catch (const tisim::IoError& e) {
        print_error("io", e.what());
        return static_cast<int>(tisim::ExitCode::io);
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return static_cast<int>(tisim::ExitCode::io);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
