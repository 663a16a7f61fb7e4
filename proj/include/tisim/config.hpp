#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tisim/behavior.hpp"
#include "tisim/calibration.hpp"
#include "tisim/catalog.hpp"
#include "tisim/common.hpp"
#include "tisim/csv.hpp"
#include "tisim/demo.hpp"
#include "tisim/dynamics.hpp"
#include "tisim/emissions.hpp"
#include "tisim/modes.hpp"
#include "tisim/scenario.hpp"

namespace tisim {

/// Fully resolved run configuration. Loading resolves every shorthand (the
/// "demo" blocks) and cross-reference, so downstream stages never consult
/// the JSON again; the manifest snapshots the resolved form.
struct RunConfig {
    RunConfig() : catalog(DimensionCatalog::builtin()), grouping(catalog) {}

    SimulationConfig simulation;
    RecordMode record = RecordMode::annual_only;
    DimensionCatalog catalog;
    SideGrouping grouping;
    std::vector<Technology> technologies;
    ParameterTimeline timeline;
    SystemState init;
    std::size_t share_sub = SimulationProblem::kNoShare;

    WindowSpec window;
    FitOptions fit_options;
    EpsilonPolicy epsilon;
    SideAggregation side_aggregation = SideAggregation::externality_sum;

    ScenarioSpec scenario_defaults;  // kind overridden per run
    ExogenousDrivers drivers;
    ElasticityMap elasticity;

    std::vector<double> emission_factors;  // per technology, tCO2e/veh-year
    int lifetime_years = 15;
    double base_sales = 0.0;

    std::uint64_t seed = 42;

    std::vector<std::string> tech_names() const {
        std::vector<std::string> names;
        names.reserve(technologies.size());
        for (const auto& t : technologies) names.push_back(t.name);
        return names;
    }
};

namespace detail {

using nlohmann::json;

struct ConfigReader {
    std::vector<std::string> issues;

    void fail(const std::string& where, const std::string& what) {
        issues.push_back(where + ": " + what);
    }

    void check_keys(const json& obj, const std::string& where,
                    const std::vector<std::string>& allowed) {
        if (!obj.is_object()) return;
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (const auto& k : allowed)
                if (k == it.key()) { known = true; break; }
            if (!known) {
                std::string msg = "unknown key '" + it.key() + "'";
                std::string near = nearest_name(it.key(), allowed);
                if (!near.empty()) msg += " (did you mean '" + near + "'?)";
                fail(where, msg);
            }
        }
    }

    bool require_object(const json& obj, const std::string& where) {
        if (obj.is_object()) return true;
        fail(where, "must be an object");
        return false;
    }

    double number(const json& obj, const std::string& where,
                  const std::string& key, double fallback,
                  bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(where, "missing required key '" + key + "'");
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            fail(where + "." + key, "must be a number");
            return fallback;
        }
        return v.get<double>();
    }

    int integer(const json& obj, const std::string& where,
                const std::string& key, int fallback, bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(where, "missing required key '" + key + "'");
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_number_integer()) {
            fail(where + "." + key, "must be an integer");
            return fallback;
        }
        return v.get<int>();
    }

    bool boolean(const json& obj, const std::string& where,
                 const std::string& key, bool fallback) {
        if (!obj.contains(key)) return fallback;
        const json& v = obj.at(key);
        if (!v.is_boolean()) {
            fail(where + "." + key, "must be true or false");
            return fallback;
        }
        return v.get<bool>();
    }

    std::string text(const json& obj, const std::string& where,
                     const std::string& key, const std::string& fallback,
                     bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(where, "missing required key '" + key + "'");
            return fallback;
        }
        const json& v = obj.at(key);
        if (!v.is_string()) {
            fail(where + "." + key, "must be a string");
            return fallback;
        }
        return v.get<std::string>();
    }
};

inline std::size_t tech_index_of(const std::vector<Technology>& techs,
                                 const std::string& name) {
    for (std::size_t i = 0; i < techs.size(); ++i)
        if (techs[i].name == name) return i;
    return static_cast<std::size_t>(-1);
}

inline DriverSeries driver_from_json(ConfigReader& r, const json& obj,
                                     const std::string& where, int y0,
                                     int y1) {
    DriverSeries series = DriverSeries::constant(y0, y1, 0.0);
    if (!r.require_object(obj, where)) return series;
    r.check_keys(obj, where, {"constant", "year_start", "values",
                              "multiplier"});
    bool has_constant = obj.contains("constant");
    bool has_values = obj.contains("values");
    if (has_constant == has_values) {
        r.fail(where, "needs exactly one of 'constant' or 'values'");
        return series;
    }
    if (has_constant) {
        series = DriverSeries::constant(
            y0, y1, r.number(obj, where, "constant", 0.0, true));
    } else {
        series.year_start = r.integer(obj, where, "year_start", y0, true);
        const json& vals = obj.at("values");
        if (!vals.is_array()) {
            r.fail(where + ".values", "must be an array of numbers");
        } else {
            series.baseline.clear();
            for (const auto& v : vals) {
                if (!v.is_number()) {
                    r.fail(where + ".values", "must contain only numbers");
                    break;
                }
                series.baseline.push_back(v.get<double>());
            }
        }
    }
    series.multiplier = r.number(obj, where, "multiplier", 1.0);
    return series;
}

}  // namespace detail

/// Loads and exhaustively validates a run configuration. Every problem in
/// the file is reported (not just the first); unknown keys are errors with
/// a nearest-name suggestion.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("'" + path + "' is not valid JSON: " + e.what());
    }

    detail::ConfigReader r;
    RunConfig cfg;
    const DemoFixture demo = demo_fixture();

    if (!root.is_object())
        throw ValidationError(std::string("config root must be an object"));
    r.check_keys(root, "config",
                 {"run", "catalog", "technologies", "initial_levels",
                  "parameters", "calibration", "classification", "scenario",
                  "drivers", "elasticity", "emissions"});

    // ------------------------------------------------------------- run
    if (root.contains("run") && r.require_object(root["run"], "run")) {
        const auto& run = root["run"];
        r.check_keys(run, "run",
                     {"t_start", "t_end", "dt", "renormalize_shares",
                      "record", "blow_up_bound", "seed"});
        cfg.simulation.t_start = r.number(run, "run", "t_start", 1985.0);
        cfg.simulation.t_end = r.number(run, "run", "t_end", 2070.0);
        cfg.simulation.dt = r.number(run, "run", "dt", 0.125);
        cfg.simulation.renormalize_shares =
            r.boolean(run, "run", "renormalize_shares", true);
        cfg.simulation.blow_up_bound =
            r.number(run, "run", "blow_up_bound", 1e12);
        std::string record = r.text(run, "run", "record", "annual");
        if (record == "annual") cfg.record = RecordMode::annual_only;
        else if (record == "full") cfg.record = RecordMode::full;
        else r.fail("run.record", "must be 'annual' or 'full'");
        double seed = r.number(run, "run", "seed", 42.0);
        cfg.seed = static_cast<std::uint64_t>(seed);
    }

    // --------------------------------------------------------- catalog
    if (root.contains("catalog") &&
        r.require_object(root["catalog"], "catalog")) {
        const auto& cat = root["catalog"];
        r.check_keys(cat, "catalog", {"name", "side_overrides"});
        std::string name = r.text(cat, "catalog", "name", "powertrain-16");
        if (name != "powertrain-16")
            r.fail("catalog.name",
                   "unknown catalog '" + name +
                       "' (only 'powertrain-16' is built in)");
        if (cat.contains("side_overrides") &&
            r.require_object(cat["side_overrides"], "catalog.side_overrides")) {
            for (auto it = cat["side_overrides"].begin();
                 it != cat["side_overrides"].end(); ++it) {
                std::size_t d = cfg.catalog.index_of(it.key());
                if (d == DimensionCatalog::npos) {
                    std::string msg = "unknown sub-dimension '" + it.key() +
                                      "'";
                    std::string near =
                        nearest_name(it.key(), cfg.catalog.names());
                    if (!near.empty())
                        msg += " (did you mean '" + near + "'?)";
                    r.fail("catalog.side_overrides", msg);
                    continue;
                }
                if (!it.value().is_string()) {
                    r.fail("catalog.side_overrides." + it.key(),
                           "must be 'technology' or 'market'");
                    continue;
                }
                std::string side = it.value().get<std::string>();
                Side s;
                if (side == "technology") s = Side::technology;
                else if (side == "market") s = Side::market;
                else {
                    r.fail("catalog.side_overrides." + it.key(),
                           "must be 'technology' or 'market'");
                    continue;
                }
                try {
                    cfg.grouping.assign(cfg.catalog, it.key(), s);
                } catch (const ValidationError& e) {
                    r.fail("catalog.side_overrides." + it.key(), e.what());
                }
            }
        }
    }
    cfg.share_sub = cfg.catalog.share_index();

    // ---------------------------------------------------- technologies
    if (root.contains("technologies")) {
        const auto& techs = root["technologies"];
        if (!techs.is_array()) {
            r.fail("technologies", "must be an array");
        } else {
            for (std::size_t i = 0; i < techs.size(); ++i) {
                std::string where = "technologies[" + std::to_string(i) + "]";
                const auto& t = techs[i];
                if (!r.require_object(t, where)) continue;
                r.check_keys(t, where, {"name", "role"});
                Technology tech;
                tech.name = r.text(t, where, "name", "", true);
                std::string role = r.text(t, where, "role", "", true);
                if (role == "incumbent") tech.role = TechnologyRole::incumbent;
                else if (role == "hybrid") tech.role = TechnologyRole::hybrid;
                else if (role == "emerging")
                    tech.role = TechnologyRole::emerging;
                else if (!role.empty())
                    r.fail(where + ".role",
                           "must be 'incumbent', 'hybrid', or 'emerging'");
                cfg.technologies.push_back(std::move(tech));
            }
        }
    } else {
        cfg.technologies = demo.technologies;
    }
    if (cfg.technologies.empty())
        r.fail("technologies", "at least one technology is required");
    for (std::size_t i = 0; i < cfg.technologies.size(); ++i) {
        if (cfg.technologies[i].name.empty())
            r.fail("technologies[" + std::to_string(i) + "].name",
                   "must not be empty");
        for (std::size_t j = i + 1; j < cfg.technologies.size(); ++j)
            if (cfg.technologies[i].name == cfg.technologies[j].name)
                r.fail("technologies",
                       "duplicate name '" + cfg.technologies[i].name + "'");
    }
    const std::size_t n_tech = cfg.technologies.size();
    const std::size_t n_sub = cfg.catalog.size();

    auto is_demo_system = [&]() {
        if (cfg.technologies.size() != demo.technologies.size()) return false;
        for (std::size_t i = 0; i < cfg.technologies.size(); ++i)
            if (cfg.technologies[i].name != demo.technologies[i].name ||
                cfg.technologies[i].role != demo.technologies[i].role)
                return false;
        return true;
    };

    // -------------------------------------------------- initial levels
    bool init_ok = false;
    if (!root.contains("initial_levels") ||
        (root["initial_levels"].is_string() &&
         root["initial_levels"].get<std::string>() == "demo")) {
        if (is_demo_system()) {
            cfg.init = demo.init;
            init_ok = true;
        } else {
            r.fail("initial_levels",
                   "'demo' requires the demo technologies (ICEV/HEV/BEV)");
        }
    } else if (root["initial_levels"].is_object()) {
        const auto& levels = root["initial_levels"];
        cfg.init.t = cfg.simulation.t_start;
        cfg.init.x.assign(n_tech * n_sub, 0.0);
        std::vector<char> seen(n_tech, 0);
        for (auto it = levels.begin(); it != levels.end(); ++it) {
            std::size_t i = detail::tech_index_of(cfg.technologies, it.key());
            if (i == static_cast<std::size_t>(-1)) {
                std::string msg = "unknown technology '" + it.key() + "'";
                std::string near = nearest_name(it.key(), cfg.tech_names());
                if (!near.empty()) msg += " (did you mean '" + near + "'?)";
                r.fail("initial_levels", msg);
                continue;
            }
            seen[i] = 1;
            std::string where = "initial_levels." + it.key();
            if (!r.require_object(it.value(), where)) continue;
            for (auto sub = it.value().begin(); sub != it.value().end();
                 ++sub) {
                std::size_t d = cfg.catalog.index_of(sub.key());
                if (d == DimensionCatalog::npos) {
                    std::string msg =
                        "unknown sub-dimension '" + sub.key() + "'";
                    std::string near =
                        nearest_name(sub.key(), cfg.catalog.names());
                    if (!near.empty())
                        msg += " (did you mean '" + near + "'?)";
                    r.fail(where, msg);
                    continue;
                }
                if (!sub.value().is_number()) {
                    r.fail(where + "." + sub.key(), "must be a number");
                    continue;
                }
                cfg.init.x[i * n_sub + d] = sub.value().get<double>();
            }
        }
        for (std::size_t i = 0; i < n_tech; ++i)
            if (!seen[i])
                r.fail("initial_levels",
                       "missing levels for technology '" +
                           cfg.technologies[i].name + "'");
        init_ok = true;
    } else {
        r.fail("initial_levels", "must be 'demo' or an object");
    }

    // ------------------------------------------------------ parameters
    if (!root.contains("parameters") ||
        (root["parameters"].is_string() &&
         root["parameters"].get<std::string>() == "demo")) {
        if (is_demo_system()) {
            cfg.timeline = demo.timeline;
        } else {
            r.fail("parameters",
                   "'demo' requires the demo technologies (ICEV/HEV/BEV)");
        }
    } else if (root["parameters"].is_object()) {
        const auto& params = root["parameters"];
        r.check_keys(params, "parameters", {"file"});
        std::string file = r.text(params, "parameters", "file", "", true);
        if (!file.empty()) {
            try {
                csv::ParameterImport import = csv::read_parameters_csv(file);
                if (import.tech_names != cfg.tech_names()) {
                    r.fail("parameters.file",
                           "technology columns do not match configured "
                           "technologies");
                } else if (import.sub_names != cfg.catalog.names()) {
                    r.fail("parameters.file",
                           "sub-dimension rows do not match the catalog");
                } else {
                    for (auto& wb : import.windows)
                        cfg.timeline.add(static_cast<double>(wb.window_start),
                                         std::move(wb.block));
                }
            } catch (const IoError& e) {
                r.fail("parameters.file", e.what());
            }
        }
    } else {
        r.fail("parameters", "must be 'demo' or an object with 'file'");
    }

    // ----------------------------------------------------- calibration
    if (root.contains("calibration") &&
        r.require_object(root["calibration"], "calibration")) {
        const auto& cal = root["calibration"];
        r.check_keys(cal, "calibration",
                     {"window_length", "stride", "refine", "refine_max_iter"});
        cfg.window.length = static_cast<std::size_t>(
            r.integer(cal, "calibration", "window_length", 5));
        cfg.window.stride = static_cast<std::size_t>(
            r.integer(cal, "calibration", "stride", 1));
        cfg.fit_options.refine = r.boolean(cal, "calibration", "refine",
                                           false);
        cfg.fit_options.refine_max_iter = static_cast<std::size_t>(
            r.integer(cal, "calibration", "refine_max_iter", 200));
        cfg.fit_options.refine_dt = cfg.simulation.dt;
    }

    // -------------------------------------------------- classification
    if (root.contains("classification") &&
        r.require_object(root["classification"], "classification")) {
        const auto& cls = root["classification"];
        r.check_keys(cls, "classification",
                     {"epsilon", "relative_fraction", "side_aggregation"});
        cfg.epsilon.epsilon = r.number(cls, "classification", "epsilon",
                                       1e-6);
        cfg.epsilon.relative_fraction =
            r.number(cls, "classification", "relative_fraction", 0.0);
        std::string agg = r.text(cls, "classification", "side_aggregation",
                                 "externality-sum");
        if (agg == "externality-sum")
            cfg.side_aggregation = SideAggregation::externality_sum;
        else if (agg == "coefficient-sum")
            cfg.side_aggregation = SideAggregation::coefficient_sum;
        else
            r.fail("classification.side_aggregation",
                   "must be 'externality-sum' or 'coefficient-sum'");
        if (cfg.epsilon.epsilon < 0.0)
            r.fail("classification.epsilon", "must be >= 0");
        if (cfg.epsilon.relative_fraction < 0.0)
            r.fail("classification.relative_fraction", "must be >= 0");
    }

    // -------------------------------------------------------- scenario
    if (root.contains("scenario") &&
        r.require_object(root["scenario"], "scenario")) {
        const auto& sc = root["scenario"];
        r.check_keys(sc, "scenario",
                     {"landscape_pressure", "sociotechnical_transition",
                      "niche_favoured"});
        if (sc.contains("landscape_pressure") &&
            r.require_object(sc["landscape_pressure"],
                             "scenario.landscape_pressure")) {
            const auto& lp = sc["landscape_pressure"];
            r.check_keys(lp, "scenario.landscape_pressure",
                         {"oil_price", "tax_registration_fees", "gdp_growth",
                          "wtw_costs"});
            auto& d = cfg.scenario_defaults;
            d.oil_price_multiplier =
                r.number(lp, "scenario.landscape_pressure", "oil_price", 1.5);
            d.tax_registration_fees_multiplier =
                r.number(lp, "scenario.landscape_pressure",
                         "tax_registration_fees", 1.5);
            d.gdp_growth_multiplier =
                r.number(lp, "scenario.landscape_pressure", "gdp_growth",
                         1.5);
            d.wtw_costs_multiplier =
                r.number(lp, "scenario.landscape_pressure", "wtw_costs", 1.5);
        }
        if (sc.contains("sociotechnical_transition") &&
            r.require_object(sc["sociotechnical_transition"],
                             "scenario.sociotechnical_transition")) {
            const auto& st = sc["sociotechnical_transition"];
            r.check_keys(st, "scenario.sociotechnical_transition",
                         {"reinforce_factor", "weaken_factor",
                          "duration_years", "hybrid_share_gate",
                          "weaken_b_too"});
            auto& d = cfg.scenario_defaults;
            d.reinforce_factor =
                r.number(st, "scenario.sociotechnical_transition",
                         "reinforce_factor", 1.25);
            d.weaken_factor =
                r.number(st, "scenario.sociotechnical_transition",
                         "weaken_factor", 0.75);
            d.duration_years =
                r.integer(st, "scenario.sociotechnical_transition",
                          "duration_years", 20);
            d.hybrid_share_gate =
                r.number(st, "scenario.sociotechnical_transition",
                         "hybrid_share_gate", 0.5);
            d.weaken_b_too = r.boolean(st, "scenario.sociotechnical_transition",
                                       "weaken_b_too", false);
        }
        if (sc.contains("niche_favoured") &&
            r.require_object(sc["niche_favoured"],
                             "scenario.niche_favoured")) {
            const auto& nf = sc["niche_favoured"];
            r.check_keys(nf, "scenario.niche_favoured",
                         {"scale_toward", "scale_away"});
            cfg.scenario_defaults.externality_scale_toward =
                r.number(nf, "scenario.niche_favoured", "scale_toward", 1.5);
            cfg.scenario_defaults.externality_scale_away =
                r.number(nf, "scenario.niche_favoured", "scale_away", 0.5);
        }
    }

    // --------------------------------------------------------- drivers
    int y0 = static_cast<int>(cfg.simulation.t_start);
    int y1 = static_cast<int>(cfg.simulation.t_end);
    if (!root.contains("drivers") ||
        (root["drivers"].is_string() &&
         root["drivers"].get<std::string>() == "demo")) {
        cfg.drivers = demo.drivers;
    } else if (root["drivers"].is_object()) {
        const auto& dr = root["drivers"];
        r.check_keys(dr, "drivers",
                     {"oil_price", "tax_registration_fees", "gdp_growth",
                      "wtw_costs"});
        cfg.drivers = demo.drivers;
        if (dr.contains("oil_price"))
            cfg.drivers.oil_price = detail::driver_from_json(
                r, dr["oil_price"], "drivers.oil_price", y0, y1);
        if (dr.contains("tax_registration_fees"))
            cfg.drivers.tax_registration_fees = detail::driver_from_json(
                r, dr["tax_registration_fees"],
                "drivers.tax_registration_fees", y0, y1);
        if (dr.contains("gdp_growth"))
            cfg.drivers.gdp_growth = detail::driver_from_json(
                r, dr["gdp_growth"], "drivers.gdp_growth", y0, y1);
        if (dr.contains("wtw_costs"))
            cfg.drivers.wtw_costs = detail::driver_from_json(
                r, dr["wtw_costs"], "drivers.wtw_costs", y0, y1);
    } else {
        r.fail("drivers", "must be 'demo' or an object");
    }

    // ------------------------------------------------------ elasticity
    if (!root.contains("elasticity") ||
        (root["elasticity"].is_string() &&
         root["elasticity"].get<std::string>() == "demo")) {
        if (is_demo_system()) {
            cfg.elasticity = demo.elasticity;
        } else {
            // defaults need role resolution; fall back to empty on failure
            try {
                cfg.elasticity =
                    ElasticityMap::defaults(role_index(cfg.technologies),
                                            cfg.catalog);
            } catch (const ValidationError&) {
                cfg.elasticity = ElasticityMap{};
            }
        }
    } else if (root["elasticity"].is_array()) {
        for (std::size_t i = 0; i < root["elasticity"].size(); ++i) {
            std::string where = "elasticity[" + std::to_string(i) + "]";
            const auto& e = root["elasticity"][i];
            if (!r.require_object(e, where)) continue;
            r.check_keys(e, where,
                         {"driver", "technology", "sub_dimension",
                          "elasticity"});
            ElasticityEntry entry;
            std::string driver = r.text(e, where, "driver", "", true);
            bool driver_ok = true;
            if (driver == "oil_price") entry.driver = Driver::oil_price;
            else if (driver == "tax_registration_fees")
                entry.driver = Driver::tax_registration_fees;
            else if (driver == "gdp_growth")
                entry.driver = Driver::gdp_growth;
            else if (driver == "wtw_costs") entry.driver = Driver::wtw_costs;
            else {
                r.fail(where + ".driver", "unknown driver '" + driver + "'");
                driver_ok = false;
            }
            std::string tech = r.text(e, where, "technology", "", true);
            entry.tech = detail::tech_index_of(cfg.technologies, tech);
            if (entry.tech == static_cast<std::size_t>(-1)) {
                std::string msg = "unknown technology '" + tech + "'";
                std::string near = nearest_name(tech, cfg.tech_names());
                if (!near.empty()) msg += " (did you mean '" + near + "'?)";
                r.fail(where + ".technology", msg);
                driver_ok = false;
            }
            std::string sub = r.text(e, where, "sub_dimension", "", true);
            entry.sub = cfg.catalog.index_of(sub);
            if (entry.sub == DimensionCatalog::npos) {
                std::string msg = "unknown sub-dimension '" + sub + "'";
                std::string near = nearest_name(sub, cfg.catalog.names());
                if (!near.empty()) msg += " (did you mean '" + near + "'?)";
                r.fail(where + ".sub_dimension", msg);
                driver_ok = false;
            }
            entry.elasticity = r.number(e, where, "elasticity", 0.0, true);
            if (driver_ok) cfg.elasticity.entries.push_back(entry);
        }
    } else {
        r.fail("elasticity", "must be 'demo' or an array");
    }

    // ------------------------------------------------------- emissions
    if (root.contains("emissions") &&
        r.require_object(root["emissions"], "emissions")) {
        const auto& em = root["emissions"];
        r.check_keys(em, "emissions",
                     {"factors", "lifetime_years", "base_sales"});
        cfg.lifetime_years = r.integer(em, "emissions", "lifetime_years", 15);
        cfg.base_sales = r.number(em, "emissions", "base_sales",
                                  demo.base_sales);
        if (!em.contains("factors") ||
            (em["factors"].is_string() &&
             em["factors"].get<std::string>() == "demo")) {
            if (is_demo_system()) {
                cfg.emission_factors = demo.wtw_factors;
            } else {
                r.fail("emissions.factors",
                       "'demo' requires the demo technologies");
            }
        } else if (em["factors"].is_object()) {
            cfg.emission_factors.assign(n_tech, -1.0);
            for (auto it = em["factors"].begin(); it != em["factors"].end();
                 ++it) {
                std::size_t i =
                    detail::tech_index_of(cfg.technologies, it.key());
                if (i == static_cast<std::size_t>(-1)) {
                    std::string msg = "unknown technology '" + it.key() + "'";
                    std::string near =
                        nearest_name(it.key(), cfg.tech_names());
                    if (!near.empty())
                        msg += " (did you mean '" + near + "'?)";
                    r.fail("emissions.factors", msg);
                    continue;
                }
                if (!it.value().is_number()) {
                    r.fail("emissions.factors." + it.key(),
                           "must be a number");
                    continue;
                }
                cfg.emission_factors[i] = it.value().get<double>();
            }
            for (std::size_t i = 0; i < n_tech; ++i)
                if (cfg.emission_factors[i] < 0.0)
                    r.fail("emissions.factors",
                           "missing or negative factor for '" +
                               cfg.technologies[i].name + "'");
        } else {
            r.fail("emissions.factors", "must be 'demo' or an object");
        }
    } else if (!root.contains("emissions")) {
        if (is_demo_system()) {
            cfg.emission_factors = demo.wtw_factors;
            cfg.lifetime_years = demo.lifetime_years;
            cfg.base_sales = demo.base_sales;
        } else {
            r.fail("emissions",
                   "required for non-demo technologies (factors per "
                   "technology)");
        }
    }

    // ------------------------------------------------- cross validation
    {
        auto sim_issues = cfg.simulation.validate();
        for (auto& s : sim_issues) r.issues.push_back("run: " + s);
    }
    if (cfg.timeline.entries().empty()) {
        r.fail("parameters", "no parameter blocks configured");
    } else {
        auto tl_issues = cfg.timeline.validate(cfg.simulation.t_start);
        for (auto& s : tl_issues) r.issues.push_back("parameters: " + s);
        for (const auto& entry : cfg.timeline.entries()) {
            if (entry.block.n_tech != n_tech)
                r.fail("parameters", "block technology count mismatch");
            if (entry.block.n_sub != n_sub)
                r.fail("parameters", "block sub-dimension count mismatch");
        }
    }
    if (init_ok) {
        if (cfg.init.x.size() != n_tech * n_sub)
            r.fail("initial_levels", "level count mismatch");
        cfg.init.t = cfg.simulation.t_start;
    }
    {
        auto w_issues = cfg.window.validate(n_tech + 1);
        for (auto& s : w_issues) r.issues.push_back("calibration: " + s);
        auto s_issues = cfg.scenario_defaults.validate();
        for (auto& s : s_issues) r.issues.push_back("scenario: " + s);
        auto d_issues = cfg.drivers.validate(y0, y1);
        for (auto& s : d_issues) r.issues.push_back("drivers: " + s);
        auto e_issues = cfg.elasticity.validate(n_tech, n_sub);
        for (auto& s : e_issues) r.issues.push_back("elasticity: " + s);
    }
    if (cfg.lifetime_years < 1)
        r.fail("emissions.lifetime_years", "must be >= 1");
    if (!(cfg.base_sales > 0.0))
        r.fail("emissions.base_sales", "must be > 0");
    for (std::size_t i = 0; i < cfg.emission_factors.size(); ++i)
        if (!std::isfinite(cfg.emission_factors[i]) ||
            cfg.emission_factors[i] < 0.0)
            r.fail("emissions.factors",
                   "factor for '" + cfg.technologies[i].name +
                       "' must be finite and >= 0");

    if (!r.issues.empty()) throw ValidationError(std::move(r.issues));
    return cfg;
}

/// Serializes the resolved configuration for the run manifest. Shorthands
/// are expanded, so equal snapshots imply identical run inputs.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
    using nlohmann::json;
    json root;
    root["run"] = {{"t_start", cfg.simulation.t_start},
                   {"t_end", cfg.simulation.t_end},
                   {"dt", cfg.simulation.dt},
                   {"renormalize_shares", cfg.simulation.renormalize_shares},
                   {"blow_up_bound", cfg.simulation.blow_up_bound},
                   {"record", cfg.record == RecordMode::full ? "full"
                                                             : "annual"},
                   {"seed", cfg.seed}};
    json techs = json::array();
    for (const auto& t : cfg.technologies)
        techs.push_back({{"name", t.name},
                         {"role", std::string(to_string(t.role))}});
    root["technologies"] = techs;

    json sides = json::object();
    for (std::size_t d = 0; d < cfg.catalog.size(); ++d)
        sides[cfg.catalog.sub_dimensions()[d].name] =
            std::string(to_string(cfg.grouping.side_of(d)));
    root["catalog"] = {{"name", "powertrain-16"}, {"sides", sides}};

    json init = json::object();
    for (std::size_t i = 0; i < cfg.technologies.size(); ++i) {
        json per = json::object();
        for (std::size_t d = 0; d < cfg.catalog.size(); ++d)
            per[cfg.catalog.sub_dimensions()[d].name] =
                cfg.init.x[i * cfg.catalog.size() + d];
        init[cfg.technologies[i].name] = per;
    }
    root["initial_levels"] = init;

    json blocks = json::array();
    for (const auto& entry : cfg.timeline.entries()) {
        json block;
        block["start"] = entry.start;
        json per_tech = json::array();
        for (std::size_t i = 0; i < entry.block.n_tech; ++i) {
            json row;
            row["technology"] = cfg.technologies[i].name;
            json a = json::array(), b = json::array();
            for (std::size_t d = 0; d < entry.block.n_sub; ++d) {
                a.push_back(entry.block.a_at(i, d));
                b.push_back(entry.block.b_at(i, d));
            }
            row["a"] = a;
            row["b"] = b;
            json c = json::object();
            for (std::size_t j = 0; j < entry.block.n_tech; ++j) {
                if (j == i) continue;
                json cj = json::array();
                for (std::size_t d = 0; d < entry.block.n_sub; ++d)
                    cj.push_back(entry.block.c_at(i, j, d));
                c[cfg.technologies[j].name] = cj;
            }
            row["c"] = c;
            per_tech.push_back(row);
        }
        block["per_technology"] = per_tech;
        blocks.push_back(block);
    }
    root["parameters"] = blocks;

    root["calibration"] = {{"window_length", cfg.window.length},
                           {"stride", cfg.window.stride},
                           {"refine", cfg.fit_options.refine},
                           {"refine_max_iter",
                            cfg.fit_options.refine_max_iter}};
    root["classification"] = {
        {"epsilon", cfg.epsilon.epsilon},
        {"relative_fraction", cfg.epsilon.relative_fraction},
        {"side_aggregation",
         cfg.side_aggregation == SideAggregation::externality_sum
             ? "externality-sum"
             : "coefficient-sum"}};
    root["scenario"] = {
        {"landscape_pressure",
         {{"oil_price", cfg.scenario_defaults.oil_price_multiplier},
          {"tax_registration_fees",
           cfg.scenario_defaults.tax_registration_fees_multiplier},
          {"gdp_growth", cfg.scenario_defaults.gdp_growth_multiplier},
          {"wtw_costs", cfg.scenario_defaults.wtw_costs_multiplier}}},
        {"sociotechnical_transition",
         {{"reinforce_factor", cfg.scenario_defaults.reinforce_factor},
          {"weaken_factor", cfg.scenario_defaults.weaken_factor},
          {"duration_years", cfg.scenario_defaults.duration_years},
          {"hybrid_share_gate", cfg.scenario_defaults.hybrid_share_gate},
          {"weaken_b_too", cfg.scenario_defaults.weaken_b_too}}},
        {"niche_favoured",
         {{"scale_toward", cfg.scenario_defaults.externality_scale_toward},
          {"scale_away", cfg.scenario_defaults.externality_scale_away}}}};

    auto driver_json = [](const DriverSeries& s) {
        json d;
        d["year_start"] = s.year_start;
        d["values"] = s.baseline;
        d["multiplier"] = s.multiplier;
        return d;
    };
    root["drivers"]["oil_price"] = driver_json(cfg.drivers.oil_price);
    root["drivers"]["tax_registration_fees"] =
        driver_json(cfg.drivers.tax_registration_fees);
    root["drivers"]["gdp_growth"] = driver_json(cfg.drivers.gdp_growth);
    root["drivers"]["wtw_costs"] = driver_json(cfg.drivers.wtw_costs);

    json elas = json::array();
    for (const auto& e : cfg.elasticity.entries) {
        json entry;
        entry["driver"] = std::string(to_string(e.driver));
        entry["technology"] = cfg.technologies[e.tech].name;
        entry["sub_dimension"] = cfg.catalog.sub_dimensions()[e.sub].name;
        entry["elasticity"] = e.elasticity;
        elas.push_back(entry);
    }
    root["elasticity"] = elas;

    json factors = json::object();
    for (std::size_t i = 0; i < cfg.emission_factors.size(); ++i)
        factors[cfg.technologies[i].name] = cfg.emission_factors[i];
    root["emissions"] = {{"factors", factors},
                         {"lifetime_years", cfg.lifetime_years},
                         {"base_sales", cfg.base_sales}};
    return root;
}

}  // namespace tisim
