#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tisim/behavior.hpp"
#include "tisim/catalog.hpp"
#include "tisim/common.hpp"
#include "tisim/dynamics.hpp"

namespace tisim {

enum class Driver {
    oil_price,
    tax_registration_fees,
    gdp_growth,
    wtw_costs,
};

inline constexpr std::size_t kDriverCount = 4;

inline std::string_view to_string(Driver d) {
    switch (d) {
        case Driver::oil_price: return "oil_price";
        case Driver::tax_registration_fees: return "tax_registration_fees";
        case Driver::gdp_growth: return "gdp_growth";
        case Driver::wtw_costs: return "wtw_costs";
    }
    return "?";
}

/// One exogenous annual series with its scenario multiplier applied on top
/// of the baseline projection.
struct DriverSeries {
    int year_start = 0;
    std::vector<double> baseline;
    double multiplier = 1.0;

    bool covers(int y0, int y1) const {
        return !baseline.empty() && year_start <= y0 &&
               year_start + static_cast<int>(baseline.size()) - 1 >= y1;
    }
    double at(int year) const {
        if (!covers(year, year))
            throw ValidationError("driver series does not cover year " +
                                  std::to_string(year));
        return baseline[static_cast<std::size_t>(year - year_start)] *
               multiplier;
    }

    static DriverSeries constant(int y0, int y1, double value) {
        DriverSeries s;
        s.year_start = y0;
        s.baseline.assign(static_cast<std::size_t>(y1 - y0) + 1, value);
        return s;
    }
};

struct ExogenousDrivers {
    DriverSeries oil_price;
    DriverSeries tax_registration_fees;
    DriverSeries gdp_growth;
    DriverSeries wtw_costs;

    const DriverSeries& series(Driver d) const {
        switch (d) {
            case Driver::oil_price: return oil_price;
            case Driver::tax_registration_fees: return tax_registration_fees;
            case Driver::gdp_growth: return gdp_growth;
            case Driver::wtw_costs: return wtw_costs;
        }
        return oil_price;
    }
    DriverSeries& series(Driver d) {
        return const_cast<DriverSeries&>(
            static_cast<const ExogenousDrivers*>(this)->series(d));
    }

    std::vector<std::string> validate(int y0, int y1) const {
        std::vector<std::string> issues;
        for (Driver d : {Driver::oil_price, Driver::tax_registration_fees,
                         Driver::gdp_growth, Driver::wtw_costs}) {
            const DriverSeries& s = series(d);
            if (!s.covers(y0, y1))
                issues.push_back("driver " + std::string(to_string(d)) +
                                 " does not cover the horizon");
            if (!(s.multiplier > 0.0))
                issues.push_back("driver " + std::string(to_string(d)) +
                                 " multiplier must be positive");
        }
        return issues;
    }
};

/// Position of each role in the configured technology list.
struct RoleIndex {
    std::size_t incumbent = 0;
    std::size_t hybrid = 0;
    std::size_t emerging = 0;

    std::size_t of(TechnologyRole r) const {
        switch (r) {
            case TechnologyRole::incumbent: return incumbent;
            case TechnologyRole::hybrid: return hybrid;
            case TechnologyRole::emerging: return emerging;
        }
        return incumbent;
    }
};

inline RoleIndex role_index(const std::vector<Technology>& techs) {
    std::optional<std::size_t> inc, hyb, eme;
    for (std::size_t i = 0; i < techs.size(); ++i) {
        switch (techs[i].role) {
            case TechnologyRole::incumbent:
                if (inc) throw ValidationError("two incumbent technologies");
                inc = i;
                break;
            case TechnologyRole::hybrid:
                if (hyb) throw ValidationError("two hybrid technologies");
                hyb = i;
                break;
            case TechnologyRole::emerging:
                if (eme) throw ValidationError("two emerging technologies");
                eme = i;
                break;
        }
    }
    if (!inc || !hyb || !eme)
        throw ValidationError(
            "technology list must contain one incumbent, one hybrid, and "
            "one emerging technology");
    return {*inc, *hyb, *eme};
}

/// Driver-to-growth-rate coupling: each entry contributes a factor
/// (1 + e * (multiplier - 1)) to the affected growth rate.
struct ElasticityEntry {
    Driver driver = Driver::oil_price;
    std::size_t tech = 0;
    std::size_t sub = 0;
    double elasticity = 0.0;
};

struct ElasticityMap {
    std::vector<ElasticityEntry> entries;

    /// Shipped coupling: fuel economics steer the market-share growth rates
    /// and operating-cost economics steer financial mobilisation, against
    /// the incumbent and toward the hybrid and emerging technologies. The
    /// GDP driver never appears here; it scales the market size directly.
    static ElasticityMap defaults(const RoleIndex& roles,
                                  const DimensionCatalog& catalog) {
        ElasticityMap m;
        std::size_t share = catalog.index_of("market-share");
        std::size_t capital = catalog.index_of("financial-capital");
        if (share == DimensionCatalog::npos ||
            capital == DimensionCatalog::npos)
            return m;  // custom catalog: no default coupling
        m.entries = {
            {Driver::oil_price, roles.incumbent, share, -0.5},
            {Driver::oil_price, roles.emerging, share, +0.5},
            {Driver::oil_price, roles.hybrid, share, +0.25},
            {Driver::wtw_costs, roles.incumbent, capital, -0.5},
            {Driver::wtw_costs, roles.emerging, capital, +0.5},
            {Driver::wtw_costs, roles.hybrid, capital, +0.25},
        };
        return m;
    }

    /// Combined scale on a[tech, sub] for the given driver multipliers.
    double growth_scale(const ExogenousDrivers& drivers, std::size_t tech,
                        std::size_t sub) const {
        double scale = 1.0;
        for (const auto& en : entries) {
            if (en.tech != tech || en.sub != sub) continue;
            scale *= 1.0 + en.elasticity *
                               (drivers.series(en.driver).multiplier - 1.0);
        }
        return scale;
    }

    std::vector<std::string> validate(std::size_t n_tech,
                                      std::size_t n_sub) const {
        std::vector<std::string> issues;
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto& en = entries[k];
            if (en.tech >= n_tech || en.sub >= n_sub)
                issues.push_back("elasticity entry " + std::to_string(k) +
                                 " references an unknown technology or "
                                 "sub-dimension");
            if (!std::isfinite(en.elasticity))
                issues.push_back("elasticity entry " + std::to_string(k) +
                                 " is not finite");
        }
        return issues;
    }
};

enum class ScenarioKind {
    baseline,
    landscape_pressure,
    niche_incumbent,
    hybrid_incumbent,
    sociotechnical_transition,
    niche_favoured,
    predator_prey,
};

inline constexpr std::size_t kScenarioCount = 7;

inline std::string_view to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::baseline: return "baseline";
        case ScenarioKind::landscape_pressure: return "landscape-pressure";
        case ScenarioKind::niche_incumbent: return "niche-incumbent";
        case ScenarioKind::hybrid_incumbent: return "hybrid-incumbent";
        case ScenarioKind::sociotechnical_transition:
            return "sociotechnical-transition";
        case ScenarioKind::niche_favoured: return "niche-favoured";
        case ScenarioKind::predator_prey: return "predator-prey";
    }
    return "?";
}

inline std::optional<ScenarioKind> scenario_from_string(std::string_view s) {
    for (ScenarioKind k :
         {ScenarioKind::baseline, ScenarioKind::landscape_pressure,
          ScenarioKind::niche_incumbent, ScenarioKind::hybrid_incumbent,
          ScenarioKind::sociotechnical_transition,
          ScenarioKind::niche_favoured, ScenarioKind::predator_prey})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// All scenario knobs in one bag; only the fields of the selected kind are
/// read. Factors are config-exposed with the documented defaults.
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::baseline;

    // landscape-pressure: one multiplier per driver
    double oil_price_multiplier = 1.5;
    double tax_registration_fees_multiplier = 1.5;
    double gdp_growth_multiplier = 1.5;
    double wtw_costs_multiplier = 1.5;

    // sociotechnical-transition
    double reinforce_factor = 1.25;
    double weaken_factor = 0.75;
    int duration_years = 20;
    double hybrid_share_gate = 0.5;
    bool weaken_b_too = false;  // default: only growth rates are touched

    // niche-favoured
    double externality_scale_toward = 1.5;
    double externality_scale_away = 0.5;

    std::vector<std::string> validate() const {
        std::vector<std::string> issues;
        auto positive = [&issues](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                issues.push_back(std::string(name) + " must be positive");
        };
        positive(oil_price_multiplier, "oil_price multiplier");
        positive(tax_registration_fees_multiplier,
                 "tax_registration_fees multiplier");
        positive(gdp_growth_multiplier, "gdp_growth multiplier");
        positive(wtw_costs_multiplier, "wtw_costs multiplier");
        positive(reinforce_factor, "reinforce_factor");
        positive(weaken_factor, "weaken_factor");
        positive(externality_scale_toward, "externality_scale_toward");
        positive(externality_scale_away, "externality_scale_away");
        if (duration_years < 1)
            issues.push_back("duration_years must be at least 1");
        if (!(hybrid_share_gate >= 0.0 && hybrid_share_gate <= 1.0))
            issues.push_back("hybrid_share_gate must lie in [0, 1]");
        return issues;
    }
};

/// True once the 3-year moving average of year-over-year change in the
/// monitored share turns strictly negative; needs at least 4 observations.
inline bool detect_structural_decline(std::span<const double> shares) {
    if (shares.size() < 4) return false;
    std::size_t n = shares.size();
    double sum = 0.0;
    for (std::size_t k = n - 3; k < n; ++k)
        sum += shares[k] - shares[k - 1];
    return sum / 3.0 < 0.0;
}

/// Everything a run needs after scenario application. The hook (when
/// present) holds run-local mutable state: build one outcome per run and
/// never share it across concurrent runs.
struct ScenarioOutcome {
    ParameterTimeline timeline;
    SystemState init;
    std::vector<char> active;
    ScenarioHook hook;
    ExogenousDrivers drivers;
};

struct ScenarioInputs {
    ParameterTimeline timeline;
    SystemState init;
    ExogenousDrivers drivers;
    ElasticityMap elasticity;
    std::vector<Technology> technologies;
    std::size_t share_sub = SimulationProblem::kNoShare;
    std::size_t n_sub = 0;
};

namespace detail {

/// Per-year scales of the sociotechnical intervention. Fires when the
/// emerging technology's share enters structural decline, acts for
/// duration_years, then re-arms and may fire again.
class TransitionHookState {
public:
    TransitionHookState(const ScenarioSpec& spec, RoleIndex roles,
                        std::size_t n_tech, std::size_t n_sub,
                        std::size_t share_sub)
        : spec_(spec),
          roles_(roles),
          n_tech_(n_tech),
          n_sub_(n_sub),
          share_sub_(share_sub) {}

    YearScales operator()(int year, std::span<const SystemState> annual) {
        if (active_ && year >= window_end_) active_ = false;
        if (!active_) {
            std::vector<double> shares;
            shares.reserve(annual.size());
            for (const auto& s : annual)
                shares.push_back(s.x[roles_.emerging * n_sub_ + share_sub_]);
            if (detect_structural_decline(shares)) {
                active_ = true;
                window_end_ = year + spec_.duration_years;
            }
        }
        YearScales scales;
        if (!active_) return scales;

        scales.a_scale.assign(n_tech_ * n_sub_, 1.0);
        for (std::size_t d = 0; d < n_sub_; ++d) {
            scales.a_scale[roles_.emerging * n_sub_ + d] =
                spec_.reinforce_factor;
            scales.a_scale[roles_.incumbent * n_sub_ + d] =
                spec_.weaken_factor;
        }
        double hybrid_share =
            annual.back().x[roles_.hybrid * n_sub_ + share_sub_];
        if (hybrid_share > spec_.hybrid_share_gate)
            for (std::size_t d = 0; d < n_sub_; ++d)
                scales.a_scale[roles_.hybrid * n_sub_ + d] =
                    spec_.weaken_factor;
        if (spec_.weaken_b_too) scales.b_scale = scales.a_scale;
        return scales;
    }

private:
    ScenarioSpec spec_;
    RoleIndex roles_;
    std::size_t n_tech_;
    std::size_t n_sub_;
    std::size_t share_sub_;
    bool active_ = false;
    int window_end_ = 0;
};

}  // namespace detail

/// Turns the baseline problem into the selected scenario's problem:
/// parameter transforms, removals, driver multipliers, and the runtime
/// intervention hook.
inline ScenarioOutcome apply_scenario(const ScenarioInputs& in,
                                      const ScenarioSpec& spec) {
    {
        auto issues = spec.validate();
        if (!issues.empty()) throw ValidationError(std::move(issues));
    }
    const RoleIndex roles = role_index(in.technologies);
    const std::size_t n_tech = in.technologies.size();

    ScenarioOutcome out;
    out.timeline = in.timeline;
    out.init = in.init;
    out.active.assign(n_tech, 1);
    out.drivers = in.drivers;

    auto remove_tech = [&out, &in](std::size_t tech) {
        out.active[tech] = 0;
        for (std::size_t d = 0; d < in.n_sub; ++d)
            out.init.x[tech * in.n_sub + d] = 0.0;
    };

    switch (spec.kind) {
        case ScenarioKind::baseline:
            break;

        case ScenarioKind::landscape_pressure: {
            out.drivers.oil_price.multiplier *= spec.oil_price_multiplier;
            out.drivers.tax_registration_fees.multiplier *=
                spec.tax_registration_fees_multiplier;
            out.drivers.gdp_growth.multiplier *= spec.gdp_growth_multiplier;
            out.drivers.wtw_costs.multiplier *= spec.wtw_costs_multiplier;
            std::vector<std::string> issues;
            for (auto& entry : out.timeline.entries()) {
                ParameterBlock& blk = entry.block;
                for (std::size_t i = 0; i < blk.n_tech; ++i)
                    for (std::size_t d = 0; d < blk.n_sub; ++d) {
                        double scale =
                            in.elasticity.growth_scale(out.drivers, i, d);
                        if (!(scale > 0.0)) {
                            issues.push_back(
                                "driver coupling drives the growth-rate "
                                "scale nonpositive at technology " +
                                std::to_string(i) + ", sub-dimension " +
                                std::to_string(d));
                            continue;
                        }
                        blk.a_at(i, d) *= scale;
                    }
            }
            if (!issues.empty()) throw ValidationError(std::move(issues));
            break;
        }

        case ScenarioKind::niche_incumbent:
            remove_tech(roles.hybrid);
            break;

        case ScenarioKind::hybrid_incumbent:
            remove_tech(roles.emerging);
            break;

        case ScenarioKind::sociotechnical_transition: {
            if (in.share_sub == SimulationProblem::kNoShare)
                throw ValidationError(
                    "sociotechnical-transition needs a market-share "
                    "sub-dimension to monitor");
            auto state = std::make_shared<detail::TransitionHookState>(
                spec, roles, n_tech, in.n_sub, in.share_sub);
            out.hook = [state](int year, std::span<const SystemState> annual) {
                return (*state)(year, annual);
            };
            break;
        }

        case ScenarioKind::niche_favoured:
            for (auto& entry : out.timeline.entries()) {
                ParameterBlock& blk = entry.block;
                for (std::size_t d = 0; d < blk.n_sub; ++d) {
                    for (std::size_t j = 0; j < blk.n_tech; ++j) {
                        if (j == roles.emerging) continue;
                        double& toward = blk.c_at(roles.emerging, j, d);
                        if (toward < 0.0)
                            toward *= spec.externality_scale_toward;
                        double& away = blk.c_at(j, roles.emerging, d);
                        if (away < 0.0) away *= spec.externality_scale_away;
                    }
                }
            }
            break;

        case ScenarioKind::predator_prey:
            for (auto& entry : out.timeline.entries()) {
                ParameterBlock& blk = entry.block;
                auto set_sign = [&blk](std::size_t i, std::size_t j,
                                       std::size_t d, double sign) {
                    double& v = blk.c_at(i, j, d);
                    v = sign * std::fabs(v);
                };
                for (std::size_t d = 0; d < blk.n_sub; ++d) {
                    // emerging and incumbent harm each other
                    set_sign(roles.emerging, roles.incumbent, d, +1.0);
                    set_sign(roles.incumbent, roles.emerging, d, +1.0);
                    // hybrid feeds on the incumbent
                    set_sign(roles.hybrid, roles.incumbent, d, -1.0);
                    set_sign(roles.incumbent, roles.hybrid, d, +1.0);
                    // emerging feeds on the hybrid
                    set_sign(roles.emerging, roles.hybrid, d, -1.0);
                    set_sign(roles.hybrid, roles.emerging, d, +1.0);
                }
            }
            break;
    }
    return out;
}

/// Exogenous total market size over the horizon: base sales compounded by
/// the GDP-growth driver (baseline series times scenario multiplier).
inline MarketSizeSeries make_market_size(const ExogenousDrivers& drivers,
                                         double base_sales, int year_start,
                                         int year_end) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(year_end - year_start) + 1);
    double v = base_sales;
    for (int y = year_start; y <= year_end; ++y) {
        values.push_back(v);
        if (y < year_end) v *= 1.0 + drivers.gdp_growth.at(y);
    }
    return MarketSizeSeries::from_values(year_start, std::move(values));
}

}  // namespace tisim
