#pragma once

#include <cstddef>
#include <vector>

#include "tisim/catalog.hpp"
#include "tisim/dynamics.hpp"
#include "tisim/emissions.hpp"
#include "tisim/scenario.hpp"

namespace tisim {

/// Self-contained demonstration system: three road-transport technologies
/// over the sixteen-indicator catalog, 1985-2070. Every number here is a
/// constructed fixture chosen to exhibit the qualitative dynamics the
/// engine is meant to produce (bridge-technology rise and hand-over,
/// delayed emerging-technology takeoff, knowledge spillovers); none of it
/// is measured data.
struct DemoFixture {
    DemoFixture()
        : catalog(DimensionCatalog::builtin()), grouping(catalog) {}

    std::vector<Technology> technologies;
    DimensionCatalog catalog;
    SideGrouping grouping;
    ParameterTimeline timeline;
    SystemState init;
    std::size_t share_sub = 0;
    ExogenousDrivers drivers;
    ElasticityMap elasticity;
    double base_sales = 1.5e7;   // vehicles/year at the start year
    int lifetime_years = 15;
    std::vector<double> wtw_factors = {4.6, 3.8, 1.6};  // tCO2e/vehicle-year
    SimulationConfig config;
};

inline DemoFixture demo_fixture() {
    DemoFixture f;
    f.technologies = {{"ICEV", TechnologyRole::incumbent},
                      {"HEV", TechnologyRole::hybrid},
                      {"BEV", TechnologyRole::emerging}};
    f.share_sub = f.catalog.share_index();

    const std::size_t n_tech = 3;
    const std::size_t n_sub = f.catalog.size();
    const std::size_t I = 0, H = 1, B = 2;

    // 1985 levels per catalog order: publications, patents,
    // scientific-citations, technological-citations,
    // scientific-collaborations, technological-collaborations,
    // publication-assignees, patent-assignees, vehicle-models,
    // laws-regulations, search-popularity, incentives, market-share,
    // publication-authors, patent-applicants, financial-capital
    const double init_icev[] = {420, 650, 900, 780, 130, 160, 210, 260,
                                150, 40,  55,  6,   0.96, 520, 310, 820};
    const double init_hev[] = {6,   9, 11, 10, 2.5, 3,    4,  5,
                               3,   2, 4,  1.5, 0.03, 8,  5,  12};
    const double init_bev[] = {4,   5, 7, 6, 1.5, 2,    2.5, 3,
                               2, 1.5, 6, 1, 0.01, 5,   3.5, 8};

    f.init.t = 1985.0;
    f.init.x.assign(n_tech * n_sub, 0.0);
    for (std::size_t d = 0; d < n_sub; ++d) {
        f.init.x[I * n_sub + d] = init_icev[d];
        f.init.x[H * n_sub + d] = init_hev[d];
        f.init.x[B * n_sub + d] = init_bev[d];
    }

    ParameterBlock early(n_tech, n_sub);
    const std::size_t share = f.share_sub;
    for (std::size_t d = 0; d < n_sub; ++d) {
        if (d == share) continue;
        bool tech_side = f.grouping.side_of(d) == Side::technology;
        if (tech_side) {
            // incumbent mature, hybrid explorative (negative self-decline),
            // emerging mid-growth; knowledge flows are mutual benefits with
            // the strongest spillover running hybrid -> emerging
            early.a_at(I, d) = 0.015;
            early.b_at(I, d) = 0.015 / (1.5 * init_icev[d]);
            early.a_at(H, d) = 0.06;
            early.b_at(H, d) = -1.0e-6;
            early.a_at(B, d) = 0.05;
            early.b_at(B, d) = 2.0e-5;
            early.c_at(I, H, d) = -1.5e-6;
            early.c_at(I, B, d) = -1.5e-6;
            early.c_at(H, I, d) = -4.0e-6;
            early.c_at(H, B, d) = -2.0e-6;
            early.c_at(B, I, d) = -2.0e-6;
            early.c_at(B, H, d) = -8.0e-6;
        } else {
            // market build-out: hybrid rides incumbent infrastructure,
            // emerging is crowded by the incumbent but helped by the hybrid
            early.a_at(I, d) = 0.01;
            early.b_at(I, d) = 0.01 / (1.3 * init_icev[d]);
            early.a_at(H, d) = 0.055;
            early.b_at(H, d) = 0.055 / (30.0 * init_hev[d]);
            early.a_at(B, d) = 0.045;
            early.b_at(B, d) = 0.045 / (40.0 * init_bev[d]);
            early.c_at(I, H, d) = -1.5e-6;
            early.c_at(I, B, d) = +1.5e-6;
            early.c_at(H, I, d) = -3.0e-6;
            early.c_at(H, B, d) = -2.0e-6;
            early.c_at(B, I, d) = +2.0e-6;
            early.c_at(B, H, d) = -4.0e-6;
        }
    }
    // market share, transition era: incumbent drifts down slowly, hybrid
    // grows fast as the bridge, emerging dips first (crowded out) which is
    // what the structural-decline detector watches for
    early.a_at(I, share) = 0.012;
    early.b_at(I, share) = 0.04;
    early.c_at(I, H, share) = +0.02;
    early.c_at(I, B, share) = +0.05;
    early.a_at(H, share) = 0.05;
    early.b_at(H, share) = 0.10;
    early.c_at(H, I, share) = -0.01;
    early.c_at(H, B, share) = -0.005;
    early.a_at(B, share) = 0.015;
    early.b_at(B, share) = 0.02;
    early.c_at(B, I, share) = +0.042;
    early.c_at(B, H, share) = +0.025;

    // maturity era: the emerging technology's market dynamics strengthen
    // (learning effects) and the bridge saturates harder
    ParameterBlock late = early;
    late.a_at(I, share) = 0.01;
    late.b_at(I, share) = 0.05;
    late.c_at(I, H, share) = +0.025;
    late.c_at(I, B, share) = +0.05;
    late.a_at(H, share) = 0.045;
    late.b_at(H, share) = 0.13;
    late.c_at(H, I, share) = -0.01;
    late.c_at(H, B, share) = +0.008;
    late.a_at(B, share) = 0.07;
    late.b_at(B, share) = 0.025;
    late.c_at(B, I, share) = +0.01;
    late.c_at(B, H, share) = -0.004;

    f.timeline.add(1985.0, std::move(early));
    f.timeline.add(2010.0, std::move(late));

    f.config.t_start = 1985.0;
    f.config.t_end = 2070.0;
    f.config.dt = 0.125;

    const int y0 = 1985, y1 = 2070;
    f.drivers.oil_price = DriverSeries::constant(y0, y1, 60.0);
    f.drivers.tax_registration_fees = DriverSeries::constant(y0, y1, 1000.0);
    f.drivers.gdp_growth = DriverSeries::constant(y0, y1, 0.003);
    f.drivers.wtw_costs = DriverSeries::constant(y0, y1, 120.0);
    f.elasticity =
        ElasticityMap::defaults(role_index(f.technologies), f.catalog);
    return f;
}

inline EmissionFactors demo_emission_factors(const DemoFixture& f) {
    return EmissionFactors::constant(
        static_cast<int>(f.config.t_start),
        static_cast<int>(f.config.t_end), f.wtw_factors);
}

}  // namespace tisim
