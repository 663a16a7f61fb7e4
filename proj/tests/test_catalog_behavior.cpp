#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "tisim/behavior.hpp"
#include "tisim/catalog.hpp"
#include "tisim/demo.hpp"
#include "tisim/scenario.hpp"

using namespace tisim;

TEST_CASE("the built-in catalog partitions sixteen indicators over six "
          "dimensions", "[catalog]") {
    DimensionCatalog catalog = DimensionCatalog::builtin();
    CHECK(catalog.name() == "powertrain-16");
    REQUIRE(catalog.size() == 16);

    std::set<std::string> dims;
    std::set<std::string> names;
    for (const auto& s : catalog.sub_dimensions()) {
        dims.insert(s.dimension);
        names.insert(s.name);
    }
    CHECK(dims.size() == 6);
    CHECK(names.size() == 16);  // sub-dimension names are unique

    SECTION("exactly one sub-dimension is simplex-constrained") {
        std::size_t share = catalog.share_index();
        REQUIRE(share != DimensionCatalog::npos);
        CHECK(catalog.sub_dimensions()[share].name == "market-share");
        std::size_t count = 0;
        for (const auto& s : catalog.sub_dimensions())
            if (s.is_share) ++count;
        CHECK(count == 1);
    }

    SECTION("index_of inverts names") {
        for (std::size_t i = 0; i < catalog.size(); ++i)
            CHECK(catalog.index_of(catalog.sub_dimensions()[i].name) == i);
        CHECK(catalog.index_of("no-such-indicator") ==
              DimensionCatalog::npos);
    }
}

TEST_CASE("side grouping starts from defaults and only moves assignable "
          "indicators", "[catalog][sides]") {
    DimensionCatalog catalog = DimensionCatalog::builtin();
    SideGrouping grouping(catalog);

    std::size_t tech_side = grouping.indices_on(Side::technology).size();
    std::size_t market_side = grouping.indices_on(Side::market).size();
    CHECK(tech_side + market_side == 16);
    CHECK(tech_side == 9);
    CHECK(market_side == 7);

    SECTION("assignable indicators can switch sides") {
        grouping.assign(catalog, "laws-regulations", Side::technology);
        CHECK(grouping.side_of(catalog.index_of("laws-regulations")) ==
              Side::technology);
        CHECK(grouping.indices_on(Side::technology).size() == 10);
    }

    SECTION("fixed indicators cannot") {
        REQUIRE_THROWS_AS(
            grouping.assign(catalog, "market-share", Side::technology),
            ValidationError);
    }

    SECTION("unknown names are rejected") {
        REQUIRE_THROWS_AS(
            grouping.assign(catalog, "goodwill", Side::market),
            ValidationError);
    }

    SECTION("re-stating a fixed default is harmless") {
        grouping.assign(catalog, "market-share", Side::market);
        CHECK(grouping.side_of(catalog.index_of("market-share")) ==
              Side::market);
    }
}

TEST_CASE("side sums add exactly the indicators on the requested side",
          "[behavior]") {
    DimensionCatalog catalog = DimensionCatalog::builtin();
    SideGrouping grouping(catalog);
    ParameterBlock block(1, catalog.size());
    double expect_a_tech = 0.0, expect_b_tech = 0.0;
    double expect_a_market = 0.0, expect_b_market = 0.0;
    for (std::size_t d = 0; d < catalog.size(); ++d) {
        block.a_at(0, d) = 0.01 * static_cast<double>(d + 1);
        block.b_at(0, d) = d % 2 == 0 ? 0.002 : -0.001;
        if (grouping.side_of(d) == Side::technology) {
            expect_a_tech += block.a_at(0, d);
            expect_b_tech += block.b_at(0, d);
        } else {
            expect_a_market += block.a_at(0, d);
            expect_b_market += block.b_at(0, d);
        }
    }
    auto [at, bt] = side_sum(block, grouping, Side::technology, 0);
    auto [am, bm] = side_sum(block, grouping, Side::market, 0);
    CHECK(at == expect_a_tech);
    CHECK(bt == expect_b_tech);
    CHECK(am == expect_a_market);
    CHECK(bm == expect_b_market);
}

TEST_CASE("behavior labels follow the signs of the side sums",
          "[behavior]") {
    auto label = [](double a, double b) { return classify_behavior(a, b); };

    CHECK(label(0.5, 0.2).creativity == Creativity::creative);
    CHECK(label(0.5, 0.2).orientation == Orientation::exploitative);
    CHECK(label(-0.5, -0.2).creativity == Creativity::uncreative);
    CHECK(label(-0.5, -0.2).orientation == Orientation::explorative);
    CHECK(label(0.0, 0.0).creativity == Creativity::neutral);
    CHECK(label(0.0, 0.0).orientation == Orientation::neutral);

    SECTION("the epsilon band makes small sums neutral") {
        EpsilonPolicy eps;
        eps.epsilon = 0.1;
        BehaviorLabel l = classify_behavior(0.05, -0.05, eps);
        CHECK(l.creativity == Creativity::neutral);
        CHECK(l.orientation == Orientation::neutral);
        l = classify_behavior(0.15, -0.15, eps);
        CHECK(l.creativity == Creativity::creative);
        CHECK(l.orientation == Orientation::explorative);
    }

    SECTION("sums are carried through for reporting") {
        BehaviorLabel l = classify_behavior(0.25, -0.125);
        CHECK(l.sum_a == 0.25);
        CHECK(l.sum_b == -0.125);
    }
}

TEST_CASE("market size compounds the gdp growth driver year over year",
          "[behavior][market]") {
    ExogenousDrivers drivers;
    drivers.gdp_growth = DriverSeries::constant(2000, 2004, 0.02);
    MarketSizeSeries market = make_market_size(drivers, 1000.0, 2000, 2004);
    CHECK(market.at(2000) == 1000.0);
    CHECK_THAT(market.at(2001), Catch::Matchers::WithinRel(1020.0, 1e-12));
    CHECK_THAT(market.at(2004),
               Catch::Matchers::WithinRel(1000.0 * std::pow(1.02, 4.0),
                                          1e-12));

    SECTION("a gdp multiplier scales the growth rate, not the base") {
        drivers.gdp_growth.multiplier = 2.0;  // 4% effective growth
        MarketSizeSeries scaled =
            make_market_size(drivers, 1000.0, 2000, 2004);
        CHECK(scaled.at(2000) == 1000.0);
        CHECK_THAT(scaled.at(2001),
                   Catch::Matchers::WithinRel(1040.0, 1e-12));
    }
}

TEST_CASE("annual sales split the market by the share column",
          "[behavior][sales]") {
    // two technologies, two sub-dimensions, share in column 1
    Trajectory traj;
    traj.n_tech = 2;
    traj.n_sub = 2;
    traj.annual = {
        {{5.0, 0.75, 3.0, 0.25}, 2000.0},
        {{6.0, 0.6, 4.0, 0.4}, 2001.0},
    };
    ExogenousDrivers drivers;
    drivers.gdp_growth = DriverSeries::constant(2000, 2001, 0.0);
    MarketSizeSeries market = make_market_size(drivers, 200.0, 2000, 2001);
    SalesTable sales = sales_from_share(traj, 1, market);
    CHECK(sales.at(2000, 0) == 150.0);
    CHECK(sales.at(2000, 1) == 50.0);
    CHECK(sales.at(2001, 0) == 120.0);
    CHECK(sales.at(2001, 1) == 80.0);
}

TEST_CASE("role lookup requires exactly one technology per role",
          "[catalog][roles]") {
    std::vector<Technology> ok = {{"ICEV", TechnologyRole::incumbent},
                                  {"HEV", TechnologyRole::hybrid},
                                  {"BEV", TechnologyRole::emerging}};
    RoleIndex roles = role_index(ok);
    CHECK(roles.incumbent == 0);
    CHECK(roles.hybrid == 1);
    CHECK(roles.emerging == 2);
    CHECK(roles.of(TechnologyRole::emerging) == 2);

    std::vector<Technology> two_incumbents = {
        {"A", TechnologyRole::incumbent},
        {"B", TechnologyRole::incumbent},
        {"C", TechnologyRole::emerging}};
    REQUIRE_THROWS_AS(role_index(two_incumbents), ValidationError);

    std::vector<Technology> missing = {{"A", TechnologyRole::incumbent},
                                       {"B", TechnologyRole::hybrid}};
    REQUIRE_THROWS_AS(role_index(missing), ValidationError);
}

TEST_CASE("the demo system simulates cleanly over its whole horizon",
          "[demo]") {
    DemoFixture f = demo_fixture();
    SimulationProblem p;
    p.config = f.config;
    p.timeline = f.timeline;
    p.init = f.init;
    p.share_sub = f.share_sub;
    p.record = RecordMode::annual_only;
    Trajectory traj = simulate(p);
    REQUIRE(traj.annual.size() == 86);
    for (const auto& state : traj.annual) {
        double sum = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            sum += state.x[i * f.catalog.size() + f.share_sub];
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
        for (double v : state.x) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}
