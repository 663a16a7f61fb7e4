#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tisim/modes.hpp"

using namespace tisim;

TEST_CASE("every ordered sign pair maps to its interaction mode",
          "[modes][classifier]") {
    struct Case {
        double c_ij, c_ji;
        Mode mode;
        PairMember beneficiary, victim;
    };
    // positive coefficient harms the technology whose equation holds it
    const Case cases[] = {
        {+1.0, +1.0, Mode::competition, PairMember::none, PairMember::none},
        {-1.0, -1.0, Mode::symbiosis, PairMember::none, PairMember::none},
        {0.0, 0.0, Mode::neutralism, PairMember::none, PairMember::none},
        {-1.0, +1.0, Mode::parasitism, PairMember::first, PairMember::second},
        {+1.0, -1.0, Mode::parasitism, PairMember::second, PairMember::first},
        {-1.0, 0.0, Mode::commensalism, PairMember::first, PairMember::none},
        {0.0, -1.0, Mode::commensalism, PairMember::second, PairMember::none},
        {+1.0, 0.0, Mode::amensalism, PairMember::none, PairMember::first},
        {0.0, +1.0, Mode::amensalism, PairMember::none, PairMember::second},
    };
    for (const auto& c : cases) {
        ModeLabel label = classify_pair(c.c_ij, c.c_ji);
        INFO("pair (" << c.c_ij << ", " << c.c_ji << ")");
        CHECK(label.mode == c.mode);
        CHECK(label.beneficiary == c.beneficiary);
        CHECK(label.victim == c.victim);
    }
}

TEST_CASE("coefficients inside the epsilon band count as zero",
          "[modes][classifier][epsilon]") {
    EpsilonPolicy eps;
    eps.epsilon = 0.01;
    CHECK(classify_pair(0.005, -0.005, eps).mode == Mode::neutralism);
    CHECK(classify_pair(0.005, 0.02, eps).mode == Mode::amensalism);
    CHECK(classify_pair(-0.02, 0.005, eps).mode == Mode::commensalism);
    // exactly at the band edge still counts as zero
    CHECK(classify_pair(0.01, -0.01, eps).mode == Mode::neutralism);
}

TEST_CASE("the relative fraction widens the band by the window's median "
          "interaction magnitude", "[modes][classifier][epsilon]") {
    WindowBlock w;
    w.window_start = 2000;
    w.window_end = 2004;
    w.block = ParameterBlock(2, 1);
    w.block.c_at(0, 1, 0) = 0.04;
    w.block.c_at(1, 0, 0) = -0.10;
    // median |c| over off-diagonal entries = (0.04 + 0.10) / 2 = 0.07

    EpsilonPolicy policy;
    policy.epsilon = 1e-6;
    policy.relative_fraction = 1.0;  // band = 0.07

    ModeSeries strict = mode_series(std::vector<WindowBlock>{w});
    REQUIRE(strict.records.size() == 1);
    CHECK(strict.records[0].label.mode == Mode::parasitism);

    ModeSeries widened = mode_series(std::vector<WindowBlock>{w}, policy);
    REQUIRE(widened.records.size() == 1);
    // 0.04 falls inside the widened band, -0.10 stays outside
    CHECK(widened.records[0].label.mode == Mode::commensalism);
    CHECK(widened.records[0].label.beneficiary == PairMember::second);
}

TEST_CASE("mode series covers every pair, window, and sub-dimension",
          "[modes][series]") {
    WindowBlock w1;
    w1.window_start = 2000;
    w1.window_end = 2004;
    w1.block = ParameterBlock(3, 2);
    w1.block.c_at(0, 1, 0) = 0.5;
    w1.block.c_at(1, 0, 0) = 0.5;   // competition in sub 0
    w1.block.c_at(0, 1, 1) = -0.5;
    w1.block.c_at(1, 0, 1) = 0.5;   // parasitism in sub 1, first benefits

    WindowBlock w2 = w1;
    w2.window_start = 2005;
    w2.window_end = 2009;
    w2.available = false;

    std::vector<WindowBlock> windows = {w1, w2};
    ModeSeries series = mode_series(windows);

    // available window: 3 pairs x 2 subs; gap window: a single record
    REQUIRE(series.records.size() == 3 * 2 + 1);

    const ModeRecord& first = series.records.front();
    CHECK(first.window_start == 2000);
    CHECK(first.tech_i == 0);
    CHECK(first.tech_j == 1);
    CHECK(first.scope_sub == 0);
    CHECK(first.label.mode == Mode::competition);

    const ModeRecord& second = series.records[1];
    CHECK(second.scope_sub == 1);
    CHECK(second.label.mode == Mode::parasitism);
    CHECK(second.label.beneficiary == PairMember::first);

    // untouched pairs are neutral
    CHECK(series.records[2].label.mode == Mode::neutralism);

    const ModeRecord& gap = series.records.back();
    CHECK(gap.gap);
    CHECK(gap.window_start == 2005);
}

namespace {

/// Fixture for externality aggregation: two technologies, two
/// sub-dimensions, constant levels so time averages equal the per-year
/// values.
struct SideFixture {
    DimensionCatalog catalog{DimensionCatalog::builtin()};
    Trajectory traj;
    ParameterBlock block;
    std::size_t d0 = 0, d1 = 1;  // publications, patents: technology side

    SideFixture() : block(2, 16) {
        traj.n_tech = 2;
        traj.n_sub = 16;
        for (int y = 2000; y <= 2004; ++y) {
            SystemState s;
            s.t = static_cast<double>(y);
            s.x.assign(2 * 16, 0.0);
            s.x[0 * 16 + d0] = 2.0;   // tech 0, publications
            s.x[1 * 16 + d0] = 3.0;   // tech 1, publications
            s.x[0 * 16 + d1] = 4.0;
            s.x[1 * 16 + d1] = 5.0;
            traj.annual.push_back(std::move(s));
        }
    }
};

}  // namespace

TEST_CASE("side externalities average the realized interaction terms",
          "[modes][externality]") {
    SideFixture f;
    f.block.c_at(0, 1, f.d0) = 0.1;    // tech 1 harms tech 0 via d0
    f.block.c_at(1, 0, f.d0) = -0.2;   // tech 0 helps tech 1 via d0
    f.block.c_at(0, 1, f.d1) = -0.05;  // tech 1 helps tech 0 via d1
    SideGrouping grouping(f.catalog);

    auto [e0, e1] = aggregate_side_externality(
        f.traj, f.block, grouping, Side::technology, 0, 1, 2000, 2004);

    // constant levels: E = sum_d  -c * x_i * x_j
    double expect_e0 = -(0.1) * 2.0 * 3.0 + -(-0.05) * 4.0 * 5.0;
    double expect_e1 = -(-0.2) * 2.0 * 3.0;
    CHECK_THAT(e0, Catch::Matchers::WithinRel(expect_e0, 1e-12));
    CHECK_THAT(e1, Catch::Matchers::WithinRel(expect_e1, 1e-12));

    SECTION("windows outside the trajectory are rejected") {
        REQUIRE_THROWS_AS(
            aggregate_side_externality(f.traj, f.block, grouping,
                                       Side::technology, 0, 1, 1999, 2004),
            ValidationError);
        REQUIRE_THROWS_AS(
            aggregate_side_externality(f.traj, f.block, grouping,
                                       Side::technology, 0, 1, 2004, 2000),
            ValidationError);
    }
}

TEST_CASE("side mode labels flip externality signs back into the "
          "coefficient convention", "[modes][externality]") {
    SideFixture f;
    // tech 0 net-benefits (positive E_0), tech 1 net-suffers
    f.block.c_at(0, 1, f.d0) = -0.2;
    f.block.c_at(1, 0, f.d0) = 0.1;
    SideGrouping grouping(f.catalog);

    WindowBlock w;
    w.window_start = 2000;
    w.window_end = 2004;
    w.block = f.block;
    std::vector<WindowBlock> windows = {w};

    ModeSeries series = side_mode_series(windows, f.traj, grouping,
                                         SideAggregation::externality_sum);
    // one pair, two sides
    REQUIRE(series.records.size() == 2);
    const ModeRecord& tech = series.records[0];
    REQUIRE(tech.side_scope);
    CHECK(tech.scope_side == Side::technology);
    CHECK(tech.label.mode == Mode::parasitism);
    CHECK(tech.label.beneficiary == PairMember::first);
    CHECK(tech.label.victim == PairMember::second);

    // nothing interacts on the market side
    const ModeRecord& market = series.records[1];
    CHECK(market.scope_side == Side::market);
    CHECK(market.label.mode == Mode::neutralism);

    SECTION("coefficient aggregation sums the raw entries instead") {
        ModeSeries alt = side_mode_series(windows, f.traj, grouping,
                                          SideAggregation::coefficient_sum);
        REQUIRE(alt.records.size() == 2);
        // sums: c_01 = -0.2 (benefit), c_10 = 0.1 (harm): same parasitism
        CHECK(alt.records[0].label.mode == Mode::parasitism);
        CHECK(alt.records[0].label.beneficiary == PairMember::first);
    }
}

TEST_CASE("externality aggregation and coefficient aggregation can "
          "disagree when levels are lopsided", "[modes][externality]") {
    SideFixture f;
    // two opposing effects on tech 0; the stronger coefficient acts on the
    // weaker level product, so realized externality flips the call
    f.block.c_at(0, 1, f.d0) = 0.3;    // harm through levels 2 * 3 = 6
    f.block.c_at(0, 1, f.d1) = -0.12;  // help through levels 4 * 5 = 20
    SideGrouping grouping(f.catalog);

    // coefficient sum: 0.3 - 0.12 = +0.18, reads as harm
    double coeff_sum = 0.3 - 0.12;
    CHECK(classify_pair(coeff_sum, 0.0).mode == Mode::amensalism);

    // realized externality: -0.3 * 6 + 0.12 * 20 = +0.6, net benefit
    auto [e0, e1] = aggregate_side_externality(
        f.traj, f.block, grouping, Side::technology, 0, 1, 2000, 2004);
    CHECK_THAT(e0, Catch::Matchers::WithinRel(0.6, 1e-12));
    CHECK(e1 == 0.0);
    CHECK(classify_pair(-e0, -e1).mode == Mode::commensalism);
}

TEST_CASE("gap windows survive into side-scoped series", "[modes][series]") {
    SideFixture f;
    WindowBlock gap;
    gap.window_start = 2000;
    gap.window_end = 2004;
    gap.available = false;
    SideGrouping grouping(f.catalog);
    std::vector<WindowBlock> windows = {gap};
    ModeSeries series = side_mode_series(windows, f.traj, grouping,
                                         SideAggregation::externality_sum);
    REQUIRE(series.records.size() == 1);
    CHECK(series.records[0].gap);
    CHECK(series.records[0].side_scope);
}
