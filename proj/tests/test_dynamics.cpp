#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tisim/dynamics.hpp"

using namespace tisim;

namespace {

SimulationProblem single_tech(double a, double b, double x0, double t0,
                              double t1, double dt) {
    ParameterBlock block(1, 1);
    block.a_at(0, 0) = a;
    block.b_at(0, 0) = b;
    SimulationProblem p;
    p.config.t_start = t0;
    p.config.t_end = t1;
    p.config.dt = dt;
    p.timeline = ParameterTimeline(std::move(block));
    p.init.x = {x0};
    p.init.t = t0;
    return p;
}

double logistic_exact(double a, double b, double x0, double t) {
    double k = a / b;
    return k / (1.0 + (k / x0 - 1.0) * std::exp(-a * t));
}

}  // namespace

TEST_CASE("logistic growth tracks the closed form", "[dynamics][logistic]") {
    const double a = 0.5, b = 0.01, x0 = 1.0;
    SimulationProblem p = single_tech(a, b, x0, 0.0, 20.0, 0.125);
    Trajectory traj = simulate(p);

    REQUIRE(traj.annual.size() == 21);
    for (int y = 0; y <= 20; ++y) {
        double exact = logistic_exact(a, b, x0, static_cast<double>(y));
        double got = traj.at_year(y, 0, 0);
        INFO("year " << y << " exact " << exact << " got " << got);
        CHECK(std::fabs(got - exact) <= 0.01 * exact);
    }
}

TEST_CASE("halving dt roughly halves the logistic error",
          "[dynamics][logistic][order]") {
    const double a = 0.5, b = 0.01, x0 = 1.0;
    auto max_error = [&](double dt) {
        Trajectory traj = simulate(single_tech(a, b, x0, 0.0, 20.0, dt));
        double worst = 0.0;
        for (int y = 1; y <= 20; ++y) {
            double exact = logistic_exact(a, b, x0, static_cast<double>(y));
            worst = std::max(worst,
                             std::fabs(traj.at_year(y, 0, 0) - exact));
        }
        return worst;
    };
    double coarse = max_error(0.125);
    double fine = max_error(0.0625);
    REQUIRE(fine > 0.0);
    double ratio = coarse / fine;
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
}

TEST_CASE("euler stepping matches a hand-rolled reference",
          "[dynamics][euler]") {
    ParameterBlock block(2, 1);
    block.a_at(0, 0) = 0.3;
    block.b_at(0, 0) = 0.002;
    block.a_at(1, 0) = 0.4;
    block.b_at(1, 0) = 0.001;
    block.c_at(0, 1, 0) = 0.0005;   // tech 1 harms tech 0
    block.c_at(1, 0, 0) = -0.0002;  // tech 0 benefits tech 1

    SimulationProblem p;
    p.config.t_start = 0.0;
    p.config.t_end = 3.0;
    p.config.dt = 0.25;
    p.timeline = ParameterTimeline(block);
    p.init.x = {10.0, 5.0};
    p.init.t = 0.0;
    Trajectory traj = simulate(p);

    double x0 = 10.0, x1 = 5.0;
    REQUIRE(traj.states.size() == 13);
    for (std::size_t k = 0; k < 12; ++k) {
        double inh0 = 0.002 * x0 + 0.0005 * x1;
        double inh1 = 0.001 * x1 + (-0.0002) * x0;
        double r0 = x0 * (0.3 - inh0);
        double r1 = x1 * (0.4 - inh1);
        x0 = x0 + 0.25 * r0;
        x1 = x1 + 0.25 * r1;
        CHECK_THAT(traj.states[k + 1].x[0],
                   Catch::Matchers::WithinRel(x0, 1e-14));
        CHECK_THAT(traj.states[k + 1].x[1],
                   Catch::Matchers::WithinRel(x1, 1e-14));
    }
}

TEST_CASE("levels clamp to zero instead of going negative",
          "[dynamics][clamp]") {
    SimulationProblem p = single_tech(-20.0, 0.0, 1.0, 0.0, 2.0, 0.125);
    Trajectory traj = simulate(p);
    // first step: 1 + 0.125 * 1 * (-20) = -1.5, clamped
    REQUIRE(traj.states.size() >= 2);
    CHECK(traj.states[1].x[0] == 0.0);
    CHECK(traj.annual.back().x[0] == 0.0);
}

TEST_CASE("a level crossing the blow-up bound raises a numerical error",
          "[dynamics][blowup]") {
    // negative b makes growth self-reinforcing: x' = x(1 + x)
    SimulationProblem p = single_tech(1.0, -1.0, 1.0, 0.0, 50.0, 0.125);
    REQUIRE_THROWS_AS(simulate(p), NumericalError);
    try {
        simulate(p);
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("bound") != std::string::npos);
    }
}

TEST_CASE("share renormalization keeps the share column on the simplex",
          "[dynamics][share]") {
    ParameterBlock block(2, 2);
    // sub 0: free-running level; sub 1: market share
    for (std::size_t i = 0; i < 2; ++i) {
        block.a_at(i, 0) = 0.2 + 0.1 * static_cast<double>(i);
        block.a_at(i, 1) = 0.3 - 0.2 * static_cast<double>(i);
        block.b_at(i, 1) = 0.05;
    }
    SimulationProblem p;
    p.config.t_start = 2000.0;
    p.config.t_end = 2020.0;
    p.config.dt = 0.125;
    p.timeline = ParameterTimeline(block);
    p.init.x = {5.0, 0.7, 3.0, 0.3};
    p.init.t = 2000.0;
    p.share_sub = 1;

    Trajectory traj = simulate(p);
    for (const auto& state : traj.states) {
        double sum = state.x[1] + state.x[3];
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }

    SECTION("disabling renormalization lets the sum drift") {
        p.config.renormalize_shares = false;
        Trajectory drift = simulate(p);
        double sum = drift.annual.back().x[1] + drift.annual.back().x[3];
        CHECK(std::fabs(sum - 1.0) > 1e-6);
    }
}

TEST_CASE("an all-zero share column stays zero instead of dividing by zero",
          "[dynamics][share]") {
    ParameterBlock block(2, 2);
    block.a_at(0, 0) = 0.2;
    block.a_at(1, 0) = 0.2;
    SimulationProblem p;
    p.config.t_start = 2000.0;
    p.config.t_end = 2005.0;
    p.config.dt = 0.25;
    p.timeline = ParameterTimeline(block);
    p.init.x = {5.0, 0.0, 3.0, 0.0};
    p.init.t = 2000.0;
    p.share_sub = 1;
    Trajectory traj = simulate(p);
    for (const auto& state : traj.annual) {
        CHECK(state.x[1] == 0.0);
        CHECK(state.x[3] == 0.0);
        CHECK(std::isfinite(state.x[0]));
    }
}

TEST_CASE("removing a technology reproduces the smaller system bitwise",
          "[dynamics][removal]") {
    // three technologies, two sub-dimensions, dense interactions
    ParameterBlock big(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t d = 0; d < 2; ++d) {
            big.a_at(i, d) = 0.1 + 0.05 * static_cast<double>(i + d);
            big.b_at(i, d) = 0.01 + 0.001 * static_cast<double>(i);
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j)
                    big.c_at(i, j, d) =
                        0.001 * static_cast<double>(i + 1) -
                        0.0005 * static_cast<double>(j);
        }

    ParameterBlock small(2, 2);
    const std::size_t keep[2] = {0, 2};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t d = 0; d < 2; ++d) {
            small.a_at(i, d) = big.a_at(keep[i], d);
            small.b_at(i, d) = big.b_at(keep[i], d);
            for (std::size_t j = 0; j < 2; ++j)
                if (i != j)
                    small.c_at(i, j, d) = big.c_at(keep[i], keep[j], d);
        }

    SimulationProblem pb;
    pb.config.t_start = 2000.0;
    pb.config.t_end = 2030.0;
    pb.config.dt = 0.125;
    pb.timeline = ParameterTimeline(big);
    pb.init.x = {4.0, 0.5, 9.0, 0.3, 2.0, 0.2};
    pb.init.t = 2000.0;
    pb.active = {1, 0, 1};
    pb.share_sub = 1;

    SimulationProblem ps;
    ps.config = pb.config;
    ps.timeline = ParameterTimeline(small);
    ps.init.x = {4.0, 0.5, 2.0, 0.2};
    ps.init.t = 2000.0;
    ps.share_sub = 1;

    Trajectory tb = simulate(pb);
    Trajectory ts = simulate(ps);
    REQUIRE(tb.states.size() == ts.states.size());
    for (std::size_t k = 0; k < tb.states.size(); ++k)
        for (std::size_t d = 0; d < 2; ++d) {
            CHECK(tb.states[k].x[0 * 2 + d] == ts.states[k].x[0 * 2 + d]);
            CHECK(tb.states[k].x[2 * 2 + d] == ts.states[k].x[1 * 2 + d]);
            // the removed technology contributes nothing and stays put
            CHECK(tb.states[k].x[1 * 2 + d] == pb.init.x[1 * 2 + d]);
        }
}

TEST_CASE("an identity hook leaves the trajectory bitwise unchanged",
          "[dynamics][hook]") {
    SimulationProblem p = single_tech(0.4, 0.01, 2.0, 2000.0, 2010.0, 0.125);
    Trajectory plain = simulate(p);
    p.hook = [](int, std::span<const SystemState>) { return YearScales{}; };
    Trajectory hooked = simulate(p);
    REQUIRE(plain.states.size() == hooked.states.size());
    for (std::size_t k = 0; k < plain.states.size(); ++k)
        CHECK(plain.states[k].x[0] == hooked.states[k].x[0]);
}

TEST_CASE("hook scales apply to every step of the hook's year",
          "[dynamics][hook]") {
    const double a = 0.4, dt = 0.125;
    SimulationProblem p = single_tech(a, 0.0, 1.0, 2000.0, 2002.0, dt);
    p.hook = [](int year, std::span<const SystemState>) {
        YearScales s;
        if (year == 2000) s.a_scale = {0.5};
        return s;
    };
    Trajectory traj = simulate(p);

    double x = 1.0;
    for (int k = 0; k < 8; ++k) x = x + dt * (x * (a * 0.5));
    CHECK_THAT(traj.at_year(2001, 0, 0),
               Catch::Matchers::WithinRel(x, 1e-12));
    for (int k = 0; k < 8; ++k) x = x + dt * (x * a);
    CHECK_THAT(traj.at_year(2002, 0, 0),
               Catch::Matchers::WithinRel(x, 1e-12));
}

TEST_CASE("the hook sees annual samples up to and including its own year",
          "[dynamics][hook]") {
    SimulationProblem p = single_tech(0.1, 0.0, 1.0, 2000.0, 2003.0, 0.25);
    std::vector<std::pair<int, std::size_t>> calls;
    p.hook = [&](int year, std::span<const SystemState> annual) {
        calls.emplace_back(year, annual.size());
        return YearScales{};
    };
    Trajectory traj = simulate(p);
    REQUIRE(calls.size() == 3);  // no call at the final sample
    CHECK(calls[0] == std::make_pair(2000, std::size_t{1}));
    CHECK(calls[1] == std::make_pair(2001, std::size_t{2}));
    CHECK(calls[2] == std::make_pair(2002, std::size_t{3}));
    CHECK(traj.annual.size() == 4);
}

TEST_CASE("a hook returning wrongly sized scales is rejected",
          "[dynamics][hook][validation]") {
    SimulationProblem p = single_tech(0.1, 0.0, 1.0, 2000.0, 2002.0, 0.25);
    p.hook = [](int, std::span<const SystemState>) {
        YearScales s;
        s.a_scale = {1.0, 1.0};  // system has one level, not two
        return s;
    };
    REQUIRE_THROWS_AS(simulate(p), ValidationError);
}

TEST_CASE("configuration problems are all reported at once",
          "[dynamics][validation]") {
    SimulationProblem p = single_tech(0.1, 0.0, 1.0, 1985.5, 2000.0, 0.3);
    try {
        simulate(p);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("1/dt") != std::string::npos);
        CHECK(msg.find("calendar years") != std::string::npos);
        CHECK(e.issues().size() >= 2);
    }
}

TEST_CASE("initial state is validated", "[dynamics][validation]") {
    SimulationProblem p = single_tech(0.1, 0.0, 1.0, 2000.0, 2002.0, 0.25);
    SECTION("wrong length") {
        p.init.x = {1.0, 2.0};
        REQUIRE_THROWS_AS(simulate(p), ValidationError);
    }
    SECTION("negative level") {
        p.init.x = {-1.0};
        REQUIRE_THROWS_AS(simulate(p), ValidationError);
    }
    SECTION("initial time must match the horizon start") {
        p.init.t = 1999.0;
        REQUIRE_THROWS_AS(simulate(p), ValidationError);
    }
}

TEST_CASE("parameter blocks switch at their start year",
          "[dynamics][timeline]") {
    ParameterBlock growing(1, 1);
    growing.a_at(0, 0) = 0.1;
    ParameterBlock frozen(1, 1);  // a = b = c = 0 halts all motion

    SimulationProblem p;
    p.config.t_start = 2000.0;
    p.config.t_end = 2004.0;
    p.config.dt = 0.125;
    p.timeline.add(2000.0, growing);
    p.timeline.add(2002.0, frozen);
    p.init.x = {1.0};
    p.init.t = 2000.0;

    Trajectory traj = simulate(p);
    CHECK(traj.at_year(2001, 0, 0) > traj.at_year(2000, 0, 0));
    CHECK(traj.at_year(2002, 0, 0) > traj.at_year(2001, 0, 0));
    CHECK(traj.at_year(2003, 0, 0) == traj.at_year(2002, 0, 0));
    CHECK(traj.at_year(2004, 0, 0) == traj.at_year(2002, 0, 0));
}

TEST_CASE("annual-only recording matches the annual samples of a full run",
          "[dynamics][record]") {
    SimulationProblem p = single_tech(0.3, 0.01, 1.0, 2000.0, 2010.0, 0.125);
    p.record = RecordMode::full;
    Trajectory full = simulate(p);
    p.record = RecordMode::annual_only;
    Trajectory annual = simulate(p);
    CHECK(annual.states.empty());
    REQUIRE(annual.annual.size() == full.annual.size());
    for (std::size_t k = 0; k < full.annual.size(); ++k)
        CHECK(annual.annual[k].x[0] == full.annual[k].x[0]);
}

TEST_CASE("nonzero self-interaction entries are rejected",
          "[dynamics][validation]") {
    ParameterBlock block(2, 1);
    block.c_at(0, 0, 0) = 0.1;
    auto issues = block.validate();
    REQUIRE_FALSE(issues.empty());
    CHECK(issues.front().find("self-interaction") != std::string::npos);
}
