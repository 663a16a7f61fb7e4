#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tisim/common.hpp"

namespace tisim {

/// Growth, self-limitation, and cross-technology interaction rates for one
/// calibration window. Layout is flat row-major: a and b are indexed
/// [tech * n_sub + sub]; the interaction tensor c is indexed
/// [(affected * n_tech + affecting) * n_sub + sub] with zero diagonal.
/// Positive c harms the affected technology, negative c benefits it.
struct ParameterBlock {
    std::size_t n_tech = 0;
    std::size_t n_sub = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;

    ParameterBlock() = default;
    ParameterBlock(std::size_t techs, std::size_t subs)
        : n_tech(techs),
          n_sub(subs),
          a(techs * subs, 0.0),
          b(techs * subs, 0.0),
          c(techs * techs * subs, 0.0) {}

    std::size_t ts(std::size_t tech, std::size_t sub) const {
        return tech * n_sub + sub;
    }
    std::size_t cix(std::size_t affected, std::size_t affecting,
                    std::size_t sub) const {
        return (affected * n_tech + affecting) * n_sub + sub;
    }

    double& a_at(std::size_t tech, std::size_t sub) { return a[ts(tech, sub)]; }
    double a_at(std::size_t tech, std::size_t sub) const {
        return a[ts(tech, sub)];
    }
    double& b_at(std::size_t tech, std::size_t sub) { return b[ts(tech, sub)]; }
    double b_at(std::size_t tech, std::size_t sub) const {
        return b[ts(tech, sub)];
    }
    double& c_at(std::size_t affected, std::size_t affecting, std::size_t sub) {
        return c[cix(affected, affecting, sub)];
    }
    double c_at(std::size_t affected, std::size_t affecting,
                std::size_t sub) const {
        return c[cix(affected, affecting, sub)];
    }

    /// Collects every structural problem: size mismatches, non-finite
    /// entries (named by index), nonzero diagonal interaction entries.
    std::vector<std::string> validate() const {
        std::vector<std::string> issues;
        if (a.size() != n_tech * n_sub || b.size() != n_tech * n_sub ||
            c.size() != n_tech * n_tech * n_sub) {
            issues.push_back("parameter block storage does not match " +
                             std::to_string(n_tech) + " technologies x " +
                             std::to_string(n_sub) + " sub-dimensions");
            return issues;
        }
        for (std::size_t i = 0; i < n_tech; ++i)
            for (std::size_t d = 0; d < n_sub; ++d) {
                if (!std::isfinite(a_at(i, d)))
                    issues.push_back("non-finite a at technology " +
                                     std::to_string(i) + ", sub-dimension " +
                                     std::to_string(d));
                if (!std::isfinite(b_at(i, d)))
                    issues.push_back("non-finite b at technology " +
                                     std::to_string(i) + ", sub-dimension " +
                                     std::to_string(d));
            }
        for (std::size_t i = 0; i < n_tech; ++i)
            for (std::size_t j = 0; j < n_tech; ++j)
                for (std::size_t d = 0; d < n_sub; ++d) {
                    double v = c_at(i, j, d);
                    if (!std::isfinite(v))
                        issues.push_back(
                            "non-finite c at affected " + std::to_string(i) +
                            ", affecting " + std::to_string(j) +
                            ", sub-dimension " + std::to_string(d));
                    else if (i == j && v != 0.0)
                        issues.push_back(
                            "nonzero self-interaction at technology " +
                            std::to_string(i) + ", sub-dimension " +
                            std::to_string(d));
                }
        return issues;
    }
};

/// Piecewise-constant parameter schedule: block k applies from its start
/// year until the next block's start year.
class ParameterTimeline {
public:
    struct Entry {
        double start;
        ParameterBlock block;
    };

    ParameterTimeline() = default;
    explicit ParameterTimeline(ParameterBlock constant_block) {
        add(-1e300, std::move(constant_block));
    }

    void add(double start, ParameterBlock block) {
        entries_.push_back({start, std::move(block)});
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    std::vector<Entry>& entries() noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    /// Block in force at time t (last entry with start <= t).
    const ParameterBlock& block_at(double t) const {
        const ParameterBlock* hit = nullptr;
        for (const auto& e : entries_) {
            if (e.start <= t) hit = &e.block;
        }
        if (!hit)
            throw ValidationError("no parameter block covers time " +
                                  format_number(t));
        return *hit;
    }

    std::vector<std::string> validate(double t_start) const {
        std::vector<std::string> issues;
        if (entries_.empty()) {
            issues.push_back("parameter timeline is empty");
            return issues;
        }
        if (entries_.front().start > t_start)
            issues.push_back("first parameter block starts at " +
                             format_number(entries_.front().start) +
                             ", after simulation start " +
                             format_number(t_start));
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            if (k > 0 && entries_[k].start <= entries_[k - 1].start)
                issues.push_back("parameter block starts are not strictly "
                                 "increasing at entry " + std::to_string(k));
            if (entries_[k].block.n_tech != entries_.front().block.n_tech ||
                entries_[k].block.n_sub != entries_.front().block.n_sub)
                issues.push_back("parameter block " + std::to_string(k) +
                                 " has a different shape than the first");
            auto sub = entries_[k].block.validate();
            for (auto& s : sub)
                issues.push_back("block " + std::to_string(k) + ": " + s);
        }
        return issues;
    }

private:
    std::vector<Entry> entries_;
};

/// Levels of every (technology, sub-dimension) pair at one time point,
/// indexed [tech * n_sub + sub] like ParameterBlock.
struct SystemState {
    std::vector<double> x;
    double t = 0.0;
};

struct SimulationConfig {
    double t_start = 1985.0;
    double t_end = 2070.0;
    double dt = 0.125;
    bool renormalize_shares = true;
    double blow_up_bound = 1e12;

    std::vector<std::string> validate() const {
        std::vector<std::string> issues;
        if (!(t_start < t_end))
            issues.push_back("t_start must be before t_end");
        if (!(dt > 0.0)) issues.push_back("dt must be positive");
        if (dt > 0.0 && !nearly_integer((t_end - t_start) / dt))
            issues.push_back("(t_end - t_start)/dt must be an integer "
                             "number of steps");
        if (dt > 0.0 && !nearly_integer(1.0 / dt))
            issues.push_back("1/dt must be an integer so annual sampling "
                             "lands on calendar years");
        if (!nearly_integer(t_start) || !nearly_integer(t_end))
            issues.push_back("t_start and t_end must be calendar years");
        if (!(blow_up_bound > 0.0))
            issues.push_back("blow_up_bound must be positive");
        return issues;
    }

    std::size_t steps_per_year() const {
        return static_cast<std::size_t>(std::llround(1.0 / dt));
    }
    std::size_t total_steps() const {
        return static_cast<std::size_t>(std::llround((t_end - t_start) / dt));
    }
};

/// Per-year multiplicative modifiers a runtime hook may apply to growth
/// and self-decline rates. An empty vector means identity (every scale 1).
struct YearScales {
    std::vector<double> a_scale;
    std::vector<double> b_scale;
};

/// Runtime hook consulted once per calendar year with the annual states
/// recorded so far (most recent last). Returned scales apply to every
/// integration step of that year.
using ScenarioHook =
    std::function<YearScales(int year, std::span<const SystemState> annual)>;

enum class RecordMode { full, annual_only };

struct Trajectory {
    std::size_t n_tech = 0;
    std::size_t n_sub = 0;
    std::vector<SystemState> states;  // every step; empty in annual_only mode
    std::vector<SystemState> annual;  // one state per calendar year, inclusive

    int year_start() const {
        return static_cast<int>(std::llround(annual.front().t));
    }
    int year_end() const {
        return static_cast<int>(std::llround(annual.back().t));
    }

    /// Level at an integer year from the annual downsample.
    double at_year(int year, std::size_t tech, std::size_t sub) const {
        std::size_t idx = static_cast<std::size_t>(year - year_start());
        return annual.at(idx).x.at(tech * n_sub + sub);
    }
};

/// One full simulation: dynamics shape, schedule, initial state, active
/// technologies, and optional runtime hook.
struct SimulationProblem {
    SimulationConfig config;
    ParameterTimeline timeline;
    SystemState init;
    std::vector<char> active;          // per technology; empty = all active
    std::size_t share_sub = kNoShare;  // renormalized sub-dimension index
    ScenarioHook hook;                 // may be empty
    RecordMode record = RecordMode::full;

    static constexpr std::size_t kNoShare = static_cast<std::size_t>(-1);
};

namespace detail {

inline bool tech_active(std::span<const char> active, std::size_t i) {
    return active.empty() || active[i] != 0;
}

/// dX[i,d]/dt = X·(a_eff − b·X − Σ_{j≠i} C[i,j,d]·X[j,d]) with the
/// interaction subtracted; inactive technologies get rate 0 and are skipped
/// in every sum so removal leaves the survivors' arithmetic untouched.
inline void derivative_into(std::span<const double> x, const ParameterBlock& p,
                            std::span<const char> active,
                            std::span<const double> a_scale,
                            std::span<const double> b_scale,
                            std::span<double> out) {
    for (std::size_t i = 0; i < p.n_tech; ++i) {
        if (!tech_active(active, i)) {
            for (std::size_t d = 0; d < p.n_sub; ++d) out[i * p.n_sub + d] = 0.0;
            continue;
        }
        for (std::size_t d = 0; d < p.n_sub; ++d) {
            std::size_t id = i * p.n_sub + d;
            double xi = x[id];
            double a = p.a[id];
            if (!a_scale.empty()) a *= a_scale[id];
            double b = p.b[id];
            if (!b_scale.empty()) b *= b_scale[id];
            double inhibition = b * xi;
            for (std::size_t j = 0; j < p.n_tech; ++j) {
                if (j == i || !tech_active(active, j)) continue;
                inhibition += p.c[(i * p.n_tech + j) * p.n_sub + d] *
                              x[j * p.n_sub + d];
            }
            out[id] = xi * (a - inhibition);
        }
    }
}

/// Proportionally rescales active technologies' share components to unit
/// sum; a zero sum is left untouched.
inline void renormalize_share(std::span<double> x, std::size_t n_tech,
                              std::size_t n_sub, std::size_t share_sub,
                              std::span<const char> active) {
    if (share_sub == SimulationProblem::kNoShare) return;
    double sum = 0.0;
    for (std::size_t i = 0; i < n_tech; ++i)
        if (tech_active(active, i)) sum += x[i * n_sub + share_sub];
    if (sum == 0.0) return;
    for (std::size_t i = 0; i < n_tech; ++i)
        if (tech_active(active, i)) x[i * n_sub + share_sub] /= sum;
}

}  // namespace detail

/// Instantaneous rates for every (technology, sub-dimension) pair.
inline std::vector<double> derivative(const SystemState& state,
                                      const ParameterBlock& params,
                                      std::span<const char> active = {},
                                      std::span<const double> a_scale = {},
                                      std::span<const double> b_scale = {}) {
    auto issues = params.validate();
    if (state.x.size() != params.n_tech * params.n_sub)
        issues.push_back("state has " + std::to_string(state.x.size()) +
                         " levels, parameters expect " +
                         std::to_string(params.n_tech * params.n_sub));
    for (std::size_t k = 0; k < state.x.size(); ++k)
        if (!std::isfinite(state.x[k]))
            issues.push_back("non-finite state level at index " +
                             std::to_string(k));
    if (!issues.empty()) throw ValidationError(std::move(issues));

    std::vector<double> out(state.x.size(), 0.0);
    detail::derivative_into(state.x, params, active, a_scale, b_scale, out);
    return out;
}

struct StepOptions {
    std::span<const char> active = {};
    std::span<const double> a_scale = {};
    std::span<const double> b_scale = {};
    std::size_t share_sub = SimulationProblem::kNoShare;
    bool renormalize_shares = true;
};

/// One explicit Euler step with clamp-to-zero and share renormalization.
inline SystemState step_euler(const SystemState& state,
                              const ParameterBlock& params, double dt,
                              const StepOptions& opt = {}) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    std::vector<double> rate = derivative(state, params, opt.active,
                                          opt.a_scale, opt.b_scale);
    SystemState next;
    next.t = state.t + dt;
    next.x.resize(state.x.size());
    for (std::size_t k = 0; k < state.x.size(); ++k) {
        double v = state.x[k] + dt * rate[k];
        next.x[k] = v < 0.0 ? 0.0 : v;
    }
    if (opt.renormalize_shares)
        detail::renormalize_share(next.x, params.n_tech, params.n_sub,
                                  opt.share_sub, opt.active);
    return next;
}

/// Integrates the full horizon. Deterministic: identical problems produce
/// bit-identical trajectories.
inline Trajectory simulate(const SimulationProblem& problem) {
    const SimulationConfig& cfg = problem.config;
    std::vector<std::string> issues = cfg.validate();
    {
        auto sub = problem.timeline.validate(cfg.t_start);
        issues.insert(issues.end(), sub.begin(), sub.end());
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));

    const std::size_t n_tech = problem.timeline.entries().front().block.n_tech;
    const std::size_t n_sub = problem.timeline.entries().front().block.n_sub;
    if (problem.init.x.size() != n_tech * n_sub)
        throw ValidationError("initial state has " +
                              std::to_string(problem.init.x.size()) +
                              " levels, parameters expect " +
                              std::to_string(n_tech * n_sub));
    if (!problem.active.empty() && problem.active.size() != n_tech)
        throw ValidationError("active mask must list every technology");
    if (problem.init.t != cfg.t_start)
        throw ValidationError("initial state time must equal t_start");
    for (std::size_t k = 0; k < problem.init.x.size(); ++k)
        if (!std::isfinite(problem.init.x[k]) || problem.init.x[k] < 0.0)
            throw ValidationError("initial level at index " +
                                  std::to_string(k) +
                                  " must be finite and nonnegative");

    const std::size_t spy = cfg.steps_per_year();
    const std::size_t total = cfg.total_steps();
    std::span<const char> active(problem.active);

    Trajectory traj;
    traj.n_tech = n_tech;
    traj.n_sub = n_sub;
    traj.annual.reserve(total / spy + 1);
    if (problem.record == RecordMode::full) traj.states.reserve(total + 1);

    SystemState cur = problem.init;
    cur.t = cfg.t_start;

    const auto& entries = problem.timeline.entries();
    std::size_t block_idx = 0;

    std::vector<double> rate(n_tech * n_sub, 0.0);
    YearScales scales;

    for (std::size_t k = 0; k <= total; ++k) {
        double t = cfg.t_start + static_cast<double>(k) * cfg.dt;
        cur.t = t;
        if (problem.record == RecordMode::full) traj.states.push_back(cur);
        if (k % spy == 0) {
            traj.annual.push_back(cur);
            if (k < total && problem.hook) {
                int year = static_cast<int>(std::llround(t));
                scales = problem.hook(year, traj.annual);
                if ((!scales.a_scale.empty() &&
                     scales.a_scale.size() != n_tech * n_sub) ||
                    (!scales.b_scale.empty() &&
                     scales.b_scale.size() != n_tech * n_sub))
                    throw ValidationError(
                        "scenario hook returned scales of wrong size");
            }
        }
        if (k == total) break;

        while (block_idx + 1 < entries.size() &&
               entries[block_idx + 1].start <= t + 0.5 * cfg.dt)
            ++block_idx;
        const ParameterBlock& blk = entries[block_idx].block;

        detail::derivative_into(cur.x, blk, active, scales.a_scale,
                                scales.b_scale, rate);
        for (std::size_t q = 0; q < cur.x.size(); ++q) {
            double v = cur.x[q] + cfg.dt * rate[q];
            cur.x[q] = v < 0.0 ? 0.0 : v;
        }
        if (cfg.renormalize_shares)
            detail::renormalize_share(cur.x, n_tech, n_sub, problem.share_sub,
                                      active);
        for (std::size_t q = 0; q < cur.x.size(); ++q) {
            if (!(cur.x[q] <= cfg.blow_up_bound))
                throw NumericalError(
                    "level exceeded blow-up bound " +
                    format_number(cfg.blow_up_bound) + " at step " +
                    std::to_string(k + 1) + " (technology " +
                    std::to_string(q / n_sub) + ", sub-dimension " +
                    std::to_string(q % n_sub) + "): " +
                    format_number(cur.x[q]));
        }
    }
    return traj;
}

}  // namespace tisim
