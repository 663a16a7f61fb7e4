#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tisim/catalog.hpp"
#include "tisim/common.hpp"
#include "tisim/dynamics.hpp"

namespace tisim {

/// The six relationship modes of two interacting technologies, read from
/// the signs of their mutual interaction coefficients.
enum class Mode {
    competition,
    symbiosis,
    parasitism,
    commensalism,
    amensalism,
    neutralism,
};

inline std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::competition: return "competition";
        case Mode::symbiosis: return "symbiosis";
        case Mode::parasitism: return "parasitism";
        case Mode::commensalism: return "commensalism";
        case Mode::amensalism: return "amensalism";
        case Mode::neutralism: return "neutralism";
    }
    return "?";
}

/// Which member of an ordered pair a role refers to.
enum class PairMember { none, first, second };

/// Mode plus explicit role bookkeeping: parasitism names both roles,
/// commensalism only a beneficiary, amensalism only a victim.
struct ModeLabel {
    Mode mode = Mode::neutralism;
    PairMember beneficiary = PairMember::none;
    PairMember victim = PairMember::none;
};

/// Classifies the ordered coefficient pair (c_ij, c_ji) where c_ij sits in
/// technology i's equation and captures j's effect under the subtraction
/// convention: positive harms i, negative benefits i.
inline ModeLabel classify_pair(double c_ij, double c_ji,
                               const EpsilonPolicy& policy = {}) {
    int si = policy.sign(c_ij);  // effect on first member
    int sj = policy.sign(c_ji);  // effect on second member
    ModeLabel out;
    if (si > 0 && sj > 0) {
        out.mode = Mode::competition;
    } else if (si < 0 && sj < 0) {
        out.mode = Mode::symbiosis;
    } else if (si == 0 && sj == 0) {
        out.mode = Mode::neutralism;
    } else if (si < 0 && sj > 0) {
        out.mode = Mode::parasitism;
        out.beneficiary = PairMember::first;
        out.victim = PairMember::second;
    } else if (si > 0 && sj < 0) {
        out.mode = Mode::parasitism;
        out.beneficiary = PairMember::second;
        out.victim = PairMember::first;
    } else if (si < 0 && sj == 0) {
        out.mode = Mode::commensalism;
        out.beneficiary = PairMember::first;
    } else if (si == 0 && sj < 0) {
        out.mode = Mode::commensalism;
        out.beneficiary = PairMember::second;
    } else if (si > 0 && sj == 0) {
        out.mode = Mode::amensalism;
        out.victim = PairMember::first;
    } else {  // si == 0 && sj > 0
        out.mode = Mode::amensalism;
        out.victim = PairMember::second;
    }
    return out;
}

/// Net externality each pair member receives from the other over a window:
/// E_i_from_j sums, over the side's sub-dimensions, the time average of the
/// interaction term's actual contribution to dX_i/dt, i.e. -C[i,j,d] *
/// X[i,d] * X[j,d]. Positive E means the other technology net-benefits this
/// one. Averages use the annual downsample inside [window_start,
/// window_end] inclusive.
inline std::pair<double, double> aggregate_side_externality(
    const Trajectory& traj, const ParameterBlock& params,
    const SideGrouping& grouping, Side side, std::size_t tech_i,
    std::size_t tech_j, int window_start, int window_end) {
    std::vector<std::size_t> subs = grouping.indices_on(side);
    if (subs.empty())
        throw ValidationError("side has no sub-dimensions to aggregate");
    if (window_end < window_start)
        throw ValidationError("window end precedes window start");
    if (window_start < traj.year_start() || window_end > traj.year_end())
        throw ValidationError("aggregation window outside the horizon");

    double e_i = 0.0;
    double e_j = 0.0;
    const std::size_t first =
        static_cast<std::size_t>(window_start - traj.year_start());
    const std::size_t last =
        static_cast<std::size_t>(window_end - traj.year_start());
    const double count = static_cast<double>(last - first + 1);
    for (std::size_t d : subs) {
        double acc_i = 0.0;
        double acc_j = 0.0;
        for (std::size_t k = first; k <= last; ++k) {
            const auto& x = traj.annual[k].x;
            double xi = x[tech_i * traj.n_sub + d];
            double xj = x[tech_j * traj.n_sub + d];
            acc_i += -params.c_at(tech_i, tech_j, d) * xi * xj;
            acc_j += -params.c_at(tech_j, tech_i, d) * xi * xj;
        }
        e_i += acc_i / count;
        e_j += acc_j / count;
    }
    return {e_i, e_j};
}

/// How per-side modes are computed from a window's fit.
enum class SideAggregation { externality_sum, coefficient_sum };

/// Fitted (or otherwise known) parameters for one calibration window.
/// available=false marks a gap: the window produced no usable fit.
struct WindowBlock {
    int window_start = 0;
    int window_end = 0;
    bool available = true;
    ParameterBlock block;
};

/// One classified relationship per window, ordered pair, and scope. Scope
/// is either a sub-dimension (scope_sub set) or a whole side.
struct ModeRecord {
    int window_start = 0;
    int window_end = 0;
    std::size_t tech_i = 0;
    std::size_t tech_j = 0;
    bool side_scope = false;
    std::size_t scope_sub = 0;           // valid when !side_scope
    Side scope_side = Side::technology;  // valid when side_scope
    bool gap = false;                    // window had no fit; label unset
    ModeLabel label;
};

struct ModeSeries {
    std::vector<ModeRecord> records;
};

namespace detail {

inline double median_abs_c(const ParameterBlock& p) {
    std::vector<double> mags;
    mags.reserve(p.c.size());
    for (std::size_t i = 0; i < p.n_tech; ++i)
        for (std::size_t j = 0; j < p.n_tech; ++j)
            if (i != j)
                for (std::size_t d = 0; d < p.n_sub; ++d)
                    mags.push_back(std::fabs(p.c_at(i, j, d)));
    if (mags.empty()) return 0.0;
    std::sort(mags.begin(), mags.end());
    std::size_t n = mags.size();
    return n % 2 == 1 ? mags[n / 2]
                      : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
}

}  // namespace detail

/// Per-sub-dimension mode labels for every ordered pair (i < j) and window.
/// Missing windows become explicit gap records, never interpolation.
inline ModeSeries mode_series(std::span<const WindowBlock> windows,
                              const EpsilonPolicy& policy = {}) {
    ModeSeries out;
    for (const auto& w : windows) {
        if (!w.available) {
            // shape unknown for a gap window: one record per pair only
            ModeRecord gap;
            gap.window_start = w.window_start;
            gap.window_end = w.window_end;
            gap.gap = true;
            gap.side_scope = false;
            out.records.push_back(gap);
            continue;
        }
        EpsilonPolicy eff = policy.relative_fraction > 0.0
                                ? policy.resolved(detail::median_abs_c(w.block))
                                : policy;
        for (std::size_t i = 0; i < w.block.n_tech; ++i)
            for (std::size_t j = i + 1; j < w.block.n_tech; ++j)
                for (std::size_t d = 0; d < w.block.n_sub; ++d) {
                    ModeRecord r;
                    r.window_start = w.window_start;
                    r.window_end = w.window_end;
                    r.tech_i = i;
                    r.tech_j = j;
                    r.side_scope = false;
                    r.scope_sub = d;
                    r.label = classify_pair(w.block.c_at(i, j, d),
                                            w.block.c_at(j, i, d), eff);
                    out.records.push_back(r);
                }
    }
    return out;
}

/// Aggregated per-side mode labels for every ordered pair and window, from
/// either summed externalities (needs the trajectory) or summed
/// coefficients.
inline ModeSeries side_mode_series(std::span<const WindowBlock> windows,
                                   const Trajectory& traj,
                                   const SideGrouping& grouping,
                                   SideAggregation aggregation,
                                   const EpsilonPolicy& policy = {}) {
    ModeSeries out;
    for (const auto& w : windows) {
        if (!w.available) {
            ModeRecord gap;
            gap.window_start = w.window_start;
            gap.window_end = w.window_end;
            gap.gap = true;
            gap.side_scope = true;
            out.records.push_back(gap);
            continue;
        }
        for (Side side : {Side::technology, Side::market}) {
            for (std::size_t i = 0; i < w.block.n_tech; ++i)
                for (std::size_t j = i + 1; j < w.block.n_tech; ++j) {
                    ModeRecord r;
                    r.window_start = w.window_start;
                    r.window_end = w.window_end;
                    r.tech_i = i;
                    r.tech_j = j;
                    r.side_scope = true;
                    r.scope_side = side;
                    if (aggregation == SideAggregation::externality_sum) {
                        auto [e_i, e_j] = aggregate_side_externality(
                            traj, w.block, grouping, side, i, j,
                            w.window_start, w.window_end);
                        r.label = classify_pair(-e_i, -e_j, policy);
                    } else {
                        double sum_ij = 0.0;
                        double sum_ji = 0.0;
                        for (std::size_t d : grouping.indices_on(side)) {
                            sum_ij += w.block.c_at(i, j, d);
                            sum_ji += w.block.c_at(j, i, d);
                        }
                        r.label = classify_pair(sum_ij, sum_ji, policy);
                    }
                    out.records.push_back(r);
                }
        }
    }
    return out;
}

}  // namespace tisim
