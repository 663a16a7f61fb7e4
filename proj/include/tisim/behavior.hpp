#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tisim/catalog.hpp"
#include "tisim/common.hpp"
#include "tisim/dynamics.hpp"

namespace tisim {

enum class Creativity { creative, uncreative, neutral };
enum class Orientation { exploitative, explorative, neutral };

inline std::string_view to_string(Creativity c) {
    switch (c) {
        case Creativity::creative: return "creative";
        case Creativity::uncreative: return "uncreative";
        case Creativity::neutral: return "neutral";
    }
    return "?";
}

inline std::string_view to_string(Orientation o) {
    switch (o) {
        case Orientation::exploitative: return "exploitative";
        case Orientation::explorative: return "explorative";
        case Orientation::neutral: return "neutral";
    }
    return "?";
}

/// Qualitative reading of a technology's summed growth and decline rates on
/// one side over one window. The raw sums stay attached so neutral labels
/// keep their magnitude.
struct BehaviorLabel {
    Creativity creativity = Creativity::neutral;
    Orientation orientation = Orientation::neutral;
    double sum_a = 0.0;
    double sum_b = 0.0;
    int window_start = 0;
    int window_end = 0;
};

/// Arithmetic sums of a and b over one side's sub-dimensions for one
/// technology.
inline std::pair<double, double> side_sum(const ParameterBlock& params,
                                          const SideGrouping& grouping,
                                          Side side, std::size_t tech) {
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t d = 0; d < params.n_sub; ++d) {
        if (grouping.side_of(d) != side) continue;
        sum_a += params.a_at(tech, d);
        sum_b += params.b_at(tech, d);
    }
    return {sum_a, sum_b};
}

/// Sign-of-sum classification: positive summed a is creative, negative
/// uncreative; positive summed b is exploitative (growth is self-limited),
/// negative b explorative (growth feeds itself). Values inside the epsilon
/// band are neutral.
inline BehaviorLabel classify_behavior(double sum_a, double sum_b,
                                       const EpsilonPolicy& eps = {}) {
    BehaviorLabel label;
    label.sum_a = sum_a;
    label.sum_b = sum_b;
    switch (eps.sign(sum_a)) {
        case 1: label.creativity = Creativity::creative; break;
        case -1: label.creativity = Creativity::uncreative; break;
        default: label.creativity = Creativity::neutral; break;
    }
    switch (eps.sign(sum_b)) {
        case 1: label.orientation = Orientation::exploitative; break;
        case -1: label.orientation = Orientation::explorative; break;
        default: label.orientation = Orientation::neutral; break;
    }
    return label;
}

/// Exogenous total market size (vehicles/year), one value per calendar
/// year, grown from a base value by a constant annual rate.
class MarketSizeSeries {
public:
    MarketSizeSeries() = default;

    static MarketSizeSeries from_growth(int year_start, int year_end,
                                        double base, double annual_growth) {
        MarketSizeSeries s;
        s.year_start_ = year_start;
        s.values_.reserve(static_cast<std::size_t>(year_end - year_start) + 1);
        double v = base;
        for (int y = year_start; y <= year_end; ++y) {
            s.values_.push_back(v);
            v *= 1.0 + annual_growth;
        }
        return s;
    }

    static MarketSizeSeries from_values(int year_start,
                                        std::vector<double> values) {
        MarketSizeSeries s;
        s.year_start_ = year_start;
        s.values_ = std::move(values);
        return s;
    }

    int year_start() const noexcept { return year_start_; }
    int year_end() const noexcept {
        return year_start_ + static_cast<int>(values_.size()) - 1;
    }

    bool covers(int year) const noexcept {
        return year >= year_start_ && year <= year_end();
    }

    double at(int year) const {
        if (!covers(year))
            throw ValidationError("market size series does not cover year " +
                                  std::to_string(year));
        return values_[static_cast<std::size_t>(year - year_start_)];
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> issues;
        if (values_.empty()) {
            issues.push_back("market size series is empty");
            return issues;
        }
        for (std::size_t k = 0; k < values_.size(); ++k)
            if (!(values_[k] > 0.0) || !std::isfinite(values_[k]))
                issues.push_back("market size must be positive in year " +
                                 std::to_string(year_start_ +
                                                static_cast<int>(k)));
        return issues;
    }

private:
    int year_start_ = 0;
    std::vector<double> values_;
};

/// Annual sales per technology: share times total market size.
struct SalesTable {
    int year_start = 0;
    std::size_t n_tech = 0;
    std::vector<double> sales;  // [year_offset * n_tech + tech]

    double at(int year, std::size_t tech) const {
        return sales.at(static_cast<std::size_t>(year - year_start) * n_tech +
                        tech);
    }
    int year_end() const {
        return year_start + static_cast<int>(sales.size() / n_tech) - 1;
    }
};

inline SalesTable sales_from_share(const Trajectory& traj,
                                   std::size_t share_sub,
                                   const MarketSizeSeries& market) {
    SalesTable table;
    table.year_start = traj.year_start();
    table.n_tech = traj.n_tech;
    table.sales.reserve(traj.annual.size() * traj.n_tech);
    for (const auto& state : traj.annual) {
        int year = static_cast<int>(std::llround(state.t));
        double total = market.at(year);
        for (std::size_t i = 0; i < traj.n_tech; ++i)
            table.sales.push_back(state.x[i * traj.n_sub + share_sub] * total);
    }
    return table;
}

}  // namespace tisim
