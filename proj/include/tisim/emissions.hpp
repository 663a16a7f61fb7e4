#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tisim/behavior.hpp"
#include "tisim/common.hpp"

namespace tisim {

/// Well-to-wheel emissions intensity per technology, tCO2e per
/// vehicle-year, optionally time-varying (one value per calendar year).
struct EmissionFactors {
    int year_start = 0;
    std::size_t n_tech = 0;
    std::vector<double> values;  // [year_offset * n_tech + tech]

    static EmissionFactors constant(int y0, int y1,
                                    std::vector<double> per_tech) {
        EmissionFactors f;
        f.year_start = y0;
        f.n_tech = per_tech.size();
        f.values.reserve(static_cast<std::size_t>(y1 - y0 + 1) *
                         per_tech.size());
        for (int y = y0; y <= y1; ++y)
            for (double v : per_tech) f.values.push_back(v);
        return f;
    }

    int year_end() const {
        return year_start +
               static_cast<int>(n_tech == 0 ? 0 : values.size() / n_tech) - 1;
    }

    double at(int year, std::size_t tech) const {
        if (year < year_start || year > year_end())
            throw ValidationError("emission factors do not cover year " +
                                  std::to_string(year));
        return values[static_cast<std::size_t>(year - year_start) * n_tech +
                      tech];
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> issues;
        if (n_tech == 0 || values.empty()) {
            issues.push_back("emission factors are empty");
            return issues;
        }
        if (values.size() % n_tech != 0)
            issues.push_back("emission factor storage is not a whole number "
                             "of years");
        for (std::size_t k = 0; k < values.size(); ++k)
            if (!(values[k] >= 0.0) || !std::isfinite(values[k]))
                issues.push_back("emission factor at flat index " +
                                 std::to_string(k) +
                                 " must be finite and nonnegative");
        return issues;
    }
};

/// Fleet stock per technology and year: rolling sum of the last
/// lifetime_years of sales; years before the data start contribute zero.
struct StockTable {
    int year_start = 0;
    std::size_t n_tech = 0;
    std::vector<double> stock;  // [year_offset * n_tech + tech]

    double at(int year, std::size_t tech) const {
        return stock.at(static_cast<std::size_t>(year - year_start) * n_tech +
                        tech);
    }
    int year_end() const {
        return year_start + static_cast<int>(stock.size() / n_tech) - 1;
    }
};

inline StockTable stock_from_sales(const SalesTable& sales,
                                   int lifetime_years) {
    if (lifetime_years < 1)
        throw ValidationError("vehicle lifetime must be at least 1 year");
    StockTable out;
    out.year_start = sales.year_start;
    out.n_tech = sales.n_tech;
    const int y_end = sales.year_end();
    out.stock.reserve(sales.sales.size());
    for (int y = sales.year_start; y <= y_end; ++y)
        for (std::size_t i = 0; i < sales.n_tech; ++i) {
            double acc = 0.0;
            int from = y - lifetime_years + 1;
            if (from < sales.year_start) from = sales.year_start;
            for (int k = from; k <= y; ++k) acc += sales.at(k, i);
            out.stock.push_back(acc);
        }
    return out;
}

/// Annual (Mt/year) and cumulative (Mt) emissions per technology plus
/// whole-fleet totals.
struct EmissionReport {
    int year_start = 0;
    std::size_t n_tech = 0;
    std::vector<double> annual;            // [year_offset * n_tech + tech]
    std::vector<double> cumulative;        // same layout
    std::vector<double> total_annual;      // per year
    std::vector<double> total_cumulative;  // per year

    int year_end() const {
        return year_start + static_cast<int>(total_annual.size()) - 1;
    }
    double annual_at(int year, std::size_t tech) const {
        return annual.at(static_cast<std::size_t>(year - year_start) * n_tech +
                         tech);
    }
    double cumulative_at(int year, std::size_t tech) const {
        return cumulative.at(
            static_cast<std::size_t>(year - year_start) * n_tech + tech);
    }
    double total_cumulative_at(int year) const {
        return total_cumulative.at(
            static_cast<std::size_t>(year - year_start));
    }
};

inline EmissionReport emissions(const StockTable& stocks,
                                const EmissionFactors& factors) {
    {
        auto issues = factors.validate();
        if (factors.n_tech != stocks.n_tech)
            issues.push_back("emission factors cover " +
                             std::to_string(factors.n_tech) +
                             " technologies, stocks cover " +
                             std::to_string(stocks.n_tech));
        if (!issues.empty()) throw ValidationError(std::move(issues));
    }
    EmissionReport rep;
    rep.year_start = stocks.year_start;
    rep.n_tech = stocks.n_tech;
    const int y_end = stocks.year_end();
    std::vector<double> run(stocks.n_tech, 0.0);
    double run_total = 0.0;
    for (int y = stocks.year_start; y <= y_end; ++y) {
        double year_total = 0.0;
        for (std::size_t i = 0; i < stocks.n_tech; ++i) {
            double mt = stocks.at(y, i) * factors.at(y, i) / 1e6;
            run[i] += mt;
            year_total += mt;
            rep.annual.push_back(mt);
            rep.cumulative.push_back(run[i]);
        }
        run_total += year_total;
        rep.total_annual.push_back(year_total);
        rep.total_cumulative.push_back(run_total);
    }
    return rep;
}

}  // namespace tisim
