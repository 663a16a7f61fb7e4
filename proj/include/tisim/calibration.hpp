#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "tisim/common.hpp"
#include "tisim/dynamics.hpp"
#include "tisim/modes.hpp"

namespace tisim {

/// Annual observed levels per (technology, sub-dimension). NaN marks a gap.
struct ObservedSeries {
    int year_start = 0;
    std::size_t n_tech = 0;
    std::size_t n_sub = 0;
    std::vector<double> levels;  // [(year_idx * n_tech + tech) * n_sub + sub]

    std::size_t n_years() const {
        return n_tech * n_sub == 0 ? 0 : levels.size() / (n_tech * n_sub);
    }
    int year_end() const { return year_start + static_cast<int>(n_years()) - 1; }

    std::size_t idx(int year, std::size_t tech, std::size_t sub) const {
        return (static_cast<std::size_t>(year - year_start) * n_tech + tech) *
                   n_sub + sub;
    }
    double at(int year, std::size_t tech, std::size_t sub) const {
        return levels.at(idx(year, tech, sub));
    }
    double& at(int year, std::size_t tech, std::size_t sub) {
        return levels.at(idx(year, tech, sub));
    }
    bool has(int year, std::size_t tech, std::size_t sub) const {
        return !std::isnan(at(year, tech, sub));
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> issues;
        if (n_tech == 0 || n_sub == 0 || levels.empty()) {
            issues.push_back("observed series is empty");
            return issues;
        }
        if (levels.size() % (n_tech * n_sub) != 0)
            issues.push_back("observed series storage is not a whole number "
                             "of years");
        for (std::size_t k = 0; k < levels.size(); ++k)
            if (!std::isnan(levels[k]) &&
                (!std::isfinite(levels[k]) || levels[k] < 0.0))
                issues.push_back("observed level at flat index " +
                                 std::to_string(k) +
                                 " must be nonnegative or a marked gap");
        return issues;
    }
};

/// Rolling calibration windows: starts at year_start, year_start+stride, …;
/// a window starting at w covers level points w … w+length inclusive.
struct WindowSpec {
    int length = 5;
    int stride = 1;

    std::vector<std::string> validate(std::size_t n_regressors) const {
        std::vector<std::string> issues;
        if (length < 1) issues.push_back("window length must be at least 1");
        if (stride < 1) issues.push_back("window stride must be at least 1");
        if (length > 0 && static_cast<std::size_t>(length) < n_regressors)
            issues.push_back(
                "window length " + std::to_string(length) +
                " gives fewer growth observations than regressors (" +
                std::to_string(n_regressors) + ")");
        return issues;
    }
};

/// One (technology, sub-dimension) regression in one window.
struct CellFit {
    bool fitted = false;
    std::string failure;    // set when !fitted
    double a = 0.0;
    double b = 0.0;
    std::vector<double> c;  // per affecting technology; self entry 0
    double r2 = 0.0;
    double residual_variance = 0.0;
    double condition = 0.0;  // condition number of the normal matrix
    bool filled = false;     // copied from another window's successful fit
    int filled_from = 0;     // source window start, valid when filled
};

struct WindowFit {
    int window_start = 0;
    int window_end = 0;
    std::vector<CellFit> cells;  // [tech * n_sub + sub]
    bool any_fitted = false;

    const CellFit& cell(std::size_t tech, std::size_t sub,
                        std::size_t n_sub) const {
        return cells.at(tech * n_sub + sub);
    }
};

struct FitResult {
    std::size_t n_tech = 0;
    std::size_t n_sub = 0;
    WindowSpec window;
    std::vector<WindowFit> windows;

    ParameterBlock block_for(const WindowFit& w) const {
        ParameterBlock blk(n_tech, n_sub);
        for (std::size_t i = 0; i < n_tech; ++i)
            for (std::size_t d = 0; d < n_sub; ++d) {
                const CellFit& cf = w.cells[i * n_sub + d];
                blk.a_at(i, d) = cf.a;
                blk.b_at(i, d) = cf.b;
                for (std::size_t j = 0; j < n_tech; ++j)
                    if (j != i) blk.c_at(i, j, d) = cf.c.empty() ? 0.0
                                                                 : cf.c[j];
            }
        return blk;
    }

    /// Piecewise-constant schedule: each window's block applies from its
    /// start until the next window's start.
    ParameterTimeline to_timeline() const {
        ParameterTimeline tl;
        for (const auto& w : windows)
            tl.add(static_cast<double>(w.window_start), block_for(w));
        return tl;
    }

    std::vector<WindowBlock> to_window_blocks() const {
        std::vector<WindowBlock> out;
        out.reserve(windows.size());
        for (const auto& w : windows) {
            WindowBlock wb;
            wb.window_start = w.window_start;
            wb.window_end = w.window_end;
            wb.available = true;  // filling keeps every window populated
            wb.block = block_for(w);
            out.push_back(std::move(wb));
        }
        return out;
    }
};

namespace detail {

/// Solves the symmetric positive system M x = rhs by Gaussian elimination
/// with partial pivoting; returns false on a vanishing pivot.
inline bool solve_linear(std::vector<double> m, std::vector<double> rhs,
                         std::size_t p, std::vector<double>& out) {
    double scale = 0.0;
    for (std::size_t k = 0; k < p * p; ++k)
        scale = std::max(scale, std::fabs(m[k]));
    if (scale == 0.0) return false;
    const double tiny = scale * 1e-13;
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::fabs(m[r * p + col]) > std::fabs(m[piv * p + col]))
                piv = r;
        if (std::fabs(m[piv * p + col]) <= tiny) return false;
        if (piv != col) {
            for (std::size_t cc = 0; cc < p; ++cc)
                std::swap(m[col * p + cc], m[piv * p + cc]);
            std::swap(rhs[col], rhs[piv]);
        }
        for (std::size_t r = col + 1; r < p; ++r) {
            double f = m[r * p + col] / m[col * p + col];
            for (std::size_t cc = col; cc < p; ++cc)
                m[r * p + cc] -= f * m[col * p + cc];
            rhs[r] -= f * rhs[col];
        }
    }
    out.assign(p, 0.0);
    for (std::size_t ri = p; ri-- > 0;) {
        double s = rhs[ri];
        for (std::size_t cc = ri + 1; cc < p; ++cc)
            s -= m[ri * p + cc] * out[cc];
        out[ri] = s / m[ri * p + ri];
    }
    return true;
}

/// Eigenvalues of a small symmetric matrix via cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> m,
                                                 std::size_t p) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t c = r + 1; c < p; ++c)
                off += m[r * p + c] * m[r * p + c];
        if (off < 1e-30) break;
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t c = r + 1; c < p; ++c) {
                double arc = m[r * p + c];
                if (std::fabs(arc) < 1e-300) continue;
                double theta = 0.5 * (m[c * p + c] - m[r * p + r]) / arc;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) +
                            std::sqrt(theta * theta + 1.0));
                double cs = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * cs;
                for (std::size_t k = 0; k < p; ++k) {
                    double mrk = m[r * p + k];
                    double mck = m[c * p + k];
                    m[r * p + k] = cs * mrk - sn * mck;
                    m[c * p + k] = sn * mrk + cs * mck;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    double mkr = m[k * p + r];
                    double mkc = m[k * p + c];
                    m[k * p + r] = cs * mkr - sn * mkc;
                    m[k * p + c] = sn * mkr + cs * mkc;
                }
            }
    }
    std::vector<double> eig(p);
    for (std::size_t k = 0; k < p; ++k) eig[k] = m[k * p + k];
    return eig;
}

/// Condition number of a symmetric nonnegative-definite matrix; infinity
/// when the smallest eigenvalue vanishes.
inline double condition_number(const std::vector<double>& m, std::size_t p) {
    auto eig = symmetric_eigenvalues(m, p);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double e : eig) {
        double a = std::fabs(e);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (hi == 0.0) return std::numeric_limits<double>::infinity();
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

struct OlsFit {
    bool ok = false;
    std::vector<double> beta;
    double r2 = 0.0;
    double residual_variance = 0.0;
    double condition = 0.0;
};

/// Ordinary least squares through the normal equations; rows is n x p
/// row-major. Rank deficiency is judged on the normal matrix's spectrum.
inline OlsFit ols(const std::vector<double>& rows, std::size_t n,
                  std::size_t p, const std::vector<double>& y) {
    OlsFit fit;
    std::vector<double> xtx(p * p, 0.0);
    std::vector<double> xty(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c1 = 0; c1 < p; ++c1) {
            xty[c1] += rows[r * p + c1] * y[r];
            for (std::size_t c2 = 0; c2 < p; ++c2)
                xtx[c1 * p + c2] += rows[r * p + c1] * rows[r * p + c2];
        }
    }
    fit.condition = condition_number(xtx, p);
    if (!(fit.condition < 1e12)) return fit;  // rank-deficient or NaN
    if (!solve_linear(xtx, xty, p, fit.beta)) return fit;

    double mean_y = std::accumulate(y.begin(), y.end(), 0.0) /
                    static_cast<double>(n);
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double pred = 0.0;
        for (std::size_t c1 = 0; c1 < p; ++c1)
            pred += rows[r * p + c1] * fit.beta[c1];
        ss_res += (y[r] - pred) * (y[r] - pred);
        ss_tot += (y[r] - mean_y) * (y[r] - mean_y);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    fit.residual_variance =
        n > p ? ss_res / static_cast<double>(n - p) : 0.0;
    fit.ok = true;
    return fit;
}

/// Nelder-Mead minimization for the optional trajectory refinement.
inline std::vector<double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> start, double step, int max_iter) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t k = 0; k < n; ++k)
        simplex[k + 1][k] +=
            start[k] != 0.0 ? step * std::fabs(start[k]) : step * 1e-4;
    std::vector<double> value(n + 1);
    for (std::size_t k = 0; k <= n; ++k) value[k] = f(simplex[k]);

    for (int it = 0; it < max_iter; ++it) {
        std::vector<std::size_t> order(n + 1);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&value](auto a, auto b) {
            return value[a] < value[b];
        });
        std::size_t best = order[0], worst = order[n], second = order[n - 1];
        if (std::fabs(value[worst] - value[best]) <
            1e-12 * (1.0 + std::fabs(value[best])))
            break;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[k][d];
        }
        for (std::size_t d = 0; d < n; ++d)
            centroid[d] /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d)
                p[d] = centroid[d] + coef * (simplex[worst][d] - centroid[d]);
            return p;
        };
        auto reflected = blend(-1.0);
        double fr = f(reflected);
        if (fr < value[best]) {
            auto expanded = blend(-2.0);
            double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                value[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                value[worst] = fr;
            }
        } else if (fr < value[second]) {
            simplex[worst] = std::move(reflected);
            value[worst] = fr;
        } else {
            auto contracted = blend(0.5);
            double fc = f(contracted);
            if (fc < value[worst]) {
                simplex[worst] = std::move(contracted);
                value[worst] = fc;
            } else {
                for (std::size_t k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        simplex[k][d] = simplex[best][d] +
                                        0.5 * (simplex[k][d] - simplex[best][d]);
                    value[k] = f(simplex[k]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k <= n; ++k)
        if (value[k] < value[best]) best = k;
    return simplex[best];
}

}  // namespace detail

struct FitOptions {
    bool refine = false;    // nonlinear trajectory refinement after OLS
    int refine_max_iter = 200;
    double refine_dt = 0.125;
};

/// Fits every (technology, sub-dimension) cell over one window by OLS on
/// annual per-capita growth: g_t = (X_{t+1} - X_t)/X_t regressed on
/// [1, X_self, X_other...], mapping coefficients to (a, -b, -c...).
/// Technologies whose levels are identically zero across the window drop
/// out of the regressor set (their interaction coefficient is 0).
inline WindowFit fit_window(const ObservedSeries& series, int window_start,
                            const WindowSpec& spec = {}) {
    WindowFit wf;
    wf.window_start = window_start;
    wf.window_end = window_start + spec.length;
    if (window_start < series.year_start ||
        wf.window_end > series.year_end())
        throw ValidationError("calibration window " +
                              std::to_string(window_start) + ".." +
                              std::to_string(wf.window_end) +
                              " is outside the observed span");

    const std::size_t n_tech = series.n_tech;
    const std::size_t n_sub = series.n_sub;
    const std::size_t n_obs = static_cast<std::size_t>(spec.length);
    wf.cells.resize(n_tech * n_sub);

    for (std::size_t d = 0; d < n_sub; ++d) {
        // regressor technologies: any with a nonzero, gap-free window
        std::vector<bool> usable(n_tech, true);
        std::vector<bool> all_zero(n_tech, true);
        for (std::size_t j = 0; j < n_tech; ++j)
            for (int y = window_start; y <= wf.window_end; ++y) {
                if (!series.has(y, j, d)) usable[j] = false;
                else if (series.at(y, j, d) != 0.0) all_zero[j] = false;
            }

        for (std::size_t i = 0; i < n_tech; ++i) {
            CellFit& cell = wf.cells[i * n_sub + d];
            cell.c.assign(n_tech, 0.0);
            if (!usable[i]) {
                cell.failure = "gap in observed levels";
                continue;
            }
            if (all_zero[i]) {
                cell.failure = "levels are zero across the window";
                continue;
            }
            bool positive = true;
            for (int y = window_start; y <= wf.window_end; ++y)
                if (!(series.at(y, i, d) > 0.0)) positive = false;
            if (!positive) {
                cell.failure = "zero level in window";
                continue;
            }

            std::vector<std::size_t> others;
            bool others_ok = true;
            for (std::size_t j = 0; j < n_tech; ++j) {
                if (j == i) continue;
                if (!usable[j]) {
                    if (!all_zero[j]) others_ok = false;
                    continue;  // gap-free zero series carries no signal
                }
                if (!all_zero[j]) others.push_back(j);
            }
            if (!others_ok) {
                cell.failure = "gap in a co-evolving technology's levels";
                continue;
            }

            std::vector<double> growth(n_obs);
            bool all_zero_growth = true;
            for (std::size_t t = 0; t < n_obs; ++t) {
                int y = window_start + static_cast<int>(t);
                double x0 = series.at(y, i, d);
                double x1 = series.at(y + 1, i, d);
                growth[t] = (x1 - x0) / x0;
                if (growth[t] != 0.0) all_zero_growth = false;
            }
            if (all_zero_growth) {
                // constant level: zero dynamics reproduce it exactly, and
                // the design matrix would be rank-deficient
                cell.fitted = true;
                cell.r2 = 1.0;
                cell.condition = 0.0;
                continue;
            }

            const std::size_t p = 2 + others.size();
            if (n_obs < p) {
                cell.failure = "window shorter than the regressor count";
                continue;
            }
            std::vector<double> rows(n_obs * p);
            for (std::size_t t = 0; t < n_obs; ++t) {
                int y = window_start + static_cast<int>(t);
                rows[t * p + 0] = 1.0;
                rows[t * p + 1] = series.at(y, i, d);
                for (std::size_t q = 0; q < others.size(); ++q)
                    rows[t * p + 2 + q] = series.at(y, others[q], d);
            }
            detail::OlsFit fit = detail::ols(rows, n_obs, p, growth);
            cell.condition = fit.condition;
            if (!fit.ok) {
                cell.failure = "rank-deficient design matrix (condition " +
                               format_number(fit.condition) + ")";
                continue;
            }
            cell.fitted = true;
            cell.a = fit.beta[0];
            cell.b = -fit.beta[1];
            for (std::size_t q = 0; q < others.size(); ++q)
                cell.c[others[q]] = -fit.beta[2 + q];
            cell.r2 = fit.r2;
            cell.residual_variance = fit.residual_variance;
        }
    }
    for (const auto& cell : wf.cells)
        if (cell.fitted) wf.any_fitted = true;
    return wf;
}

namespace detail {

/// RMSE of a window re-simulation against the observed levels of one
/// sub-dimension, used as the refinement objective and by goodness_of_fit.
inline double window_rmse(const ObservedSeries& series,
                          const ParameterBlock& blk, int window_start,
                          int window_end, double dt, std::size_t only_sub) {
    SimulationProblem prob;
    prob.config.t_start = window_start;
    prob.config.t_end = window_end;
    prob.config.dt = dt;
    prob.config.renormalize_shares = false;
    prob.timeline = ParameterTimeline(blk);
    prob.init.t = window_start;
    prob.init.x.assign(series.n_tech * series.n_sub, 0.0);
    for (std::size_t i = 0; i < series.n_tech; ++i)
        for (std::size_t d = 0; d < series.n_sub; ++d)
            if (series.has(window_start, i, d))
                prob.init.x[i * series.n_sub + d] =
                    series.at(window_start, i, d);
    prob.record = RecordMode::annual_only;

    Trajectory traj;
    try {
        traj = simulate(prob);
    } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
    }
    double acc = 0.0;
    std::size_t n = 0;
    for (int y = window_start; y <= window_end; ++y)
        for (std::size_t i = 0; i < series.n_tech; ++i)
            for (std::size_t d = 0; d < series.n_sub; ++d) {
                if (only_sub != SimulationProblem::kNoShare && d != only_sub)
                    continue;
                if (!series.has(y, i, d)) continue;
                double diff = traj.at_year(y, i, d) - series.at(y, i, d);
                acc += diff * diff;
                ++n;
            }
    return n == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(n));
}

/// Joint derivative-free polish of one sub-dimension's fitted cells.
inline void refine_window_sub(const ObservedSeries& series, WindowFit& wf,
                              std::size_t d, const FitOptions& opt,
                              std::size_t n_tech, std::size_t n_sub) {
    std::vector<std::size_t> fitted;
    for (std::size_t i = 0; i < n_tech; ++i)
        if (wf.cells[i * n_sub + d].fitted) fitted.push_back(i);
    if (fitted.empty()) return;

    const std::size_t per = 1 + 1 + (n_tech - 1);  // a, b, cross row
    std::vector<double> x0;
    x0.reserve(fitted.size() * per);
    for (std::size_t i : fitted) {
        const CellFit& cell = wf.cells[i * n_sub + d];
        x0.push_back(cell.a);
        x0.push_back(cell.b);
        for (std::size_t j = 0; j < n_tech; ++j)
            if (j != i) x0.push_back(cell.c[j]);
    }

    auto unpack = [&](const std::vector<double>& v) {
        ParameterBlock blk(n_tech, n_sub);
        std::size_t k = 0;
        for (std::size_t i : fitted) {
            blk.a_at(i, d) = v[k++];
            blk.b_at(i, d) = v[k++];
            for (std::size_t j = 0; j < n_tech; ++j)
                if (j != i) blk.c_at(i, j, d) = v[k++];
        }
        return blk;
    };
    auto objective = [&](const std::vector<double>& v) {
        return window_rmse(series, unpack(v), wf.window_start, wf.window_end,
                           opt.refine_dt, d);
    };
    double before = objective(x0);
    std::vector<double> best =
        nelder_mead(objective, x0, 0.1, opt.refine_max_iter);
    if (objective(best) >= before) return;  // keep the OLS estimate

    std::size_t k = 0;
    for (std::size_t i : fitted) {
        CellFit& cell = wf.cells[i * n_sub + d];
        cell.a = best[k++];
        cell.b = best[k++];
        for (std::size_t j = 0; j < n_tech; ++j)
            if (j != i) cell.c[j] = best[k++];
    }
}

}  // namespace detail

/// Rolling fit over the whole observed span with forward-fill of
/// unfittable cells (leading gaps fill backward from the first success;
/// cells that never fit anywhere get zero dynamics). Rejects series where
/// nothing fits at all.
inline FitResult fit_all(const ObservedSeries& series,
                         const WindowSpec& spec = {},
                         const FitOptions& opt = {}) {
    {
        auto issues = series.validate();
        auto wi = spec.validate(2 + (series.n_tech > 0 ? series.n_tech - 1 : 0));
        issues.insert(issues.end(), wi.begin(), wi.end());
        if (!issues.empty()) throw ValidationError(std::move(issues));
    }
    FitResult result;
    result.n_tech = series.n_tech;
    result.n_sub = series.n_sub;
    result.window = spec;

    for (int w = series.year_start; w + spec.length <= series.year_end();
         w += spec.stride) {
        WindowFit wf = fit_window(series, w, spec);
        if (opt.refine)
            for (std::size_t d = 0; d < series.n_sub; ++d)
                detail::refine_window_sub(series, wf, d, opt, series.n_tech,
                                          series.n_sub);
        result.windows.push_back(std::move(wf));
    }
    if (result.windows.empty())
        throw ValidationError("observed span is shorter than one window");

    bool anything = false;
    for (const auto& w : result.windows) anything = anything || w.any_fitted;
    if (!anything)
        throw ValidationError("no calibration window could be fitted");

    // fill pass, per cell: forward from the last success, backward for
    // leading gaps, zero dynamics if the cell never fits
    const std::size_t cells = series.n_tech * series.n_sub;
    for (std::size_t cix = 0; cix < cells; ++cix) {
        long last_ok = -1;
        for (std::size_t w = 0; w < result.windows.size(); ++w) {
            if (result.windows[w].cells[cix].fitted)
                last_ok = static_cast<long>(w);
        }
        if (last_ok < 0) {
            for (auto& w : result.windows) {
                CellFit& cell = w.cells[cix];
                cell.filled = true;
                cell.filled_from = w.window_start;
                // zero dynamics: keeps the timeline total without inventing
                // growth for a series that never supported a fit
            }
            continue;
        }
        long src = -1;
        for (std::size_t w = 0; w < result.windows.size(); ++w) {
            CellFit& cell = result.windows[w].cells[cix];
            if (cell.fitted) {
                src = static_cast<long>(w);
                continue;
            }
            long use = src >= 0 ? src : [&] {
                for (std::size_t q = w; q < result.windows.size(); ++q)
                    if (result.windows[q].cells[cix].fitted)
                        return static_cast<long>(q);
                return last_ok;
            }();
            const CellFit& from = result.windows[use].cells[cix];
            std::string reason = std::move(cell.failure);
            cell = from;
            cell.filled = true;
            cell.filled_from = result.windows[use].window_start;
            cell.failure = std::move(reason);
            cell.fitted = false;
        }
    }
    return result;
}

/// Per-window fit quality: mean R² over fitted cells and re-simulated RMSE
/// per sub-dimension (window re-run from its observed initial state).
struct WindowGoodness {
    int window_start = 0;
    int window_end = 0;
    double mean_r2 = 0.0;
    std::vector<double> rmse_per_sub;
};

struct GoodnessSummary {
    std::vector<WindowGoodness> windows;
    double overall_rmse = 0.0;
};

inline GoodnessSummary goodness_of_fit(const FitResult& fit,
                                       const ObservedSeries& series,
                                       double dt = 0.125) {
    GoodnessSummary summary;
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& w : fit.windows) {
        WindowGoodness g;
        g.window_start = w.window_start;
        g.window_end = w.window_end;
        double r2_sum = 0.0;
        std::size_t r2_n = 0;
        for (const auto& cell : w.cells)
            if (cell.fitted) {
                r2_sum += cell.r2;
                ++r2_n;
            }
        g.mean_r2 = r2_n > 0 ? r2_sum / static_cast<double>(r2_n) : 0.0;
        ParameterBlock blk = fit.block_for(w);
        for (std::size_t d = 0; d < fit.n_sub; ++d) {
            double rmse = detail::window_rmse(series, blk, w.window_start,
                                              w.window_end, dt, d);
            g.rmse_per_sub.push_back(rmse);
            if (std::isfinite(rmse)) {
                acc += rmse * rmse;
                ++count;
            }
        }
        summary.windows.push_back(std::move(g));
    }
    summary.overall_rmse =
        count > 0 ? std::sqrt(acc / static_cast<double>(count)) : 0.0;
    return summary;
}

}  // namespace tisim
