#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "tisim/calibration.hpp"
#include "tisim/dynamics.hpp"

namespace tisim {

/// Deterministic standard-normal sampler (Box-Muller over mt19937_64).
/// Hand-rolled so seeded draws are identical on every platform, unlike
/// std::normal_distribution.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Annual observations extracted from a simulated trajectory.
inline ObservedSeries observed_from_trajectory(const Trajectory& traj) {
    ObservedSeries s;
    s.year_start = traj.year_start();
    s.n_tech = traj.n_tech;
    s.n_sub = traj.n_sub;
    s.levels.reserve(traj.annual.size() * traj.n_tech * traj.n_sub);
    for (const auto& state : traj.annual)
        s.levels.insert(s.levels.end(), state.x.begin(), state.x.end());
    return s;
}

/// Multiplicative Gaussian noise: level *= (1 + fraction * z). Results are
/// floored at a tiny positive value so per-capita growth stays computable.
inline void add_relative_noise(ObservedSeries& series, double fraction,
                               std::uint64_t seed) {
    GaussianSampler normal(seed);
    for (double& v : series.levels) {
        if (std::isnan(v) || v == 0.0) continue;
        double noisy = v * (1.0 + fraction * normal());
        v = noisy > 1e-12 ? noisy : 1e-12;
    }
}

}  // namespace tisim
