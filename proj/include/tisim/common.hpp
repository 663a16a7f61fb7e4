#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tisim {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

// Process exit codes used by the CLI and mirrored by the error hierarchy.
enum class ExitCode : int {
    ok = 0,
    validation = 2,
    numerical = 3,
    io = 4,
};

/// Configuration or input validation failed. Carries every issue found, not
/// just the first.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
    explicit ValidationError(std::string issue)
        : ValidationError(std::vector<std::string>{std::move(issue)}) {}

    const std::vector<std::string>& issues() const noexcept { return issues_; }
    static constexpr ExitCode exit_code = ExitCode::validation;

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out;
        for (const auto& s : issues) {
            if (!out.empty()) out += "\n";
            out += s;
        }
        return out;
    }
    std::vector<std::string> issues_;
};

/// Numerical failure during integration or fitting (blow-up, divergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr ExitCode exit_code = ExitCode::numerical;
};

/// Filesystem read/write failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr ExitCode exit_code = ExitCode::io;
};

/// Shared neutrality threshold: values within [-epsilon, +epsilon] count as
/// zero when signs drive a classification. An optional relative fraction
/// widens the band to that fraction of a context magnitude (a window's
/// median |c|); zero keeps the band purely absolute.
struct EpsilonPolicy {
    double epsilon = 1e-6;
    double relative_fraction = 0.0;

    int sign(double v) const {
        if (v > epsilon) return 1;
        if (v < -epsilon) return -1;
        return 0;
    }

    /// Policy with the band widened by the relative term for one context.
    EpsilonPolicy resolved(double context_magnitude) const {
        EpsilonPolicy p = *this;
        p.epsilon = std::max(epsilon, relative_fraction * context_magnitude);
        p.relative_fraction = 0.0;
        return p;
    }
};

/// Formats a double with 9 significant digits, period decimal separator.
/// All numeric CSV output goes through this so runs are byte-reproducible.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
}

inline bool nearly_integer(double v, double tol = 1e-9) {
    return std::fabs(v - std::round(v)) <= tol;
}

/// FNV-1a 64-bit digest; used for input/output fingerprints in run manifests.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 1099511628211ULL;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }

    std::uint64_t value() const noexcept { return state_; }

    std::string hex() const {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(state_));
        return std::string(buf);
    }

private:
    std::uint64_t state_ = 1469598103934665603ULL;
};

/// Levenshtein distance; powers "did you mean ...?" hints in validation.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Nearest candidate within an edit-distance budget, or empty string.
inline std::string nearest_name(std::string_view name,
                                const std::vector<std::string>& candidates) {
    std::size_t best = std::string::npos;
    std::string hit;
    for (const auto& c : candidates) {
        std::size_t d = edit_distance(name, c);
        if (d < best) {
            best = d;
            hit = c;
        }
    }
    std::size_t budget = std::max<std::size_t>(2, name.size() / 3);
    if (best == std::string::npos || best > budget) return {};
    return hit;
}

}  // namespace tisim
