#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tisim/common.hpp"

namespace tisim {

enum class TechnologyRole { incumbent, hybrid, emerging };

inline std::string_view to_string(TechnologyRole r) {
    switch (r) {
        case TechnologyRole::incumbent: return "incumbent";
        case TechnologyRole::hybrid: return "hybrid";
        case TechnologyRole::emerging: return "emerging";
    }
    return "?";
}

struct Technology {
    std::string name;
    TechnologyRole role = TechnologyRole::incumbent;
};

/// Which side of the innovation system a sub-dimension contributes to when
/// behavior sums and aggregated modes are reported.
enum class Side { technology, market };

inline std::string_view to_string(Side s) {
    return s == Side::technology ? "technology" : "market";
}

struct SubDimension {
    std::string name;       // unique key, kebab-case
    std::string dimension;  // owning dimension
    std::string unit;
    Side default_side = Side::technology;
    bool is_share = false;  // simplex-constrained (renormalized over techs)
    bool side_fixed = true; // false: config may move it to the other side
};

/// Fixed catalog of system dimensions and their measurable sub-dimensions.
/// The built-in catalog covers three competing powertrain technologies with
/// six dimensions split into sixteen indicators.
class DimensionCatalog {
public:
    static DimensionCatalog builtin() {
        DimensionCatalog c;
        c.name_ = "powertrain-16";
        c.version_ = 1;
        auto add = [&c](std::string name, std::string dim, std::string unit,
                        Side side, bool share = false, bool fixed = true) {
            c.subs_.push_back({std::move(name), std::move(dim),
                               std::move(unit), side, share, fixed});
        };
        // knowledge development
        add("publications", "knowledge-development", "count", Side::technology);
        add("patents", "knowledge-development", "count", Side::technology);
        // knowledge diffusion; collaborations are side-assignable by config
        add("scientific-citations", "knowledge-diffusion", "count",
            Side::technology);
        add("technological-citations", "knowledge-diffusion", "count",
            Side::technology);
        add("scientific-collaborations", "knowledge-diffusion", "count",
            Side::technology, false, false);
        add("technological-collaborations", "knowledge-diffusion", "count",
            Side::technology, false, false);
        // entrepreneurship
        add("publication-assignees", "entrepreneurship", "count", Side::market);
        add("patent-assignees", "entrepreneurship", "count", Side::market);
        add("vehicle-models", "entrepreneurship", "count", Side::market);
        // guidance of the search; laws are side-assignable by config
        add("laws-regulations", "guidance-of-search", "count", Side::market,
            false, false);
        add("search-popularity", "guidance-of-search", "index", Side::market);
        // market formation
        add("incentives", "market-formation", "count", Side::market);
        add("market-share", "market-formation", "fraction", Side::market, true);
        // resource mobilisation
        add("publication-authors", "resource-mobilisation", "count",
            Side::technology);
        add("patent-applicants", "resource-mobilisation", "count",
            Side::technology);
        add("financial-capital", "resource-mobilisation", "currency",
            Side::market);
        return c;
    }

    const std::string& name() const noexcept { return name_; }
    int version() const noexcept { return version_; }
    const std::vector<SubDimension>& sub_dimensions() const noexcept {
        return subs_;
    }
    std::size_t size() const noexcept { return subs_.size(); }

    /// Index of a sub-dimension by name; npos when absent.
    std::size_t index_of(std::string_view name) const {
        for (std::size_t i = 0; i < subs_.size(); ++i)
            if (subs_[i].name == name) return i;
        return npos;
    }

    /// Index of the unique simplex-constrained sub-dimension; npos if none.
    std::size_t share_index() const {
        for (std::size_t i = 0; i < subs_.size(); ++i)
            if (subs_[i].is_share) return i;
        return npos;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(subs_.size());
        for (const auto& s : subs_) out.push_back(s.name);
        return out;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::string name_;
    int version_ = 0;
    std::vector<SubDimension> subs_;
};

/// Assignment of every sub-dimension to exactly one side. Starts from the
/// catalog defaults; only sub-dimensions flagged assignable may be moved.
class SideGrouping {
public:
    explicit SideGrouping(const DimensionCatalog& catalog) {
        sides_.reserve(catalog.size());
        for (const auto& s : catalog.sub_dimensions())
            sides_.push_back(s.default_side);
    }

    /// Reassigns an assignable sub-dimension. Throws on fixed ones so the
    /// partition invariant cannot be silently broken from config.
    void assign(const DimensionCatalog& catalog, std::string_view sub,
                Side side) {
        std::size_t i = catalog.index_of(sub);
        if (i == DimensionCatalog::npos)
            throw ValidationError("unknown sub-dimension '" + std::string(sub) +
                                  "' in side assignment");
        if (catalog.sub_dimensions()[i].side_fixed &&
            catalog.sub_dimensions()[i].default_side != side)
            throw ValidationError("sub-dimension '" + std::string(sub) +
                                  "' is not side-assignable");
        sides_[i] = side;
    }

    Side side_of(std::size_t sub_index) const { return sides_.at(sub_index); }

    std::vector<std::size_t> indices_on(Side side) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < sides_.size(); ++i)
            if (sides_[i] == side) out.push_back(i);
        return out;
    }

private:
    std::vector<Side> sides_;
};

}  // namespace tisim
