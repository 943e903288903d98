#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace lbvc {

enum class FrameType { Intra, B };

inline std::string_view to_string(FrameType t)
{
    return t == FrameType::Intra ? "I" : "B";
}

// Distortion weights for B-frame temporal levels 1..5.
inline constexpr std::array<double, 5> kLevelWeights{1.1, 1.1, 0.7, 0.6, 0.5};

inline double level_weight(int level)
{
    if (level < 1 || level > static_cast<int>(kLevelWeights.size())) {
        throw ParameterError("no distortion weight for temporal level " + std::to_string(level));
    }
    return kLevelWeights[static_cast<std::size_t>(level - 1)];
}

struct CodingUnit
{
    int display_index = 0;
    int coding_order = 0;
    FrameType type = FrameType::Intra;
    std::optional<int> ref_fwd; // past reference (display index)
    std::optional<int> ref_bwd; // future reference
    int temporal_level = 0;
    double distortion_weight = 0.0;

    friend bool operator==(const CodingUnit&, const CodingUnit&) = default;
};

struct Schedule
{
    std::vector<CodingUnit> units; // display order
    int gop_size = 32;
    int intra_period = 32;

    const CodingUnit& at(int display_index) const { return units.at(static_cast<std::size_t>(display_index)); }

    std::vector<const CodingUnit*> in_coding_order() const
    {
        std::vector<const CodingUnit*> order;
        for (const CodingUnit& u : units) {
            order.push_back(&u);
        }
        std::sort(order.begin(), order.end(),
                  [](const CodingUnit* a, const CodingUnit* b) { return a->coding_order < b->coding_order; });
        return order;
    }
};

namespace detail {

inline bool is_power_of_two(int v)
{
    return v > 0 && (v & (v - 1)) == 0;
}

// Midpoint recursion over (a, b); records depth and references per interior frame.
inline void assign_levels(std::vector<CodingUnit>& units, int a, int b, int level)
{
    if (b - a < 2) {
        return;
    }
    const int mid = a + (b - a) / 2;
    CodingUnit& u = units[static_cast<std::size_t>(mid)];
    u.type = FrameType::B;
    u.ref_fwd = a;
    u.ref_bwd = b;
    u.temporal_level = level;
    assign_levels(units, a, mid, level + 1);
    assign_levels(units, mid, b, level + 1);
}

} // namespace detail

// Random-access hierarchical-B schedule. Every GoP boundary (multiple of gop_size) and the
// last frame are anchors coded as Intra; frames between anchors form a dyadic midpoint
// hierarchy. Coding order is anchor-by-anchor, each GoP's B frames by increasing level,
// left to right within a level.
inline Schedule build_schedule(int num_frames, int gop_size = 32, int intra_period = 32)
{
    if (num_frames < 1) {
        throw ParameterError("schedule needs at least one frame");
    }
    if (gop_size < 2 || !detail::is_power_of_two(gop_size)) {
        throw ParameterError("GoP size must be a power of two >= 2");
    }
    if (intra_period < gop_size || intra_period % gop_size != 0) {
        throw ParameterError("intra period must be a positive multiple of the GoP size");
    }

    Schedule s;
    s.gop_size = gop_size;
    s.intra_period = intra_period;
    s.units.resize(static_cast<std::size_t>(num_frames));
    for (int i = 0; i < num_frames; ++i) {
        s.units[static_cast<std::size_t>(i)].display_index = i;
    }

    std::vector<int> anchors;
    for (int a = 0; a < num_frames; a += gop_size) {
        anchors.push_back(a);
    }
    if (anchors.back() != num_frames - 1) {
        anchors.push_back(num_frames - 1);
    }
    for (int a : anchors) {
        CodingUnit& u = s.units[static_cast<std::size_t>(a)];
        u.type = FrameType::Intra;
        u.temporal_level = 0;
    }

    int order = 0;
    s.units[0].coding_order = order++;
    for (std::size_t g = 0; g + 1 < anchors.size(); ++g) {
        const int a = anchors[g];
        const int b = anchors[g + 1];
        s.units[static_cast<std::size_t>(b)].coding_order = order++;
        detail::assign_levels(s.units, a, b, 1);
        int max_level = 0;
        for (int i = a + 1; i < b; ++i) {
            max_level = std::max(max_level, s.units[static_cast<std::size_t>(i)].temporal_level);
        }
        for (int level = 1; level <= max_level; ++level) {
            for (int i = a + 1; i < b; ++i) {
                CodingUnit& u = s.units[static_cast<std::size_t>(i)];
                if (u.temporal_level == level) {
                    u.coding_order = order++;
                }
            }
        }
    }
    for (CodingUnit& u : s.units) {
        if (u.type == FrameType::B) {
            u.distortion_weight = level_weight(u.temporal_level);
        }
    }
    return s;
}

struct ScheduleViolation
{
    int display_index = -1; // -1 for schedule-wide problems
    std::string rule;
    std::string detail;
};

inline std::vector<ScheduleViolation> validate_schedule(const Schedule& s)
{
    std::vector<ScheduleViolation> out;
    const auto fail = [&out](int idx, std::string rule, std::string what) {
        out.push_back({idx, std::move(rule), std::move(what)});
    };
    const int n = static_cast<int>(s.units.size());
    if (n == 0) {
        fail(-1, "coverage", "schedule is empty");
        return out;
    }

    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> orders;
    for (const CodingUnit& u : s.units) {
        if (u.display_index < 0 || u.display_index >= n) {
            fail(u.display_index, "coverage", "display index out of range");
            continue;
        }
        ++seen[static_cast<std::size_t>(u.display_index)];
        orders.push_back(u.coding_order);
    }
    for (int i = 0; i < n; ++i) {
        if (seen[static_cast<std::size_t>(i)] != 1) {
            fail(i, "coverage", "display index appears " + std::to_string(seen[static_cast<std::size_t>(i)]) + " times");
        }
    }
    std::sort(orders.begin(), orders.end());
    for (int i = 0; i < static_cast<int>(orders.size()); ++i) {
        if (orders[static_cast<std::size_t>(i)] != i) {
            fail(-1, "coding-order", "coding orders are not a permutation of 0..N-1");
            break;
        }
    }

    const auto find = [&s](int display) -> const CodingUnit* {
        for (const CodingUnit& u : s.units) {
            if (u.display_index == display) {
                return &u;
            }
        }
        return nullptr;
    };

    for (const CodingUnit& u : s.units) {
        const int t = u.display_index;
        if (s.intra_period > 0 && t % s.intra_period == 0 && u.type != FrameType::Intra) {
            fail(t, "intra-period", "intra-period boundary is not Intra");
        }
        if (u.type == FrameType::Intra) {
            if (u.ref_fwd || u.ref_bwd) {
                fail(t, "intra-refs", "Intra frame carries references");
            }
            if (u.temporal_level != 0) {
                fail(t, "level", "Intra frame must be at level 0");
            }
            continue;
        }
        if (!u.ref_fwd || !u.ref_bwd) {
            fail(t, "b-refs", "B frame lacks a reference");
            continue;
        }
        if (!(*u.ref_fwd < t && t < *u.ref_bwd)) {
            fail(t, "b-refs", "references must straddle the frame in display order");
        }
        int ref_depth = 0;
        for (int r : {*u.ref_fwd, *u.ref_bwd}) {
            const CodingUnit* ru = find(r);
            if (ru == nullptr) {
                fail(t, "b-refs", "reference " + std::to_string(r) + " is not in the schedule");
                continue;
            }
            if (ru->coding_order >= u.coding_order) {
                fail(t, "dependency", "reference " + std::to_string(r) + " is coded after its user");
            }
            ref_depth = std::max(ref_depth, ru->temporal_level);
        }
        if (u.temporal_level != ref_depth + 1) {
            fail(t, "level", "temporal level " + std::to_string(u.temporal_level) + " should be " +
                                 std::to_string(ref_depth + 1));
        }
        if (u.temporal_level >= 1 && u.temporal_level <= static_cast<int>(kLevelWeights.size())) {
            if (u.distortion_weight != level_weight(u.temporal_level)) {
                fail(t, "weight", "distortion weight " + std::to_string(u.distortion_weight) + " does not match level " +
                                      std::to_string(u.temporal_level));
            }
        } else {
            fail(t, "weight", "temporal level has no weight entry");
        }
    }
    return out;
}

} // namespace lbvc
