#ifndef TEQ_ACCESSIBILITY_HPP
#define TEQ_ACCESSIBILITY_HPP

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "teq/parallel.hpp"
#include "teq/router.hpp"

namespace teq {

struct ScanCounter {
    std::atomic<std::uint64_t> scans{0};
};

// Externally supplied access walk times, keyed by hexagon id.
using WalkMatrix = std::map<HexId, std::vector<std::pair<StopIdx, std::int32_t>>>;

// Walk geometry shared by every per-origin scan: access stops per hexagon,
// egress hexagons per stop, pure-walk hexagon neighborhoods. Depends only on
// (grid, stops, walk params, horizon), so it is built once and reused across
// every line-subset variant of the timetable.
struct AccessContext {
    WalkParams walk;
    std::int32_t horizon = 3600;
    // per hexagon index: stops within the access walk budget
    std::vector<std::vector<std::pair<StopIdx, std::int32_t>>> access;
    // per stop: (hexagon index, egress walk seconds), capped at horizon
    std::vector<std::vector<std::pair<std::uint32_t, std::int32_t>>> egress;
    // per hexagon index: hexagons reachable by pure walking within horizon
    std::vector<std::vector<std::uint32_t>> walk_neighbors;

    static AccessContext build(const HexGrid& grid, const std::vector<Stop>& stops,
                               const WalkParams& walk, std::int32_t horizon,
                               int threads = 1,
                               const WalkMatrix* walk_matrix = nullptr) {
        AccessContext ctx;
        ctx.walk = walk;
        ctx.horizon = horizon;
        const auto& hexes = grid.hexagons();
        const std::size_t n = hexes.size();
        ctx.access.resize(n);
        ctx.egress.resize(stops.size());
        ctx.walk_neighbors.resize(n);

        parallel_for(stops.size(), threads, [&](std::size_t s) {
            const GeoPoint& loc = stops[s].location;
            auto& out = ctx.egress[s];
            for (std::size_t i = 0; i < n; ++i) {
                const int sec = walk_seconds(great_circle_m(loc, hexes[i].center),
                                             walk.speed_mps, walk.detour);
                if (sec <= horizon)
                    out.emplace_back(static_cast<std::uint32_t>(i), sec);
            }
        });

        parallel_for(n, threads, [&](std::size_t i) {
            const GeoPoint& c = hexes[i].center;
            auto& acc = ctx.access[i];
            if (walk_matrix) {
                auto it = walk_matrix->find(hexes[i].id);
                if (it != walk_matrix->end())
                    for (const auto& [s, sec] : it->second)
                        if (sec <= walk.max_access_s) acc.emplace_back(s, sec);
            } else {
                for (StopIdx s = 0; s < stops.size(); ++s) {
                    const int sec = walk_seconds(great_circle_m(c, stops[s].location),
                                                 walk.speed_mps, walk.detour);
                    if (sec <= walk.max_access_s) acc.emplace_back(s, sec);
                }
            }
            auto& nb = ctx.walk_neighbors[i];
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    nb.push_back(static_cast<std::uint32_t>(j));
                    continue;
                }
                const int sec = walk_seconds(great_circle_m(c, hexes[j].center),
                                             walk.speed_mps, walk.detour);
                if (sec <= horizon) nb.push_back(static_cast<std::uint32_t>(j));
            }
        });
        return ctx;
    }
};

// Per-hexagon sociality scores for one timetable variant.
struct AccessibilityField {
    std::int32_t depart = 0;
    std::int32_t horizon = 0;
    std::string line_set_tag; // "full" or "without:<line id>"
    std::vector<HexId> hex_ids;        // grid order
    std::vector<std::int64_t> scores;  // aligned with hex_ids

    std::int64_t score_of(const HexGrid& grid, HexId id) const {
        return scores[grid.index_of(id)];
    }
};

// Hexagons whose barycenter is reachable within the time budget: the origin
// itself, anything walkable from the origin center, and anything walkable
// from a reached stop before the budget runs out.
inline std::vector<char> reachable_mask(const HexGrid& grid, const AccessContext& ctx,
                                        std::size_t origin_idx, const ArrivalState& st) {
    std::vector<char> mask(grid.size(), 0);
    mask[origin_idx] = 1;
    for (std::uint32_t j : ctx.walk_neighbors[origin_idx]) mask[j] = 1;
    const std::int32_t end = st.depart + st.horizon;
    for (StopIdx s = 0; s < st.arrival.size(); ++s) {
        const std::int32_t t = st.arrival[s];
        if (t == kUnreached) continue;
        for (const auto& [hidx, w] : ctx.egress[s])
            if (t + w <= end) mask[hidx] = 1;
    }
    return mask;
}

inline std::vector<HexId> reachable_hexes(const HexGrid& grid, const AccessContext& ctx,
                                          HexId origin, const ArrivalState& st) {
    const auto mask = reachable_mask(grid, ctx, grid.index_of(origin), st);
    std::vector<HexId> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(grid.hexagons()[i].id);
    return out;
}

inline std::int64_t population_in_mask(const HexGrid& grid, const std::vector<char>& mask) {
    std::int64_t total = 0;
    const auto& hexes = grid.hexagons();
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) total += hexes[i].population;
    return total;
}

// Residents reachable from one hexagon's barycenter. One scan.
inline std::int64_t accessibility_of(const HexGrid& grid, const Timetable& tt,
                                     const AccessContext& ctx, HexId hex,
                                     const Query& q, std::int32_t min_transfer_s,
                                     ScanCounter* counter = nullptr) {
    const std::size_t idx = grid.index_of(hex);
    const auto st = earliest_arrival(tt, Query{grid.hexagons()[idx].center, q.depart, q.horizon},
                                     ctx.access[idx], min_transfer_s);
    if (counter) counter->scans.fetch_add(1, std::memory_order_relaxed);
    return population_in_mask(grid, reachable_mask(grid, ctx, idx, st));
}

// One score per hexagon; origins are independent, so the loop parallelizes
// and the result does not depend on evaluation order.
inline AccessibilityField accessibility_field(const HexGrid& grid, const Timetable& tt,
                                              const AccessContext& ctx, const Query& q,
                                              std::int32_t min_transfer_s,
                                              int threads = 1,
                                              ScanCounter* counter = nullptr,
                                              std::string line_set_tag = "full") {
    if (q.horizon != ctx.horizon)
        throw invalid_input("access context was built for a different horizon");
    AccessibilityField field;
    field.depart = q.depart;
    field.horizon = q.horizon;
    field.line_set_tag = std::move(line_set_tag);
    const auto& hexes = grid.hexagons();
    field.hex_ids.resize(hexes.size());
    field.scores.assign(hexes.size(), 0);
    for (std::size_t i = 0; i < hexes.size(); ++i) field.hex_ids[i] = hexes[i].id;
    parallel_for(hexes.size(), threads, [&](std::size_t i) {
        const auto st = earliest_arrival(tt, Query{hexes[i].center, q.depart, q.horizon},
                                         ctx.access[i], min_transfer_s);
        if (counter) counter->scans.fetch_add(1, std::memory_order_relaxed);
        field.scores[i] = population_in_mask(grid, reachable_mask(grid, ctx, i, st));
    });
    return field;
}

} // namespace teq

#endif
