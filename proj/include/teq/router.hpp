#ifndef TEQ_ROUTER_HPP
#define TEQ_ROUTER_HPP

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "teq/hexgrid.hpp"
#include "teq/timetable.hpp"

namespace teq {

inline constexpr std::int32_t kUnreached = std::numeric_limits<std::int32_t>::max();

struct Query {
    GeoPoint origin;
    std::int32_t depart = 28800; // 8:00
    std::int32_t horizon = 3600; // 1 h budget
};

struct WalkParams {
    double speed_mps = 1.39;
    double detour = 1.3;
    std::int32_t max_access_s = 1200;
};

struct ArrivalState {
    enum class PredKind : std::uint8_t { none, origin_walk, connection, footpath };
    struct Pred {
        PredKind kind = PredKind::none;
        std::uint32_t conn = 0; // valid for kind == connection
        StopIdx from = 0;       // valid for kind == footpath
    };
    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

    std::int32_t depart = 0;
    std::int32_t horizon = 0;
    std::vector<std::int32_t> arrival;     // per stop, kUnreached if not reached
    std::vector<Pred> pred;                // per stop
    std::vector<std::uint32_t> trip_board; // per trip: boarding connection index
};

// Stops walkable from the hexagon barycenter within the access budget.
inline std::vector<std::pair<StopIdx, std::int32_t>> access_stops(
    const HexGrid& grid, HexId hex, const std::vector<Stop>& stops,
    const WalkParams& w) {
    const GeoPoint center = grid.hexagon(hex).center;
    std::vector<std::pair<StopIdx, std::int32_t>> out;
    for (StopIdx s = 0; s < stops.size(); ++s) {
        const int sec = walk_seconds(great_circle_m(center, stops[s].location),
                                     w.speed_mps, w.detour);
        if (sec <= w.max_access_s) out.emplace_back(s, sec);
    }
    return out;
}

// Connection Scan over the sorted timetable, one-to-all earliest arrivals
// within [depart, depart + horizon]. Boarding requires either the trip to be
// reachable already or arrival[from] + min_transfer_s <= dep. On every
// arrival improvement the outgoing footpaths are relaxed, cascading.
inline ArrivalState earliest_arrival(
    const Timetable& tt, const Query& q,
    const std::vector<std::pair<StopIdx, std::int32_t>>& access,
    std::int32_t min_transfer_s) {
    if (q.horizon <= 0) throw invalid_input("query horizon must be positive");
    ArrivalState st;
    st.depart = q.depart;
    st.horizon = q.horizon;
    st.arrival.assign(tt.stops.size(), kUnreached);
    st.pred.assign(tt.stops.size(), {});
    st.trip_board.assign(tt.trip_ids.size(), ArrivalState::npos);
    const std::int32_t end = q.depart + q.horizon;

    std::vector<StopIdx> fp_queue;
    auto relax_footpaths = [&](StopIdx from) {
        if (tt.footpaths.empty()) return;
        fp_queue.clear();
        fp_queue.push_back(from);
        while (!fp_queue.empty()) {
            const StopIdx u = fp_queue.back();
            fp_queue.pop_back();
            const std::int32_t tu = st.arrival[u];
            for (const Footpath& e : tt.footpaths[u]) {
                const std::int32_t tv = tu + e.duration_s;
                if (tv > end || tv >= st.arrival[e.to]) continue;
                st.arrival[e.to] = tv;
                st.pred[e.to] = {ArrivalState::PredKind::footpath, 0, u};
                fp_queue.push_back(e.to);
            }
        }
    };

    for (const auto& [s, walk] : access) {
        const std::int32_t t = q.depart + walk;
        if (t > end || t >= st.arrival[s]) continue;
        st.arrival[s] = t;
        st.pred[s] = {ArrivalState::PredKind::origin_walk, 0, 0};
    }
    for (const auto& [s, walk] : access)
        if (st.arrival[s] != kUnreached) relax_footpaths(s);

    // first connection departing at or after `depart`
    const auto first = std::lower_bound(
        tt.connections.begin(), tt.connections.end(), q.depart,
        [](const Connection& c, std::int32_t t) { return c.dep < t; });

    for (auto it = first; it != tt.connections.end(); ++it) {
        const Connection& c = *it;
        if (c.dep > end) break;
        bool on_board = st.trip_board[c.trip] != ArrivalState::npos;
        if (!on_board && st.arrival[c.from] != kUnreached &&
            st.arrival[c.from] + min_transfer_s <= c.dep) {
            on_board = true;
            st.trip_board[c.trip] =
                static_cast<std::uint32_t>(it - tt.connections.begin());
        }
        if (!on_board) continue;
        if (c.arr <= end && c.arr < st.arrival[c.to]) {
            st.arrival[c.to] = c.arr;
            st.pred[c.to] = {ArrivalState::PredKind::connection,
                             static_cast<std::uint32_t>(it - tt.connections.begin()), 0};
            relax_footpaths(c.to);
        }
    }
    return st;
}

// The connections actually ridden by earliest-arrival paths from one origin,
// each counted once no matter how many destinations share it.
struct JourneyTree {
    HexId origin_hex = 0;
    std::vector<std::uint32_t> used; // connection indices, ascending
};

inline JourneyTree journey_tree(const ArrivalState& st, const Timetable& tt,
                                HexId origin_hex = 0) {
    JourneyTree tree;
    tree.origin_hex = origin_hex;
    std::vector<char> used(tt.connections.size(), 0);
    enum : std::uint8_t { kFresh = 0, kOpen = 1, kDone = 2 };
    std::vector<std::uint8_t> mark(tt.stops.size(), kFresh);
    std::vector<StopIdx> path;

    auto mark_trip_segment = [&](std::uint32_t conn_idx) -> StopIdx {
        const Connection& c = tt.connections[conn_idx];
        const std::uint32_t board = st.trip_board[c.trip];
        if (board == ArrivalState::npos)
            throw state_error("journey tree: used connection on an unboarded trip");
        const std::int32_t board_seq = tt.connections[board].seq;
        for (std::uint32_t ci : tt.trip_conns[c.trip]) {
            const std::int32_t s = tt.connections[ci].seq;
            if (s >= board_seq && s <= c.seq) used[ci] = 1;
        }
        return tt.connections[board].from;
    };

    const std::size_t step_limit = tt.stops.size() + tt.connections.size() + 2;
    for (StopIdx s0 = 0; s0 < tt.stops.size(); ++s0) {
        if (st.arrival[s0] == kUnreached || mark[s0] == kDone) continue;
        path.clear();
        StopIdx cur = s0;
        std::size_t steps = 0;
        while (true) {
            if (++steps > step_limit || mark[cur] == kOpen)
                throw state_error("journey tree: cyclic predecessor chain");
            if (mark[cur] == kDone) break;
            mark[cur] = kOpen;
            path.push_back(cur);
            const auto& p = st.pred[cur];
            if (p.kind == ArrivalState::PredKind::origin_walk ||
                p.kind == ArrivalState::PredKind::none)
                break;
            if (p.kind == ArrivalState::PredKind::footpath) {
                cur = p.from;
            } else {
                cur = mark_trip_segment(p.conn);
            }
        }
        for (StopIdx s : path) mark[s] = kDone;
    }

    for (std::uint32_t i = 0; i < used.size(); ++i)
        if (used[i]) tree.used.push_back(i);
    return tree;
}

} // namespace teq

#endif
