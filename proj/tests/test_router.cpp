#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "oracles.hpp"
#include "teq/router.hpp"

using namespace teq;

namespace {

// A two-stop, one-connection timetable built by hand.
Timetable tiny_timetable() {
    Timetable tt;
    tt.stops.push_back({"A", "", {45.0, 7.60}});
    tt.stops.push_back({"B", "", {45.0, 7.65}});
    tt.stop_index = {{"A", 0}, {"B", 1}};
    tt.lines.push_back({"L1", Mode::bus, "L1"});
    tt.line_index = {{"L1", 0}};
    tt.trip_ids.push_back("T1");
    Connection c;
    c.from = 0;
    c.to = 1;
    c.dep = 28800;
    c.arr = 29400;
    c.trip = 0;
    c.line = 0;
    c.seq = 0;
    c.length_m = 3000.0;
    tt.connections.push_back(c);
    tt.sort_and_index();
    tt.footpaths.assign(tt.stops.size(), {});
    return tt;
}

// Validates the predecessor structure of an arrival state against the
// boarding model, and that journey_tree marked exactly the ridden legs.
void check_tree_consistency(const Timetable& tt, const ArrivalState& st,
                            const std::vector<std::pair<StopIdx, std::int32_t>>& access,
                            std::int32_t min_transfer_s, const JourneyTree& tree) {
    std::map<StopIdx, std::int32_t> walk;
    for (const auto& [s, w] : access)
        if (!walk.count(s) || walk[s] > w) walk[s] = w;
    const std::set<std::uint32_t> used(tree.used.begin(), tree.used.end());
    for (StopIdx s = 0; s < tt.stops.size(); ++s) {
        if (st.arrival[s] == kUnreached) continue;
        const auto& p = st.pred[s];
        switch (p.kind) {
            case ArrivalState::PredKind::origin_walk:
                REQUIRE(walk.count(s) == 1);
                REQUIRE(st.arrival[s] == st.depart + walk[s]);
                break;
            case ArrivalState::PredKind::footpath: {
                bool found = false;
                for (const auto& e : tt.footpaths[p.from])
                    if (e.to == s && st.arrival[p.from] + e.duration_s == st.arrival[s])
                        found = true;
                REQUIRE(found);
                break;
            }
            case ArrivalState::PredKind::connection: {
                const auto& c = tt.connections[p.conn];
                REQUIRE(c.to == s);
                REQUIRE(c.arr == st.arrival[s]);
                const std::uint32_t bi = st.trip_board[c.trip];
                REQUIRE(bi != ArrivalState::npos);
                const auto& b = tt.connections[bi];
                REQUIRE(b.trip == c.trip);
                REQUIRE(b.seq <= c.seq);
                REQUIRE(st.arrival[b.from] != kUnreached);
                REQUIRE(st.arrival[b.from] + min_transfer_s <= b.dep);
                // every leg between boarding and alighting is in the tree
                for (std::uint32_t ci : tt.trip_conns[c.trip]) {
                    const auto& leg = tt.connections[ci];
                    if (leg.seq >= b.seq && leg.seq <= c.seq)
                        REQUIRE(used.count(ci) == 1);
                }
                break;
            }
            case ArrivalState::PredKind::none:
                FAIL("reached stop without predecessor");
        }
    }
}

} // namespace

TEST_CASE("empty timetable leaves only origin-walk arrivals") {
    Timetable tt;
    tt.stops.push_back({"A", "", {45.0, 7.60}});
    tt.stops.push_back({"B", "", {45.0, 7.65}});
    tt.footpaths.assign(2, {});
    const Query q{{45.0, 7.6}, 28800, 3600};
    const auto st = earliest_arrival(tt, q, {{0, 120}}, 60);
    REQUIRE(st.arrival[0] == 28920);
    REQUIRE(st.arrival[1] == kUnreached);
    REQUIRE(st.pred[0].kind == ArrivalState::PredKind::origin_walk);
}

TEST_CASE("a single reachable connection is ridden") {
    const Timetable tt = tiny_timetable();
    const Query q{{45.0, 7.6}, 28800, 3600};
    const auto st = earliest_arrival(tt, q, {{0, 0}}, 0);
    REQUIRE(st.arrival[1] == 29400);
    REQUIRE(st.pred[1].kind == ArrivalState::PredKind::connection);
}

TEST_CASE("boarding requires the transfer slack") {
    const Timetable tt = tiny_timetable();
    const Query q{{45.0, 7.6}, 28800, 3600};
    // walk 0 means arrival at A exactly at departure; 60 s slack blocks it
    const auto st = earliest_arrival(tt, q, {{0, 0}}, 60);
    REQUIRE(st.arrival[1] == kUnreached);
}

TEST_CASE("a reachable trip continues without re-checking slack") {
    Timetable tt = tiny_timetable();
    // append a second leg of the same trip departing immediately on arrival
    Connection c;
    c.from = 1;
    c.to = 0;
    c.dep = 29400;
    c.arr = 30000;
    c.trip = 0;
    c.line = 0;
    c.seq = 1;
    c.length_m = 3000.0;
    tt.connections.push_back(c);
    tt.sort_and_index();
    const Query q{{45.0, 7.6}, 28700, 3600};
    const auto st = earliest_arrival(tt, q, {{0, 40}}, 60);
    // boarded at A (28740 + 60 <= 28800); the 29400 departure at B is ridden
    // even though 29400 - 60 < arrival[B]  + slack would fail a fresh boarding
    REQUIRE(st.arrival[1] == 29400);
}

TEST_CASE("horizon discards late arrivals") {
    const Timetable tt = tiny_timetable();
    const Query q{{45.0, 7.6}, 28800, 300}; // budget ends 29100 < arr 29400
    const auto st = earliest_arrival(tt, q, {{0, 0}}, 0);
    REQUIRE(st.arrival[1] == kUnreached);
}

TEST_CASE("connection scan equals time-expanded Dijkstra on random instances") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto ri = oracle::random_instance(seed);
        const Query q{{45.0, 7.6}, 28800, 3600};
        const auto st = earliest_arrival(ri.tt, q, ri.access, ri.min_transfer_s);
        const auto expected = oracle::time_expanded_dijkstra(ri.tt, q.depart, q.horizon,
                                                             ri.access, ri.min_transfer_s);
        for (StopIdx s = 0; s < ri.tt.stops.size(); ++s) {
            INFO("seed " << seed << " stop " << s);
            REQUIRE(st.arrival[s] == expected[s]);
        }
    }
}

TEST_CASE("horizon soundness on random instances") {
    for (std::uint64_t seed = 40; seed < 48; ++seed) {
        const auto ri = oracle::random_instance(seed);
        std::mt19937_64 rng(seed * 3 + 1);
        const std::int32_t horizon = std::uniform_int_distribution<int>(600, 5400)(rng);
        const Query q{{45.0, 7.6}, 28800, horizon};
        const auto st = earliest_arrival(ri.tt, q, ri.access, ri.min_transfer_s);
        for (StopIdx s = 0; s < ri.tt.stops.size(); ++s) {
            if (st.arrival[s] == kUnreached) continue;
            REQUIRE(st.arrival[s] >= q.depart);
            REQUIRE(st.arrival[s] <= q.depart + horizon);
        }
    }
}

TEST_CASE("identical inputs produce identical predecessor structures") {
    const auto ri = oracle::random_instance(99);
    const Query q{{45.0, 7.6}, 28800, 3600};
    const auto a = earliest_arrival(ri.tt, q, ri.access, ri.min_transfer_s);
    const auto b = earliest_arrival(ri.tt, q, ri.access, ri.min_transfer_s);
    REQUIRE(a.arrival == b.arrival);
    REQUIRE(a.trip_board == b.trip_board);
    for (StopIdx s = 0; s < ri.tt.stops.size(); ++s) {
        REQUIRE(a.pred[s].kind == b.pred[s].kind);
        REQUIRE(a.pred[s].conn == b.pred[s].conn);
        REQUIRE(a.pred[s].from == b.pred[s].from);
    }
}

TEST_CASE("removing any line never improves any arrival") {
    for (std::uint64_t seed = 60; seed < 66; ++seed) {
        const auto ri = oracle::random_instance(seed);
        const Query q{{45.0, 7.6}, 28800, 3600};
        const auto base = earliest_arrival(ri.tt, q, ri.access, ri.min_transfer_s);
        for (const auto& line : ri.tt.lines) {
            const Timetable reduced = remove_line(ri.tt, line.id);
            const auto st = earliest_arrival(reduced, q, ri.access, ri.min_transfer_s);
            for (StopIdx s = 0; s < ri.tt.stops.size(); ++s)
                REQUIRE(st.arrival[s] >= base.arrival[s]);
        }
    }
}

TEST_CASE("access stops at the barycenter cost zero seconds") {
    HexGrid grid = HexGrid::build({44.95, 7.55}, {45.05, 7.70}, 1000.0);
    const auto& hex = grid.hexagons()[grid.size() / 2];
    std::vector<Stop> stops;
    stops.push_back({"AT", "", hex.center});
    stops.push_back({"FAR", "", {hex.center.lat + 0.5, hex.center.lon}});
    const auto acc = access_stops(grid, hex.id, stops, WalkParams{});
    REQUIRE(acc.size() == 1);
    REQUIRE(acc[0].first == 0);
    REQUIRE(acc[0].second == 0);
}

TEST_CASE("access stops match a brute-force filter on random stops") {
    HexGrid grid = HexGrid::build({44.95, 7.55}, {45.05, 7.70}, 1000.0);
    const auto& hex = grid.hexagons()[3];
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lat(44.94, 45.06), lon(7.54, 7.71);
    std::vector<Stop> stops;
    for (int i = 0; i < 50; ++i)
        stops.push_back({"S" + std::to_string(i), "", {lat(rng), lon(rng)}});
    const WalkParams w;
    const auto acc = access_stops(grid, hex.id, stops, w);
    std::map<StopIdx, std::int32_t> got(acc.begin(), acc.end());
    for (StopIdx s = 0; s < stops.size(); ++s) {
        const int sec = walk_seconds(great_circle_m(hex.center, stops[s].location),
                                     w.speed_mps, w.detour);
        if (sec <= w.max_access_s) {
            REQUIRE(got.count(s) == 1);
            REQUIRE(got[s] == sec);
        } else {
            REQUIRE(got.count(s) == 0);
        }
    }
}

TEST_CASE("walk-only arrival states yield empty journey trees") {
    Timetable tt;
    tt.stops.push_back({"A", "", {45.0, 7.60}});
    tt.footpaths.assign(1, {});
    const Query q{{45.0, 7.6}, 28800, 3600};
    const auto st = earliest_arrival(tt, q, {{0, 100}}, 60);
    const auto tree = journey_tree(st, tt);
    REQUIRE(tree.used.empty());
}

TEST_CASE("a boarding shared by two destinations is counted once") {
    // one trip A -> B -> C; both B and C alight from the same boarding at A
    Timetable tt;
    tt.stops.push_back({"A", "", {45.00, 7.60}});
    tt.stops.push_back({"B", "", {45.01, 7.60}});
    tt.stops.push_back({"C", "", {45.02, 7.60}});
    tt.stop_index = {{"A", 0}, {"B", 1}, {"C", 2}};
    tt.lines.push_back({"L1", Mode::bus, "L1"});
    tt.trip_ids.push_back("T1");
    auto mk = [&](StopIdx f, StopIdx t, int dep, int arr, int seq) {
        Connection c;
        c.from = f;
        c.to = t;
        c.dep = dep;
        c.arr = arr;
        c.trip = 0;
        c.line = 0;
        c.seq = seq;
        c.length_m = 1100.0;
        tt.connections.push_back(c);
    };
    mk(0, 1, 28900, 29200, 0);
    mk(1, 2, 29300, 29600, 1);
    tt.sort_and_index();
    tt.footpaths.assign(3, {});
    const Query q{{45.0, 7.6}, 28800, 3600};
    const auto st = earliest_arrival(tt, q, {{0, 0}}, 60);
    REQUIRE(st.arrival[1] == 29200);
    REQUIRE(st.arrival[2] == 29600);
    const auto tree = journey_tree(st, tt);
    REQUIRE(tree.used.size() == 2); // each leg once, not once per destination
}

TEST_CASE("journey trees are internally consistent on random instances") {
    for (std::uint64_t seed = 101; seed < 121; ++seed) {
        const auto ri = oracle::random_instance(seed);
        const Query q{{45.0, 7.6}, 28800, 3600};
        const auto st = earliest_arrival(ri.tt, q, ri.access, ri.min_transfer_s);
        const auto tree = journey_tree(st, ri.tt);
        // no duplicates
        std::set<std::uint32_t> uniq(tree.used.begin(), tree.used.end());
        REQUIRE(uniq.size() == tree.used.size());
        check_tree_consistency(ri.tt, st, ri.access, ri.min_transfer_s, tree);
    }
}

TEST_CASE("journey tree matches the hand-computed optimum on a fixed network") {
    // two routes to C: direct slow trip vs transfer via B; the transfer wins
    Timetable tt;
    tt.stops.push_back({"A", "", {45.00, 7.60}});
    tt.stops.push_back({"B", "", {45.01, 7.60}});
    tt.stops.push_back({"C", "", {45.02, 7.60}});
    tt.stop_index = {{"A", 0}, {"B", 1}, {"C", 2}};
    tt.lines.push_back({"SLOW", Mode::bus, "slow"});
    tt.lines.push_back({"FAST", Mode::rail, "fast"});
    tt.trip_ids = {"TS", "TF1", "TF2"};
    auto mk = [&](StopIdx f, StopIdx t, int dep, int arr, TripIdx trip, LineIdx line,
                  int seq) {
        Connection c;
        c.from = f;
        c.to = t;
        c.dep = dep;
        c.arr = arr;
        c.trip = trip;
        c.line = line;
        c.seq = seq;
        c.length_m = 1100.0;
        tt.connections.push_back(c);
    };
    mk(0, 2, 28900, 30600, 0, 0, 0); // slow direct, arrives 8:30
    mk(0, 1, 28900, 29100, 1, 1, 0); // fast leg 1
    mk(1, 2, 29400, 29700, 2, 1, 0); // fast leg 2 (separate trip, needs slack)
    tt.sort_and_index();
    tt.footpaths.assign(3, {});
    const Query q{{45.0, 7.6}, 28800, 3600};
    const auto st = earliest_arrival(tt, q, {{0, 0}}, 60);
    REQUIRE(st.arrival[2] == 29700);
    const auto tree = journey_tree(st, tt);
    // used: the two fast legs; the slow direct trip is never part of the tree
    REQUIRE(tree.used.size() == 2);
    for (std::uint32_t ci : tree.used) REQUIRE(tt.connections[ci].line == 1);
}
