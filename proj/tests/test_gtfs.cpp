#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "helpers.hpp"
#include "teq/timetable.hpp"

using namespace teq;
using testutil::TempDir;
using testutil::write_file;
using testutil::write_minimal_feed;

namespace {

// Sakamoto's day-of-week, independent of std::chrono: 0 = Monday.
int weekday_sakamoto(int ymd) {
    int y = ymd / 10000, m = (ymd / 100) % 100, d = ymd % 100;
    static const int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
    if (m < 3) y -= 1;
    const int dow_sun0 = (y + y / 4 - y / 100 + y / 400 + t[m - 1] + d) % 7;
    return (dow_sun0 + 6) % 7;
}

using ConnKey = std::tuple<std::string, std::string, int, int, std::string>;

// Direct expansion of the feed: group stop_times per trip, emit hops for
// trips whose service is active, without any of the library's machinery.
std::multiset<ConnKey> naive_expansion(const Feed& feed, int ymd) {
    std::set<std::string> active;
    const int wd = weekday_sakamoto(ymd);
    for (const auto& c : feed.calendars)
        if (c.weekday[wd] && c.start_ymd <= ymd && ymd <= c.end_ymd)
            active.insert(c.service_id);
    for (const auto& cd : feed.calendar_dates) {
        if (cd.ymd != ymd) continue;
        if (cd.exception_type == 1) active.insert(cd.service_id);
        else active.erase(cd.service_id);
    }
    std::map<std::string, std::vector<GtfsStopTime>> per_trip;
    for (const auto& st : feed.stop_times)
        per_trip[feed.trips[st.trip].id].push_back(st);
    std::multiset<ConnKey> out;
    for (auto& [trip_id, sts] : per_trip) {
        const auto& trip = feed.trips[feed.trip_index.at(trip_id)];
        if (!active.count(trip.service_id)) continue;
        std::sort(sts.begin(), sts.end(),
                  [](const GtfsStopTime& a, const GtfsStopTime& b) { return a.seq < b.seq; });
        for (std::size_t i = 0; i + 1 < sts.size(); ++i) {
            if (sts[i].stop == sts[i + 1].stop) continue;
            out.insert({feed.stops[sts[i].stop].id, feed.stops[sts[i + 1].stop].id,
                        sts[i].dep, sts[i + 1].arr, trip.route_id});
        }
    }
    return out;
}

std::multiset<ConnKey> timetable_multiset(const Timetable& tt) {
    std::multiset<ConnKey> out;
    for (const auto& c : tt.connections)
        out.insert({tt.stops[c.from].id, tt.stops[c.to].id, c.dep, c.arr,
                    tt.lines[c.line].id});
    return out;
}

} // namespace

TEST_CASE("gtfs time parsing handles both hour widths and overnight hours") {
    REQUIRE(parse_gtfs_time("08:00:00") == 28800);
    REQUIRE(parse_gtfs_time("8:00:00") == 28800);
    REQUIRE(parse_gtfs_time("25:10:00") == 90600);
    REQUIRE_THROWS_AS(parse_gtfs_time("8:00"), invalid_input);
    REQUIRE_THROWS_AS(parse_gtfs_time("08:61:00"), invalid_input);
    REQUIRE_THROWS_AS(parse_gtfs_time("abc"), invalid_input);
}

TEST_CASE("minimal feed parses with expected counts") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    REQUIRE(feed.stops.size() == 3);
    REQUIRE(feed.routes.size() == 2);
    REQUIRE(feed.trips.size() == 3);
    REQUIRE(feed.stop_times.size() == 7);
}

TEST_CASE("missing stop_times.txt is reported by name") {
    TempDir dir;
    write_minimal_feed(dir.path());
    std::filesystem::remove(dir.path() / "stop_times.txt");
    REQUIRE_THROWS_WITH(parse_feed(dir.path()),
                        Catch::Matchers::ContainsSubstring("stop_times.txt"));
}

TEST_CASE("parse errors carry file and line number") {
    TempDir dir;
    write_minimal_feed(dir.path());
    write_file(dir.path() / "stop_times.txt",
               "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
               "T1,08:00:00,08:00:00,A,1\n"
               "T1,bad-time,08:10:00,B,2\n");
    try {
        parse_feed(dir.path());
        FAIL("expected parse error");
    } catch (const invalid_input& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("stop_times.txt:3") != std::string::npos);
        REQUIRE(msg.find("bad-time") != std::string::npos);
    }
}

TEST_CASE("stop_time referencing an unknown trip or stop fails") {
    TempDir dir;
    write_minimal_feed(dir.path());
    write_file(dir.path() / "stop_times.txt",
               "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
               "NOPE,08:00:00,08:00:00,A,1\n");
    REQUIRE_THROWS_WITH(parse_feed(dir.path()),
                        Catch::Matchers::ContainsSubstring("NOPE"));
    write_file(dir.path() / "stop_times.txt",
               "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
               "T1,08:00:00,08:00:00,ZZZ,1\n");
    REQUIRE_THROWS_WITH(parse_feed(dir.path()),
                        Catch::Matchers::ContainsSubstring("ZZZ"));
}

TEST_CASE("trip referencing an unknown route fails") {
    TempDir dir;
    write_minimal_feed(dir.path());
    write_file(dir.path() / "trips.txt",
               "route_id,service_id,trip_id\n"
               "R9,WD,T1\n");
    REQUIRE_THROWS_WITH(parse_feed(dir.path()),
                        Catch::Matchers::ContainsSubstring("R9"));
}

TEST_CASE("timetable expansion produces consecutive-stop connections") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    // 2024-01-03 is a Wednesday
    const Timetable tt = build_timetable(feed, 20240103);
    // T1 -> 2 connections, T2 -> 1, T3 weekend -> 0
    REQUIRE(tt.connections.size() == 3);
    const auto& c0 = tt.connections[0];
    REQUIRE(tt.stops[c0.from].id == "A");
    REQUIRE(tt.stops[c0.to].id == "B");
    REQUIRE(c0.dep == 28800);
    REQUIRE(c0.arr == 29400);
    const auto& c1 = tt.connections[1];
    REQUIRE(tt.stops[c1.from].id == "B");
    REQUIRE(tt.stops[c1.to].id == "C");
    REQUIRE(c1.dep == 29400);
    REQUIRE(c1.arr == 30000);
}

TEST_CASE("weekday-only trips contribute nothing on a Sunday") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    // 2024-01-07 is a Sunday; only T3 (weekend service) runs
    const Timetable tt = build_timetable(feed, 20240107);
    REQUIRE(tt.connections.size() == 1);
    REQUIRE(tt.lines[tt.connections[0].line].id == "R2");
}

TEST_CASE("calendar_dates exceptions add and remove service") {
    TempDir dir;
    write_minimal_feed(dir.path());
    write_file(dir.path() / "calendar_dates.txt",
               "service_id,date,exception_type\n"
               "WD,20240103,2\n"
               "WE,20240103,1\n");
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    REQUIRE(tt.connections.size() == 1); // only the weekend trip, added back
    REQUIRE(tt.lines[tt.connections[0].line].id == "R2");
}

TEST_CASE("expansion equals the naive oracle on the minimal feed") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    for (int ymd : {20240103, 20240106, 20240107, 20240108}) {
        const Timetable tt = build_timetable(feed, ymd);
        REQUIRE(timetable_multiset(tt) == naive_expansion(feed, ymd));
    }
}

TEST_CASE("connections are sorted by departure with deterministic ties") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    for (std::size_t i = 1; i < tt.connections.size(); ++i)
        REQUIRE(tt.connections[i - 1].dep <= tt.connections[i].dep);
}

TEST_CASE("frequencies expand at headway multiples over the window") {
    TempDir dir;
    write_minimal_feed(dir.path());
    write_file(dir.path() / "frequencies.txt",
               "trip_id,start_time,end_time,headway_secs,exact_times\n"
               "T1,08:00:00,10:00:00,600,0\n");
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    // T1 runs 12 times (2 connections each), T2 once (1 connection)
    std::size_t t1_conns = 0;
    for (const auto& c : tt.connections)
        if (tt.trip_ids[c.trip].rfind("T1#", 0) == 0) ++t1_conns;
    REQUIRE(t1_conns == 24);
    // first run departs at the window start, not at the template time
    bool found_first = false;
    for (const auto& c : tt.connections)
        if (tt.trip_ids[c.trip] == "T1#0" && c.seq == 0) {
            REQUIRE(c.dep == 28800);
            found_first = true;
        }
    REQUIRE(found_first);
}

TEST_CASE("shape_dist_traveled deltas are used only when meter-sane") {
    TempDir dir;
    write_minimal_feed(dir.path());
    // A->B great-circle is ~1112 m; 1500 is within [0.5x, 3x], 150000 is not
    write_file(dir.path() / "stop_times.txt",
               "trip_id,arrival_time,departure_time,stop_id,stop_sequence,shape_dist_traveled\n"
               "T1,08:00:00,08:00:00,A,1,0\n"
               "T1,08:10:00,08:10:00,B,2,1500\n"
               "T1,08:20:00,08:20:00,C,3,151500\n");
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    REQUIRE(tt.connections.size() == 2); // only T1 has stop_times here
    const double gc_ab = great_circle_m({45.000, 7.600}, {45.010, 7.600});
    const double gc_bc = great_circle_m({45.010, 7.600}, {45.020, 7.600});
    for (const auto& c : tt.connections) {
        if (tt.stops[c.from].id == "A" && tt.stops[c.to].id == "B")
            REQUIRE(c.length_m == 1500.0);
        if (tt.stops[c.from].id == "B" && tt.stops[c.to].id == "C")
            REQUIRE_THAT(c.length_m, Catch::Matchers::WithinRel(gc_bc, 1e-12));
    }
    (void)gc_ab;
}

TEST_CASE("footpath duration applies detour, speed and the minimum floor") {
    std::vector<Stop> stops;
    stops.push_back({"A", "", {45.0, 7.6}});
    // ~100 m north
    stops.push_back({"B", "", {45.0 + 100.0 / 111194.926644559, 7.6}});
    FootpathParams p;
    p.radius_m = 500;
    p.min_transfer_s = 0;
    const auto fp = build_footpaths(stops, p);
    REQUIRE(fp[0].size() == 1);
    REQUIRE(fp[0][0].to == 1);
    REQUIRE(fp[0][0].duration_s == 94); // ceil(1.3 * 100 / 1.39)
    REQUIRE(fp[1].size() == 1);
    REQUIRE(fp[1][0].duration_s == 94);
}

TEST_CASE("stops beyond the radius get no footpath") {
    std::vector<Stop> stops;
    stops.push_back({"A", "", {45.0, 7.6}});
    stops.push_back({"B", "", {45.0 + 600.0 / 111194.926644559, 7.6}});
    FootpathParams p;
    p.radius_m = 500;
    const auto fp = build_footpaths(stops, p);
    REQUIRE(fp[0].empty());
    REQUIRE(fp[1].empty());
}

TEST_CASE("transfers.txt minimum times override shorter computed walks") {
    std::vector<Stop> stops;
    stops.push_back({"A", "", {45.0, 7.6}});
    stops.push_back({"B", "", {45.0 + 100.0 / 111194.926644559, 7.6}});
    std::unordered_map<std::string, StopIdx> index{{"A", 0}, {"B", 1}};
    std::vector<GtfsTransfer> transfers{{"A", "B", 2, 180}};
    FootpathParams p;
    p.radius_m = 500;
    p.min_transfer_s = 0;
    const auto fp = build_footpaths(stops, p, transfers, &index);
    REQUIRE(fp[0][0].duration_s == 180);
    REQUIRE(fp[1][0].duration_s == 180); // symmetric closure
}

TEST_CASE("footpath sets are symmetric on random stop clouds") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> lat(44.99, 45.02), lon(7.58, 7.62);
    std::vector<Stop> stops;
    for (int i = 0; i < 60; ++i)
        stops.push_back({"S" + std::to_string(i), "", {lat(rng), lon(rng)}});
    const auto fp = build_footpaths(stops, FootpathParams{});
    std::set<std::tuple<StopIdx, StopIdx, std::int32_t>> edges;
    for (StopIdx u = 0; u < stops.size(); ++u)
        for (const auto& e : fp[u]) edges.insert({u, e.to, e.duration_s});
    for (const auto& [u, v, d] : edges) REQUIRE(edges.count({v, u, d}) == 1);
    REQUIRE_FALSE(edges.empty());
}

TEST_CASE("remove_line drops exactly that line's connections") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    std::size_t r1_count = 0;
    for (const auto& c : tt.connections)
        if (tt.lines[c.line].id == "R1") ++r1_count;
    const Timetable without = remove_line(tt, "R1");
    REQUIRE(without.connections.size() == tt.connections.size() - r1_count);
    for (const auto& c : without.connections) REQUIRE(without.lines[c.line].id != "R1");
    REQUIRE(without.stops.size() == tt.stops.size());
    REQUIRE(without.lines.size() == tt.lines.size());
    // input untouched
    REQUIRE(tt.connections.size() == 3);
}

TEST_CASE("removing a line with no connections on the date is a no-op") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103); // weekday: R2 is idle
    const Timetable without = remove_line(tt, "R2");
    REQUIRE(timetable_multiset(without) == timetable_multiset(tt));
}

TEST_CASE("remove_line rejects unknown line ids") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    REQUIRE_THROWS_AS(remove_line(tt, "nope"), invalid_input);
}

TEST_CASE("per-line removals partition the connection set") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    std::size_t removed_total = 0;
    for (const auto& line : tt.lines) {
        const Timetable without = remove_line(tt, line.id);
        removed_total += tt.connections.size() - without.connections.size();
    }
    REQUIRE(removed_total == tt.connections.size());
}

TEST_CASE("remove_line commutes") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    const Timetable tt = build_timetable(feed, 20240103);
    const Timetable ab = remove_line(remove_line(tt, "R1"), "R2");
    const Timetable ba = remove_line(remove_line(tt, "R2"), "R1");
    REQUIRE(timetable_multiset(ab) == timetable_multiset(ba));
}

TEST_CASE("line grouping by short name merges routes") {
    TempDir dir;
    write_minimal_feed(dir.path());
    write_file(dir.path() / "routes.txt",
               "route_id,route_short_name,route_long_name,route_type\n"
               "R1,10,Mainline A,3\n"
               "R2,10,Mainline B,0\n");
    const Feed feed = parse_feed(dir.path());
    const Timetable by_route = build_timetable(feed, 20240103, LineGrouping::route_id);
    const Timetable by_name = build_timetable(feed, 20240103, LineGrouping::short_name);
    REQUIRE(by_route.lines.size() == 2);
    REQUIRE(by_name.lines.size() == 1);
    REQUIRE(by_name.lines[0].id == "10");
}

TEST_CASE("default service date is the first active Wednesday") {
    TempDir dir;
    write_minimal_feed(dir.path());
    const Feed feed = parse_feed(dir.path());
    REQUIRE(default_service_date(feed) == 20240103); // Jan 3rd 2024, Wednesday
}
