#ifndef TEQ_TIMETABLE_HPP
#define TEQ_TIMETABLE_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "teq/gtfs.hpp"

namespace teq {

using StopIdx = std::uint32_t;
using LineIdx = std::uint32_t;
using TripIdx = std::uint32_t;

struct Stop {
    std::string id;
    std::string name;
    GeoPoint location;
};

struct Line {
    std::string id;
    Mode mode = Mode::other;
    std::string name;
};

struct Connection {
    StopIdx from = 0;
    StopIdx to = 0;
    std::int32_t dep = 0;
    std::int32_t arr = 0;
    TripIdx trip = 0;
    LineIdx line = 0;
    std::int32_t seq = 0;     // position within the trip, for stable ordering
    double length_m = 0.0;
};

struct Footpath {
    StopIdx to = 0;
    std::int32_t duration_s = 0;
};

// One service day of elementary vehicle movements, sorted by departure time.
// Immutable after assembly; shared read-only across scan workers.
struct Timetable {
    int service_ymd = 0;
    std::vector<Stop> stops;
    std::vector<Line> lines;
    std::vector<Connection> connections;
    std::vector<std::vector<Footpath>> footpaths; // indexed by from-stop
    std::vector<std::string> trip_ids;
    std::vector<std::vector<std::uint32_t>> trip_conns; // per trip, seq order
    std::unordered_map<std::string, StopIdx> stop_index;
    std::unordered_map<std::string, LineIdx> line_index;

    LineIdx line_of(const std::string& line_id) const {
        auto it = line_index.find(line_id);
        if (it == line_index.end())
            throw invalid_input("unknown line id '" + line_id + "'");
        return it->second;
    }

    void sort_and_index() {
        std::sort(connections.begin(), connections.end(),
                  [](const Connection& a, const Connection& b) {
                      return std::tie(a.dep, a.arr, a.trip, a.seq) <
                             std::tie(b.dep, b.arr, b.trip, b.seq);
                  });
        trip_conns.assign(trip_ids.size(), {});
        for (std::uint32_t i = 0; i < connections.size(); ++i)
            trip_conns[connections[i].trip].push_back(i);
        // stable sort above keeps seq order within a trip, but make it explicit
        for (auto& tc : trip_conns)
            std::sort(tc.begin(), tc.end(), [this](std::uint32_t a, std::uint32_t b) {
                return connections[a].seq < connections[b].seq;
            });
    }
};

// Grouping of GTFS routes into scoreable lines.
enum class LineGrouping { route_id, short_name };

namespace detail {

inline std::string line_key(const GtfsRoute& r, LineGrouping g) {
    if (g == LineGrouping::short_name && !r.short_name.empty()) return r.short_name;
    return r.id;
}

inline double hop_length_m(const GtfsStopTime& a, const GtfsStopTime& b,
                           const GeoPoint& pa, const GeoPoint& pb) {
    const double gc = great_circle_m(pa, pb);
    if (a.has_shape_dist && b.has_shape_dist) {
        const double delta = b.shape_dist - a.shape_dist;
        // accept the shape delta only when it is plausibly in meters
        if (delta >= 0.0 && delta >= 0.5 * gc && delta <= 3.0 * gc && delta > 0.0)
            return delta;
    }
    return gc;
}

} // namespace detail

// Expands every trip active on `service_ymd` into consecutive-stop
// connections. Footpaths are attached separately (build_footpaths).
inline Timetable build_timetable(const Feed& feed, int service_ymd,
                                 LineGrouping grouping = LineGrouping::route_id) {
    Timetable tt;
    tt.service_ymd = service_ymd;
    tt.stops.reserve(feed.stops.size());
    for (const auto& s : feed.stops) {
        tt.stop_index[s.id] = static_cast<StopIdx>(tt.stops.size());
        tt.stops.push_back(Stop{s.id, s.name, s.location});
    }
    std::vector<LineIdx> route_line(feed.routes.size());
    for (std::size_t i = 0; i < feed.routes.size(); ++i) {
        const auto& r = feed.routes[i];
        const std::string key = detail::line_key(r, grouping);
        auto it = tt.line_index.find(key);
        if (it == tt.line_index.end()) {
            const LineIdx li = static_cast<LineIdx>(tt.lines.size());
            tt.line_index[key] = li;
            tt.lines.push_back(Line{key, r.mode, r.display_name()});
            route_line[i] = li;
        } else {
            route_line[i] = it->second;
        }
    }

    const auto active = active_services(feed, service_ymd);

    // stop_times grouped per trip, in stop_sequence order
    std::vector<std::vector<std::uint32_t>> trip_sts(feed.trips.size());
    for (std::uint32_t i = 0; i < feed.stop_times.size(); ++i)
        trip_sts[feed.stop_times[i].trip].push_back(i);
    for (auto& sts : trip_sts)
        std::sort(sts.begin(), sts.end(), [&feed](std::uint32_t a, std::uint32_t b) {
            return feed.stop_times[a].seq < feed.stop_times[b].seq;
        });

    std::vector<std::vector<const GtfsFrequency*>> trip_freqs(feed.trips.size());
    for (const auto& f : feed.frequencies) trip_freqs[f.trip].push_back(&f);

    auto expand_trip = [&](std::uint32_t trip, std::int32_t offset,
                           const std::string& instance_id) {
        const auto& sts = trip_sts[trip];
        if (sts.size() < 2) return;
        const TripIdx ti = static_cast<TripIdx>(tt.trip_ids.size());
        tt.trip_ids.push_back(instance_id);
        const LineIdx line = route_line[feed.route_index.at(feed.trips[trip].route_id)];
        for (std::size_t i = 0; i + 1 < sts.size(); ++i) {
            const auto& a = feed.stop_times[sts[i]];
            const auto& b = feed.stop_times[sts[i + 1]];
            if (a.stop == b.stop) continue;
            if (b.arr < a.dep)
                throw invalid_input("trip '" + feed.trips[trip].id +
                                    "' is not time-ordered at stop_sequence " +
                                    std::to_string(b.seq));
            Connection c;
            c.from = a.stop;
            c.to = b.stop;
            c.dep = a.dep + offset;
            c.arr = b.arr + offset;
            c.trip = ti;
            c.line = line;
            c.seq = static_cast<std::int32_t>(i);
            c.length_m = detail::hop_length_m(a, b, feed.stops[a.stop].location,
                                              feed.stops[b.stop].location);
            tt.connections.push_back(c);
        }
    };

    for (std::uint32_t t = 0; t < feed.trips.size(); ++t) {
        if (!active.count(feed.trips[t].service_id)) continue;
        if (trip_sts[t].size() < 2) continue;
        const auto& freqs = trip_freqs[t];
        if (freqs.empty()) {
            expand_trip(t, 0, feed.trips[t].id);
        } else {
            // frequencies replace the literal stop_times; first departure of
            // each run lands on start_time + k * headway
            const std::int32_t base_dep = feed.stop_times[trip_sts[t][0]].dep;
            for (const auto* f : freqs) {
                int k = 0;
                for (std::int32_t t0 = f->start; t0 < f->end; t0 += f->headway, ++k)
                    expand_trip(t, t0 - base_dep,
                                feed.trips[t].id + "#" + std::to_string(k));
            }
        }
    }

    tt.sort_and_index();
    return tt;
}

struct FootpathParams {
    double radius_m = 500.0;
    double walk_speed_mps = 1.39;
    double detour = 1.3;
    std::int32_t min_transfer_s = 60;
};

// All unordered stop pairs within radius get a symmetric walking edge; GTFS
// transfers.txt minimum times only raise durations, never lower them.
inline std::vector<std::vector<Footpath>> build_footpaths(
    const std::vector<Stop>& stops, const FootpathParams& p,
    const std::vector<GtfsTransfer>& transfers = {},
    const std::unordered_map<std::string, StopIdx>* stop_index = nullptr) {
    if (p.radius_m <= 0.0) throw invalid_input("footpath radius must be positive");
    if (p.walk_speed_mps <= 0.0) throw invalid_input("walk speed must be positive");
    if (p.detour < 1.0) throw invalid_input("detour factor must be >= 1");

    std::vector<std::vector<Footpath>> fp(stops.size());
    // coarse geographic buckets so we only test nearby pairs
    const double cell_deg = std::max(p.radius_m / 111'000.0, 1e-4);
    std::unordered_map<std::int64_t, std::vector<StopIdx>> buckets;
    auto cell_of = [&](const GeoPoint& g) {
        const auto cx = static_cast<std::int32_t>(std::floor(g.lon / cell_deg));
        const auto cy = static_cast<std::int32_t>(std::floor(g.lat / cell_deg));
        return (static_cast<std::int64_t>(cx) << 32) |
               static_cast<std::int64_t>(static_cast<std::uint32_t>(cy));
    };
    for (StopIdx i = 0; i < stops.size(); ++i)
        buckets[cell_of(stops[i].location)].push_back(i);

    std::unordered_map<std::uint64_t, std::size_t> pair_slot; // (u<<32|v) -> fp[u] index
    auto add_edge = [&](StopIdx u, StopIdx v, std::int32_t dur) {
        const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | v;
        auto it = pair_slot.find(key);
        if (it == pair_slot.end()) {
            pair_slot[key] = fp[u].size();
            fp[u].push_back(Footpath{v, dur});
        } else if (fp[u][it->second].duration_s < dur) {
            fp[u][it->second].duration_s = dur;
        }
    };

    for (StopIdx i = 0; i < stops.size(); ++i) {
        const auto& gi = stops[i].location;
        const auto cx = static_cast<std::int32_t>(std::floor(gi.lon / cell_deg));
        const auto cy = static_cast<std::int32_t>(std::floor(gi.lat / cell_deg));
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                const std::int64_t key =
                    (static_cast<std::int64_t>(cx + dx) << 32) |
                    static_cast<std::int64_t>(static_cast<std::uint32_t>(cy + dy));
                auto it = buckets.find(key);
                if (it == buckets.end()) continue;
                for (StopIdx j : it->second) {
                    if (j <= i) continue;
                    const double d = great_circle_m(gi, stops[j].location);
                    if (d > p.radius_m) continue;
                    const std::int32_t dur = std::max(
                        p.min_transfer_s,
                        static_cast<std::int32_t>(walk_seconds(d, p.walk_speed_mps, p.detour)));
                    add_edge(i, j, dur);
                    add_edge(j, i, dur);
                }
            }
    }

    if (stop_index) {
        for (const auto& t : transfers) {
            if (t.type == 3) continue; // transfer not possible
            auto fi = stop_index->find(t.from_stop);
            auto ti = stop_index->find(t.to_stop);
            if (fi == stop_index->end() || ti == stop_index->end()) continue;
            if (fi->second == ti->second) continue;
            const std::uint64_t key =
                (static_cast<std::uint64_t>(fi->second) << 32) | ti->second;
            if (pair_slot.count(key)) {
                add_edge(fi->second, ti->second, t.min_transfer_s);
                add_edge(ti->second, fi->second, t.min_transfer_s);
            }
        }
    }

    for (auto& edges : fp)
        std::sort(edges.begin(), edges.end(), [](const Footpath& a, const Footpath& b) {
            return a.to < b.to;
        });
    return fp;
}

// A timetable without the given line's connections. Stops, footpaths and the
// line roster itself are unchanged; the input is not modified.
inline Timetable remove_line(const Timetable& tt, const std::string& line_id) {
    const LineIdx li = tt.line_of(line_id);
    Timetable out;
    out.service_ymd = tt.service_ymd;
    out.stops = tt.stops;
    out.lines = tt.lines;
    out.footpaths = tt.footpaths;
    out.trip_ids = tt.trip_ids;
    out.stop_index = tt.stop_index;
    out.line_index = tt.line_index;
    out.connections.reserve(tt.connections.size());
    for (const auto& c : tt.connections)
        if (c.line != li) out.connections.push_back(c);
    out.trip_conns.assign(out.trip_ids.size(), {});
    for (std::uint32_t i = 0; i < out.connections.size(); ++i)
        out.trip_conns[out.connections[i].trip].push_back(i);
    return out;
}

} // namespace teq

#endif
