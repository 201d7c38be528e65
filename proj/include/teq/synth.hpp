#ifndef TEQ_SYNTH_HPP
#define TEQ_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "teq/gtfs.hpp"
#include "teq/hexgrid.hpp"

namespace teq {

// Parameters of the generated ring-and-radial city: radial lines carry
// suburbs to the center hub, circulators loop the walkable core, feeders
// run short tangential arcs, and an optional line sits far outside the
// populated area. Population falls off from a dense center with extra
// clusters at the radial ends.
struct SynthSpec {
    GeoPoint center{45.05, 7.66};

    int radial_lines = 12;
    int stops_per_radial = 10; // beyond the shared hub
    double radial_spacing_m = 900.0;
    double radial_speed_mps = 10.0;
    int radial_headway_s = 900;

    int circulator_lines = 4;
    int circulator_first_ring = 1;
    double circulator_speed_mps = 6.0;
    int circulator_headway_s = 600;

    int feeder_lines = 13;
    int feeder_first_ring = 5;
    int feeder_ring_span = 3;
    double feeder_speed_mps = 7.0;
    int feeder_headway_s = 1200;

    // the labeled suburban connector: radial 0, extended and faster
    bool with_connector = true;
    int connector_extra_stops = 4;
    double connector_speed_mps = 16.0;

    // a line placed far outside the populated grid
    bool with_null_line = true;
    double null_line_offset_m = 60'000.0;

    int window_start_s = 6 * 3600;
    int window_end_s = 10 * 3600;

    double center_peak = 4000.0;  // persons per cell at the center
    double center_sigma_m = 4000.0;
    double suburb_peak = 1200.0;  // cluster at every radial end
    double suburb_sigma_m = 1200.0;
    double connector_suburb_peak = 3000.0;
    double connector_suburb_sigma_m = 1600.0;
    double population_cell_m = 1000.0;
    double pop_jitter = 0.10;
    double azimuth_jitter_deg = 4.0;

    double margin_m = 2000.0; // bbox margin beyond the populated extent

    int total_lines() const {
        return radial_lines + circulator_lines + feeder_lines + (with_null_line ? 1 : 0);
    }

    double connector_length_m() const {
        const int extra = with_connector ? connector_extra_stops : 0;
        return (stops_per_radial + extra) * radial_spacing_m;
    }

    double populated_radius_m() const {
        return std::max(3.0 * center_sigma_m,
                        connector_length_m() + 3.0 * connector_suburb_sigma_m);
    }

    void validate_spec() const {
        if (total_lines() <= 0) throw invalid_input("synth spec: zero lines");
        if (radial_lines < 1) throw invalid_input("synth spec: need at least one radial line");
        if (stops_per_radial < 1 || radial_spacing_m <= 0)
            throw invalid_input("synth spec: bad radial geometry");
        if (radial_headway_s <= 0 || circulator_headway_s <= 0 || feeder_headway_s <= 0)
            throw invalid_input("synth spec: headways must be positive");
        if (radial_speed_mps <= 0 || circulator_speed_mps <= 0 || feeder_speed_mps <= 0 ||
            connector_speed_mps <= 0)
            throw invalid_input("synth spec: speeds must be positive");
        if (window_end_s <= window_start_s)
            throw invalid_input("synth spec: empty service window");
        if (circulator_lines > 0 &&
            circulator_first_ring + circulator_lines - 1 > stops_per_radial)
            throw invalid_input("synth spec: circulator ring beyond radial extent");
        if (feeder_lines > 0 && feeder_first_ring + feeder_ring_span > stops_per_radial)
            throw invalid_input("synth spec: feeder ring beyond radial extent");
    }
};

inline void to_json(nlohmann::json& j, const SynthSpec& s) {
    j = nlohmann::json{{"center_lat", s.center.lat},
                       {"center_lon", s.center.lon},
                       {"radial_lines", s.radial_lines},
                       {"stops_per_radial", s.stops_per_radial},
                       {"radial_spacing_m", s.radial_spacing_m},
                       {"radial_speed_mps", s.radial_speed_mps},
                       {"radial_headway_s", s.radial_headway_s},
                       {"circulator_lines", s.circulator_lines},
                       {"circulator_first_ring", s.circulator_first_ring},
                       {"circulator_speed_mps", s.circulator_speed_mps},
                       {"circulator_headway_s", s.circulator_headway_s},
                       {"feeder_lines", s.feeder_lines},
                       {"feeder_first_ring", s.feeder_first_ring},
                       {"feeder_ring_span", s.feeder_ring_span},
                       {"feeder_speed_mps", s.feeder_speed_mps},
                       {"feeder_headway_s", s.feeder_headway_s},
                       {"with_connector", s.with_connector},
                       {"connector_extra_stops", s.connector_extra_stops},
                       {"connector_speed_mps", s.connector_speed_mps},
                       {"with_null_line", s.with_null_line},
                       {"null_line_offset_m", s.null_line_offset_m},
                       {"window_start_s", s.window_start_s},
                       {"window_end_s", s.window_end_s},
                       {"center_peak", s.center_peak},
                       {"center_sigma_m", s.center_sigma_m},
                       {"suburb_peak", s.suburb_peak},
                       {"suburb_sigma_m", s.suburb_sigma_m},
                       {"connector_suburb_peak", s.connector_suburb_peak},
                       {"connector_suburb_sigma_m", s.connector_suburb_sigma_m},
                       {"population_cell_m", s.population_cell_m},
                       {"pop_jitter", s.pop_jitter},
                       {"azimuth_jitter_deg", s.azimuth_jitter_deg},
                       {"margin_m", s.margin_m}};
}

inline void from_json(const nlohmann::json& j, SynthSpec& s) {
    SynthSpec d;
    s.center.lat = j.value("center_lat", d.center.lat);
    s.center.lon = j.value("center_lon", d.center.lon);
    s.radial_lines = j.value("radial_lines", d.radial_lines);
    s.stops_per_radial = j.value("stops_per_radial", d.stops_per_radial);
    s.radial_spacing_m = j.value("radial_spacing_m", d.radial_spacing_m);
    s.radial_speed_mps = j.value("radial_speed_mps", d.radial_speed_mps);
    s.radial_headway_s = j.value("radial_headway_s", d.radial_headway_s);
    s.circulator_lines = j.value("circulator_lines", d.circulator_lines);
    s.circulator_first_ring = j.value("circulator_first_ring", d.circulator_first_ring);
    s.circulator_speed_mps = j.value("circulator_speed_mps", d.circulator_speed_mps);
    s.circulator_headway_s = j.value("circulator_headway_s", d.circulator_headway_s);
    s.feeder_lines = j.value("feeder_lines", d.feeder_lines);
    s.feeder_first_ring = j.value("feeder_first_ring", d.feeder_first_ring);
    s.feeder_ring_span = j.value("feeder_ring_span", d.feeder_ring_span);
    s.feeder_speed_mps = j.value("feeder_speed_mps", d.feeder_speed_mps);
    s.feeder_headway_s = j.value("feeder_headway_s", d.feeder_headway_s);
    s.with_connector = j.value("with_connector", d.with_connector);
    s.connector_extra_stops = j.value("connector_extra_stops", d.connector_extra_stops);
    s.connector_speed_mps = j.value("connector_speed_mps", d.connector_speed_mps);
    s.with_null_line = j.value("with_null_line", d.with_null_line);
    s.null_line_offset_m = j.value("null_line_offset_m", d.null_line_offset_m);
    s.window_start_s = j.value("window_start_s", d.window_start_s);
    s.window_end_s = j.value("window_end_s", d.window_end_s);
    s.center_peak = j.value("center_peak", d.center_peak);
    s.center_sigma_m = j.value("center_sigma_m", d.center_sigma_m);
    s.suburb_peak = j.value("suburb_peak", d.suburb_peak);
    s.suburb_sigma_m = j.value("suburb_sigma_m", d.suburb_sigma_m);
    s.connector_suburb_peak = j.value("connector_suburb_peak", d.connector_suburb_peak);
    s.connector_suburb_sigma_m = j.value("connector_suburb_sigma_m", d.connector_suburb_sigma_m);
    s.population_cell_m = j.value("population_cell_m", d.population_cell_m);
    s.pop_jitter = j.value("pop_jitter", d.pop_jitter);
    s.azimuth_jitter_deg = j.value("azimuth_jitter_deg", d.azimuth_jitter_deg);
    s.margin_m = j.value("margin_m", d.margin_m);
}

struct SynthCity {
    Feed feed;
    std::vector<PopulationCell> population;
    std::map<std::string, std::string> roles; // role -> line id
    GeoPoint bbox_sw, bbox_ne;
    std::uint64_t seed = 0;
    SynthSpec spec;
};

namespace detail {

inline std::string pad2(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

inline std::string pad3(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", v);
    return buf;
}

struct FeedBuilder {
    Feed feed;

    std::uint32_t add_stop(const std::string& id, const std::string& name, GeoPoint p) {
        auto it = feed.stop_index.find(id);
        if (it != feed.stop_index.end()) return it->second;
        const auto idx = static_cast<std::uint32_t>(feed.stops.size());
        feed.stop_index[id] = idx;
        feed.stops.push_back(GtfsStop{id, name, p});
        return idx;
    }

    void add_route(const std::string& id, Mode mode, const std::string& name) {
        feed.route_index[id] = static_cast<std::uint32_t>(feed.routes.size());
        GtfsRoute r;
        r.id = id;
        r.mode = mode;
        r.short_name = name;
        feed.routes.push_back(std::move(r));
    }

    // One trip over `stop_ids` departing `t0`, hop times from distance/speed.
    void add_trip(const std::string& route_id, const std::string& trip_id,
                  const std::vector<std::uint32_t>& stop_seq, std::int32_t t0,
                  double speed_mps) {
        const auto ti = static_cast<std::uint32_t>(feed.trips.size());
        feed.trip_index[trip_id] = ti;
        feed.trips.push_back(GtfsTrip{trip_id, route_id, "WK"});
        std::int32_t t = t0;
        for (std::size_t i = 0; i < stop_seq.size(); ++i) {
            if (i > 0) {
                const double d = great_circle_m(feed.stops[stop_seq[i - 1]].location,
                                                feed.stops[stop_seq[i]].location);
                t += std::max<std::int32_t>(
                    1, static_cast<std::int32_t>(std::ceil(d / speed_mps)));
            }
            GtfsStopTime st;
            st.trip = ti;
            st.arr = t;
            st.dep = t;
            st.stop = stop_seq[i];
            st.seq = static_cast<int>(i + 1);
            feed.stop_times.push_back(st);
        }
    }

    void add_line_service(const std::string& route_id,
                          const std::vector<std::uint32_t>& stops_out,
                          std::int32_t start, std::int32_t end, std::int32_t headway,
                          double speed) {
        std::vector<std::uint32_t> stops_back(stops_out.rbegin(), stops_out.rend());
        int k = 0;
        for (std::int32_t t0 = start; t0 < end; t0 += headway, ++k) {
            add_trip(route_id, route_id + "_O" + pad3(k), stops_out, t0, speed);
            add_trip(route_id, route_id + "_B" + pad3(k), stops_back, t0, speed);
        }
    }
};

} // namespace detail

// Deterministic synthetic city for a given (spec, seed).
inline SynthCity synthesize_network(const SynthSpec& spec, std::uint64_t seed) {
    spec.validate_spec();
    SynthCity city;
    city.seed = seed;
    city.spec = spec;
    std::mt19937_64 rng(seed);
    const LocalProjection proj(spec.center);
    detail::FeedBuilder fb;

    auto place = [&](double x, double y) { return proj.inverse(x, y); };

    // radial azimuths, jittered per seed (connector stays on azimuth 0)
    std::vector<double> azimuth(spec.radial_lines);
    std::uniform_real_distribution<double> jit(-spec.azimuth_jitter_deg,
                                               spec.azimuth_jitter_deg);
    for (int k = 0; k < spec.radial_lines; ++k) {
        azimuth[k] = 2.0 * kPi * k / spec.radial_lines;
        if (!(spec.with_connector && k == 0)) azimuth[k] += deg2rad(jit(rng));
    }

    const std::uint32_t hub = fb.add_stop("HUB", "Central Hub", spec.center);

    // radial stop lattice: ring m >= 1 on each azimuth
    std::vector<std::vector<std::uint32_t>> radial_stops(spec.radial_lines);
    std::vector<GeoPoint> radial_end(spec.radial_lines);
    for (int k = 0; k < spec.radial_lines; ++k) {
        radial_stops[k].push_back(hub);
        const bool connector = spec.with_connector && k == 0;
        const int nstops = spec.stops_per_radial + (connector ? spec.connector_extra_stops : 0);
        for (int m = 1; m <= nstops; ++m) {
            const double d = m * spec.radial_spacing_m;
            const GeoPoint p = place(d * std::sin(azimuth[k]), d * std::cos(azimuth[k]));
            const std::string id = "R" + detail::pad2(k) + "S" + detail::pad2(m);
            radial_stops[k].push_back(fb.add_stop(id, "Radial " + std::to_string(k) +
                                                          " stop " + std::to_string(m), p));
        }
        radial_end[k] = fb.feed.stops[radial_stops[k].back()].location;
    }

    // radial routes
    for (int k = 0; k < spec.radial_lines; ++k) {
        const bool connector = spec.with_connector && k == 0;
        const std::string id = "R" + detail::pad2(k);
        fb.add_route(id, connector ? Mode::rail : Mode::bus,
                     connector ? "Suburban connector" : "Radial " + std::to_string(k));
        fb.add_line_service(id, radial_stops[k], spec.window_start_s, spec.window_end_s,
                            spec.radial_headway_s,
                            connector ? spec.connector_speed_mps : spec.radial_speed_mps);
        if (connector) city.roles["suburban_connector"] = id;
    }

    // circulators reuse the radial stops of their ring, closing the loop
    for (int c = 0; c < spec.circulator_lines; ++c) {
        const int ring = spec.circulator_first_ring + c;
        std::vector<std::uint32_t> loop;
        for (int k = 0; k < spec.radial_lines; ++k) loop.push_back(radial_stops[k][ring]);
        loop.push_back(radial_stops[0][ring]);
        const std::string id = "C" + detail::pad2(c);
        fb.add_route(id, Mode::tram, "Circulator ring " + std::to_string(ring));
        fb.add_line_service(id, loop, spec.window_start_s, spec.window_end_s,
                            spec.circulator_headway_s, spec.circulator_speed_mps);
        if (c == 0) city.roles["center_circulator"] = id;
    }

    // feeders: tangential arcs between adjacent radials with one own stop
    for (int f = 0; f < spec.feeder_lines; ++f) {
        const int k = f % spec.radial_lines;
        const int k2 = (k + 1) % spec.radial_lines;
        const int ring = spec.feeder_first_ring + (f / spec.radial_lines) % (spec.feeder_ring_span + 1);
        const double d = ring * spec.radial_spacing_m;
        const double mid_az = azimuth[k] + std::remainder(azimuth[k2] - azimuth[k], 2.0 * kPi) / 2.0;
        const GeoPoint mid = place(d * std::sin(mid_az), d * std::cos(mid_az));
        const std::string id = "F" + detail::pad2(f);
        const std::uint32_t mstop =
            fb.add_stop(id + "M", "Feeder " + std::to_string(f) + " midpoint", mid);
        std::vector<std::uint32_t> seq{radial_stops[k][ring], mstop, radial_stops[k2][ring]};
        fb.add_route(id, Mode::bus, "Feeder " + std::to_string(f));
        fb.add_line_service(id, seq, spec.window_start_s, spec.window_end_s,
                            spec.feeder_headway_s, spec.feeder_speed_mps);
    }

    // a line no populated hexagon can ever use
    if (spec.with_null_line) {
        const std::string id = "X00";
        const std::uint32_t a = fb.add_stop("X00S01", "Remote stop 1",
                                            place(spec.null_line_offset_m, 0.0));
        const std::uint32_t b = fb.add_stop("X00S02", "Remote stop 2",
                                            place(spec.null_line_offset_m + 1500.0, 0.0));
        fb.add_route(id, Mode::bus, "Remote shuttle");
        fb.add_line_service(id, {a, b}, spec.window_start_s, spec.window_end_s, 3600,
                            spec.feeder_speed_mps);
        city.roles["null_line"] = id;
    }

    fb.feed.calendars.push_back(
        GtfsCalendar{"WK", {true, true, true, true, true, true, true}, 20240101, 20241231});

    // population: center gradient plus a cluster at every radial end; the
    // connector's suburb is the largest and farthest out
    const double extent = spec.populated_radius_m();
    const double step = spec.population_cell_m;
    std::uniform_real_distribution<double> pj(-spec.pop_jitter, spec.pop_jitter);
    const int ncells = static_cast<int>(std::ceil(extent / step));
    for (int iy = -ncells; iy <= ncells; ++iy) {
        for (int ix = -ncells; ix <= ncells; ++ix) {
            const double x = ix * step, y = iy * step;
            const GeoPoint p = place(x, y);
            double pop = spec.center_peak *
                         std::exp(-(x * x + y * y) / (2.0 * spec.center_sigma_m * spec.center_sigma_m));
            for (int k = 0; k < spec.radial_lines; ++k) {
                const bool connector = spec.with_connector && k == 0;
                const double peak = connector ? spec.connector_suburb_peak : spec.suburb_peak;
                const double sigma = connector ? spec.connector_suburb_sigma_m : spec.suburb_sigma_m;
                const double dd = great_circle_m(p, radial_end[k]);
                pop += peak * std::exp(-dd * dd / (2.0 * sigma * sigma));
            }
            pop *= 1.0 + pj(rng);
            const auto persons = static_cast<std::int64_t>(std::llround(pop));
            if (persons >= 1) city.population.push_back(PopulationCell{p, persons});
        }
    }

    const double half = extent + spec.margin_m;
    city.bbox_sw = proj.inverse(-half, -half);
    city.bbox_ne = proj.inverse(half, half);
    city.feed = std::move(fb.feed);
    return city;
}

namespace detail {

inline std::string format_time_hms(std::int32_t t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", t / 3600, (t / 60) % 60, t % 60);
    return buf;
}

} // namespace detail

// Writes the GTFS directory, the population CSV and the synthesis manifest.
// Output is byte-identical for identical (spec, seed).
inline void write_synth_city(const SynthCity& city, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "gtfs");
    {
        std::ofstream out(dir / "gtfs" / "stops.txt");
        out << "stop_id,stop_name,stop_lat,stop_lon\n";
        for (const auto& s : city.feed.stops)
            out << s.id << ',' << csv_escape(s.name) << ',' << format_double(s.location.lat)
                << ',' << format_double(s.location.lon) << '\n';
    }
    {
        std::ofstream out(dir / "gtfs" / "routes.txt");
        out << "route_id,route_short_name,route_long_name,route_type\n";
        for (const auto& r : city.feed.routes) {
            int type = 3;
            switch (r.mode) {
                case Mode::tram: type = 0; break;
                case Mode::metro: type = 1; break;
                case Mode::rail: type = 2; break;
                case Mode::bus: type = 3; break;
                case Mode::ferry: type = 4; break;
                default: type = 7; break;
            }
            out << r.id << ',' << csv_escape(r.short_name) << ',' << csv_escape(r.long_name)
                << ',' << type << '\n';
        }
    }
    {
        std::ofstream out(dir / "gtfs" / "trips.txt");
        out << "route_id,service_id,trip_id\n";
        for (const auto& t : city.feed.trips)
            out << t.route_id << ',' << t.service_id << ',' << t.id << '\n';
    }
    {
        std::ofstream out(dir / "gtfs" / "stop_times.txt");
        out << "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n";
        for (const auto& st : city.feed.stop_times)
            out << city.feed.trips[st.trip].id << ',' << detail::format_time_hms(st.arr)
                << ',' << detail::format_time_hms(st.dep) << ','
                << city.feed.stops[st.stop].id << ',' << st.seq << '\n';
    }
    {
        std::ofstream out(dir / "gtfs" / "calendar.txt");
        out << "service_id,monday,tuesday,wednesday,thursday,friday,saturday,sunday,"
               "start_date,end_date\n";
        for (const auto& c : city.feed.calendars) {
            out << c.service_id;
            for (bool d : c.weekday) out << ',' << (d ? 1 : 0);
            out << ',' << c.start_ymd << ',' << c.end_ymd << '\n';
        }
    }
    {
        std::ofstream out(dir / "population.csv");
        out << "lat,lon,population\n";
        for (const auto& c : city.population)
            out << format_double(c.location.lat) << ',' << format_double(c.location.lon)
                << ',' << c.persons << '\n';
    }
    {
        nlohmann::json j;
        j["seed"] = city.seed;
        j["roles"] = city.roles;
        j["bbox"] = {city.bbox_sw.lat, city.bbox_sw.lon, city.bbox_ne.lat, city.bbox_ne.lon};
        j["stops"] = city.feed.stops.size();
        j["routes"] = city.feed.routes.size();
        j["trips"] = city.feed.trips.size();
        j["population_cells"] = city.population.size();
        j["spec"] = city.spec;
        std::ofstream out(dir / "synth_manifest.json");
        out << j.dump(2) << '\n';
    }
}

inline std::vector<PopulationCell> read_population_csv(const std::filesystem::path& path) {
    CsvReader csv(path.string());
    std::vector<PopulationCell> cells;
    while (csv.next()) {
        PopulationCell c;
        c.location.lat = csv.require_double("lat");
        c.location.lon = csv.require_double("lon");
        const double p = csv.require_double("population");
        if (p < 0) csv.fail("negative population");
        c.persons = static_cast<std::int64_t>(std::llround(p));
        validate(c.location);
        cells.push_back(c);
    }
    return cells;
}

} // namespace teq

#endif
