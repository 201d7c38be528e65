#ifndef TEQ_GTFS_HPP
#define TEQ_GTFS_HPP

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "teq/csv.hpp"
#include "teq/geo.hpp"

namespace teq {

enum class Mode { tram, metro, rail, bus, ferry, other };

inline Mode mode_from_route_type(int t) {
    switch (t) {
        case 0: return Mode::tram;
        case 1: return Mode::metro;
        case 2: return Mode::rail;
        case 3: return Mode::bus;
        case 4: return Mode::ferry;
        default: return Mode::other;
    }
}

inline const char* mode_name(Mode m) {
    switch (m) {
        case Mode::tram: return "tram";
        case Mode::metro: return "metro";
        case Mode::rail: return "rail";
        case Mode::bus: return "bus";
        case Mode::ferry: return "ferry";
        default: return "other";
    }
}

struct GtfsStop {
    std::string id;
    std::string name;
    GeoPoint location;
};

struct GtfsRoute {
    std::string id;
    Mode mode = Mode::other;
    std::string short_name;
    std::string long_name;

    std::string display_name() const {
        return short_name.empty() ? long_name : short_name;
    }
};

struct GtfsTrip {
    std::string id;
    std::string route_id;
    std::string service_id;
};

struct GtfsStopTime {
    std::uint32_t trip = 0; // index into Feed::trips
    std::int32_t arr = 0;   // seconds since service-day midnight
    std::int32_t dep = 0;
    std::uint32_t stop = 0; // index into Feed::stops
    int seq = 0;
    double shape_dist = 0.0;
    bool has_shape_dist = false;
};

struct GtfsCalendar {
    std::string service_id;
    std::array<bool, 7> weekday{}; // Monday..Sunday
    int start_ymd = 0;             // e.g. 20240131
    int end_ymd = 0;
};

struct GtfsCalendarDate {
    std::string service_id;
    int ymd = 0;
    int exception_type = 0; // 1 = added, 2 = removed
};

struct GtfsTransfer {
    std::string from_stop;
    std::string to_stop;
    int type = 0;
    std::int32_t min_transfer_s = 0;
};

struct GtfsFrequency {
    std::uint32_t trip = 0;
    std::int32_t start = 0;
    std::int32_t end = 0;
    std::int32_t headway = 0;
    bool exact_times = false;
};

struct Feed {
    std::filesystem::path dir;
    std::vector<GtfsStop> stops;
    std::vector<GtfsRoute> routes;
    std::vector<GtfsTrip> trips;
    std::vector<GtfsStopTime> stop_times; // grouped per trip, ordered by seq
    std::vector<GtfsCalendar> calendars;
    std::vector<GtfsCalendarDate> calendar_dates;
    std::vector<GtfsTransfer> transfers;
    std::vector<GtfsFrequency> frequencies;
    std::unordered_map<std::string, std::uint32_t> stop_index;
    std::unordered_map<std::string, std::uint32_t> route_index;
    std::unordered_map<std::string, std::uint32_t> trip_index;
};

// "H:MM:SS" or "HH:MM:SS"; hours may run past 24 for overnight trips.
inline std::int32_t parse_gtfs_time(const std::string& s) {
    int h = 0, m = 0, sec = 0;
    int field = 0, value = 0, digits = 0;
    for (char c : s) {
        if (c >= '0' && c <= '9') {
            value = value * 10 + (c - '0');
            ++digits;
        } else if (c == ':') {
            if (digits == 0 || field >= 2)
                throw invalid_input("malformed time '" + s + "'");
            if (field == 0) h = value;
            else m = value;
            ++field;
            value = 0;
            digits = 0;
        } else {
            throw invalid_input("malformed time '" + s + "'");
        }
    }
    if (field != 2 || digits == 0) throw invalid_input("malformed time '" + s + "'");
    sec = value;
    if (m > 59 || sec > 59) throw invalid_input("malformed time '" + s + "'");
    return h * 3600 + m * 60 + sec;
}

inline int parse_gtfs_date(const std::string& s) { // YYYYMMDD
    if (s.size() != 8) throw invalid_input("malformed date '" + s + "'");
    for (char c : s)
        if (c < '0' || c > '9') throw invalid_input("malformed date '" + s + "'");
    return std::stoi(s);
}

inline std::chrono::year_month_day ymd_from_int(int ymd) {
    return std::chrono::year_month_day(std::chrono::year(ymd / 10000),
                                       std::chrono::month((ymd / 100) % 100),
                                       std::chrono::day(ymd % 100));
}

inline int ymd_to_int(std::chrono::year_month_day d) {
    return static_cast<int>(d.year()) * 10000 +
           static_cast<int>(unsigned(d.month())) * 100 +
           static_cast<int>(unsigned(d.day()));
}

// 0 = Monday ... 6 = Sunday
inline int weekday_index(std::chrono::year_month_day d) {
    const std::chrono::weekday wd{std::chrono::sys_days(d)};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

inline Feed parse_feed(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    Feed feed;
    feed.dir = dir;
    if (!fs::is_directory(dir))
        throw invalid_input("GTFS directory not found: " + dir.string());
    for (const char* required : {"stops.txt", "routes.txt", "trips.txt", "stop_times.txt"})
        if (!fs::exists(dir / required))
            throw invalid_input("missing required GTFS file: " +
                                (dir / required).string());
    if (!fs::exists(dir / "calendar.txt") && !fs::exists(dir / "calendar_dates.txt"))
        throw invalid_input("missing service definition: need calendar.txt or "
                            "calendar_dates.txt in " + dir.string());

    {
        CsvReader csv((dir / "stops.txt").string());
        while (csv.next()) {
            GtfsStop s;
            s.id = csv.require("stop_id");
            s.name = csv.get("stop_name").value_or("");
            s.location.lat = csv.require_double("stop_lat");
            s.location.lon = csv.require_double("stop_lon");
            validate(s.location);
            if (feed.stop_index.count(s.id))
                csv.fail("duplicate stop_id '" + s.id + "'");
            feed.stop_index[s.id] = static_cast<std::uint32_t>(feed.stops.size());
            feed.stops.push_back(std::move(s));
        }
    }
    {
        CsvReader csv((dir / "routes.txt").string());
        while (csv.next()) {
            GtfsRoute r;
            r.id = csv.require("route_id");
            r.mode = mode_from_route_type(
                static_cast<int>(csv.get("route_type") ? csv.require_int("route_type") : 3));
            r.short_name = csv.get("route_short_name").value_or("");
            r.long_name = csv.get("route_long_name").value_or("");
            if (feed.route_index.count(r.id))
                csv.fail("duplicate route_id '" + r.id + "'");
            feed.route_index[r.id] = static_cast<std::uint32_t>(feed.routes.size());
            feed.routes.push_back(std::move(r));
        }
    }
    {
        CsvReader csv((dir / "trips.txt").string());
        while (csv.next()) {
            GtfsTrip t;
            t.id = csv.require("trip_id");
            t.route_id = csv.require("route_id");
            t.service_id = csv.require("service_id");
            if (!feed.route_index.count(t.route_id))
                csv.fail("trip '" + t.id + "' references unknown route '" + t.route_id + "'");
            if (feed.trip_index.count(t.id))
                csv.fail("duplicate trip_id '" + t.id + "'");
            feed.trip_index[t.id] = static_cast<std::uint32_t>(feed.trips.size());
            feed.trips.push_back(std::move(t));
        }
    }
    {
        CsvReader csv((dir / "stop_times.txt").string());
        while (csv.next()) {
            GtfsStopTime st;
            const std::string trip_id = csv.require("trip_id");
            auto ti = feed.trip_index.find(trip_id);
            if (ti == feed.trip_index.end())
                csv.fail("stop_time references unknown trip '" + trip_id + "'");
            st.trip = ti->second;
            const std::string stop_id = csv.require("stop_id");
            auto si = feed.stop_index.find(stop_id);
            if (si == feed.stop_index.end())
                csv.fail("stop_time references unknown stop '" + stop_id + "'");
            st.stop = si->second;
            try {
                st.arr = parse_gtfs_time(csv.require("arrival_time"));
                st.dep = parse_gtfs_time(csv.require("departure_time"));
            } catch (const invalid_input& e) {
                csv.fail(e.what());
            }
            st.seq = static_cast<int>(csv.require_int("stop_sequence"));
            if (auto sd = csv.get("shape_dist_traveled"); sd && !sd->empty()) {
                st.shape_dist = csv.parse_double(*sd, "shape_dist_traveled");
                st.has_shape_dist = true;
            }
            if (st.dep < st.arr) csv.fail("departure before arrival");
            feed.stop_times.push_back(st);
        }
    }
    if (fs::exists(dir / "calendar.txt")) {
        CsvReader csv((dir / "calendar.txt").string());
        static const char* days[7] = {"monday", "tuesday", "wednesday", "thursday",
                                      "friday", "saturday", "sunday"};
        while (csv.next()) {
            GtfsCalendar c;
            c.service_id = csv.require("service_id");
            for (int i = 0; i < 7; ++i) c.weekday[i] = csv.require_int(days[i]) != 0;
            try {
                c.start_ymd = parse_gtfs_date(csv.require("start_date"));
                c.end_ymd = parse_gtfs_date(csv.require("end_date"));
            } catch (const invalid_input& e) {
                csv.fail(e.what());
            }
            feed.calendars.push_back(std::move(c));
        }
    }
    if (fs::exists(dir / "calendar_dates.txt")) {
        CsvReader csv((dir / "calendar_dates.txt").string());
        while (csv.next()) {
            GtfsCalendarDate cd;
            cd.service_id = csv.require("service_id");
            try {
                cd.ymd = parse_gtfs_date(csv.require("date"));
            } catch (const invalid_input& e) {
                csv.fail(e.what());
            }
            cd.exception_type = static_cast<int>(csv.require_int("exception_type"));
            if (cd.exception_type != 1 && cd.exception_type != 2)
                csv.fail("exception_type must be 1 or 2");
            feed.calendar_dates.push_back(std::move(cd));
        }
    }
    if (fs::exists(dir / "transfers.txt")) {
        CsvReader csv((dir / "transfers.txt").string());
        while (csv.next()) {
            GtfsTransfer t;
            t.from_stop = csv.require("from_stop_id");
            t.to_stop = csv.require("to_stop_id");
            t.type = static_cast<int>(csv.get("transfer_type") ? csv.require_int("transfer_type") : 0);
            if (auto mt = csv.get("min_transfer_time"); mt && !mt->empty())
                t.min_transfer_s = static_cast<std::int32_t>(csv.parse_double(*mt, "min_transfer_time"));
            feed.transfers.push_back(std::move(t));
        }
    }
    if (fs::exists(dir / "frequencies.txt")) {
        CsvReader csv((dir / "frequencies.txt").string());
        while (csv.next()) {
            GtfsFrequency f;
            const std::string trip_id = csv.require("trip_id");
            auto ti = feed.trip_index.find(trip_id);
            if (ti == feed.trip_index.end())
                csv.fail("frequency references unknown trip '" + trip_id + "'");
            f.trip = ti->second;
            try {
                f.start = parse_gtfs_time(csv.require("start_time"));
                f.end = parse_gtfs_time(csv.require("end_time"));
            } catch (const invalid_input& e) {
                csv.fail(e.what());
            }
            f.headway = static_cast<std::int32_t>(csv.require_int("headway_secs"));
            if (f.headway <= 0) csv.fail("headway_secs must be positive");
            if (auto et = csv.get("exact_times"); et && !et->empty())
                f.exact_times = *et == "1";
            feed.frequencies.push_back(f);
        }
    }
    return feed;
}

// Service ids active on a date: calendar weekday window plus calendar_dates
// additions, minus calendar_dates removals.
inline std::unordered_set<std::string> active_services(const Feed& feed, int ymd) {
    std::unordered_set<std::string> active;
    const int wd = weekday_index(ymd_from_int(ymd));
    for (const auto& c : feed.calendars)
        if (c.weekday[wd] && c.start_ymd <= ymd && ymd <= c.end_ymd)
            active.insert(c.service_id);
    for (const auto& cd : feed.calendar_dates) {
        if (cd.ymd != ymd) continue;
        if (cd.exception_type == 1) active.insert(cd.service_id);
        else active.erase(cd.service_id);
    }
    return active;
}

// Deterministic default analysis date: the first Wednesday covered by the
// feed's calendars (falling back to the earliest calendar_dates addition).
inline int default_service_date(const Feed& feed) {
    int lo = 0, hi = 0;
    for (const auto& c : feed.calendars) {
        if (lo == 0 || c.start_ymd < lo) lo = c.start_ymd;
        if (c.end_ymd > hi) hi = c.end_ymd;
    }
    if (lo != 0) {
        auto d = std::chrono::sys_days(ymd_from_int(lo));
        const auto end = std::chrono::sys_days(ymd_from_int(hi));
        for (; d <= end; d += std::chrono::days(1)) {
            const std::chrono::year_month_day ymd(d);
            if (weekday_index(ymd) == 2 && !active_services(feed, ymd_to_int(ymd)).empty())
                return ymd_to_int(ymd);
        }
    }
    int first_added = 0;
    for (const auto& cd : feed.calendar_dates)
        if (cd.exception_type == 1 && (first_added == 0 || cd.ymd < first_added))
            first_added = cd.ymd;
    if (first_added != 0) return first_added;
    throw invalid_input("feed has no active service days");
}

} // namespace teq

#endif
