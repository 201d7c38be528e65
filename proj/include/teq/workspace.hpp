#ifndef TEQ_WORKSPACE_HPP
#define TEQ_WORKSPACE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "teq/export.hpp"
#include "teq/synth.hpp"

namespace teq {

// Everything a run needs, with the defaults of the analysis model: 8:00
// departure, 1 h budget, 100 persons/km^2 density floor, 1 km hexagons.
struct RunConfig {
    std::string gtfs_dir;
    std::string population_csv;
    double bbox_south = 0, bbox_west = 0, bbox_north = 0, bbox_east = 0;
    double side_m = 1000.0;
    double min_density = 100.0;
    std::int32_t depart_s = 28800;
    std::int32_t horizon_s = 3600;
    double walk_speed_mps = 1.39;
    double walk_detour = 1.3;
    std::int32_t max_access_s = 1200;
    double footpath_radius_m = 500.0;
    std::int32_t min_transfer_s = 60;
    double percentile = 0.65;
    std::string percentile_weighting = "hex_count"; // or "population"
    std::string line_grouping = "route_id";         // or "short_name"
    std::string service_date;                       // "YYYYMMDD", empty = first Wednesday
    std::string walk_matrix;                        // optional CSV hex_id,stop_id,seconds
    int threads = 0;                                // 0 = hardware concurrency
    std::uint64_t seed = 0;

    GeoPoint bbox_sw() const { return GeoPoint{bbox_south, bbox_west}; }
    GeoPoint bbox_ne() const { return GeoPoint{bbox_north, bbox_east}; }

    WalkParams walk_params() const {
        return WalkParams{walk_speed_mps, walk_detour, max_access_s};
    }
    FootpathParams footpath_params() const {
        return FootpathParams{footpath_radius_m, walk_speed_mps, walk_detour, min_transfer_s};
    }
    Query query(const GeoPoint& origin) const {
        return Query{origin, depart_s, horizon_s};
    }
    LineGrouping grouping() const {
        if (line_grouping == "route_id") return LineGrouping::route_id;
        if (line_grouping == "short_name") return LineGrouping::short_name;
        throw invalid_input("line_grouping must be 'route_id' or 'short_name'");
    }
    PercentileWeighting weighting() const {
        if (percentile_weighting == "hex_count") return PercentileWeighting::hex_count;
        if (percentile_weighting == "population") return PercentileWeighting::population;
        throw invalid_input("percentile_weighting must be 'hex_count' or 'population'");
    }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"gtfs_dir", c.gtfs_dir},
                       {"population_csv", c.population_csv},
                       {"bbox", {c.bbox_south, c.bbox_west, c.bbox_north, c.bbox_east}},
                       {"side_m", c.side_m},
                       {"min_density", c.min_density},
                       {"depart_s", c.depart_s},
                       {"horizon_s", c.horizon_s},
                       {"walk_speed_mps", c.walk_speed_mps},
                       {"walk_detour", c.walk_detour},
                       {"max_access_s", c.max_access_s},
                       {"footpath_radius_m", c.footpath_radius_m},
                       {"min_transfer_s", c.min_transfer_s},
                       {"percentile", c.percentile},
                       {"percentile_weighting", c.percentile_weighting},
                       {"line_grouping", c.line_grouping},
                       {"service_date", c.service_date},
                       {"walk_matrix", c.walk_matrix},
                       {"threads", c.threads},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    RunConfig d;
    c.gtfs_dir = j.value("gtfs_dir", d.gtfs_dir);
    c.population_csv = j.value("population_csv", d.population_csv);
    if (j.contains("bbox")) {
        const auto& b = j.at("bbox");
        if (!b.is_array() || b.size() != 4)
            throw invalid_input("config bbox must be [south, west, north, east]");
        c.bbox_south = b[0].get<double>();
        c.bbox_west = b[1].get<double>();
        c.bbox_north = b[2].get<double>();
        c.bbox_east = b[3].get<double>();
    }
    c.side_m = j.value("side_m", d.side_m);
    c.min_density = j.value("min_density", d.min_density);
    c.depart_s = j.value("depart_s", d.depart_s);
    c.horizon_s = j.value("horizon_s", d.horizon_s);
    c.walk_speed_mps = j.value("walk_speed_mps", d.walk_speed_mps);
    c.walk_detour = j.value("walk_detour", d.walk_detour);
    c.max_access_s = j.value("max_access_s", d.max_access_s);
    c.footpath_radius_m = j.value("footpath_radius_m", d.footpath_radius_m);
    c.min_transfer_s = j.value("min_transfer_s", d.min_transfer_s);
    c.percentile = j.value("percentile", d.percentile);
    c.percentile_weighting = j.value("percentile_weighting", d.percentile_weighting);
    c.line_grouping = j.value("line_grouping", d.line_grouping);
    c.service_date = j.value("service_date", d.service_date);
    c.walk_matrix = j.value("walk_matrix", d.walk_matrix);
    c.threads = j.value("threads", d.threads);
    c.seed = j.value("seed", d.seed);
}

// FNV-1a over the canonical dump of the semantic fields. Execution details
// (thread count) are excluded so reruns on different machines hash alike.
inline std::string config_hash(const RunConfig& cfg) {
    nlohmann::json j = cfg;
    j.erase("threads");
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline int parse_service_date(const std::string& s) {
    std::string digits;
    for (char c : s)
        if (c != '-') digits += c;
    return parse_gtfs_date(digits);
}

inline WalkMatrix read_walk_matrix(const std::filesystem::path& path,
                                   const std::unordered_map<std::string, StopIdx>& stop_index) {
    CsvReader csv(path.string());
    WalkMatrix wm;
    while (csv.next()) {
        const HexId hex = static_cast<HexId>(csv.require_int("hex_id"));
        const std::string stop = csv.require("stop_id");
        auto it = stop_index.find(stop);
        if (it == stop_index.end()) csv.fail("unknown stop_id '" + stop + "'");
        const auto sec = static_cast<std::int32_t>(csv.require_int("seconds"));
        if (sec < 0) csv.fail("negative walk time");
        wm[hex].emplace_back(it->second, sec);
    }
    return wm;
}

// A run's assembled state: filtered grid, footpathed timetable, walk tables.
struct Workspace {
    std::filesystem::path dir;
    RunConfig cfg;
    std::string hash;
    int service_ymd = 0;
    HexGrid grid;
    Timetable tt;
    AccessContext ctx;
    AssignResult assign_report;
};

// Parse inputs and assemble the in-memory pipeline state from a config.
inline Workspace assemble(const RunConfig& cfg, const std::filesystem::path& dir = {}) {
    Workspace ws;
    ws.dir = dir;
    ws.cfg = cfg;
    ws.hash = config_hash(cfg);

    const Feed feed = parse_feed(cfg.gtfs_dir);
    ws.service_ymd = cfg.service_date.empty() ? default_service_date(feed)
                                              : parse_service_date(cfg.service_date);
    ws.tt = build_timetable(feed, ws.service_ymd, cfg.grouping());
    ws.tt.footpaths = build_footpaths(ws.tt.stops, cfg.footpath_params(), feed.transfers,
                                      &ws.tt.stop_index);

    HexGrid grid = HexGrid::build(cfg.bbox_sw(), cfg.bbox_ne(), cfg.side_m);
    const auto cells = read_population_csv(cfg.population_csv);
    ws.assign_report = assign_population(grid, cells);
    ws.grid = filter_low_density(grid, cfg.min_density);
    if (ws.grid.empty())
        throw state_error("no hexagon meets the density threshold; nothing to analyze");

    std::optional<WalkMatrix> wm;
    if (!cfg.walk_matrix.empty())
        wm = read_walk_matrix(cfg.walk_matrix, ws.tt.stop_index);
    ws.ctx = AccessContext::build(ws.grid, ws.tt.stops, cfg.walk_params(), cfg.horizon_s,
                                  cfg.threads, wm ? &*wm : nullptr);
    return ws;
}

namespace detail {

inline nlohmann::json timetable_stats(const Timetable& tt) {
    nlohmann::json per_line = nlohmann::json::array();
    std::vector<std::size_t> counts(tt.lines.size(), 0);
    for (const auto& c : tt.connections) ++counts[c.line];
    for (std::size_t i = 0; i < tt.lines.size(); ++i)
        per_line.push_back({{"line_id", tt.lines[i].id},
                            {"name", tt.lines[i].name},
                            {"mode", mode_name(tt.lines[i].mode)},
                            {"connections", counts[i]}});
    std::size_t footpath_edges = 0;
    for (const auto& f : tt.footpaths) footpath_edges += f.size();
    return nlohmann::json{{"stops", tt.stops.size()},
                          {"lines", tt.lines.size()},
                          {"trips", tt.trip_ids.size()},
                          {"connections", tt.connections.size()},
                          {"footpath_edges", footpath_edges},
                          {"service_date", tt.service_ymd},
                          {"per_line", per_line}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw state_error("missing file: " + path.string() +
                               " (run the preceding command first)");
    nlohmann::json j;
    in >> j;
    return j;
}

} // namespace detail

// `ingest`: parse everything, write the workspace snapshots. Re-running on
// identical inputs rewrites identical bytes.
inline Workspace cmd_ingest(const RunConfig& cfg, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    Workspace ws = assemble(cfg, dir);
    fs::create_directories(dir);
    detail::write_json(dir / "config.json", nlohmann::json(cfg));
    write_grid_csv(ws.grid, dir / "grid.csv", ws.hash);
    write_grid_geojson(ws.grid, dir / "grid.geojson", ws.hash);
    detail::write_json(dir / "timetable_stats.json", detail::timetable_stats(ws.tt));
    nlohmann::json manifest{
        {"config_hash", ws.hash},
        {"service_date", ws.service_ymd},
        {"hexagons", ws.grid.size()},
        {"total_population", ws.grid.total_population()},
        {"stops", ws.tt.stops.size()},
        {"lines", ws.tt.lines.size()},
        {"connections", ws.tt.connections.size()},
        {"population_cells_outside_grid", ws.assign_report.cells_outside},
        {"population_outside_grid", ws.assign_report.persons_outside}};
    detail::write_json(dir / "manifest.json", manifest);
    return ws;
}

// Reopen a previously ingested workspace by replaying its stored config.
inline Workspace open_workspace(const std::filesystem::path& dir) {
    const auto j = detail::read_json(dir / "config.json");
    RunConfig cfg = j.get<RunConfig>();
    Workspace ws = assemble(cfg, dir);
    return ws;
}

} // namespace teq

#endif
