#ifndef TEQ_EXPORT_HPP
#define TEQ_EXPORT_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "teq/equity.hpp"
#include "teq/importance.hpp"

namespace teq {

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write file: " + path.string());
    return out;
}

inline nlohmann::json polygon_coords(const HexGrid& grid, HexId id) {
    // exterior ring, counterclockwise, closed
    nlohmann::json ring = nlohmann::json::array();
    const auto corners = grid.polygon(id);
    for (const auto& c : corners) ring.push_back({c.lon, c.lat});
    ring.push_back({corners[0].lon, corners[0].lat});
    nlohmann::json poly = nlohmann::json::array();
    poly.push_back(std::move(ring));
    return poly;
}

} // namespace detail

// FeatureCollection of hexagon polygons; accessibility is included when a
// field is supplied.
inline void write_grid_geojson(const HexGrid& grid, const std::filesystem::path& path,
                               const std::string& config_hash,
                               const AccessibilityField* field = nullptr) {
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    fc["config_hash"] = config_hash;
    auto& features = fc["features"] = nlohmann::json::array();
    const auto& hexes = grid.hexagons();
    for (std::size_t i = 0; i < hexes.size(); ++i) {
        nlohmann::json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Polygon"},
                         {"coordinates", detail::polygon_coords(grid, hexes[i].id)}};
        f["properties"] = {{"id", hexes[i].id}, {"population", hexes[i].population}};
        if (field) f["properties"]["accessibility"] = field->scores[i];
        features.push_back(std::move(f));
    }
    auto out = detail::open_out(path);
    out << fc.dump(1) << '\n';
}

inline void write_grid_csv(const HexGrid& grid, const std::filesystem::path& path,
                           const std::string& config_hash) {
    auto out = detail::open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    out << "hex_id,lat,lon,population\n";
    for (const auto& h : grid.hexagons())
        out << h.id << ',' << format_double(h.center.lat) << ','
            << format_double(h.center.lon) << ',' << h.population << '\n';
}

inline void write_accessibility_csv(const HexGrid& grid, const AccessibilityField& field,
                                    const std::filesystem::path& path,
                                    const std::string& config_hash) {
    auto out = detail::open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    out << "hex_id,lat,lon,population,accessibility\n";
    const auto& hexes = grid.hexagons();
    for (std::size_t i = 0; i < hexes.size(); ++i)
        out << hexes[i].id << ',' << format_double(hexes[i].center.lat) << ','
            << format_double(hexes[i].center.lon) << ',' << hexes[i].population << ','
            << field.scores[i] << '\n';
}

inline void write_lorenz_csv(const LorenzCurve& curve, const std::filesystem::path& path,
                             const std::string& config_hash) {
    auto out = detail::open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    out << "x,y\n";
    for (const auto& p : curve.points)
        out << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
}

inline void write_exact_scores_csv(const ExactEquityScores& scores,
                                   const std::vector<Line>& lines,
                                   const std::filesystem::path& path,
                                   const std::string& config_hash) {
    auto out = detail::open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    out << "line_id,line_name,delta_g\n";
    for (std::size_t i = 0; i < scores.line_ids.size(); ++i)
        out << csv_escape(scores.line_ids[i]) << ',' << csv_escape(lines[i].name) << ','
            << format_double(scores.delta_g[i]) << '\n';
}

inline void write_fast_scores_csv(const FastEquityScores& scores,
                                  const std::vector<Line>& lines,
                                  const std::filesystem::path& path,
                                  const std::string& config_hash) {
    auto out = detail::open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    out << "line_id,line_name,e_score\n";
    for (std::size_t i = 0; i < scores.line_ids.size(); ++i)
        out << csv_escape(scores.line_ids[i]) << ',' << csv_escape(lines[i].name) << ','
            << format_double(scores.e[i]) << '\n';
}

inline void write_cumulative_csv(const CumulativeImportance& cum,
                                 const std::filesystem::path& path,
                                 const std::string& config_hash) {
    auto out = detail::open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    out << "rank,hex_id,line_id,I\n";
    for (std::size_t li = 0; li < cum.line_ids.size(); ++li)
        for (std::size_t rank = 0; rank < cum.hex_order.size(); ++rank)
            out << (rank + 1) << ',' << cum.hex_order[rank] << ','
                << csv_escape(cum.line_ids[li]) << ','
                << format_double(cum.prefix[li][rank]) << '\n';
}

inline void write_ranking_csv(const std::vector<std::pair<std::string, double>>& ranking,
                              const std::filesystem::path& path,
                              const std::string& config_hash) {
    auto out = detail::open_out(path);
    out << "# config_hash=" << config_hash << '\n';
    out << "rank,line_id,score\n";
    for (std::size_t i = 0; i < ranking.size(); ++i)
        out << (i + 1) << ',' << csv_escape(ranking[i].first) << ','
            << format_double(ranking[i].second) << '\n';
}

} // namespace teq

#endif
