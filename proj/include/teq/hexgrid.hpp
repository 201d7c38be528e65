#ifndef TEQ_HEXGRID_HPP
#define TEQ_HEXGRID_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "teq/geo.hpp"

namespace teq {

using HexId = std::int64_t;

struct Hexagon {
    HexId id = 0;
    int q = 0, r = 0;      // axial coordinates on the flat-top lattice
    GeoPoint center;       // barycenter, WGS84
    std::int64_t population = 0;
};

inline HexId hex_id_from_axial(int q, int r) {
    return (static_cast<std::int64_t>(q) << 32) |
           static_cast<std::int64_t>(static_cast<std::uint32_t>(r));
}

// Flat-top hexagonal tessellation laid out in a local azimuthal equidistant
// plane anchored at the grid origin. Immutable after construction except for
// population assignment, which happens before the grid is shared.
class HexGrid {
public:
    HexGrid() = default;

    // Every lattice hexagon whose center falls inside the rectangle spanned
    // by the projected bbox corners, populations zeroed.
    static HexGrid build(const GeoPoint& south_west, const GeoPoint& north_east,
                         double side_m) {
        validate(south_west);
        validate(north_east);
        if (side_m <= 0.0) throw invalid_input("hexagon side must be positive");
        if (south_west.lat >= north_east.lat || south_west.lon >= north_east.lon)
            throw invalid_input("degenerate bbox: corners must be (south-west, north-east)");

        HexGrid g;
        g.side_m_ = side_m;
        g.origin_ = GeoPoint{(south_west.lat + north_east.lat) / 2.0,
                             (south_west.lon + north_east.lon) / 2.0};
        g.proj_ = LocalProjection(g.origin_);

        const auto sw = g.proj_.forward(south_west);
        const auto ne = g.proj_.forward(north_east);
        const double xmin = sw[0], xmax = ne[0], ymin = sw[1], ymax = ne[1];

        const double col_w = 1.5 * side_m;          // x distance between columns
        const double row_h = std::sqrt(3.0) * side_m; // y distance between rows
        const int q_lo = static_cast<int>(std::floor(xmin / col_w)) - 1;
        const int q_hi = static_cast<int>(std::ceil(xmax / col_w)) + 1;
        for (int q = q_lo; q <= q_hi; ++q) {
            const double x = col_w * q;
            if (x < xmin || x > xmax) continue;
            const double r_center = -q / 2.0;
            const int r_lo = static_cast<int>(std::floor(ymin / row_h + r_center)) - 1;
            const int r_hi = static_cast<int>(std::ceil(ymax / row_h + r_center)) + 1;
            for (int r = r_lo; r <= r_hi; ++r) {
                const double y = row_h * (r + q / 2.0);
                if (y < ymin || y > ymax) continue;
                Hexagon h;
                h.q = q;
                h.r = r;
                h.id = hex_id_from_axial(q, r);
                h.center = g.proj_.inverse(x, y);
                g.hexes_.push_back(h);
            }
        }
        std::sort(g.hexes_.begin(), g.hexes_.end(),
                  [](const Hexagon& a, const Hexagon& b) { return a.id < b.id; });
        g.rebuild_index();
        return g;
    }

    const std::vector<Hexagon>& hexagons() const { return hexes_; }
    std::size_t size() const { return hexes_.size(); }
    bool empty() const { return hexes_.empty(); }
    double side_m() const { return side_m_; }
    const GeoPoint& origin() const { return origin_; }
    const LocalProjection& projection() const { return proj_; }

    double area_km2() const {
        const double s = side_m_ / 1000.0;
        return 1.5 * std::sqrt(3.0) * s * s;
    }

    std::int64_t total_population() const {
        std::int64_t t = 0;
        for (const auto& h : hexes_) t += h.population;
        return t;
    }

    bool contains(HexId id) const { return index_.count(id) > 0; }

    std::size_t index_of(HexId id) const {
        auto it = index_.find(id);
        if (it == index_.end())
            throw invalid_input("unknown hexagon id " + std::to_string(id));
        return it->second;
    }

    const Hexagon& hexagon(HexId id) const { return hexes_[index_of(id)]; }

    // Axial-coordinate rounding gives every point a unique lattice owner;
    // the result is none when the owner is not part of this grid.
    std::optional<HexId> locate(const GeoPoint& p) const {
        const auto xy = proj_.forward(p);
        const auto [q, r] = axial_round(xy[0], xy[1]);
        const HexId id = hex_id_from_axial(q, r);
        if (!contains(id)) return std::nullopt;
        return id;
    }

    // Flat-top corner ring, counterclockwise starting due east of the center.
    std::array<GeoPoint, 6> polygon(HexId id) const {
        const Hexagon& h = hexagon(id);
        const auto c = proj_.forward(h.center);
        std::array<GeoPoint, 6> out;
        for (int k = 0; k < 6; ++k) {
            const double ang = kPi / 3.0 * k;
            out[k] = proj_.inverse(c[0] + side_m_ * std::cos(ang),
                                   c[1] + side_m_ * std::sin(ang));
        }
        return out;
    }

    void add_population(HexId id, std::int64_t persons) {
        hexes_[index_of(id)].population += persons;
    }

    HexGrid filtered_copy(std::vector<char> const& keep) const {
        HexGrid g;
        g.side_m_ = side_m_;
        g.origin_ = origin_;
        g.proj_ = proj_;
        for (std::size_t i = 0; i < hexes_.size(); ++i)
            if (keep[i]) g.hexes_.push_back(hexes_[i]);
        g.rebuild_index();
        return g;
    }

private:
    std::pair<int, int> axial_round(double x, double y) const {
        const double qf = (2.0 / 3.0) * x / side_m_;
        const double rf = (-1.0 / 3.0 * x + std::sqrt(3.0) / 3.0 * y) / side_m_;
        // cube rounding
        const double sf = -qf - rf;
        double rq = std::round(qf), rr = std::round(rf), rs = std::round(sf);
        const double dq = std::fabs(rq - qf), dr = std::fabs(rr - rf), ds = std::fabs(rs - sf);
        if (dq > dr && dq > ds) rq = -rr - rs;
        else if (dr > ds) rr = -rq - rs;
        return {static_cast<int>(rq), static_cast<int>(rr)};
    }

    void rebuild_index() {
        index_.clear();
        index_.reserve(hexes_.size());
        for (std::size_t i = 0; i < hexes_.size(); ++i) index_[hexes_[i].id] = i;
    }

    GeoPoint origin_;
    double side_m_ = 1000.0;
    LocalProjection proj_;
    std::vector<Hexagon> hexes_;
    std::unordered_map<HexId, std::size_t> index_;
};

struct PopulationCell {
    GeoPoint location;
    std::int64_t persons = 0;
};

struct AssignResult {
    std::int64_t cells_outside = 0;
    std::int64_t persons_outside = 0;
};

inline AssignResult assign_population(HexGrid& grid,
                                      const std::vector<PopulationCell>& cells) {
    AssignResult res;
    for (const auto& c : cells) {
        if (c.persons < 0)
            throw invalid_input("negative population cell at lat=" +
                                std::to_string(c.location.lat));
        const auto id = grid.locate(c.location);
        if (!id) {
            ++res.cells_outside;
            res.persons_outside += c.persons;
            continue;
        }
        grid.add_population(*id, c.persons);
    }
    return res;
}

// Keeps hexagons whose density (persons per km^2) meets the threshold.
inline HexGrid filter_low_density(const HexGrid& grid, double min_density) {
    if (min_density < 0.0) throw invalid_input("min_density must be >= 0");
    const double area = grid.area_km2();
    std::vector<char> keep(grid.size(), 0);
    const auto& hexes = grid.hexagons();
    for (std::size_t i = 0; i < hexes.size(); ++i)
        keep[i] = static_cast<double>(hexes[i].population) / area >= min_density;
    return grid.filtered_copy(keep);
}

} // namespace teq

#endif
