#ifndef TEQ_EQUITY_HPP
#define TEQ_EQUITY_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "teq/accessibility.hpp"

namespace teq {

namespace detail {

// Hexagons holding population, sorted worst accessibility first, ties by id.
inline std::vector<std::size_t> sorted_by_accessibility(const AccessibilityField& field,
                                                        const HexGrid& grid) {
    const auto& hexes = grid.hexagons();
    std::vector<std::size_t> order;
    order.reserve(hexes.size());
    for (std::size_t i = 0; i < hexes.size(); ++i)
        if (hexes[i].population > 0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (field.scores[a] != field.scores[b]) return field.scores[a] < field.scores[b];
        return hexes[a].id < hexes[b].id;
    });
    return order;
}

} // namespace detail

struct LorenzCurve {
    std::vector<std::array<double, 2>> points; // (pop fraction, accessibility fraction)
};

struct GiniScore {
    double value = 0.0;
};

// Population-weighted Lorenz curve: individuals sorted worst-to-best, each
// hexagon contributing a segment of width pop/Σpop and rise pop*a/K', with
// K' the total person-accessibility. Equivalent to enumerating individuals
// one by one, since everyone in a hexagon shares its score.
inline LorenzCurve lorenz(const AccessibilityField& field, const HexGrid& grid) {
    const auto order = detail::sorted_by_accessibility(field, grid);
    double total_pop = 0.0, total_acc = 0.0;
    for (std::size_t i : order) {
        const double w = static_cast<double>(grid.hexagons()[i].population);
        total_pop += w;
        total_acc += w * static_cast<double>(field.scores[i]);
    }
    if (total_pop <= 0.0) throw invalid_input("lorenz: total population is zero");
    if (total_acc <= 0.0) throw invalid_input("lorenz: total accessibility is zero");

    LorenzCurve curve;
    curve.points.reserve(order.size() + 1);
    curve.points.push_back({0.0, 0.0});
    double cw = 0.0, ca = 0.0;
    for (std::size_t i : order) {
        const double w = static_cast<double>(grid.hexagons()[i].population);
        cw += w;
        ca += w * static_cast<double>(field.scores[i]);
        curve.points.push_back({cw / total_pop, ca / total_acc});
    }
    curve.points.back() = {1.0, 1.0}; // pin the endpoint against rounding
    return curve;
}

// Twice the area between the equality diagonal and the Lorenz curve,
// evaluated through the sorted cumulative identity:
//   G = sum_j w_j (a_j W_{j-1} - S_{j-1}) / (W_n S_n)
// which equals the pairwise form sum_ij w_i w_j |a_i - a_j| / (2 W^2 abar).
inline GiniScore gini(const AccessibilityField& field, const HexGrid& grid) {
    const auto order = detail::sorted_by_accessibility(field, grid);
    double total_pop = 0.0, total_acc = 0.0;
    for (std::size_t i : order) {
        const double w = static_cast<double>(grid.hexagons()[i].population);
        total_pop += w;
        total_acc += w * static_cast<double>(field.scores[i]);
    }
    if (total_pop <= 0.0) throw invalid_input("gini: total population is zero");
    if (total_acc <= 0.0) throw invalid_input("gini: total accessibility is zero");

    double acc_w = 0.0, acc_wa = 0.0, num = 0.0;
    for (std::size_t i : order) {
        const double w = static_cast<double>(grid.hexagons()[i].population);
        const double a = static_cast<double>(field.scores[i]);
        num += w * (a * acc_w - acc_wa);
        acc_w += w;
        acc_wa += w * a;
    }
    GiniScore g;
    g.value = num / (total_pop * total_acc);
    if (g.value < 0.0) g.value = 0.0;
    if (g.value > 1.0) g.value = 1.0;
    return g;
}

// Trapezoid area under a Lorenz curve; 1 - 2*area is the geometric Gini.
inline double lorenz_area(const LorenzCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& p0 = curve.points[i - 1];
        const auto& p1 = curve.points[i];
        area += (p1[0] - p0[0]) * (p1[1] + p0[1]) / 2.0;
    }
    return area;
}

struct ExactEquityScores {
    std::int32_t depart = 0;
    double base_gini = 0.0;
    std::vector<std::string> line_ids; // timetable line order
    std::vector<double> delta_g;       // G(without line) - G(all lines)
};

// The exact leave-one-line-out score: for every line, rebuild the field on
// the reduced timetable and take the Gini difference. |L|+1 full field
// passes, hence the fast path in importance.hpp.
inline ExactEquityScores exact_scores(const HexGrid& grid, const Timetable& tt,
                                      const AccessContext& ctx, const Query& q,
                                      std::int32_t min_transfer_s, int threads = 1,
                                      ScanCounter* counter = nullptr) {
    ExactEquityScores out;
    out.depart = q.depart;
    const auto base_field =
        accessibility_field(grid, tt, ctx, q, min_transfer_s, threads, counter, "full");
    out.base_gini = gini(base_field, grid).value;
    out.line_ids.reserve(tt.lines.size());
    for (const auto& l : tt.lines) out.line_ids.push_back(l.id);
    out.delta_g.assign(tt.lines.size(), 0.0);
    parallel_for(tt.lines.size(), threads, [&](std::size_t li) {
        const Timetable reduced = remove_line(tt, tt.lines[li].id);
        const auto field = accessibility_field(grid, reduced, ctx, q, min_transfer_s,
                                               1, counter, "without:" + tt.lines[li].id);
        out.delta_g[li] = gini(field, grid).value - out.base_gini;
    });
    return out;
}

} // namespace teq

#endif
