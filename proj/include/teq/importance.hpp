#ifndef TEQ_IMPORTANCE_HPP
#define TEQ_IMPORTANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "teq/equity.hpp"

namespace teq {

// i(hexagon, line): meters traveled on each line within the earliest-arrival
// journey tree rooted at that hexagon. Dense hex-major storage; absent pairs
// are zero.
struct ImportanceMatrix {
    std::int32_t depart = 0;
    std::vector<HexId> hex_ids;        // grid order
    std::vector<std::string> line_ids; // timetable line order
    std::vector<double> data;          // hex_ids.size() x line_ids.size()

    double at(std::size_t hex_idx, std::size_t line_idx) const {
        return data[hex_idx * line_ids.size() + line_idx];
    }
    double& at(std::size_t hex_idx, std::size_t line_idx) {
        return data[hex_idx * line_ids.size() + line_idx];
    }
};

// Per-line meters over the tree's used connections, each connection once.
inline std::vector<double> line_importance(const JourneyTree& tree, const Timetable& tt) {
    std::vector<double> meters(tt.lines.size(), 0.0);
    for (std::uint32_t ci : tree.used)
        meters[tt.connections[ci].line] += tt.connections[ci].length_m;
    return meters;
}

// One earliest-arrival scan per hexagon yields both the accessibility field
// and the full importance matrix; the matrix is a byproduct of the tree the
// scan already built.
inline std::pair<AccessibilityField, ImportanceMatrix> importance_matrix(
    const HexGrid& grid, const Timetable& tt, const AccessContext& ctx,
    const Query& q, std::int32_t min_transfer_s, int threads = 1,
    ScanCounter* counter = nullptr) {
    if (q.horizon != ctx.horizon)
        throw invalid_input("access context was built for a different horizon");
    const auto& hexes = grid.hexagons();
    AccessibilityField field;
    field.depart = q.depart;
    field.horizon = q.horizon;
    field.line_set_tag = "full";
    field.hex_ids.resize(hexes.size());
    field.scores.assign(hexes.size(), 0);
    ImportanceMatrix mat;
    mat.depart = q.depart;
    mat.hex_ids.resize(hexes.size());
    mat.line_ids.reserve(tt.lines.size());
    for (const auto& l : tt.lines) mat.line_ids.push_back(l.id);
    mat.data.assign(hexes.size() * tt.lines.size(), 0.0);

    parallel_for(hexes.size(), threads, [&](std::size_t i) {
        field.hex_ids[i] = hexes[i].id;
        mat.hex_ids[i] = hexes[i].id;
        const auto st = earliest_arrival(tt, Query{hexes[i].center, q.depart, q.horizon},
                                         ctx.access[i], min_transfer_s);
        if (counter) counter->scans.fetch_add(1, std::memory_order_relaxed);
        field.scores[i] = population_in_mask(grid, reachable_mask(grid, ctx, i, st));
        const auto tree = journey_tree(st, tt, hexes[i].id);
        for (std::uint32_t ci : tree.used)
            mat.at(i, tt.connections[ci].line) += tt.connections[ci].length_m;
    });
    return {std::move(field), std::move(mat)};
}

// Prefix sums of importance over hexagons ordered from worst to best
// accessibility (ties by hexagon id).
struct CumulativeImportance {
    std::int32_t depart = 0;
    std::vector<HexId> hex_order;          // worst accessibility first
    std::vector<std::int64_t> populations; // aligned with hex_order
    std::vector<std::string> line_ids;
    std::vector<std::vector<double>> prefix; // per line, along hex_order
};

inline CumulativeImportance cumulative_importance(const ImportanceMatrix& mat,
                                                  const AccessibilityField& field,
                                                  const HexGrid& grid) {
    if (mat.hex_ids != field.hex_ids)
        throw invalid_input("importance matrix and field cover different hexagons");
    const std::size_t n = mat.hex_ids.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (field.scores[a] != field.scores[b]) return field.scores[a] < field.scores[b];
        return field.hex_ids[a] < field.hex_ids[b];
    });

    CumulativeImportance cum;
    cum.depart = mat.depart;
    cum.line_ids = mat.line_ids;
    cum.hex_order.reserve(n);
    cum.populations.reserve(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        cum.hex_order.push_back(mat.hex_ids[order[rank]]);
        cum.populations.push_back(grid.hexagons()[order[rank]].population);
    }
    cum.prefix.assign(mat.line_ids.size(), std::vector<double>(n, 0.0));
    for (std::size_t li = 0; li < mat.line_ids.size(); ++li) {
        double run = 0.0;
        for (std::size_t rank = 0; rank < n; ++rank) {
            run += mat.at(order[rank], li);
            cum.prefix[li][rank] = run;
        }
    }
    return cum;
}

struct FastEquityScores {
    std::int32_t depart = 0;
    double percentile = 0.65;
    std::vector<std::string> line_ids;
    std::vector<double> e; // meters, cumulative importance at the percentile cut
};

enum class PercentileWeighting { hex_count, population };

// e(l) = I(percentile hexagon, l): the prefix value at rank
// ceil(percentile * |grid|), 1-based, in worst-to-best order. With
// population weighting the cut is the first hexagon at which the cumulative
// population share reaches the percentile.
inline FastEquityScores fast_scores(const CumulativeImportance& cum,
                                    double percentile = 0.65,
                                    PercentileWeighting weighting =
                                        PercentileWeighting::hex_count) {
    if (cum.hex_order.empty()) throw invalid_input("fast_scores: empty grid");
    if (!(percentile > 0.0 && percentile <= 1.0))
        throw invalid_input("percentile must be in (0, 1]");
    const std::size_t n = cum.hex_order.size();
    std::size_t rank; // 1-based
    if (weighting == PercentileWeighting::hex_count) {
        rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(n)));
    } else {
        double total = 0.0;
        for (auto p : cum.populations) total += static_cast<double>(p);
        if (total <= 0.0) throw invalid_input("fast_scores: zero total population");
        double run = 0.0;
        rank = n;
        for (std::size_t i = 0; i < n; ++i) {
            run += static_cast<double>(cum.populations[i]);
            if (run / total >= percentile) {
                rank = i + 1;
                break;
            }
        }
    }
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;

    FastEquityScores out;
    out.depart = cum.depart;
    out.percentile = percentile;
    out.line_ids = cum.line_ids;
    out.e.reserve(cum.line_ids.size());
    for (const auto& pfx : cum.prefix) out.e.push_back(pfx[rank - 1]);
    return out;
}

} // namespace teq

#endif
