#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "teq/stats.hpp"
#include "teq/workspace.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitState = 3;

struct ConfigOverrides {
    std::optional<std::string> gtfs_dir, population_csv, service_date, walk_matrix;
    std::optional<std::vector<double>> bbox;
    std::optional<double> side_m, min_density, walk_speed_mps, walk_detour,
        footpath_radius_m, percentile;
    std::optional<int> depart_s, horizon_s, max_access_s, min_transfer_s, threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> line_grouping, percentile_weighting;

    void apply(teq::RunConfig& cfg) const {
        if (gtfs_dir) cfg.gtfs_dir = *gtfs_dir;
        if (population_csv) cfg.population_csv = *population_csv;
        if (service_date) cfg.service_date = *service_date;
        if (walk_matrix) cfg.walk_matrix = *walk_matrix;
        if (bbox) {
            if (bbox->size() != 4)
                throw teq::invalid_input("--bbox expects south west north east");
            cfg.bbox_south = (*bbox)[0];
            cfg.bbox_west = (*bbox)[1];
            cfg.bbox_north = (*bbox)[2];
            cfg.bbox_east = (*bbox)[3];
        }
        if (side_m) cfg.side_m = *side_m;
        if (min_density) cfg.min_density = *min_density;
        if (walk_speed_mps) cfg.walk_speed_mps = *walk_speed_mps;
        if (walk_detour) cfg.walk_detour = *walk_detour;
        if (footpath_radius_m) cfg.footpath_radius_m = *footpath_radius_m;
        if (percentile) cfg.percentile = *percentile;
        if (depart_s) cfg.depart_s = *depart_s;
        if (horizon_s) cfg.horizon_s = *horizon_s;
        if (max_access_s) cfg.max_access_s = *max_access_s;
        if (min_transfer_s) cfg.min_transfer_s = *min_transfer_s;
        if (threads) cfg.threads = *threads;
        if (seed) cfg.seed = *seed;
        if (line_grouping) cfg.line_grouping = *line_grouping;
        if (percentile_weighting) cfg.percentile_weighting = *percentile_weighting;
    }
};

void add_override_flags(CLI::App* cmd, ConfigOverrides& ov) {
    cmd->add_option("--gtfs-dir", ov.gtfs_dir, "GTFS directory (overrides config)");
    cmd->add_option("--population-csv", ov.population_csv, "population CSV (overrides config)");
    cmd->add_option("--bbox", ov.bbox, "south west north east")->expected(4);
    cmd->add_option("--side-m", ov.side_m, "hexagon side, meters");
    cmd->add_option("--min-density", ov.min_density, "density floor, persons/km^2");
    cmd->add_option("--depart-s", ov.depart_s, "departure time, seconds since midnight");
    cmd->add_option("--horizon-s", ov.horizon_s, "travel time budget, seconds");
    cmd->add_option("--walk-speed-mps", ov.walk_speed_mps, "walking speed");
    cmd->add_option("--walk-detour", ov.walk_detour, "straight-line detour factor");
    cmd->add_option("--max-access-s", ov.max_access_s, "access walk budget, seconds");
    cmd->add_option("--footpath-radius-m", ov.footpath_radius_m, "stop transfer radius");
    cmd->add_option("--min-transfer-s", ov.min_transfer_s, "minimum transfer slack");
    cmd->add_option("--percentile", ov.percentile, "fast-score percentile cut");
    cmd->add_option("--percentile-weighting", ov.percentile_weighting,
                    "hex_count or population");
    cmd->add_option("--line-grouping", ov.line_grouping, "route_id or short_name");
    cmd->add_option("--service-date", ov.service_date, "YYYYMMDD (default: first Wednesday)");
    cmd->add_option("--walk-matrix", ov.walk_matrix, "CSV hex_id,stop_id,seconds");
    cmd->add_option("--threads", ov.threads, "worker threads (0 = auto)");
    cmd->add_option("--seed", ov.seed, "random seed echoed into outputs");
}

teq::RunConfig load_config(const std::string& config_path, const ConfigOverrides& ov) {
    teq::RunConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw teq::invalid_input("cannot open config: " + config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw teq::invalid_input(config_path + ": " + e.what());
        }
        cfg = j.get<teq::RunConfig>();
    }
    ov.apply(cfg);
    return cfg;
}

std::map<std::string, double> read_score_csv(const fs::path& path, const char* col) {
    if (!fs::exists(path))
        throw teq::state_error("missing " + path.string() + "; run `score` first");
    teq::CsvReader csv(path.string());
    std::map<std::string, double> out;
    while (csv.next()) out[csv.require("line_id")] = csv.require_double(col);
    return out;
}

struct ScoreMeta {
    double wall_seconds = 0.0;
    std::uint64_t scans = 0;
};

int run_accessibility(const teq::Workspace& ws, bool quiet = false) {
    teq::ScanCounter counter;
    const auto field = teq::accessibility_field(
        ws.grid, ws.tt, ws.ctx, ws.cfg.query({}), ws.cfg.min_transfer_s, ws.cfg.threads,
        &counter);
    teq::write_accessibility_csv(ws.grid, field, ws.dir / "accessibility.csv", ws.hash);
    teq::write_grid_geojson(ws.grid, ws.dir / "accessibility.geojson", ws.hash, &field);
    if (!quiet)
        std::cout << "accessibility: " << ws.grid.size() << " hexagons, "
                  << counter.scans.load() << " scans\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transit equity scoring: accessibility, Gini inequity and "
                 "per-line equity scores from GTFS schedules"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic city");
    std::string synth_out, synth_spec_path;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--spec", synth_spec_path, "synthesis spec JSON");
    synth->add_option("--seed", synth_seed, "random seed");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse inputs and persist a workspace");
    std::string ingest_config, ingest_ws;
    ConfigOverrides ingest_ov;
    ingest->add_option("--config", ingest_config, "run config JSON");
    ingest->add_option("--workspace", ingest_ws, "workspace directory")->required();
    add_override_flags(ingest, ingest_ov);

    // accessibility
    auto* acc = app.add_subcommand("accessibility", "per-hexagon accessibility field");
    std::string acc_ws;
    acc->add_option("--workspace", acc_ws, "workspace directory")->required();

    // gini
    auto* gini_cmd = app.add_subcommand("gini", "Gini inequity of the accessibility field");
    std::string gini_ws;
    gini_cmd->add_option("--workspace", gini_ws, "workspace directory")->required();

    // score
    auto* score = app.add_subcommand("score", "per-line equity scores");
    std::string score_ws, score_method;
    score->add_option("--workspace", score_ws, "workspace directory")->required();
    score->add_option("--method", score_method, "exact | fast")->required();

    // correlate
    auto* corr = app.add_subcommand("correlate", "correlation between exact and fast scores");
    std::string corr_ws;
    corr->add_option("--workspace", corr_ws, "workspace directory")->required();

    // export-geojson
    auto* exp = app.add_subcommand("export-geojson", "export a computed layer");
    std::string exp_ws, exp_layer, exp_out;
    exp->add_option("--workspace", exp_ws, "workspace directory")->required();
    exp->add_option("--layer", exp_layer, "grid | accessibility | lorenz")->required();
    exp->add_option("--out", exp_out, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            teq::SynthSpec spec;
            if (!synth_spec_path.empty()) {
                std::ifstream in(synth_spec_path);
                if (!in) throw teq::invalid_input("cannot open spec: " + synth_spec_path);
                json j;
                try {
                    in >> j;
                } catch (const json::exception& e) {
                    throw teq::invalid_input(synth_spec_path + ": " + e.what());
                }
                spec = j.get<teq::SynthSpec>();
            }
            const auto city = teq::synthesize_network(spec, synth_seed);
            teq::write_synth_city(city, synth_out);
            // a ready-to-run config pointing at the generated inputs
            teq::RunConfig cfg;
            cfg.gtfs_dir = (fs::path(synth_out) / "gtfs").string();
            cfg.population_csv = (fs::path(synth_out) / "population.csv").string();
            cfg.bbox_south = city.bbox_sw.lat;
            cfg.bbox_west = city.bbox_sw.lon;
            cfg.bbox_north = city.bbox_ne.lat;
            cfg.bbox_east = city.bbox_ne.lon;
            cfg.seed = synth_seed;
            teq::detail::write_json(fs::path(synth_out) / "run_config.json", json(cfg));
            std::cout << "synth: " << city.feed.routes.size() << " lines, "
                      << city.feed.stops.size() << " stops, "
                      << city.population.size() << " population cells -> "
                      << synth_out << "\n";
            return kExitOk;
        }

        if (*ingest) {
            const auto cfg = load_config(ingest_config, ingest_ov);
            const auto ws = teq::cmd_ingest(cfg, ingest_ws);
            std::cout << "ingest: " << ws.grid.size() << " hexagons ("
                      << ws.grid.total_population() << " residents), "
                      << ws.tt.lines.size() << " lines, " << ws.tt.connections.size()
                      << " connections, service date " << ws.service_ymd << "\n";
            return kExitOk;
        }

        if (*acc) return run_accessibility(teq::open_workspace(acc_ws));

        if (*gini_cmd) {
            const auto ws = teq::open_workspace(gini_ws);
            teq::ScanCounter counter;
            const auto field = teq::accessibility_field(ws.grid, ws.tt, ws.ctx,
                                                        ws.cfg.query({}), ws.cfg.min_transfer_s,
                                                        ws.cfg.threads, &counter);
            double g;
            teq::LorenzCurve curve;
            try {
                g = teq::gini(field, ws.grid).value;
                curve = teq::lorenz(field, ws.grid);
            } catch (const teq::invalid_input& e) {
                throw teq::state_error(std::string("degenerate field: ") + e.what());
            }
            teq::write_lorenz_csv(curve, ws.dir / "lorenz.csv", ws.hash);
            teq::detail::write_json(ws.dir / "gini.json",
                                    json{{"gini", g},
                                         {"config_hash", ws.hash},
                                         {"scans", counter.scans.load()}});
            std::cout << "gini: " << teq::format_double(g) << "\n";
            return kExitOk;
        }

        if (*score) {
            if (score_method != "exact" && score_method != "fast")
                throw teq::invalid_input("--method must be 'exact' or 'fast'");
            const auto ws = teq::open_workspace(score_ws);
            teq::ScanCounter counter;
            const auto t0 = std::chrono::steady_clock::now();
            json meta;
            try {
                if (score_method == "exact") {
                    const auto scores =
                        teq::exact_scores(ws.grid, ws.tt, ws.ctx, ws.cfg.query({}),
                                          ws.cfg.min_transfer_s, ws.cfg.threads, &counter);
                    teq::write_exact_scores_csv(scores, ws.tt.lines,
                                                ws.dir / "scores_exact.csv", ws.hash);
                    meta["base_gini"] = scores.base_gini;
                } else {
                    auto [field, mat] =
                        teq::importance_matrix(ws.grid, ws.tt, ws.ctx, ws.cfg.query({}),
                                               ws.cfg.min_transfer_s, ws.cfg.threads, &counter);
                    meta["base_gini"] = teq::gini(field, ws.grid).value;
                    const auto cum = teq::cumulative_importance(mat, field, ws.grid);
                    const auto scores =
                        teq::fast_scores(cum, ws.cfg.percentile, ws.cfg.weighting());
                    teq::write_fast_scores_csv(scores, ws.tt.lines,
                                               ws.dir / "scores_fast.csv", ws.hash);
                    teq::write_cumulative_csv(cum, ws.dir / "cumulative_importance.csv",
                                              ws.hash);
                }
            } catch (const teq::invalid_input& e) {
                throw teq::state_error(std::string("degenerate field: ") + e.what());
            }
            const double wall = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
            meta["method"] = score_method;
            meta["wall_seconds"] = wall;
            meta["scans"] = counter.scans.load();
            meta["hexagons"] = ws.grid.size();
            meta["lines"] = ws.tt.lines.size();
            meta["config_hash"] = ws.hash;
            teq::detail::write_json(ws.dir / ("score_meta_" + score_method + ".json"), meta);
            std::cout << "score " << score_method << ": " << ws.tt.lines.size()
                      << " lines, " << counter.scans.load() << " scans, "
                      << teq::format_double(wall) << " s\n";
            return kExitOk;
        }

        if (*corr) {
            const auto ws = teq::open_workspace(corr_ws);
            const auto exact = read_score_csv(ws.dir / "scores_exact.csv", "delta_g");
            const auto fast = read_score_csv(ws.dir / "scores_fast.csv", "e_score");
            std::vector<double> xs, ys;
            std::vector<std::pair<std::string, double>> exact_pairs, fast_pairs;
            for (const auto& [line, dg] : exact) {
                auto it = fast.find(line);
                if (it == fast.end()) continue;
                xs.push_back(dg);
                ys.push_back(it->second);
                exact_pairs.emplace_back(line, dg);
                fast_pairs.emplace_back(line, it->second);
            }
            if (xs.size() < 3)
                throw teq::invalid_input("fewer than 3 lines common to both score files");
            const auto rep = teq::correlate(xs, ys);
            teq::detail::write_json(ws.dir / "correlation.json",
                                    json{{"r", rep.r},
                                         {"p", rep.p},
                                         {"n", rep.n},
                                         {"config_hash", ws.hash}});
            teq::write_ranking_csv(teq::rank_lines(exact_pairs),
                                   ws.dir / "ranking_exact.csv", ws.hash);
            teq::write_ranking_csv(teq::rank_lines(fast_pairs),
                                   ws.dir / "ranking_fast.csv", ws.hash);
            std::cout << "correlate: r=" << teq::format_double(rep.r)
                      << " p=" << teq::format_double(rep.p) << " n=" << rep.n << "\n";
            return kExitOk;
        }

        if (*exp) {
            const auto ws = teq::open_workspace(exp_ws);
            if (exp_layer == "grid") {
                const fs::path out = exp_out.empty() ? ws.dir / "grid.geojson" : fs::path(exp_out);
                teq::write_grid_geojson(ws.grid, out, ws.hash);
                std::cout << "export: " << out.string() << "\n";
            } else if (exp_layer == "accessibility") {
                const fs::path src = ws.dir / "accessibility.csv";
                if (!fs::exists(src))
                    throw teq::state_error("accessibility layer not computed; run "
                                           "`accessibility` first");
                teq::CsvReader csv(src.string());
                teq::AccessibilityField field;
                field.depart = ws.cfg.depart_s;
                field.horizon = ws.cfg.horizon_s;
                field.hex_ids.resize(ws.grid.size());
                field.scores.assign(ws.grid.size(), 0);
                for (std::size_t i = 0; i < ws.grid.size(); ++i)
                    field.hex_ids[i] = ws.grid.hexagons()[i].id;
                while (csv.next()) {
                    const auto id = static_cast<teq::HexId>(csv.require_int("hex_id"));
                    field.scores[ws.grid.index_of(id)] = csv.require_int("accessibility");
                }
                const fs::path out =
                    exp_out.empty() ? ws.dir / "accessibility.geojson" : fs::path(exp_out);
                teq::write_grid_geojson(ws.grid, out, ws.hash, &field);
                std::cout << "export: " << out.string() << "\n";
            } else if (exp_layer == "lorenz") {
                const fs::path src = ws.dir / "lorenz.csv";
                if (!fs::exists(src))
                    throw teq::state_error("lorenz layer not computed; run `gini` first");
                const fs::path out = exp_out.empty() ? ws.dir / "lorenz_export.csv"
                                                     : fs::path(exp_out);
                fs::copy_file(src, out, fs::copy_options::overwrite_existing);
                std::cout << "export: " << out.string() << "\n";
            } else {
                throw teq::invalid_input("unknown layer '" + exp_layer +
                                         "' (grid | accessibility | lorenz)");
            }
            return kExitOk;
        }
    } catch (const teq::state_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitState;
    } catch (const teq::invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
