#include "demsr/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "demsr/error.hpp"
#include "demsr/eval_morph.hpp"
#include "demsr/eval_numeric.hpp"
#include "demsr/geojson.hpp"
#include "demsr/grid.hpp"
#include "demsr/interp.hpp"
#include "demsr/model.hpp"
#include "demsr/parallel.hpp"
#include "demsr/pipeline.hpp"
#include "demsr/synth.hpp"

namespace demsr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write to '" + path + "' failed");
}

/// One manifest per output: <dir>/manifest.json for directory outputs,
/// <file>.manifest.json for file outputs.
void write_manifest(const std::string& command, const std::vector<std::string>& argv,
                    const json& config, const json& inputs, const json& outputs,
                    const std::string& out_path, bool out_is_dir) {
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["tool_version"] = kToolVersion;
    m["timestamp"] = iso_timestamp();
    const fs::path p = out_is_dir ? fs::path(out_path) / "manifest.json"
                                  : fs::path(out_path + ".manifest.json");
    write_text_file(p.string(), m.dump(2) + "\n");
}

json stats_json(const ErrorStats& s) {
    return {{"mae", s.mae},   {"rmse", s.rmse},        {"std", s.std},
            {"n", s.n},       {"mean_error", s.mean_error}};
}

json binned_json(const BinnedReport& rep) {
    json bins = json::array();
    for (const Bin& b : rep.bins) {
        json jb = {{"label", b.label}, {"count", b.count}, {"frequency", b.frequency},
                   {"empty", b.empty}};
        if (!b.empty) {
            jb["mae"] = b.stats.mae;
            jb["rmse"] = b.stats.rmse;
            jb["std"] = b.stats.std;
        }
        bins.push_back(std::move(jb));
    }
    return {{"bins", std::move(bins)},
            {"mean_mae", rep.mean_mae},
            {"mean_rmse", rep.mean_rmse},
            {"total_valid", rep.total_valid},
            {"weighting", "unweighted-across-bins"}};
}

std::string binned_csv(const std::string& method, const BinnedReport& rep) {
    std::string csv = "method,bin,count,frequency,mae,rmse,std\n";
    for (const Bin& b : rep.bins) {
        csv += method + "," + b.label + "," + std::to_string(b.count) + "," + num(b.frequency);
        if (b.empty) {
            csv += ",,,\n";
        } else {
            csv += "," + num(b.stats.mae) + "," + num(b.stats.rmse) + "," + num(b.stats.std) +
                   "\n";
        }
    }
    csv += method + ",mean(unweighted),,," + num(rep.mean_mae) + "," + num(rep.mean_rmse) + ",\n";
    return csv;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Subcommand state. CLI11 option callbacks fill these; execution happens once
// parsing succeeded so that usage errors never leave partial outputs behind.
// ---------------------------------------------------------------------------

struct SynthArgs {
    SynthConfig cfg;
    std::string out;
};

struct GridIoArgs {
    std::string in, out;
    int factor = 4;
    std::string method = "bi";
    double idw_power = 2.0;
    int idw_k = 4;
};

struct TrainArgs {
    TrainConfig cfg;
    std::vector<std::string> areas;
    std::string out;
    long checkpoint_every = 0;
    int threads = 0;
};

struct ReconstructArgs {
    std::string in, model, out;
    int factor = 4;
    int block = 250;
    int overlap = 125;
    int threads = 0;
};

struct EvalArgs {
    std::string recon, ref, method = "unnamed";
    std::string out, csv;
    std::string slope;                    // eval-slope: optional precomputed slope grid
    std::vector<double> edges;            // eval-slope
    std::string landcover;                // eval-landcover
    std::string roads;                    // eval-roads
    std::string buildings;                // eval-buildings
    double edge_threshold = 1.0;          // eval-buildings
    double min_area = 20.0;               // eval-buildings
    std::vector<int> buffers = {0, 1, 2, 3};
    int threads = 0;
};

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
};

void emit_eval(const json& doc, const std::string& csv_text, const EvalArgs& a,
               const std::string& command, const std::vector<std::string>& argv,
               const json& config, const json& inputs) {
    write_text_file(a.out, doc.dump(2) + "\n");
    json outputs = {{"json", a.out}};
    if (!a.csv.empty()) {
        write_text_file(a.csv, csv_text);
        outputs["csv"] = a.csv;
    }
    write_manifest(command, argv, config, inputs, outputs, a.out, false);
}

int run_synth(const SynthArgs& a, const std::vector<std::string>& argv) {
    SynthScene scene = generate_scene(a.cfg);
    fs::create_directories(a.out);
    const fs::path dir(a.out);
    write_ascii_grid_file(scene.dem, (dir / "dem.asc").string());
    write_ascii_grid_file(scene.landcover, (dir / "landcover.asc").string());
    write_roads_geojson_file(scene.roads, (dir / "roads.geojson").string());
    write_buildings_geojson_file(scene.buildings, scene.building_heights,
                                 (dir / "buildings.geojson").string());
    json config = {{"size", a.cfg.size},
                   {"cell_size", a.cfg.cell_size},
                   {"seed", a.cfg.seed},
                   {"terrain_amplitude", a.cfg.terrain_amplitude},
                   {"terrain_wavelength", a.cfg.terrain_wavelength},
                   {"road_spacing", a.cfg.road_spacing},
                   {"road_width", a.cfg.road_width},
                   {"building_density", a.cfg.building_density},
                   {"footprint_min", a.cfg.footprint_min},
                   {"footprint_max", a.cfg.footprint_max},
                   {"height_min", a.cfg.height_min},
                   {"height_max", a.cfg.height_max},
                   {"noise_amplitude", a.cfg.noise_amplitude}};
    json outputs = {{"dem", (dir / "dem.asc").string()},
                    {"landcover", (dir / "landcover.asc").string()},
                    {"roads", (dir / "roads.geojson").string()},
                    {"buildings", (dir / "buildings.geojson").string()}};
    write_manifest("synth", argv, config, json::object(), outputs, a.out, true);
    std::cout << "synth: " << scene.buildings.polygons.size() << " buildings, "
              << scene.roads.size() << " roads, " << a.cfg.size << "x" << a.cfg.size
              << " cells -> " << a.out << "\n";
    return 0;
}

int run_downsample(const GridIoArgs& a, const std::vector<std::string>& argv) {
    const Grid g = read_ascii_grid_file(a.in);
    const Grid out = downsample_nn(g, a.factor);
    write_ascii_grid_file(out, a.out);
    write_manifest("downsample", argv, {{"factor", a.factor}}, {{"in", a.in}},
                   {{"out", a.out}}, a.out, false);
    std::cout << "downsample: " << g.nrows << "x" << g.ncols << " -> " << out.nrows << "x"
              << out.ncols << " at " << num(out.cell_size) << " m\n";
    return 0;
}

int run_upsample(const GridIoArgs& a, const std::vector<std::string>& argv) {
    const Grid g = read_ascii_grid_file(a.in);
    Grid out;
    if (a.method == "nn") {
        out = upsample_nn(g, a.factor);
    } else if (a.method == "bi") {
        out = upsample_bilinear(g, a.factor);
    } else if (a.method == "cc") {
        out = upsample_bicubic(g, a.factor);
    } else if (a.method == "idw") {
        out = upsample_idw(g, a.factor, a.idw_power, a.idw_k);
    } else {
        throw ValueError("unknown upsample method '" + a.method + "'");
    }
    write_ascii_grid_file(out, a.out);
    json config = {{"factor", a.factor}, {"method", a.method}};
    if (a.method == "idw") {
        config["idw_power"] = a.idw_power;
        config["idw_k"] = a.idw_k;
    }
    write_manifest("upsample", argv, config, {{"in", a.in}}, {{"out", a.out}}, a.out, false);
    std::cout << "upsample(" << a.method << "): " << g.nrows << "x" << g.ncols << " -> "
              << out.nrows << "x" << out.ncols << " at " << num(out.cell_size) << " m\n";
    return 0;
}

json train_config_json(const TrainConfig& c) {
    return {{"n_scales", c.n_scales},
            {"batch_size", c.batch_size},
            {"patch_size", c.patch_size},
            {"lr", c.lr},
            {"lr_drop_factor", c.lr_drop_factor},
            {"lr_drop_after", c.lr_drop_after},
            {"weight_decay", c.weight_decay},
            {"total_iters", c.total_iters},
            {"seed", c.seed},
            {"block", c.block},
            {"block_overlap", c.block_overlap},
            {"split_divisor", c.split_divisor},
            {"stratified", c.stratified}};
}

int run_train(const TrainArgs& a, const std::vector<std::string>& argv) {
    if (a.threads > 0) set_threads(a.threads);
    std::vector<Grid> areas;
    areas.reserve(a.areas.size());
    for (const std::string& path : a.areas) areas.push_back(read_ascii_grid_file(path));

    std::vector<std::string> warnings;
    BlockStore store = build_blocks(areas, a.cfg, &warnings);
    for (const std::string& w : warnings) std::cout << "warning: " << w << "\n";
    if (store.blocks.empty()) throw ValueError("train: no usable blocks in the given areas");

    fs::create_directories(a.out);
    const fs::path dir(a.out);
    CheckpointFn checkpoint;
    if (a.checkpoint_every > 0) {
        checkpoint = [&dir](long iter, const msm::MsmModel& m) {
            msm::save_model_file(m, (dir / ("checkpoint_" + std::to_string(iter) + ".msm")).string());
        };
    }
    TrainResult result = train(store, a.cfg, checkpoint, a.checkpoint_every);
    const std::string model_path = (dir / "model.msm").string();
    const std::string history_path = (dir / "loss.csv").string();
    msm::save_model_file(result.model, model_path);
    write_history_csv(result.history, history_path);

    json config = train_config_json(a.cfg);
    config["checkpoint_every"] = a.checkpoint_every;
    config["threads"] = a.threads;
    write_manifest("train", argv, config, {{"areas", a.areas}},
                   {{"model", model_path}, {"history", history_path}}, a.out, true);
    if (!result.history.empty()) {
        std::cout << "train: " << store.blocks.size() << " blocks, " << a.cfg.total_iters
                  << " iters, loss " << num(result.history.front().loss) << " -> "
                  << num(result.history.back().loss) << "\n";
    } else {
        std::cout << "train: 0 iterations; saved the freshly initialized model\n";
    }
    return 0;
}

int run_reconstruct(const ReconstructArgs& a, const std::vector<std::string>& argv) {
    if (a.threads > 0) set_threads(a.threads);
    const Grid g = read_ascii_grid_file(a.in);
    const msm::MsmModel model = msm::load_model_file(a.model);
    const Grid out = reconstruct(g, model, a.factor, a.block, a.overlap);
    write_ascii_grid_file(out, a.out);
    json config = {{"factor", a.factor}, {"block", a.block}, {"overlap", a.overlap},
                   {"threads", a.threads}};
    write_manifest("reconstruct", argv, config, {{"in", a.in}, {"model", a.model}},
                   {{"out", a.out}}, a.out, false);
    std::cout << "reconstruct: " << g.nrows << "x" << g.ncols << " -> " << out.nrows << "x"
              << out.ncols << " at " << num(out.cell_size) << " m\n";
    return 0;
}

int run_eval_numeric(const EvalArgs& a, const std::vector<std::string>& argv) {
    const Grid recon = read_ascii_grid_file(a.recon);
    const Grid ref = read_ascii_grid_file(a.ref);
    const ErrorStats s = error_stats(recon, ref);
    json doc = {{"kind", "numeric"}, {"method", a.method}, {"stats", stats_json(s)}};
    std::string csv = "method,mae,rmse,std,mean_error,n\n" + a.method + "," + num(s.mae) + "," +
                      num(s.rmse) + "," + num(s.std) + "," + num(s.mean_error) + "," +
                      std::to_string(s.n) + "\n";
    emit_eval(doc, csv, a, "eval-numeric", argv, {{"method", a.method}},
              {{"recon", a.recon}, {"ref", a.ref}});
    std::cout << "eval-numeric(" << a.method << "): mae " << num(s.mae) << " rmse "
              << num(s.rmse) << " n " << s.n << "\n";
    return 0;
}

int run_eval_slope(const EvalArgs& a, const std::vector<std::string>& argv) {
    const Grid recon = read_ascii_grid_file(a.recon);
    const Grid ref = read_ascii_grid_file(a.ref);
    const Grid slope = a.slope.empty() ? compute_slope(ref) : read_ascii_grid_file(a.slope);
    const std::vector<double> edges = a.edges.empty() ? default_slope_edges() : a.edges;
    const BinnedReport rep = slope_binned_stats(recon, ref, slope, edges);
    json doc = binned_json(rep);
    doc["kind"] = "slope";
    doc["method"] = a.method;
    doc["edges"] = edges;
    doc["slope_source"] = a.slope.empty() ? std::string("derived-from-ref") : a.slope;
    emit_eval(doc, binned_csv(a.method, rep), a, "eval-slope", argv,
              {{"method", a.method}, {"edges", edges}},
              {{"recon", a.recon}, {"ref", a.ref}, {"slope", a.slope}});
    std::cout << "eval-slope(" << a.method << "): mean mae " << num(rep.mean_mae)
              << " mean rmse " << num(rep.mean_rmse) << "\n";
    return 0;
}

int run_eval_landcover(const EvalArgs& a, const std::vector<std::string>& argv) {
    const Grid recon = read_ascii_grid_file(a.recon);
    const Grid ref = read_ascii_grid_file(a.ref);
    const Grid lc = read_ascii_grid_file(a.landcover);
    const BinnedReport rep = landcover_binned_stats(recon, ref, lc);
    json doc = binned_json(rep);
    doc["kind"] = "landcover";
    doc["method"] = a.method;
    emit_eval(doc, binned_csv(a.method, rep), a, "eval-landcover", argv, {{"method", a.method}},
              {{"recon", a.recon}, {"ref", a.ref}, {"landcover", a.landcover}});
    std::cout << "eval-landcover(" << a.method << "): mean mae " << num(rep.mean_mae) << "\n";
    return 0;
}

int run_eval_roads(const EvalArgs& a, const std::vector<std::string>& argv) {
    const Grid recon = read_ascii_grid_file(a.recon);
    const Grid ref = read_ascii_grid_file(a.ref);
    const VectorLayers layers = read_geojson_file(a.roads);
    if (layers.roads.empty()) throw ValueError("'" + a.roads + "' holds no LineString features");
    const ProfileReport rep = road_profile_report(recon, ref, layers.roads);
    json roads = json::array();
    for (const auto& r : rep.roads) roads.push_back({{"id", r.id}, {"pcc", r.pcc}});
    json skipped = json::array();
    for (const auto& s : rep.skipped) skipped.push_back({{"id", s.id}, {"reason", s.reason}});
    json doc = {{"kind", "roads"},
                {"method", a.method},
                {"mean_pcc", rep.mean_pcc},
                {"std_pcc", rep.std_pcc},
                {"n_roads", rep.roads.size()},
                {"n_skipped", rep.skipped.size()},
                {"profile_sampling", "nearest-cell"},
                {"roads", std::move(roads)},
                {"skipped", std::move(skipped)}};
    std::string csv = "method,road_id,pcc\n";
    for (const auto& r : rep.roads) csv += a.method + "," + r.id + "," + num(r.pcc) + "\n";
    emit_eval(doc, csv, a, "eval-roads", argv, {{"method", a.method}},
              {{"recon", a.recon}, {"ref", a.ref}, {"roads", a.roads}});
    std::cout << "eval-roads(" << a.method << "): mean pcc " << num(rep.mean_pcc) << " std "
              << num(rep.std_pcc) << " over " << rep.roads.size() << " roads ("
              << rep.skipped.size() << " skipped)\n";
    return 0;
}

int run_eval_buildings(const EvalArgs& a, const std::vector<std::string>& argv) {
    const Grid recon = read_ascii_grid_file(a.recon);
    const VectorLayers layers = read_geojson_file(a.buildings);
    if (layers.buildings.polygons.empty()) {
        throw ValueError("'" + a.buildings + "' holds no Polygon features");
    }
    const CellMask reference = reference_boundary_raster(layers.buildings, recon, a.min_area);
    const CellMask extracted = extract_dem_boundaries(recon, a.edge_threshold);
    const BoundaryReport rep = boundary_match_report(extracted, reference, a.buffers);
    json ratios = json::array();
    for (const auto& [buffer, ratio] : rep.ratio_by_buffer) {
        ratios.push_back({{"buffer", buffer}, {"ratio", ratio}});
    }
    json doc = {{"kind", "buildings"},
                {"method", a.method},
                {"reference_count", rep.reference_count},
                {"extracted_count", rep.extracted_count},
                {"edge_threshold", a.edge_threshold},
                {"min_area", a.min_area},
                {"kernel", default_edge_kernel()},
                {"thinning", "zhang-suen"},
                {"ratios", std::move(ratios)}};
    std::string csv = "method,buffer_cells,ratio\n";
    for (const auto& [buffer, ratio] : rep.ratio_by_buffer) {
        csv += a.method + "," + std::to_string(buffer) + "," + num(ratio) + "\n";
    }
    emit_eval(doc, csv, a, "eval-buildings", argv,
              {{"method", a.method},
               {"edge_threshold", a.edge_threshold},
               {"min_area", a.min_area},
               {"buffers", a.buffers}},
              {{"recon", a.recon}, {"buildings", a.buildings}});
    std::cout << "eval-buildings(" << a.method << "): reference " << rep.reference_count
              << " cells, extracted " << rep.extracted_count << "\n";
    return 0;
}

int run_report(const ReportArgs& a, const std::vector<std::string>& argv) {
    std::string numeric_csv = "method,mae,rmse,std,mean_error,n\n";
    std::string slope_csv = "method,bin,count,frequency,mae,rmse,std\n";
    std::string landcover_csv = "method,class,count,frequency,mae,rmse,std\n";
    std::string roads_csv = "method,mean_pcc,std_pcc,n_roads,n_skipped\n";
    std::string buildings_csv = "method,buffer_cells,ratio\n";
    bool has_numeric = false, has_slope = false, has_landcover = false, has_roads = false,
         has_buildings = false;

    auto bins_rows = [&](std::string& csv, const json& doc, const std::string& method) {
        for (const auto& b : doc.at("bins")) {
            csv += method + "," + b.at("label").get<std::string>() + "," +
                   std::to_string(b.at("count").get<long>()) + "," +
                   num(b.at("frequency").get<double>());
            if (b.value("empty", false)) {
                csv += ",,,\n";
            } else {
                csv += "," + num(b.at("mae").get<double>()) + "," +
                       num(b.at("rmse").get<double>()) + "," + num(b.at("std").get<double>()) +
                       "\n";
            }
        }
        csv += method + ",mean(unweighted),,," + num(doc.at("mean_mae").get<double>()) + "," +
               num(doc.at("mean_rmse").get<double>()) + ",\n";
    };

    for (const std::string& path : a.inputs) {
        const json doc = load_json_file(path);
        const std::string kind = doc.value("kind", "");
        const std::string method = doc.value("method", "unnamed");
        if (kind == "numeric") {
            const auto& s = doc.at("stats");
            numeric_csv += method + "," + num(s.at("mae").get<double>()) + "," +
                           num(s.at("rmse").get<double>()) + "," +
                           num(s.at("std").get<double>()) + "," +
                           num(s.at("mean_error").get<double>()) + "," +
                           std::to_string(s.at("n").get<long>()) + "\n";
            has_numeric = true;
        } else if (kind == "slope") {
            bins_rows(slope_csv, doc, method);
            has_slope = true;
        } else if (kind == "landcover") {
            bins_rows(landcover_csv, doc, method);
            has_landcover = true;
        } else if (kind == "roads") {
            roads_csv += method + "," + num(doc.at("mean_pcc").get<double>()) + "," +
                         num(doc.at("std_pcc").get<double>()) + "," +
                         std::to_string(doc.at("n_roads").get<long>()) + "," +
                         std::to_string(doc.at("n_skipped").get<long>()) + "\n";
            has_roads = true;
        } else if (kind == "buildings") {
            for (const auto& r : doc.at("ratios")) {
                buildings_csv += method + "," + std::to_string(r.at("buffer").get<int>()) + "," +
                                 num(r.at("ratio").get<double>()) + "\n";
            }
            has_buildings = true;
        } else {
            throw ValueError("'" + path + "' has unknown report kind '" + kind + "'");
        }
    }

    fs::create_directories(a.out);
    const fs::path dir(a.out);
    json outputs = json::object();
    auto emit = [&](bool has, const char* name, const std::string& text) {
        if (!has) return;
        const std::string p = (dir / name).string();
        write_text_file(p, text);
        outputs[name] = p;
    };
    emit(has_numeric, "numeric_summary.csv", numeric_csv);
    emit(has_slope, "slope_bins.csv", slope_csv);
    emit(has_landcover, "landcover_classes.csv", landcover_csv);
    emit(has_roads, "road_profiles.csv", roads_csv);
    emit(has_buildings, "building_boundaries.csv", buildings_csv);
    write_manifest("report", argv, json::object(), {{"reports", a.inputs}}, outputs, a.out, true);
    std::cout << "report: merged " << a.inputs.size() << " reports into " << a.out << "\n";
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);

    CLI::App app{"Urban DEM super-resolution toolkit: multi-scale CNN reconstruction, "
                 "interpolation baselines, and two-level accuracy assessment"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic urban scene");
    synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
    synth_cmd->add_option("--size", synth_args.cfg.size, "Cells per side");
    synth_cmd->add_option("--cell-size", synth_args.cfg.cell_size, "Cell size in meters");
    synth_cmd->add_option("--seed", synth_args.cfg.seed, "Random seed");
    synth_cmd->add_option("--amplitude", synth_args.cfg.terrain_amplitude, "Terrain amplitude (m)");
    synth_cmd->add_option("--wavelength", synth_args.cfg.terrain_wavelength,
                          "Terrain correlation length (m)");
    synth_cmd->add_option("--road-spacing", synth_args.cfg.road_spacing, "Road spacing (m)");
    synth_cmd->add_option("--road-width", synth_args.cfg.road_width, "Road width (m)");
    synth_cmd->add_option("--density", synth_args.cfg.building_density, "Building density [0,1]");
    synth_cmd->add_option("--footprint-min", synth_args.cfg.footprint_min, "Min footprint (m)");
    synth_cmd->add_option("--footprint-max", synth_args.cfg.footprint_max, "Max footprint (m)");
    synth_cmd->add_option("--height-min", synth_args.cfg.height_min, "Min building height (m)");
    synth_cmd->add_option("--height-max", synth_args.cfg.height_max, "Max building height (m)");
    synth_cmd->add_option("--noise", synth_args.cfg.noise_amplitude,
                          "Uniform noise amplitude on natural cells (m)");

    GridIoArgs down_args;
    auto* down_cmd = app.add_subcommand("downsample", "NN-downsample a grid");
    down_cmd->add_option("--in", down_args.in, "Input ASCII grid")->required();
    down_cmd->add_option("--out", down_args.out, "Output ASCII grid")->required();
    down_cmd->add_option("--factor", down_args.factor, "Power-of-two factor")->required();

    GridIoArgs up_args;
    auto* up_cmd = app.add_subcommand("upsample", "Upsample a grid with a classical method");
    up_cmd->add_option("--in", up_args.in, "Input ASCII grid")->required();
    up_cmd->add_option("--out", up_args.out, "Output ASCII grid")->required();
    up_cmd->add_option("--factor", up_args.factor, "Upsampling factor")->required();
    up_cmd->add_option("--method", up_args.method, "nn | bi | cc | idw")
        ->check(CLI::IsMember({"nn", "bi", "cc", "idw"}));
    up_cmd->add_option("--idw-power", up_args.idw_power, "IDW distance power");
    up_cmd->add_option("--idw-k", up_args.idw_k, "IDW neighbor count");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train the multi-scale reconstruction network");
    train_cmd->add_option("--area", train_args.areas, "High-resolution training area (repeatable)")
        ->required();
    train_cmd->add_option("--out", train_args.out, "Output directory")->required();
    train_cmd->add_option("--scales", train_args.cfg.n_scales, "Number of 2x stages");
    train_cmd->add_option("--iters", train_args.cfg.total_iters, "Training iterations");
    train_cmd->add_option("--seed", train_args.cfg.seed, "Random seed");
    train_cmd->add_option("--batch", train_args.cfg.batch_size, "Batch size");
    train_cmd->add_option("--patch", train_args.cfg.patch_size, "Patch edge at input resolution");
    train_cmd->add_option("--lr", train_args.cfg.lr, "Initial learning rate");
    train_cmd->add_option("--lr-drop-after", train_args.cfg.lr_drop_after,
                          "Iteration after which lr drops once");
    train_cmd->add_option("--lr-drop-factor", train_args.cfg.lr_drop_factor, "Drop divisor");
    train_cmd->add_option("--weight-decay", train_args.cfg.weight_decay, "L2 weight decay");
    train_cmd->add_option("--block", train_args.cfg.block, "Training block edge (cells)");
    train_cmd->add_option("--block-overlap", train_args.cfg.block_overlap,
                          "Training block overlap (cells)");
    train_cmd->add_option("--split", train_args.cfg.split_divisor,
                          "Channel split divisor s inside distillation blocks");
    train_cmd->add_flag("--stratified", train_args.cfg.stratified,
                        "Spread each batch across source areas");
    train_cmd->add_option("--checkpoint-every", train_args.checkpoint_every,
                          "Save a checkpoint every N iterations (0 = off)");
    train_cmd->add_option("--threads", train_args.threads, "Worker threads (0 = auto)");

    ReconstructArgs rec_args;
    auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruct a grid with a trained model");
    rec_cmd->add_option("--in", rec_args.in, "Input ASCII grid")->required();
    rec_cmd->add_option("--model", rec_args.model, "Model checkpoint")->required();
    rec_cmd->add_option("--out", rec_args.out, "Output ASCII grid")->required();
    rec_cmd->add_option("--factor", rec_args.factor, "Reconstruction factor 2^k")->required();
    rec_cmd->add_option("--block", rec_args.block, "Inference tile edge (cells)");
    rec_cmd->add_option("--overlap", rec_args.overlap, "Inference tile overlap (cells)");
    rec_cmd->add_option("--threads", rec_args.threads, "Worker threads (0 = auto)");

    EvalArgs num_args, slope_args, lc_args, roads_args, bld_args;
    auto add_common = [](CLI::App* cmd, EvalArgs& a, bool needs_ref) {
        cmd->add_option("--recon", a.recon, "Reconstructed ASCII grid")->required();
        if (needs_ref) cmd->add_option("--ref", a.ref, "Reference ASCII grid")->required();
        cmd->add_option("--method", a.method, "Method label used in reports")->required();
        cmd->add_option("--out", a.out, "Output JSON report")->required();
        cmd->add_option("--csv", a.csv, "Optional CSV report");
    };
    auto* num_cmd = app.add_subcommand("eval-numeric", "Whole-area MAE/RMSE/STD");
    add_common(num_cmd, num_args, true);
    auto* slope_cmd = app.add_subcommand("eval-slope", "Error statistics binned by slope");
    add_common(slope_cmd, slope_args, true);
    slope_cmd->add_option("--slope", slope_args.slope,
                          "Precomputed slope grid (default: derived from --ref)");
    slope_cmd->add_option("--edges", slope_args.edges, "Slope bin edges (percent)")->delimiter(',');
    auto* lc_cmd = app.add_subcommand("eval-landcover", "Error statistics binned by land cover");
    add_common(lc_cmd, lc_args, true);
    lc_cmd->add_option("--landcover", lc_args.landcover, "Land-cover class grid")->required();
    auto* roads_cmd = app.add_subcommand("eval-roads", "Road-profile correlation");
    add_common(roads_cmd, roads_args, true);
    roads_cmd->add_option("--roads", roads_args.roads, "Road centerlines (GeoJSON)")->required();
    auto* bld_cmd = app.add_subcommand("eval-buildings", "Building-boundary recovery");
    add_common(bld_cmd, bld_args, false);
    bld_cmd->add_option("--buildings", bld_args.buildings, "Building footprints (GeoJSON)")
        ->required();
    bld_cmd->add_option("--edge-threshold", bld_args.edge_threshold, "High-pass response cutoff");
    bld_cmd->add_option("--min-area", bld_args.min_area, "Footprint area threshold (m^2)");
    bld_cmd->add_option("--buffers", bld_args.buffers, "Match buffers in cells")->delimiter(',');

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "Merge evaluation JSONs into CSV tables");
    report_cmd->add_option("--in", report_args.inputs, "Evaluation JSON (repeatable)")->required();
    report_cmd->add_option("--out", report_args.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (synth_cmd->parsed()) return run_synth(synth_args, args);
        if (down_cmd->parsed()) return run_downsample(down_args, args);
        if (up_cmd->parsed()) return run_upsample(up_args, args);
        if (train_cmd->parsed()) return run_train(train_args, args);
        if (rec_cmd->parsed()) return run_reconstruct(rec_args, args);
        if (num_cmd->parsed()) return run_eval_numeric(num_args, args);
        if (slope_cmd->parsed()) return run_eval_slope(slope_args, args);
        if (lc_cmd->parsed()) return run_eval_landcover(lc_args, args);
        if (roads_cmd->parsed()) return run_eval_roads(roads_args, args);
        if (bld_cmd->parsed()) return run_eval_buildings(bld_args, args);
        if (report_cmd->parsed()) return run_report(report_args, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "usage error: no subcommand given\n";
    return 2;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace demsr::cli
