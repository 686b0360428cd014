#include "demsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "demsr/error.hpp"
#include "demsr/eval_numeric.hpp"
#include "demsr/tensor.hpp"

namespace demsr {

namespace {

constexpr int kWaves = 5;
constexpr double kBuildingMargin = 2.0;  // meters of clearance around roads/buildings

struct Wave {
    double amp, freq, dirx, diry, phase;
};

// Wave table is the first thing drawn from the seed, so base elevation is
// reproducible independently of the rest of the generation sequence.
std::vector<Wave> make_waves(const SynthConfig& cfg) {
    nn::Rng rng(cfg.seed ^ 0x5eedba5e11ull);
    std::vector<Wave> waves(kWaves);
    for (int k = 0; k < kWaves; ++k) {
        const double wavelength = cfg.terrain_wavelength * (1.0 + 0.6 * k);
        const double theta = rng.uniform() * 2.0 * std::numbers::pi;
        waves[k] = {cfg.terrain_amplitude / kWaves, 2.0 * std::numbers::pi / wavelength,
                    std::cos(theta), std::sin(theta), rng.uniform() * 2.0 * std::numbers::pi};
    }
    return waves;
}

double eval_waves(const std::vector<Wave>& waves, double x, double y) {
    double z = 0.0;
    for (const Wave& w : waves) {
        z += w.amp * std::sin(w.freq * (w.dirx * x + w.diry * y) + w.phase);
    }
    return z;
}

}  // namespace

void SynthConfig::validate() const {
    if (size < 8) throw ValueError("synth: size must be at least 8 cells");
    if (!(cell_size > 0)) throw ValueError("synth: cell_size must be > 0");
    if (!(terrain_amplitude >= 0) || !(terrain_wavelength > 0)) {
        throw ValueError("synth: terrain parameters must be positive");
    }
    if (!(road_spacing > 0) || !(road_width > 0) || road_width >= road_spacing) {
        throw ValueError("synth: need 0 < road_width < road_spacing");
    }
    if (building_density < 0 || building_density > 1) {
        throw ValueError("synth: building_density must lie in [0, 1]");
    }
    if (!(footprint_min > 0) || footprint_max < footprint_min) {
        throw ValueError("synth: bad footprint range");
    }
    if (height_max < height_min || height_min < 0) throw ValueError("synth: bad height range");
    if (noise_amplitude < 0) throw ValueError("synth: noise_amplitude must be >= 0");
}

double synth_base_elevation(const SynthConfig& cfg, double x, double y) {
    return eval_waves(make_waves(cfg), x, y);
}

double synth_profile_step_bound(const SynthConfig& cfg) {
    const auto waves = make_waves(cfg);
    double max_grad = 0.0;
    for (const Wave& w : waves) max_grad += w.amp * w.freq;
    // At crossings the flattening point can jump transversally by up to the
    // road width, on top of the longitudinal step itself.
    return max_grad * (cfg.road_width + 2.0 * cfg.cell_size) + 1e-12;
}

SynthScene generate_scene(const SynthConfig& cfg) {
    cfg.validate();
    const auto waves = make_waves(cfg);
    nn::Rng rng(cfg.seed);

    const int n = cfg.size;
    const double extent = n * cfg.cell_size;

    SynthScene scene;
    scene.dem = Grid(n, n);
    scene.dem.cell_size = cfg.cell_size;
    scene.landcover = Grid(n, n);
    scene.landcover.cell_size = cfg.cell_size;

    // Road centerlines, offset half a spacing so none sits on the boundary.
    std::vector<double> vert_x, horiz_y;
    for (double p = cfg.road_spacing / 2; p < extent - cfg.road_width / 2; p += cfg.road_spacing) {
        vert_x.push_back(p);
        horiz_y.push_back(p);
    }

    auto nearest = [](const std::vector<double>& lines, double p, double& d) {
        d = std::numeric_limits<double>::infinity();
        double at = 0;
        for (double line : lines) {
            const double dist = std::abs(p - line);
            if (dist < d) {
                d = dist;
                at = line;
            }
        }
        return at;
    };

    const double half_w = cfg.road_width / 2;
    CellMask road_mask(n, n);
    CellMask usable(n, n);  // candidate building cells: clear of roads + margin
    for (int r = 0; r < n; ++r) {
        const double cy = scene.dem.cell_center_y(r);
        for (int c = 0; c < n; ++c) {
            const double cx = scene.dem.cell_center_x(c);
            double dv, dh;
            const double vx = nearest(vert_x, cx, dv);
            const double hy = nearest(horiz_y, cy, dh);
            const bool on_road = dv <= half_w || dh <= half_w;
            if (on_road) {
                road_mask.at(r, c) = 1;
                // Flatten transversally against the closer centerline.
                scene.dem.at(r, c) = dv <= dh ? eval_waves(waves, vx, cy)
                                              : eval_waves(waves, cx, hy);
            } else {
                scene.dem.at(r, c) = eval_waves(waves, cx, cy);
                if (std::min(dv, dh) > half_w + kBuildingMargin) usable.at(r, c) = 1;
            }
        }
    }

    // Buildings: rejection-sampled axis-aligned rectangles snapped to cells.
    CellMask occupied(n, n);
    CellMask building_mask(n, n);
    const long usable_cells = usable.count();
    const long target_cells = std::lround(cfg.building_density * usable_cells);
    long placed_cells = 0;
    long attempts = 0;
    const long max_attempts =
        400 + 80 * static_cast<long>(target_cells * cfg.cell_size * cfg.cell_size /
                                         (cfg.footprint_min * cfg.footprint_min) +
                                     1);
    int next_id = 0;
    while (placed_cells < target_cells) {
        if (++attempts > max_attempts) {
            throw ValueError("synth: building placement failed after " +
                             std::to_string(max_attempts) +
                             " attempts; density " + std::to_string(cfg.building_density) +
                             " is too high for this layout");
        }
        const double fw = cfg.footprint_min + rng.uniform() * (cfg.footprint_max - cfg.footprint_min);
        const double fh = cfg.footprint_min + rng.uniform() * (cfg.footprint_max - cfg.footprint_min);
        const int wc = std::max(1, static_cast<int>(std::lround(fw / cfg.cell_size)));
        const int hc = std::max(1, static_cast<int>(std::lround(fh / cfg.cell_size)));
        if (wc + 2 > n || hc + 2 > n) continue;
        const int row0 = 1 + rng.uniform_int(n - hc - 1);
        const int col0 = 1 + rng.uniform_int(n - wc - 1);

        bool ok = true;
        for (int r = row0 - 1; r < row0 + hc + 1 && ok; ++r) {
            for (int c = col0 - 1; c < col0 + wc + 1; ++c) {
                if (!usable.at(r, c) || occupied.at(r, c)) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) continue;

        for (int r = row0 - 1; r < row0 + hc + 1; ++r) {
            for (int c = col0 - 1; c < col0 + wc + 1; ++c) occupied.at(r, c) = 1;
        }
        const double x0 = scene.dem.xll + col0 * cfg.cell_size;
        const double x1 = scene.dem.xll + (col0 + wc) * cfg.cell_size;
        const double y1 = scene.dem.yll + (n - row0) * cfg.cell_size;
        const double y0 = scene.dem.yll + (n - row0 - hc) * cfg.cell_size;
        const double height = cfg.height_min + rng.uniform() * (cfg.height_max - cfg.height_min);
        const double base = eval_waves(waves, (x0 + x1) / 2, (y0 + y1) / 2);

        PolygonSet::Polygon poly;
        poly.id = "building_" + std::to_string(next_id++);
        poly.ring = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
        scene.buildings.polygons.push_back(std::move(poly));
        scene.building_heights.push_back(height);

        for (int r = row0; r < row0 + hc; ++r) {
            for (int c = col0; c < col0 + wc; ++c) {
                building_mask.at(r, c) = 1;
                scene.dem.at(r, c) = base + height;
            }
        }
        placed_cells += static_cast<long>(wc) * hc;
    }

    // Land cover: roads and buildings from their masks; a yard band around
    // buildings is multi-surface, a verge strip beside roads is 'other', the
    // remainder natural.
    const int yard_cells = static_cast<int>(std::lround(4.0 / cfg.cell_size));
    const int verge_cells = static_cast<int>(std::lround(2.0 / cfg.cell_size));
    auto near_mask = [&](const CellMask& mask, int r, int c, int radius) {
        for (int dr = -radius; dr <= radius; ++dr) {
            const int rr = r + dr;
            if (rr < 0 || rr >= n) continue;
            for (int dc = -radius; dc <= radius; ++dc) {
                const int cc = c + dc;
                if (cc < 0 || cc >= n) continue;
                if (mask.at(rr, cc)) return true;
            }
        }
        return false;
    };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double code;
            if (road_mask.at(r, c)) {
                code = static_cast<double>(Landcover::kRoad);
            } else if (building_mask.at(r, c)) {
                code = static_cast<double>(Landcover::kBuilding);
            } else if (near_mask(building_mask, r, c, yard_cells)) {
                code = static_cast<double>(Landcover::kMultiSurface);
            } else if (near_mask(road_mask, r, c, verge_cells)) {
                code = static_cast<double>(Landcover::kOther);
            } else {
                code = static_cast<double>(Landcover::kNatural);
            }
            scene.landcover.at(r, c) = code;
        }
    }

    if (cfg.noise_amplitude > 0) {
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                if (scene.landcover.at(r, c) == static_cast<double>(Landcover::kNatural)) {
                    scene.dem.at(r, c) += (2 * rng.uniform() - 1) * cfg.noise_amplitude;
                }
            }
        }
    }

    // Road centerlines as polylines, endpoints at the first/last cell centers.
    const double lo = scene.dem.cell_size / 2;
    const double hi = extent - scene.dem.cell_size / 2;
    int rid = 0;
    for (double x : vert_x) {
        scene.roads.push_back({"road_v" + std::to_string(rid++), {{x, lo}, {x, hi}}});
    }
    rid = 0;
    for (double y : horiz_y) {
        scene.roads.push_back({"road_h" + std::to_string(rid++), {{lo, y}, {hi, y}}});
    }
    return scene;
}

}  // namespace demsr
