#pragma once

#include <cstdint>
#include <vector>

#include "demsr/eval_morph.hpp"
#include "demsr/grid.hpp"

namespace demsr {

/// Procedural urban-like scene: smooth base terrain, an axis-aligned road
/// grid flattened to the local base elevation, and flat-topped rectangular
/// buildings. Everything is a pure function of the config (including seed).
struct SynthConfig {
    int size = 512;            // cells per side
    double cell_size = 0.5;    // meters
    std::uint64_t seed = 0;

    double terrain_amplitude = 3.0;    // meters, total sinusoid amplitude
    double terrain_wavelength = 80.0;  // meters, shortest correlation length

    double road_spacing = 50.0;  // meters between parallel centerlines
    double road_width = 6.0;     // meters

    double building_density = 0.3;    // target fraction of buildable area
    double footprint_min = 8.0;       // meters
    double footprint_max = 20.0;      // meters
    double height_min = 5.0;          // meters
    double height_max = 15.0;         // meters

    double noise_amplitude = 0.0;  // optional uniform noise on natural cells

    void validate() const;
};

struct SynthScene {
    Grid dem;
    std::vector<Polyline> roads;
    PolygonSet buildings;
    std::vector<double> building_heights;  // parallel to buildings.polygons
    Grid landcover;                        // Landcover codes as values
};

/// Smooth base terrain at a world point; building tops sit at this value
/// (evaluated at the footprint center) plus the building height.
double synth_base_elevation(const SynthConfig& cfg, double x, double y);

/// Upper bound on the elevation difference between adjacent densified road
/// profile samples (accounts for the transversal flattening at crossings).
double synth_profile_step_bound(const SynthConfig& cfg);

/// Throws ValueError if the building density cannot be met after bounded
/// placement retries.
SynthScene generate_scene(const SynthConfig& cfg);

}  // namespace demsr
