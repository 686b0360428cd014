#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "demsr/grid.hpp"

namespace demsr {

struct Point {
    double x = 0.0, y = 0.0;
};

/// Road centerline in world coordinates; at least two vertices, consecutive
/// vertices distinct.
struct Polyline {
    std::string id;
    std::vector<Point> vertices;
};

/// Building footprints as closed rings; stored without the duplicated closing
/// vertex. No holes.
struct PolygonSet {
    struct Polygon {
        std::string id;
        std::vector<Point> ring;
    };
    std::vector<Polygon> polygons;
};

/// Binary raster aligned with some grid; used for boundary cell sets.
struct CellMask {
    int nrows = 0, ncols = 0;
    std::vector<std::uint8_t> m;

    CellMask() = default;
    CellMask(int nrows_, int ncols_)
        : nrows(nrows_), ncols(ncols_),
          m(static_cast<std::size_t>(nrows_) * ncols_, 0) {}

    std::uint8_t& at(int r, int c) { return m[static_cast<std::size_t>(r) * ncols + c]; }
    std::uint8_t at(int r, int c) const { return m[static_cast<std::size_t>(r) * ncols + c]; }
    long count() const;
};

struct ProfileReport {
    struct Road {
        std::string id;
        double pcc = 0.0;
    };
    struct Skipped {
        std::string id;
        std::string reason;
    };
    std::vector<Road> roads;
    std::vector<Skipped> skipped;
    double mean_pcc = 0.0;
    double std_pcc = 0.0;
};

struct BoundaryReport {
    long reference_count = 0;
    long extracted_count = 0;
    std::map<int, double> ratio_by_buffer;  // buffer (cells) -> selected/reference
};

/// Inserts points along each segment at `step` spacing; original vertices are
/// kept and the final sub-segment of a segment may be shorter than step.
std::vector<Point> densify_polyline(const Polyline& p, double step);

/// Nearest-cell elevation at each vertex; nodata cells become NaN gaps.
/// A vertex outside the grid extent is an error.
std::vector<double> extract_profile(const Grid& g, const std::vector<Point>& vertices);

/// Pearson's correlation coefficient. Throws ValueError on length mismatch,
/// fewer than two samples, or zero variance in either sequence.
double pearson_cc(const std::vector<double>& x, const std::vector<double>& y);

/// Densifies each road at the recon cell size, samples both grids, and
/// correlates the profiles. Roads whose profile pairs are shorter than two
/// valid samples or have zero variance are skipped and recorded.
ProfileReport road_profile_report(const Grid& recon, const Grid& ref,
                                  const std::vector<Polyline>& roads);

/// Rasterizes footprints (cell center in polygon), merges touching components,
/// drops components below min_area (m^2), and returns the cells of merged
/// footprints that have at least one non-filled 4-neighbor.
CellMask reference_boundary_raster(const PolygonSet& polys, const Grid& geometry,
                                   double min_area = 20.0);

/// 3x3 high-pass kernel used to highlight elevation discontinuities.
std::array<double, 9> default_edge_kernel();

/// High-pass response thresholded at edge_threshold, then thinned to one-cell
/// skeletons (Zhang-Suen). Cells with nodata anywhere in the 3x3 stencil are
/// never candidates.
CellMask extract_dem_boundaries(const Grid& recon, double edge_threshold = 1.0,
                                const std::array<double, 9>& kernel = default_edge_kernel());

/// Iterative Zhang-Suen thinning of a binary mask.
CellMask thin_zhang_suen(const CellMask& mask);

/// Ratio of extracted cells lying within Chebyshev distance b of any
/// reference cell, per buffer b, against the reference count.
BoundaryReport boundary_match_report(const CellMask& extracted, const CellMask& reference,
                                     const std::vector<int>& buffers = {0, 1, 2, 3});

}  // namespace demsr
