#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "demsr/grid.hpp"

namespace demsr {

/// Pointwise error statistics over the valid (non-nodata, unmasked) cells.
/// rmse^2 == std^2 + mean_error^2 up to rounding.
struct ErrorStats {
    double mae = 0.0;
    double rmse = 0.0;
    double std = 0.0;
    double mean_error = 0.0;  // signed mean of recon - ref
    long n = 0;
};

struct Bin {
    std::string label;
    long count = 0;
    double frequency = 0.0;  // fraction of valid cells
    bool empty = true;
    ErrorStats stats;
};

struct BinnedReport {
    std::vector<Bin> bins;
    long total_valid = 0;
    // Unweighted means over non-empty bins; the cell-weighted whole-area
    // stats are reported separately by error_stats.
    double mean_mae = 0.0;
    double mean_rmse = 0.0;
};

using CellPredicate = std::function<bool(int row, int col)>;

/// MAE, RMSE and population STD of recon - ref. Cells where either grid is
/// nodata (or the mask is false) are excluded; an empty domain is an error.
ErrorStats error_stats(const Grid& recon, const Grid& ref,
                       const CellPredicate& mask = nullptr);

/// Default percent-slope bin edges: ten ranges with a >= 100% top bin.
std::vector<double> default_slope_edges();

/// Partition by slope percent into [e0,e1), [e1,e2), ..., [e_last, inf) and
/// compute per-bin stats. Empty bins are kept in the report but flagged.
BinnedReport slope_binned_stats(const Grid& recon, const Grid& ref, const Grid& slope,
                                const std::vector<double>& edges = default_slope_edges());

/// Land-cover class codes used across the toolkit.
enum class Landcover : int {
    kRoad = 1,
    kBuilding = 2,
    kNatural = 3,
    kMultiSurface = 4,
    kOther = 5,
};

const std::vector<std::pair<Landcover, std::string>>& landcover_classes();

/// Per-class stats plus class frequencies. Unknown class codes are an error;
/// landcover nodata cells are excluded like elevation nodata.
BinnedReport landcover_binned_stats(const Grid& recon, const Grid& ref, const Grid& landcover);

}  // namespace demsr
