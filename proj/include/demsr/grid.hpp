#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace demsr {

/// Georeferenced single-band elevation raster.
///
/// Values are stored row-major with rows top-to-bottom, so row 0 is the
/// northernmost row. The center of cell (row i, col j) sits at
///   x = xll + (j + 0.5) * cell_size
///   y = yll + (nrows - 1 - i + 0.5) * cell_size
/// Cells equal to nodata_value carry no elevation and are excluded from all
/// statistics downstream.
struct Grid {
    int ncols = 0;
    int nrows = 0;
    double cell_size = 1.0;           // meters, > 0
    double xll = 0.0;                 // world x of the lower-left corner
    double yll = 0.0;                 // world y of the lower-left corner
    double nodata_value = -9999.0;
    std::vector<double> values;       // length == ncols * nrows

    Grid() = default;
    Grid(int nrows_, int ncols_, double fill = 0.0);

    double& at(int row, int col) { return values[static_cast<std::size_t>(row) * ncols + col]; }
    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * ncols + col]; }
    bool is_nodata(int row, int col) const { return at(row, col) == nodata_value; }
    bool in_bounds(int row, int col) const {
        return row >= 0 && row < nrows && col >= 0 && col < ncols;
    }
    std::size_t size() const { return static_cast<std::size_t>(ncols) * nrows; }

    double cell_center_x(int col) const { return xll + (col + 0.5) * cell_size; }
    double cell_center_y(int row) const { return yll + (nrows - 1 - row + 0.5) * cell_size; }

    /// Row/col of the cell containing world point (x, y); false if outside.
    bool locate(double x, double y, int& row, int& col) const;

    /// Throws ValueError if dimensions, cell size or value count are inconsistent.
    void validate() const;
};

/// Rectangular window of a parent grid, carried with its cell offsets.
struct Tile {
    int row_off = 0;
    int col_off = 0;
    Grid grid;
};

/// Parses an ESRI ASCII grid. Header keywords NCOLS, NROWS, XLLCORNER,
/// YLLCORNER, CELLSIZE and optional NODATA_VALUE are matched case-insensitively
/// and may appear in any order; a missing NODATA_VALUE defaults to -9999.
/// Throws ParseError naming the offending line.
Grid read_ascii_grid(std::istream& in);
Grid read_ascii_grid_file(const std::string& path);

/// Emits the grid with uppercase header keywords and shortest-round-trip
/// number formatting, rows top-to-bottom. read(write(g)) == g exactly.
void write_ascii_grid(const Grid& g, std::ostream& out);
void write_ascii_grid_file(const Grid& g, const std::string& path);

/// Nearest-neighbor downsampling by a power-of-two factor that divides both
/// dimensions. Coarse cell (I, J) takes the fine value at row I*factor + f/2,
/// col J*factor + f/2.
Grid downsample_nn(const Grid& g, int factor);

/// Slope in percent from the 3x3 eight-neighbor (Horn) stencil, with
/// edge-replicated borders. A nodata cell anywhere in the stencil makes the
/// output cell nodata. Requires at least 3x3 cells.
Grid compute_slope(const Grid& g);

/// Tiles of `block` x `block` cells placed at stride block - overlap; the last
/// tile on each axis is clamped to end at the grid edge, so every cell is
/// covered. Requires 0 <= overlap < block <= min(ncols, nrows).
std::vector<Tile> split_into_tiles(const Grid& g, int block, int overlap);

/// 1-D tile start offsets for the geometry above.
std::vector<int> tile_offsets(int extent, int block, int overlap);

/// Reassembles tiles into an (out_nrows x out_ncols) grid. Each cell is taken
/// from the tile whose center is nearest in Chebyshev distance, ties going to
/// the tile with smaller (row_off, col_off). Throws ValueError if any cell is
/// not covered by its owning tile.
Grid stitch_tiles(const std::vector<Tile>& tiles, int out_nrows, int out_ncols);

}  // namespace demsr
