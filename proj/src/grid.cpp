#include "demsr/grid.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "demsr/error.hpp"

namespace demsr {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw ParseError("ascii grid, line " + std::to_string(line) + ": " + what);
}

bool parse_double(const std::string& tok, double& out) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Shortest representation that parses back to the same double.
void append_number(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

Grid::Grid(int nrows_, int ncols_, double fill)
    : ncols(ncols_), nrows(nrows_), values(static_cast<std::size_t>(ncols_) * nrows_, fill) {}

bool Grid::locate(double x, double y, int& row, int& col) const {
    double u = (x - xll) / cell_size;
    double v = (y - yll) / cell_size;
    if (u < 0 || v < 0) return false;
    col = static_cast<int>(u);
    row = nrows - 1 - static_cast<int>(v);
    return in_bounds(row, col);
}

void Grid::validate() const {
    if (ncols <= 0 || nrows <= 0) throw ValueError("grid dimensions must be positive");
    if (!(cell_size > 0)) throw ValueError("cell_size must be > 0");
    if (values.size() != size()) throw ValueError("grid value count does not match dimensions");
    for (double v : values) {
        if (v != nodata_value && !std::isfinite(v)) {
            throw ValueError("grid holds a non-finite value that is not nodata");
        }
    }
}

Grid read_ascii_grid(std::istream& in) {
    Grid g;
    bool have_ncols = false, have_nrows = false, have_xll = false, have_yll = false,
         have_cell = false;
    int line_no = 0;
    std::string line;

    // Header: keyword/value lines until the first line starting with a number.
    std::vector<std::string> value_tokens;
    std::vector<int> value_lines;
    bool in_header = true;
    std::size_t expected = 0;
    std::size_t got = 0;

    auto finish_header = [&] {
        if (!have_ncols) parse_fail(line_no, "missing NCOLS");
        if (!have_nrows) parse_fail(line_no, "missing NROWS");
        if (!have_xll) parse_fail(line_no, "missing XLLCORNER");
        if (!have_yll) parse_fail(line_no, "missing YLLCORNER");
        if (!have_cell) parse_fail(line_no, "missing CELLSIZE");
        expected = g.size();
        g.values.reserve(expected);
        in_header = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        bool first_in_line = true;
        while (ls >> tok) {
            if (in_header) {
                char c = tok[0];
                bool numeric = (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c)));
                if (first_in_line && !numeric) {
                    std::string key = lower(tok);
                    std::string val;
                    if (!(ls >> val)) parse_fail(line_no, "header key '" + tok + "' has no value");
                    double d;
                    if (!parse_double(val, d)) {
                        parse_fail(line_no, "non-numeric header value '" + val + "'");
                    }
                    if (key == "ncols") {
                        g.ncols = static_cast<int>(d);
                        if (g.ncols <= 0 || d != g.ncols) parse_fail(line_no, "NCOLS must be a positive integer");
                        have_ncols = true;
                    } else if (key == "nrows") {
                        g.nrows = static_cast<int>(d);
                        if (g.nrows <= 0 || d != g.nrows) parse_fail(line_no, "NROWS must be a positive integer");
                        have_nrows = true;
                    } else if (key == "xllcorner") {
                        g.xll = d;
                        have_xll = true;
                    } else if (key == "yllcorner") {
                        g.yll = d;
                        have_yll = true;
                    } else if (key == "cellsize") {
                        if (!(d > 0)) parse_fail(line_no, "CELLSIZE must be > 0");
                        g.cell_size = d;
                        have_cell = true;
                    } else if (key == "nodata_value") {
                        g.nodata_value = d;
                    } else {
                        parse_fail(line_no, "unknown header key '" + tok + "'");
                    }
                    std::string extra;
                    if (ls >> extra) parse_fail(line_no, "trailing token '" + extra + "' after header value");
                    break;  // next line
                }
                finish_header();
            }
            // Value token.
            double d;
            if (!parse_double(tok, d)) parse_fail(line_no, "non-numeric token '" + tok + "'");
            if (got == expected) {
                parse_fail(line_no, "more than " + std::to_string(expected) + " values");
            }
            g.values.push_back(d);
            ++got;
            first_in_line = false;
        }
    }
    if (in_header) finish_header();
    if (got != expected) {
        parse_fail(line_no, "expected " + std::to_string(expected) + " values, found " +
                                std::to_string(got));
    }
    return g;
}

Grid read_ascii_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return read_ascii_grid(in);
}

void write_ascii_grid(const Grid& g, std::ostream& out) {
    std::string buf;
    buf.reserve(g.size() * 8 + 128);
    buf += "NCOLS " + std::to_string(g.ncols) + "\n";
    buf += "NROWS " + std::to_string(g.nrows) + "\n";
    buf += "XLLCORNER ";
    append_number(buf, g.xll);
    buf += "\nYLLCORNER ";
    append_number(buf, g.yll);
    buf += "\nCELLSIZE ";
    append_number(buf, g.cell_size);
    buf += "\nNODATA_VALUE ";
    append_number(buf, g.nodata_value);
    buf += '\n';
    for (int r = 0; r < g.nrows; ++r) {
        for (int c = 0; c < g.ncols; ++c) {
            if (c) buf += ' ';
            append_number(buf, g.at(r, c));
        }
        buf += '\n';
    }
    out << buf;
}

void write_ascii_grid_file(const Grid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_ascii_grid(g, out);
    if (!out) throw IoError("write to '" + path + "' failed");
}

Grid downsample_nn(const Grid& g, int factor) {
    if (factor < 2 || (factor & (factor - 1)) != 0) {
        throw ValueError("downsample factor must be a power of two >= 2");
    }
    if (g.ncols % factor != 0 || g.nrows % factor != 0) {
        throw ShapeError("downsample factor " + std::to_string(factor) +
                         " does not divide grid dimensions " + std::to_string(g.nrows) + "x" +
                         std::to_string(g.ncols));
    }
    Grid out(g.nrows / factor, g.ncols / factor);
    out.cell_size = g.cell_size * factor;
    out.xll = g.xll;
    out.yll = g.yll;
    out.nodata_value = g.nodata_value;
    const int half = factor / 2;
    for (int r = 0; r < out.nrows; ++r) {
        for (int c = 0; c < out.ncols; ++c) {
            out.at(r, c) = g.at(r * factor + half, c * factor + half);
        }
    }
    return out;
}

Grid compute_slope(const Grid& g) {
    if (g.nrows < 3 || g.ncols < 3) throw ShapeError("slope needs a grid of at least 3x3 cells");
    Grid out(g.nrows, g.ncols);
    out.cell_size = g.cell_size;
    out.xll = g.xll;
    out.yll = g.yll;
    out.nodata_value = g.nodata_value;

    auto sample = [&](int r, int c) {
        r = std::clamp(r, 0, g.nrows - 1);
        c = std::clamp(c, 0, g.ncols - 1);
        return g.at(r, c);
    };

    for (int r = 0; r < g.nrows; ++r) {
        for (int c = 0; c < g.ncols; ++c) {
            double z[3][3];
            bool nodata = false;
            for (int dr = -1; dr <= 1 && !nodata; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    z[dr + 1][dc + 1] = sample(r + dr, c + dc);
                    if (z[dr + 1][dc + 1] == g.nodata_value) {
                        nodata = true;
                        break;
                    }
                }
            }
            if (nodata) {
                out.at(r, c) = out.nodata_value;
                continue;
            }
            double dzdx = ((z[0][2] + 2 * z[1][2] + z[2][2]) - (z[0][0] + 2 * z[1][0] + z[2][0])) /
                          (8 * g.cell_size);
            double dzdy = ((z[2][0] + 2 * z[2][1] + z[2][2]) - (z[0][0] + 2 * z[0][1] + z[0][2])) /
                          (8 * g.cell_size);
            out.at(r, c) = 100.0 * std::sqrt(dzdx * dzdx + dzdy * dzdy);
        }
    }
    return out;
}

std::vector<int> tile_offsets(int extent, int block, int overlap) {
    std::vector<int> offs;
    const int stride = block - overlap;
    for (int p = 0; p + block <= extent; p += stride) offs.push_back(p);
    if (offs.empty() || offs.back() + block < extent) offs.push_back(extent - block);
    return offs;
}

std::vector<Tile> split_into_tiles(const Grid& g, int block, int overlap) {
    if (block <= 0 || overlap < 0 || overlap >= block) {
        throw ValueError("tiling requires 0 <= overlap < block");
    }
    if (block > g.ncols || block > g.nrows) {
        throw ValueError("tile block " + std::to_string(block) + " exceeds grid extent");
    }
    const auto row_offs = tile_offsets(g.nrows, block, overlap);
    const auto col_offs = tile_offsets(g.ncols, block, overlap);
    std::vector<Tile> tiles;
    tiles.reserve(row_offs.size() * col_offs.size());
    for (int ro : row_offs) {
        for (int co : col_offs) {
            Tile t;
            t.row_off = ro;
            t.col_off = co;
            t.grid = Grid(block, block);
            t.grid.cell_size = g.cell_size;
            t.grid.nodata_value = g.nodata_value;
            t.grid.xll = g.xll + co * g.cell_size;
            t.grid.yll = g.yll + (g.nrows - ro - block) * g.cell_size;
            for (int r = 0; r < block; ++r) {
                for (int c = 0; c < block; ++c) {
                    t.grid.at(r, c) = g.at(ro + r, co + c);
                }
            }
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

Grid stitch_tiles(const std::vector<Tile>& tiles, int out_nrows, int out_ncols) {
    if (tiles.empty()) throw ValueError("stitch needs at least one tile");
    Grid out(out_nrows, out_ncols);
    const Grid& first = tiles.front().grid;
    out.cell_size = first.cell_size;
    out.nodata_value = first.nodata_value;
    out.xll = first.xll - tiles.front().col_off * first.cell_size;
    out.yll = first.yll - (out_nrows - tiles.front().row_off - first.nrows) * first.cell_size;

    struct Center {
        double r, c;
    };
    std::vector<Center> centers(tiles.size());
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        centers[i].r = tiles[i].row_off + (tiles[i].grid.nrows - 1) / 2.0;
        centers[i].c = tiles[i].col_off + (tiles[i].grid.ncols - 1) / 2.0;
    }

    for (int r = 0; r < out_nrows; ++r) {
        for (int c = 0; c < out_ncols; ++c) {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < tiles.size(); ++i) {
                double d = std::max(std::abs(r - centers[i].r), std::abs(c - centers[i].c));
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(i);
                } else if (d == best_d && best >= 0) {
                    const Tile& a = tiles[i];
                    const Tile& b = tiles[best];
                    if (a.row_off < b.row_off ||
                        (a.row_off == b.row_off && a.col_off < b.col_off)) {
                        best = static_cast<int>(i);
                    }
                }
            }
            const Tile& t = tiles[best];
            int tr = r - t.row_off;
            int tc = c - t.col_off;
            if (!t.grid.in_bounds(tr, tc)) {
                throw ValueError("stitch: cell (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") is not covered by its nearest tile");
            }
            out.at(r, c) = t.grid.at(tr, tc);
        }
    }
    return out;
}

}  // namespace demsr
