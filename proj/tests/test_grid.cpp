#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "demsr/error.hpp"
#include "demsr/grid.hpp"
#include "demsr/tensor.hpp"

using namespace demsr;

namespace {

Grid random_grid(nn::Rng& rng, int nrows, int ncols, double nodata_fraction = 0.0) {
    Grid g(nrows, ncols);
    g.cell_size = 0.5 + rng.uniform() * 4.0;
    g.xll = rng.uniform() * 1000 - 500;
    g.yll = rng.uniform() * 1000 - 500;
    for (double& v : g.values) {
        v = (rng.uniform() < nodata_fraction) ? g.nodata_value
                                              : (rng.uniform() * 200.0 - 100.0);
    }
    return g;
}

bool grids_identical(const Grid& a, const Grid& b) {
    return a.ncols == b.ncols && a.nrows == b.nrows && a.cell_size == b.cell_size &&
           a.xll == b.xll && a.yll == b.yll && a.nodata_value == b.nodata_value &&
           a.values == b.values;
}

}  // namespace

TEST_CASE("ascii grid: minimal well-formed input") {
    std::istringstream in(
        "NCOLS 1\nNROWS 1\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 1\nNODATA_VALUE -9999\n5.0\n");
    Grid g = read_ascii_grid(in);
    CHECK(g.ncols == 1);
    CHECK(g.nrows == 1);
    CHECK(g.values == std::vector<double>{5.0});
}

TEST_CASE("ascii grid: header keys are case-insensitive and NODATA_VALUE optional") {
    std::istringstream in("ncols 2\nNrows 1\nxllcorner 10\nyllcorner 20\ncellsize 2\n1 2\n");
    Grid g = read_ascii_grid(in);
    CHECK(g.nodata_value == -9999.0);
    CHECK(g.xll == 10.0);
    CHECK(g.cell_size == 2.0);
}

TEST_CASE("ascii grid: wrong value count is a parse error") {
    // Header claims 2 columns but rows carry 3 values.
    std::istringstream extra(
        "NCOLS 2\nNROWS 2\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 1\n1 2 3\n4 5 6\n");
    CHECK_THROWS_AS(read_ascii_grid(extra), ParseError);

    std::istringstream missing(
        "NCOLS 2\nNROWS 2\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 1\n1 2 3\n");
    CHECK_THROWS_AS(read_ascii_grid(missing), ParseError);
}

TEST_CASE("ascii grid: malformed input names the line") {
    std::istringstream bad_tok("NCOLS 1\nNROWS 1\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 1\nabc\n");
    CHECK_THROWS_WITH_AS(read_ascii_grid(bad_tok), doctest::Contains("line 6"), ParseError);

    std::istringstream bad_key("NCOLS 1\nFOO 3\n");
    CHECK_THROWS_WITH_AS(read_ascii_grid(bad_key), doctest::Contains("line 2"), ParseError);

    std::istringstream no_header("1 2 3\n");
    CHECK_THROWS_AS(read_ascii_grid(no_header), ParseError);
}

TEST_CASE("ascii grid: write emits uppercase header and nodata literal") {
    Grid g(1, 2);
    g.at(0, 0) = 5.0;
    g.at(0, 1) = g.nodata_value;
    std::ostringstream out;
    write_ascii_grid(g, out);
    const std::string text = out.str();
    CHECK(text.find("NCOLS 2") != std::string::npos);
    CHECK(text.find("NODATA_VALUE -9999") != std::string::npos);
    CHECK(text.find("5 -9999") != std::string::npos);
}

TEST_CASE("ascii grid: read(write(g)) round-trips 100 random grids exactly") {
    nn::Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        Grid g = random_grid(rng, 1 + rng.uniform_int(12), 1 + rng.uniform_int(12), 0.1);
        std::stringstream io;
        write_ascii_grid(g, io);
        Grid back = read_ascii_grid(io);
        CHECK(grids_identical(g, back));
    }
}

TEST_CASE("downsample_nn: constant grid stays constant at scaled cell size") {
    Grid g(8, 8, 3.25);
    g.cell_size = 0.5;
    Grid d = downsample_nn(g, 4);
    CHECK(d.nrows == 2);
    CHECK(d.cell_size == 2.0);
    for (double v : d.values) CHECK(v == 3.25);
}

TEST_CASE("downsample_nn: 0.5 m grid maps to 2/4/8 m for factors 4/8/16") {
    Grid g(16, 16, 1.0);
    g.cell_size = 0.5;
    CHECK(downsample_nn(g, 4).cell_size == 2.0);
    CHECK(downsample_nn(g, 8).cell_size == 4.0);
    CHECK(downsample_nn(g, 16).cell_size == 8.0);
}

TEST_CASE("downsample_nn: picks the center-offset cell of each block") {
    Grid g(4, 4);
    for (int i = 0; i < 16; ++i) g.values[i] = i;
    Grid d = downsample_nn(g, 2);
    // Block (I,J) picks fine cell (2I+1, 2J+1).
    CHECK(d.at(0, 0) == g.at(1, 1));
    CHECK(d.at(0, 1) == g.at(1, 3));
    CHECK(d.at(1, 0) == g.at(3, 1));
    CHECK(d.at(1, 1) == g.at(3, 3));
}

TEST_CASE("downsample_nn: rejects bad factors") {
    Grid g(6, 6);
    CHECK_THROWS_AS(downsample_nn(g, 3), ValueError);   // not a power of two
    CHECK_THROWS_AS(downsample_nn(g, 4), ShapeError);   // does not divide 6
}

TEST_CASE("compute_slope: flat grid is all zeros") {
    Grid g(5, 7, 42.0);
    Grid s = compute_slope(g);
    for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("compute_slope: unit ramp gives 100 percent in the interior") {
    // z = x with 1 m cells: dz/dx = 1 everywhere away from the replicated
    // left/right borders, dz/dy = 0.
    Grid g(5, 6);
    g.cell_size = 1.0;
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 6; ++c) g.at(r, c) = g.cell_center_x(c);
    }
    Grid s = compute_slope(g);
    for (int r = 0; r < 5; ++r) {
        for (int c = 1; c < 5; ++c) CHECK(s.at(r, c) == doctest::Approx(100.0).epsilon(1e-12));
    }
}

TEST_CASE("compute_slope: nodata propagates to every touching cell") {
    Grid g(5, 5, 1.0);
    g.at(2, 2) = g.nodata_value;
    Grid s = compute_slope(g);
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) {
            const bool touches = std::abs(r - 2) <= 1 && std::abs(c - 2) <= 1;
            CHECK((s.at(r, c) == s.nodata_value) == touches);
        }
    }
}

TEST_CASE("compute_slope: translation invariance") {
    nn::Rng rng(11);
    Grid g = random_grid(rng, 9, 9);
    Grid shifted = g;
    for (double& v : shifted.values) v += 123.456;
    Grid a = compute_slope(g);
    Grid b = compute_slope(shifted);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("compute_slope: rejects grids smaller than 3x3") {
    Grid g(2, 5, 0.0);
    CHECK_THROWS_AS(compute_slope(g), ShapeError);
}

TEST_CASE("split_into_tiles: one exact tile") {
    Grid g(250, 250, 1.0);
    auto tiles = split_into_tiles(g, 250, 125);
    REQUIRE(tiles.size() == 1);
    CHECK(tiles[0].row_off == 0);
    CHECK(tiles[0].grid.nrows == 250);
}

TEST_CASE("split_into_tiles: 500-cell grid with block 250 overlap 125 gives 3x3 tiles") {
    Grid g(500, 500, 0.0);
    auto tiles = split_into_tiles(g, 250, 125);
    REQUIRE(tiles.size() == 9);
    std::vector<int> offs = tile_offsets(500, 250, 125);
    CHECK(offs == std::vector<int>{0, 125, 250});
}

TEST_CASE("split_into_tiles: every cell of a 777-cell grid is covered") {
    std::vector<int> offs = tile_offsets(777, 250, 125);
    std::vector<int> cover(777, 0);
    for (int off : offs) {
        for (int i = off; i < off + 250; ++i) ++cover[i];
    }
    for (int c : cover) CHECK(c >= 1);
    CHECK(offs.back() + 250 == 777);
}

TEST_CASE("split_into_tiles: parameter validation") {
    Grid g(100, 100, 0.0);
    CHECK_THROWS_AS(split_into_tiles(g, 0, 0), ValueError);
    CHECK_THROWS_AS(split_into_tiles(g, 50, 50), ValueError);
    CHECK_THROWS_AS(split_into_tiles(g, 101, 10), ValueError);
}

TEST_CASE("stitch_tiles: single tile reproduces itself") {
    nn::Rng rng(3);
    Grid g = random_grid(rng, 40, 40);
    auto tiles = split_into_tiles(g, 40, 0);
    Grid out = stitch_tiles(tiles, 40, 40);
    CHECK(grids_identical(out, g));
}

TEST_CASE("stitch_tiles: split then stitch is the identity, georeferencing kept") {
    nn::Rng rng(4);
    Grid g = random_grid(rng, 137, 201);
    auto tiles = split_into_tiles(g, 64, 17);
    Grid out = stitch_tiles(tiles, g.nrows, g.ncols);
    CHECK(grids_identical(out, g));
}

TEST_CASE("stitch_tiles: overlap cells go to the nearest tile center") {
    // Two 4-wide tiles on a 1x6 strip at column offsets 0 and 2. Centers sit
    // at columns 1.5 and 3.5, so columns 0-2 belong to the left tile and
    // columns 3-5 to the right.
    Tile left{0, 0, Grid(1, 4)};
    Tile right{0, 2, Grid(1, 4)};
    for (int c = 0; c < 4; ++c) {
        left.grid.at(0, c) = 100 + c;
        right.grid.at(0, c) = 200 + c;
    }
    Grid out = stitch_tiles({left, right}, 1, 6);
    CHECK(out.at(0, 0) == 100);
    CHECK(out.at(0, 1) == 101);
    CHECK(out.at(0, 2) == 102);
    CHECK(out.at(0, 3) == 201);
    CHECK(out.at(0, 4) == 202);
    CHECK(out.at(0, 5) == 203);
}

TEST_CASE("stitch_tiles: uncovered cells raise a coverage error") {
    Tile only{0, 0, Grid(4, 4, 1.0)};
    CHECK_THROWS_AS(stitch_tiles({only}, 8, 8), ValueError);
}

TEST_CASE("grid locate maps world points to cells") {
    Grid g(4, 4);
    g.cell_size = 2.0;
    g.xll = 100.0;
    g.yll = 50.0;
    int r, c;
    REQUIRE(g.locate(101.0, 51.0, r, c));
    CHECK(r == 3);  // bottom row
    CHECK(c == 0);
    REQUIRE(g.locate(g.cell_center_x(2), g.cell_center_y(1), r, c));
    CHECK(r == 1);
    CHECK(c == 2);
    CHECK_FALSE(g.locate(99.9, 51.0, r, c));
    CHECK_FALSE(g.locate(108.1, 51.0, r, c));
}
