#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "demsr/error.hpp"
#include "demsr/grid.hpp"
#include "demsr/interp.hpp"
#include "demsr/tensor.hpp"

using namespace demsr;

namespace {

Grid random_grid(nn::Rng& rng, int nrows, int ncols) {
    Grid g(nrows, ncols);
    g.cell_size = 1.0 + rng.uniform() * 3.0;
    for (double& v : g.values) v = rng.uniform() * 50.0 - 25.0;
    return g;
}

// Continuous coarse-lattice coordinate of fine index f (cell-centered grids
// sharing the lower-left corner).
double lattice(int f, int factor) { return (f + 0.5) / factor - 0.5; }

// Direct evaluation of the bilinear formula at one fine center.
double bilinear_oracle(const Grid& g, int fr, int fc, int factor) {
    double v = std::clamp(lattice(fr, factor), 0.0, g.nrows - 1.0);
    double u = std::clamp(lattice(fc, factor), 0.0, g.ncols - 1.0);
    int r0 = std::min(static_cast<int>(std::floor(v)), g.nrows - 2);
    int c0 = std::min(static_cast<int>(std::floor(u)), g.ncols - 2);
    double tr = v - r0, tc = u - c0;
    return (1 - tr) * (1 - tc) * g.at(r0, c0) + (1 - tr) * tc * g.at(r0, c0 + 1) +
           tr * (1 - tc) * g.at(r0 + 1, c0) + tr * tc * g.at(r0 + 1, c0 + 1);
}

double cc_kernel_oracle(double t) {
    const double a = -0.5;
    t = std::abs(t);
    if (t <= 1) return (a + 2) * t * t * t - (a + 3) * t * t + 1;
    if (t < 2) return a * t * t * t - 5 * a * t * t + 8 * a * t - 4 * a;
    return 0;
}

// Brute-force separable 4x4 cubic-convolution sum with edge replication.
double bicubic_oracle(const Grid& g, int fr, int fc, int factor) {
    double v = lattice(fr, factor), u = lattice(fc, factor);
    int r0 = static_cast<int>(std::floor(v)), c0 = static_cast<int>(std::floor(u));
    double acc = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            int rr = std::clamp(r0 - 1 + i, 0, g.nrows - 1);
            int cc = std::clamp(c0 - 1 + j, 0, g.ncols - 1);
            acc += cc_kernel_oracle(v - r0 - (i - 1)) * cc_kernel_oracle(u - c0 - (j - 1)) *
                   g.at(rr, cc);
        }
    }
    return acc;
}

// Exhaustive k-nearest IDW with the (distance, row, col) total order.
double idw_oracle(const Grid& g, int fr, int fc, int factor, double power, int k) {
    double v = lattice(fr, factor), u = lattice(fc, factor);
    struct C {
        double d2;
        int r, c;
    };
    std::vector<C> all;
    for (int r = 0; r < g.nrows; ++r) {
        for (int c = 0; c < g.ncols; ++c) {
            double dr = v - r, dc = u - c;
            all.push_back({dr * dr + dc * dc, r, c});
        }
    }
    std::sort(all.begin(), all.end(), [](const C& a, const C& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        if (a.r != b.r) return a.r < b.r;
        return a.c < b.c;
    });
    double num = 0, den = 0;
    for (int i = 0; i < k; ++i) {
        if (all[i].d2 == 0.0) return g.at(all[i].r, all[i].c);
        double w = std::pow(std::sqrt(all[i].d2) * g.cell_size, -power);
        num += w * g.at(all[i].r, all[i].c);
        den += w;
    }
    return num / den;
}

}  // namespace

TEST_CASE("upsample_nn: replication") {
    Grid one(1, 1, 7.0);
    Grid up = upsample_nn(one, 2);
    CHECK(up.nrows == 2);
    for (double v : up.values) CHECK(v == 7.0);

    Grid g(2, 2);
    g.values = {1, 2, 3, 4};
    Grid u = upsample_nn(g, 2);
    CHECK(u.at(0, 0) == 1);
    CHECK(u.at(0, 1) == 1);
    CHECK(u.at(1, 1) == 1);
    CHECK(u.at(0, 2) == 2);
    CHECK(u.at(2, 0) == 3);
    CHECK(u.at(3, 3) == 4);
    CHECK(u.cell_size == g.cell_size / 2);
}

TEST_CASE("upsample_nn then downsample_nn is the identity") {
    nn::Rng rng(21);
    for (int factor : {2, 4, 8}) {
        Grid g = random_grid(rng, 5, 7);
        Grid back = downsample_nn(upsample_nn(g, factor), factor);
        CHECK(back.values == g.values);
        CHECK(back.cell_size == g.cell_size);
    }
}

TEST_CASE("all upsamplers preserve constants exactly") {
    Grid g(5, 5, 12.5);
    g.cell_size = 2.0;
    for (double v : upsample_nn(g, 4).values) CHECK(v == 12.5);
    for (double v : upsample_bilinear(g, 4).values) CHECK(v == doctest::Approx(12.5).epsilon(1e-15));
    for (double v : upsample_bicubic(g, 4).values) CHECK(v == doctest::Approx(12.5).epsilon(1e-15));
    for (double v : upsample_idw(g, 4).values) CHECK(v == doctest::Approx(12.5).epsilon(1e-15));
}

TEST_CASE("bilinear and bicubic reproduce affine surfaces in the interior") {
    Grid g(8, 8);
    g.cell_size = 1.0;
    auto affine = [&](double x, double y) { return 0.75 * x - 1.25 * y + 3.0; };
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) g.at(r, c) = affine(g.cell_center_x(c), g.cell_center_y(r));
    }
    for (int factor : {2, 4}) {
        Grid bi = upsample_bilinear(g, factor);
        Grid cc = upsample_bicubic(g, factor);
        // Interior: fine cells whose stencil stays 2 coarse cells away from
        // the border.
        for (int r = 2 * factor; r < bi.nrows - 2 * factor; ++r) {
            for (int c = 2 * factor; c < bi.ncols - 2 * factor; ++c) {
                const double want = affine(bi.cell_center_x(c), bi.cell_center_y(r));
                CHECK(bi.at(r, c) == doctest::Approx(want).epsilon(1e-10));
                CHECK(cc.at(r, c) == doctest::Approx(want).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("upsample_bilinear matches the direct formula on random grids") {
    nn::Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        Grid g = random_grid(rng, 5, 5);
        Grid up = upsample_bilinear(g, 2);
        for (int r = 0; r < up.nrows; ++r) {
            for (int c = 0; c < up.ncols; ++c) {
                CHECK(up.at(r, c) == doctest::Approx(bilinear_oracle(g, r, c, 2)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("upsample_bicubic matches brute-force kernel summation on random grids") {
    nn::Rng rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        Grid g = random_grid(rng, 6, 6);
        Grid up = upsample_bicubic(g, 2);
        for (int r = 0; r < up.nrows; ++r) {
            for (int c = 0; c < up.ncols; ++c) {
                const double want = bicubic_oracle(g, r, c, 2);
                CHECK(up.at(r, c) == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("upsample_idw matches the exhaustive k-nearest oracle on random grids") {
    nn::Rng rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        Grid g = random_grid(rng, 4, 4);
        Grid up = upsample_idw(g, 2, 2.0, 4);
        for (int r = 0; r < up.nrows; ++r) {
            for (int c = 0; c < up.ncols; ++c) {
                const double want = idw_oracle(g, r, c, 2, 2.0, 4);
                CHECK(up.at(r, c) == doctest::Approx(want).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("upsample_idw: fine center coincident with a coarse center copies it") {
    nn::Rng rng(34);
    Grid g = random_grid(rng, 4, 4);
    // Factor 3 puts fine cell 3i+1 exactly on coarse center i.
    Grid up = upsample_idw(g, 3, 2.0, 4);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            CHECK(up.at(3 * r + 1, 3 * c + 1) == g.at(r, c));
        }
    }
}

TEST_CASE("NN, bilinear and IDW stay within the input range") {
    nn::Rng rng(35);
    Grid g = random_grid(rng, 6, 6);
    const double lo = *std::min_element(g.values.begin(), g.values.end());
    const double hi = *std::max_element(g.values.begin(), g.values.end());
    for (const Grid& up :
         {upsample_nn(g, 4), upsample_bilinear(g, 4), upsample_idw(g, 4, 2.0, 4)}) {
        for (double v : up.values) {
            CHECK(v >= lo - 1e-12);
            CHECK(v <= hi + 1e-12);
        }
    }
}

TEST_CASE("interpolation touching nodata yields nodata") {
    Grid g(4, 4, 5.0);
    g.at(1, 1) = g.nodata_value;
    Grid bi = upsample_bilinear(g, 2);
    Grid cc = upsample_bicubic(g, 2);
    Grid idw = upsample_idw(g, 2, 2.0, 4);
    // The fine cell straddling coarse cells (1,1)-(2,2) touches the hole.
    CHECK(bi.at(3, 3) == bi.nodata_value);
    CHECK(cc.at(3, 3) == cc.nodata_value);
    CHECK(idw.at(3, 3) == idw.nodata_value);
    // Far corner fine cells never touch it bilinearly.
    CHECK(bi.at(7, 7) != bi.nodata_value);
    // A nodata coarse cell replicates through NN untouched.
    Grid nn_up = upsample_nn(g, 2);
    CHECK(nn_up.at(2, 2) == nn_up.nodata_value);
}

TEST_CASE("parameter validation") {
    Grid g(4, 4, 1.0);
    CHECK_THROWS_AS(upsample_nn(g, 1), ValueError);
    CHECK_THROWS_AS(upsample_nn(g, 3), ValueError);
    CHECK_THROWS_AS(upsample_idw(g, 2, 2.0, 0), ValueError);
    CHECK_THROWS_AS(upsample_idw(g, 2, 0.0, 4), ValueError);
    Grid tiny(1, 1, 0.0);
    CHECK_THROWS_AS(upsample_bilinear(tiny, 2), ShapeError);
    CHECK_THROWS_AS(upsample_bicubic(tiny, 2), ShapeError);
}
