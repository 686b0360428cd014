#include "demsr/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "demsr/error.hpp"

namespace demsr {

namespace {

Grid make_fine(const Grid& g, int factor) {
    Grid out(g.nrows * factor, g.ncols * factor);
    out.cell_size = g.cell_size / factor;
    out.xll = g.xll;
    out.yll = g.yll;
    out.nodata_value = g.nodata_value;
    return out;
}

void check_factor(int factor) {
    if (factor < 2) throw ValueError("upsample factor must be >= 2");
}

// Continuous coarse-grid coordinate of fine cell f: the coarse cell center
// lattice lives at integer positions 0..n-1.
inline double coarse_coord(int f, int factor) { return (f + 0.5) / factor - 0.5; }

}  // namespace

Grid upsample_nn(const Grid& g, int factor) {
    check_factor(factor);
    if ((factor & (factor - 1)) != 0) throw ValueError("NN upsample factor must be a power of two");
    Grid out = make_fine(g, factor);
    for (int r = 0; r < out.nrows; ++r) {
        const double* src = &g.values[static_cast<std::size_t>(r / factor) * g.ncols];
        double* dst = &out.values[static_cast<std::size_t>(r) * out.ncols];
        for (int c = 0; c < out.ncols; ++c) dst[c] = src[c / factor];
    }
    return out;
}

Grid upsample_bilinear(const Grid& g, int factor) {
    check_factor(factor);
    if (g.nrows < 2 || g.ncols < 2) throw ShapeError("bilinear upsampling needs at least 2x2 cells");
    Grid out = make_fine(g, factor);
    for (int r = 0; r < out.nrows; ++r) {
        double v = std::clamp(coarse_coord(r, factor), 0.0, g.nrows - 1.0);
        int r0 = std::min(static_cast<int>(v), g.nrows - 2);
        double tr = v - r0;
        for (int c = 0; c < out.ncols; ++c) {
            double u = std::clamp(coarse_coord(c, factor), 0.0, g.ncols - 1.0);
            int c0 = std::min(static_cast<int>(u), g.ncols - 2);
            double tc = u - c0;
            double z00 = g.at(r0, c0), z01 = g.at(r0, c0 + 1);
            double z10 = g.at(r0 + 1, c0), z11 = g.at(r0 + 1, c0 + 1);
            if (z00 == g.nodata_value || z01 == g.nodata_value || z10 == g.nodata_value ||
                z11 == g.nodata_value) {
                out.at(r, c) = out.nodata_value;
                continue;
            }
            out.at(r, c) = (1 - tr) * ((1 - tc) * z00 + tc * z01) +
                           tr * ((1 - tc) * z10 + tc * z11);
        }
    }
    return out;
}

double cubic_kernel(double t, double a) {
    t = std::abs(t);
    if (t <= 1.0) return ((a + 2) * t - (a + 3)) * t * t + 1;
    if (t < 2.0) return ((a * t - 5 * a) * t + 8 * a) * t - 4 * a;
    return 0.0;
}

Grid upsample_bicubic(const Grid& g, int factor) {
    check_factor(factor);
    if (g.nrows < 4 || g.ncols < 4) throw ShapeError("bicubic upsampling needs at least 4x4 cells");
    Grid out = make_fine(g, factor);
    for (int r = 0; r < out.nrows; ++r) {
        double v = coarse_coord(r, factor);
        int r0 = static_cast<int>(std::floor(v));
        double tr = v - r0;
        double wr[4];
        for (int i = 0; i < 4; ++i) wr[i] = cubic_kernel(tr - (i - 1));
        for (int c = 0; c < out.ncols; ++c) {
            double u = coarse_coord(c, factor);
            int c0 = static_cast<int>(std::floor(u));
            double tc = u - c0;
            double wc[4];
            for (int i = 0; i < 4; ++i) wc[i] = cubic_kernel(tc - (i - 1));
            double acc = 0.0;
            bool nodata = false;
            for (int i = 0; i < 4 && !nodata; ++i) {
                int rr = std::clamp(r0 - 1 + i, 0, g.nrows - 1);
                double row_acc = 0.0;
                for (int j = 0; j < 4; ++j) {
                    int cc = std::clamp(c0 - 1 + j, 0, g.ncols - 1);
                    double z = g.at(rr, cc);
                    if (z == g.nodata_value) {
                        nodata = true;
                        break;
                    }
                    row_acc += wc[j] * z;
                }
                acc += wr[i] * row_acc;
            }
            out.at(r, c) = nodata ? out.nodata_value : acc;
        }
    }
    return out;
}

Grid upsample_idw(const Grid& g, int factor, double power, int k) {
    check_factor(factor);
    if (k < 1) throw ValueError("IDW needs k >= 1");
    if (!(power > 0)) throw ValueError("IDW needs power > 0");
    k = std::min<long long>(k, g.size());
    Grid out = make_fine(g, factor);

    struct Cand {
        double d2;
        int row, col;
        bool operator<(const Cand& o) const {
            if (d2 != o.d2) return d2 < o.d2;
            if (row != o.row) return row < o.row;
            return col < o.col;
        }
    };
    std::vector<Cand> best;
    best.reserve(k + 8);

    for (int r = 0; r < out.nrows; ++r) {
        // Coarse lattice coordinates of the fine center (units of coarse cells).
        double v = coarse_coord(r, factor);
        int rc = std::clamp(static_cast<int>(std::lround(v)), 0, g.nrows - 1);
        for (int c = 0; c < out.ncols; ++c) {
            double u = coarse_coord(c, factor);
            int cc = std::clamp(static_cast<int>(std::lround(u)), 0, g.ncols - 1);

            best.clear();
            // Expand square rings until no closer candidate can remain.
            for (int ring = 0;; ++ring) {
                if (static_cast<int>(best.size()) >= k) {
                    double ring_min = ring - 0.5;  // nearest possible axis distance
                    double worst = best[k - 1].d2;
                    if (ring_min > 0 && ring_min * ring_min > worst) break;
                }
                int r_lo = rc - ring, r_hi = rc + ring;
                int c_lo = cc - ring, c_hi = cc + ring;
                if (r_lo >= g.nrows || r_hi < 0 || c_lo >= g.ncols || c_hi < 0) {
                    if (static_cast<int>(best.size()) >= k) break;
                    if (ring > g.nrows + g.ncols) break;  // exhausted grid
                    continue;
                }
                bool any = false;
                for (int rr = std::max(0, r_lo); rr <= std::min(g.nrows - 1, r_hi); ++rr) {
                    bool r_edge = (rr == r_lo || rr == r_hi);
                    for (int col = std::max(0, c_lo); col <= std::min(g.ncols - 1, c_hi); ++col) {
                        if (!r_edge && col != c_lo && col != c_hi) continue;
                        any = true;
                        double dr = v - rr, dc = u - col;
                        best.push_back({dr * dr + dc * dc, rr, col});
                    }
                }
                if (any) {
                    std::sort(best.begin(), best.end());
                    if (static_cast<int>(best.size()) > k + 4) best.resize(k + 4);
                }
            }

            // Weighted sum over the k nearest, distances in world units.
            double num = 0.0, den = 0.0;
            bool nodata = false, exact = false;
            for (int i = 0; i < k; ++i) {
                double z = g.at(best[i].row, best[i].col);
                if (z == g.nodata_value) {
                    nodata = true;
                    break;
                }
                if (best[i].d2 == 0.0) {
                    out.at(r, c) = z;
                    exact = true;
                    break;
                }
                double d = std::sqrt(best[i].d2) * g.cell_size;
                double w = std::pow(d, -power);
                num += w * z;
                den += w;
            }
            if (exact) continue;
            out.at(r, c) = nodata ? out.nodata_value : num / den;
        }
    }
    return out;
}

}  // namespace demsr
