#include "demsr/eval_morph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "demsr/error.hpp"

namespace demsr {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

long CellMask::count() const {
    long n = 0;
    for (auto v : m) n += v != 0;
    return n;
}

std::vector<Point> densify_polyline(const Polyline& p, double step) {
    if (!(step > 0)) throw ValueError("densify step must be > 0");
    if (p.vertices.size() < 2) throw ValueError("polyline '" + p.id + "' has fewer than 2 vertices");
    std::vector<Point> out;
    for (std::size_t i = 0; i + 1 < p.vertices.size(); ++i) {
        const Point& a = p.vertices[i];
        const Point& b = p.vertices[i + 1];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (len == 0.0) throw ValueError("polyline '" + p.id + "' repeats a vertex");
        out.push_back(a);
        const int inner = static_cast<int>(std::ceil(len / step)) - 1;
        for (int k = 1; k <= inner; ++k) {
            const double t = k * step / len;
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    out.push_back(p.vertices.back());
    return out;
}

std::vector<double> extract_profile(const Grid& g, const std::vector<Point>& vertices) {
    std::vector<double> profile;
    profile.reserve(vertices.size());
    for (const Point& pt : vertices) {
        int r, c;
        if (!g.locate(pt.x, pt.y, r, c)) {
            throw ValueError("profile vertex (" + std::to_string(pt.x) + "," +
                             std::to_string(pt.y) + ") lies outside the grid extent");
        }
        profile.push_back(g.is_nodata(r, c) ? kNan : g.at(r, c));
    }
    return profile;
}

double pearson_cc(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValueError("pearson_cc: sequence lengths differ");
    const std::size_t m = x.size();
    if (m < 2) throw ValueError("pearson_cc: needs at least 2 samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ValueError("pearson_cc: zero variance makes the correlation undefined");
    }
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

ProfileReport road_profile_report(const Grid& recon, const Grid& ref,
                                  const std::vector<Polyline>& roads) {
    if (roads.empty()) throw ValueError("road_profile_report: empty road set");
    ProfileReport rep;
    for (const Polyline& road : roads) {
        const auto pts = densify_polyline(road, recon.cell_size);
        const auto a = extract_profile(recon, pts);
        const auto b = extract_profile(ref, pts);
        std::vector<double> xa, xb;
        xa.reserve(a.size());
        xb.reserve(b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::isnan(a[i]) || std::isnan(b[i])) continue;  // nodata gap
            xa.push_back(a[i]);
            xb.push_back(b[i]);
        }
        if (xa.size() < 2) {
            rep.skipped.push_back({road.id, "fewer than 2 valid samples"});
            continue;
        }
        try {
            rep.roads.push_back({road.id, pearson_cc(xa, xb)});
        } catch (const ValueError&) {
            rep.skipped.push_back({road.id, "zero variance"});
        }
    }
    if (!rep.roads.empty()) {
        double sum = 0;
        for (const auto& r : rep.roads) sum += r.pcc;
        rep.mean_pcc = sum / rep.roads.size();
        double sq = 0;
        for (const auto& r : rep.roads) sq += (r.pcc - rep.mean_pcc) * (r.pcc - rep.mean_pcc);
        rep.std_pcc = std::sqrt(sq / rep.roads.size());
    }
    return rep;
}

namespace {

bool point_in_ring(double x, double y, const std::vector<Point>& ring) {
    // Even-odd rule, half-open on edges.
    bool inside = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a.y > y) != (b.y > y)) {
            const double t = (y - a.y) / (b.y - a.y);
            if (x < a.x + t * (b.x - a.x)) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

CellMask reference_boundary_raster(const PolygonSet& polys, const Grid& geometry,
                                   double min_area) {
    if (polys.polygons.empty()) throw ValueError("reference_boundary_raster: empty polygon set");
    const int nr = geometry.nrows, nc = geometry.ncols;
    CellMask filled(nr, nc);

    for (const auto& poly : polys.polygons) {
        if (poly.ring.size() < 3) {
            throw ValueError("polygon '" + poly.id + "' has fewer than 3 vertices");
        }
        double min_x = poly.ring[0].x, max_x = min_x, min_y = poly.ring[0].y, max_y = min_y;
        for (const Point& p : poly.ring) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        for (int r = 0; r < nr; ++r) {
            const double cy = geometry.cell_center_y(r);
            if (cy < min_y || cy > max_y) continue;
            for (int c = 0; c < nc; ++c) {
                const double cx = geometry.cell_center_x(c);
                if (cx < min_x || cx > max_x) continue;
                if (point_in_ring(cx, cy, poly.ring)) filled.at(r, c) = 1;
            }
        }
    }

    // Remove 4-connected components smaller than min_area.
    const double cell_area = geometry.cell_size * geometry.cell_size;
    const long min_cells = static_cast<long>(std::ceil(min_area / cell_area));
    std::vector<int> comp(filled.m.size(), -1);
    std::vector<std::pair<int, int>> stack;
    int comp_id = 0;
    std::vector<long> comp_size;
    for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nc; ++c) {
            if (!filled.at(r, c) || comp[static_cast<std::size_t>(r) * nc + c] >= 0) continue;
            long size = 0;
            stack.push_back({r, c});
            comp[static_cast<std::size_t>(r) * nc + c] = comp_id;
            while (!stack.empty()) {
                auto [cr, cc] = stack.back();
                stack.pop_back();
                ++size;
                constexpr int dr[] = {-1, 1, 0, 0};
                constexpr int dc[] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int nr2 = cr + dr[k], nc2 = cc + dc[k];
                    if (nr2 < 0 || nr2 >= nr || nc2 < 0 || nc2 >= nc) continue;
                    std::size_t idx = static_cast<std::size_t>(nr2) * nc + nc2;
                    if (filled.m[idx] && comp[idx] < 0) {
                        comp[idx] = comp_id;
                        stack.push_back({nr2, nc2});
                    }
                }
            }
            comp_size.push_back(size);
            ++comp_id;
        }
    }
    for (std::size_t i = 0; i < filled.m.size(); ++i) {
        if (filled.m[i] && comp_size[comp[i]] < min_cells) filled.m[i] = 0;
    }

    // Boundary = filled cells with a non-filled 4-neighbor (grid edge counts).
    CellMask boundary(nr, nc);
    for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nc; ++c) {
            if (!filled.at(r, c)) continue;
            const bool edge = r == 0 || r == nr - 1 || c == 0 || c == nc - 1 ||
                              !filled.at(r - 1, c) || !filled.at(r + 1, c) ||
                              !filled.at(r, c - 1) || !filled.at(r, c + 1);
            if (edge) boundary.at(r, c) = 1;
        }
    }
    return boundary;
}

std::array<double, 9> default_edge_kernel() {
    return {-0.7, -1.0, -0.7, -1.0, 6.8, -1.0, -0.7, -1.0, -0.7};
}

CellMask thin_zhang_suen(const CellMask& mask) {
    CellMask img = mask;
    const int nr = img.nrows, nc = img.ncols;
    auto px = [&](int r, int c) -> int {
        if (r < 0 || r >= nr || c < 0 || c >= nc) return 0;
        return img.at(r, c) ? 1 : 0;
    };
    std::vector<std::pair<int, int>> to_clear;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            to_clear.clear();
            for (int r = 0; r < nr; ++r) {
                for (int c = 0; c < nc; ++c) {
                    if (!img.at(r, c)) continue;
                    // Neighbors p2..p9 clockwise from north.
                    const int p2 = px(r - 1, c), p3 = px(r - 1, c + 1), p4 = px(r, c + 1),
                              p5 = px(r + 1, c + 1), p6 = px(r + 1, c), p7 = px(r + 1, c - 1),
                              p8 = px(r, c - 1), p9 = px(r - 1, c - 1);
                    const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    if (b < 2 || b > 6) continue;
                    const int a = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) +
                                  (p4 == 0 && p5 == 1) + (p5 == 0 && p6 == 1) +
                                  (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                                  (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
                    if (a != 1) continue;
                    if (pass == 0) {
                        if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
                    } else {
                        if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
                    }
                    to_clear.push_back({r, c});
                }
            }
            for (auto [r, c] : to_clear) img.at(r, c) = 0;
            if (!to_clear.empty()) changed = true;
        }
    }
    return img;
}

CellMask extract_dem_boundaries(const Grid& recon, double edge_threshold,
                                const std::array<double, 9>& kernel) {
    if (recon.nrows < 3 || recon.ncols < 3) {
        throw ShapeError("extract_dem_boundaries needs a grid of at least 3x3 cells");
    }
    const int nr = recon.nrows, nc = recon.ncols;
    CellMask cand(nr, nc);
    for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nc; ++c) {
            double resp = 0.0;
            bool nodata = false;
            for (int dr = -1; dr <= 1 && !nodata; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = std::clamp(r + dr, 0, nr - 1);
                    const int cc = std::clamp(c + dc, 0, nc - 1);
                    const double z = recon.at(rr, cc);
                    if (z == recon.nodata_value) {
                        nodata = true;
                        break;
                    }
                    resp += kernel[static_cast<std::size_t>(dr + 1) * 3 + (dc + 1)] * z;
                }
            }
            if (!nodata && std::abs(resp) >= edge_threshold) cand.at(r, c) = 1;
        }
    }
    return thin_zhang_suen(cand);
}

BoundaryReport boundary_match_report(const CellMask& extracted, const CellMask& reference,
                                     const std::vector<int>& buffers) {
    if (extracted.nrows != reference.nrows || extracted.ncols != reference.ncols) {
        throw ShapeError("boundary_match_report: masks are not on the same cell grid");
    }
    BoundaryReport rep;
    rep.reference_count = reference.count();
    rep.extracted_count = extracted.count();
    if (rep.reference_count == 0) {
        throw ValueError("boundary_match_report: reference boundary is empty");
    }

    const int nr = reference.nrows, nc = reference.ncols;
    // Chebyshev distance transform of the reference set via two separable
    // min-plus passes would be overkill here; dilate incrementally instead,
    // reusing the previous buffer's result.
    CellMask dilated = reference;
    int current = 0;
    std::vector<int> sorted_buffers = buffers;
    std::sort(sorted_buffers.begin(), sorted_buffers.end());
    for (int b : sorted_buffers) {
        if (b < 0) throw ValueError("boundary buffer must be >= 0");
        while (current < b) {
            CellMask next = dilated;
            for (int r = 0; r < nr; ++r) {
                for (int c = 0; c < nc; ++c) {
                    if (dilated.at(r, c)) continue;
                    bool hit = false;
                    for (int dr = -1; dr <= 1 && !hit; ++dr) {
                        for (int dc = -1; dc <= 1; ++dc) {
                            const int rr = r + dr, cc = c + dc;
                            if (rr < 0 || rr >= nr || cc < 0 || cc >= nc) continue;
                            if (dilated.at(rr, cc)) {
                                hit = true;
                                break;
                            }
                        }
                    }
                    if (hit) next.at(r, c) = 1;
                }
            }
            dilated = std::move(next);
            ++current;
        }
        long selected = 0;
        for (std::size_t i = 0; i < dilated.m.size(); ++i) {
            if (extracted.m[i] && dilated.m[i]) ++selected;
        }
        rep.ratio_by_buffer[b] = static_cast<double>(selected) / rep.reference_count;
    }
    return rep;
}

}  // namespace demsr
