#include "demsr/eval_numeric.hpp"

#include <charconv>
#include <cmath>

#include "demsr/error.hpp"

namespace demsr {

namespace {

std::string fmt_edge(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void check_aligned(const Grid& a, const Grid& b, const char* what) {
    if (a.ncols != b.ncols || a.nrows != b.nrows) {
        throw ShapeError(std::string(what) + ": grids are " + std::to_string(a.nrows) + "x" +
                         std::to_string(a.ncols) + " vs " + std::to_string(b.nrows) + "x" +
                         std::to_string(b.ncols));
    }
    if (a.cell_size != b.cell_size) {
        throw ShapeError(std::string(what) + ": cell sizes differ");
    }
}

ErrorStats stats_from_accumulators(double abs_sum, double sq_sum, double sum, long n) {
    ErrorStats s;
    s.n = n;
    s.mae = abs_sum / n;
    s.rmse = std::sqrt(sq_sum / n);
    s.mean_error = sum / n;
    double var = sq_sum / n - s.mean_error * s.mean_error;
    s.std = std::sqrt(var > 0 ? var : 0.0);
    return s;
}

}  // namespace

ErrorStats error_stats(const Grid& recon, const Grid& ref, const CellPredicate& mask) {
    check_aligned(recon, ref, "error_stats");
    double abs_sum = 0.0, sq_sum = 0.0, sum = 0.0;
    long n = 0;
    for (int r = 0; r < recon.nrows; ++r) {
        for (int c = 0; c < recon.ncols; ++c) {
            if (recon.is_nodata(r, c) || ref.is_nodata(r, c)) continue;
            if (mask && !mask(r, c)) continue;
            const double e = recon.at(r, c) - ref.at(r, c);
            abs_sum += std::abs(e);
            sq_sum += e * e;
            sum += e;
            ++n;
        }
    }
    if (n == 0) throw ValueError("error_stats: no valid cells in the comparison domain");
    return stats_from_accumulators(abs_sum, sq_sum, sum, n);
}

std::vector<double> default_slope_edges() {
    return {0, 5, 10, 15, 20, 30, 45, 60, 80, 100};
}

BinnedReport slope_binned_stats(const Grid& recon, const Grid& ref, const Grid& slope,
                                const std::vector<double>& edges) {
    check_aligned(recon, ref, "slope_binned_stats");
    check_aligned(recon, slope, "slope_binned_stats (slope grid)");
    if (edges.size() < 2) throw ValueError("slope bins need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw ValueError("slope bin edges must be increasing");
    }

    const std::size_t nbins = edges.size();  // last bin is [edges.back(), inf)
    struct Acc {
        double abs_sum = 0, sq_sum = 0, sum = 0;
        long n = 0;
    };
    std::vector<Acc> acc(nbins);
    long total = 0;

    for (int r = 0; r < recon.nrows; ++r) {
        for (int c = 0; c < recon.ncols; ++c) {
            if (recon.is_nodata(r, c) || ref.is_nodata(r, c) || slope.is_nodata(r, c)) continue;
            const double sp = slope.at(r, c);
            if (sp < edges.front()) continue;
            std::size_t b = nbins - 1;
            for (std::size_t i = 1; i < edges.size(); ++i) {
                if (sp < edges[i]) {
                    b = i - 1;
                    break;
                }
            }
            const double e = recon.at(r, c) - ref.at(r, c);
            acc[b].abs_sum += std::abs(e);
            acc[b].sq_sum += e * e;
            acc[b].sum += e;
            ++acc[b].n;
            ++total;
        }
    }
    if (total == 0) throw ValueError("slope_binned_stats: no valid cells");

    BinnedReport rep;
    rep.total_valid = total;
    double mae_sum = 0, rmse_sum = 0;
    int populated = 0;
    for (std::size_t b = 0; b < nbins; ++b) {
        Bin bin;
        if (b + 1 < edges.size()) {
            bin.label = "[" + fmt_edge(edges[b]) + "," + fmt_edge(edges[b + 1]) + ")";
        } else {
            bin.label = ">=" + fmt_edge(edges.back());
        }
        bin.count = acc[b].n;
        bin.frequency = static_cast<double>(acc[b].n) / total;
        if (acc[b].n > 0) {
            bin.empty = false;
            bin.stats = stats_from_accumulators(acc[b].abs_sum, acc[b].sq_sum, acc[b].sum,
                                                acc[b].n);
            mae_sum += bin.stats.mae;
            rmse_sum += bin.stats.rmse;
            ++populated;
        }
        rep.bins.push_back(std::move(bin));
    }
    rep.mean_mae = mae_sum / populated;
    rep.mean_rmse = rmse_sum / populated;
    return rep;
}

const std::vector<std::pair<Landcover, std::string>>& landcover_classes() {
    static const std::vector<std::pair<Landcover, std::string>> classes = {
        {Landcover::kRoad, "road"},
        {Landcover::kBuilding, "building"},
        {Landcover::kNatural, "natural"},
        {Landcover::kMultiSurface, "multi-surface"},
        {Landcover::kOther, "other"},
    };
    return classes;
}

BinnedReport landcover_binned_stats(const Grid& recon, const Grid& ref, const Grid& landcover) {
    check_aligned(recon, ref, "landcover_binned_stats");
    check_aligned(recon, landcover, "landcover_binned_stats (landcover grid)");
    const auto& classes = landcover_classes();

    struct Acc {
        double abs_sum = 0, sq_sum = 0, sum = 0;
        long n = 0;
    };
    std::vector<Acc> acc(classes.size());
    long total = 0;

    for (int r = 0; r < recon.nrows; ++r) {
        for (int c = 0; c < recon.ncols; ++c) {
            if (landcover.is_nodata(r, c)) continue;
            const double code_d = landcover.at(r, c);
            const int code = static_cast<int>(code_d);
            if (code_d != code || code < 1 || code > static_cast<int>(classes.size())) {
                throw ValueError("landcover: unknown class code " + std::to_string(code_d) +
                                 " at cell (" + std::to_string(r) + "," + std::to_string(c) + ")");
            }
            if (recon.is_nodata(r, c) || ref.is_nodata(r, c)) continue;
            const double e = recon.at(r, c) - ref.at(r, c);
            Acc& a = acc[code - 1];
            a.abs_sum += std::abs(e);
            a.sq_sum += e * e;
            a.sum += e;
            ++a.n;
            ++total;
        }
    }
    if (total == 0) throw ValueError("landcover_binned_stats: no valid cells");

    BinnedReport rep;
    rep.total_valid = total;
    double mae_sum = 0, rmse_sum = 0;
    int populated = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        Bin bin;
        bin.label = classes[i].second;
        bin.count = acc[i].n;
        bin.frequency = static_cast<double>(acc[i].n) / total;
        if (acc[i].n > 0) {
            bin.empty = false;
            bin.stats = stats_from_accumulators(acc[i].abs_sum, acc[i].sq_sum, acc[i].sum,
                                                acc[i].n);
            mae_sum += bin.stats.mae;
            rmse_sum += bin.stats.rmse;
            ++populated;
        }
        rep.bins.push_back(std::move(bin));
    }
    rep.mean_mae = mae_sum / populated;
    rep.mean_rmse = rmse_sum / populated;
    return rep;
}

}  // namespace demsr
