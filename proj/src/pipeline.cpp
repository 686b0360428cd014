#include "demsr/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "demsr/error.hpp"

namespace demsr {

namespace {

std::string num(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

void TrainConfig::validate() const {
    if (n_scales < 1) throw ValueError("train: n_scales must be >= 1");
    if (batch_size < 1) throw ValueError("train: batch_size must be >= 1");
    if (patch_size < 4) throw ValueError("train: patch_size must be >= 4");
    if (static_cast<long>(patch_size) * scale_factor() > block) {
        throw ValueError("train: patch_size * 2^n_scales = " +
                         std::to_string(patch_size * scale_factor()) +
                         " exceeds block size " + std::to_string(block));
    }
    if (!(lr > 0)) throw ValueError("train: lr must be > 0");
    if (!(lr_drop_factor >= 1)) throw ValueError("train: lr_drop_factor must be >= 1");
    if (lr_drop_after < 0) throw ValueError("train: lr_drop_after must be >= 0");
    if (weight_decay < 0) throw ValueError("train: weight_decay must be >= 0");
    if (total_iters < 0) throw ValueError("train: total_iters must be >= 0");
    if (block < 1 || block_overlap < 0 || block_overlap >= block) {
        throw ValueError("train: need 0 <= block_overlap < block");
    }
}

BlockStore build_blocks(const std::vector<Grid>& areas, const TrainConfig& cfg,
                        std::vector<std::string>* warnings) {
    cfg.validate();
    BlockStore store;
    store.n_areas = static_cast<int>(areas.size());
    for (std::size_t a = 0; a < areas.size(); ++a) {
        const Grid& area = areas[a];
        if (area.nrows < cfg.block || area.ncols < cfg.block) {
            if (warnings) {
                warnings->push_back("area " + std::to_string(a) + " (" +
                                    std::to_string(area.nrows) + "x" +
                                    std::to_string(area.ncols) + ") is smaller than one " +
                                    std::to_string(cfg.block) + "-cell block; skipped");
            }
            continue;
        }
        auto tiles = split_into_tiles(area, cfg.block, cfg.block_overlap);
        for (auto& tile : tiles) {
            bool has_nodata = false;
            for (double v : tile.grid.values) {
                if (v == tile.grid.nodata_value) {
                    has_nodata = true;
                    break;
                }
            }
            if (has_nodata) {
                if (warnings) {
                    warnings->push_back("area " + std::to_string(a) + " block at (" +
                                        std::to_string(tile.row_off) + "," +
                                        std::to_string(tile.col_off) +
                                        ") contains nodata; discarded");
                }
                continue;
            }
            store.blocks.push_back({std::move(tile.grid), static_cast<int>(a)});
        }
    }
    return store;
}

Batch sample_batch(const BlockStore& store, const TrainConfig& cfg, nn::Rng& rng) {
    cfg.validate();
    if (store.blocks.empty()) throw ValueError("sample_batch: block store is empty");
    const int hi_patch = cfg.patch_size * cfg.scale_factor();

    // Per-area index lists for the stratified mode.
    std::vector<std::vector<int>> by_area;
    if (cfg.stratified) {
        by_area.resize(store.n_areas);
        for (std::size_t i = 0; i < store.blocks.size(); ++i) {
            by_area[store.blocks[i].area_id].push_back(static_cast<int>(i));
        }
        std::erase_if(by_area, [](const auto& v) { return v.empty(); });
        if (by_area.empty()) throw ValueError("sample_batch: no populated areas");
    }

    Batch batch;
    batch.input = nn::Tensor({cfg.batch_size, 1, cfg.patch_size, cfg.patch_size});
    for (int s = 1; s <= cfg.n_scales; ++s) {
        const int edge = cfg.patch_size << s;
        batch.targets.emplace_back(nn::TensorShape{cfg.batch_size, 1, edge, edge});
    }

    for (int e = 0; e < cfg.batch_size; ++e) {
        int bi;
        if (cfg.stratified) {
            const auto& pool = by_area[e % by_area.size()];
            bi = pool[rng.uniform_int(static_cast<int>(pool.size()))];
        } else {
            bi = rng.uniform_int(static_cast<int>(store.blocks.size()));
        }
        const Grid& block = store.blocks[bi].grid;
        if (block.nrows < hi_patch || block.ncols < hi_patch) {
            throw ValueError("sample_batch: patch of " + std::to_string(hi_patch) +
                             " cells does not fit the " + std::to_string(block.nrows) + "x" +
                             std::to_string(block.ncols) + " block");
        }
        const int row0 = rng.uniform_int(block.nrows - hi_patch + 1);
        const int col0 = rng.uniform_int(block.ncols - hi_patch + 1);

        Grid patch(hi_patch, hi_patch);
        patch.cell_size = block.cell_size;
        patch.nodata_value = block.nodata_value;
        for (int r = 0; r < hi_patch; ++r) {
            for (int c = 0; c < hi_patch; ++c) patch.at(r, c) = block.at(row0 + r, col0 + c);
        }

        // Input and intermediate truths use the same NN pick rule as the
        // experiment-level downsampling.
        for (int s = 1; s <= cfg.n_scales; ++s) {
            const int down_factor = 1 << (cfg.n_scales - s);
            const Grid target = down_factor == 1 ? patch : downsample_nn(patch, down_factor);
            nn::Tensor& dst = batch.targets[s - 1];
            for (int r = 0; r < target.nrows; ++r) {
                for (int c = 0; c < target.ncols; ++c) dst.at(e, 0, r, c) = target.at(r, c);
            }
        }
        const Grid input = downsample_nn(patch, cfg.scale_factor());
        for (int r = 0; r < input.nrows; ++r) {
            for (int c = 0; c < input.ncols; ++c) batch.input.at(e, 0, r, c) = input.at(r, c);
        }
    }
    return batch;
}

TrainResult train(const BlockStore& store, const TrainConfig& cfg, const CheckpointFn& checkpoint,
                  long checkpoint_every) {
    cfg.validate();
    nn::Rng rng(cfg.seed);
    double input_cell_size = 0.0;
    if (!store.blocks.empty()) {
        input_cell_size = store.blocks.front().grid.cell_size * cfg.scale_factor();
    }
    msm::MsmModel model = msm::make_model(cfg.n_scales, cfg.split_divisor, input_cell_size, rng);
    model.manifest.training = "iters=" + std::to_string(cfg.total_iters) +
                              " seed=" + std::to_string(cfg.seed) +
                              " batch=" + std::to_string(cfg.batch_size) +
                              " patch=" + std::to_string(cfg.patch_size);

    std::vector<TrainRecord> history;
    history.reserve(cfg.total_iters);
    if (cfg.total_iters > 0 && store.blocks.empty()) {
        throw ValueError("train: block store is empty");
    }

    auto params = model.parameters();
    nn::AdamConfig adam;
    adam.lr = cfg.lr;
    adam.weight_decay = cfg.weight_decay;

    for (long it = 1; it <= cfg.total_iters; ++it) {
        const double lr_now = it > cfg.lr_drop_after ? cfg.lr / cfg.lr_drop_factor : cfg.lr;
        Batch batch = sample_batch(store, cfg, rng);

        nn::Tape tape;
        nn::Tape::Id x = tape.input(std::move(batch.input));
        auto outputs = msm::msm_forward(tape, x, model);
        nn::Tape::Id loss = msm::multiscale_loss(tape, outputs, std::move(batch.targets));
        const double loss_val = tape.value(loss).v[0];
        if (!std::isfinite(loss_val)) {
            throw Error("training diverged: loss is not finite at iteration " +
                        std::to_string(it));
        }
        tape.backward(loss);
        adam.lr = lr_now;
        adam_step(params, adam);
        history.push_back({it, lr_now, loss_val});
        if (checkpoint && checkpoint_every > 0 && it % checkpoint_every == 0) {
            checkpoint(it, model);
        }
    }
    return {std::move(model), std::move(history)};
}

nn::Tensor tensor_from_grid(const Grid& g) {
    nn::Tensor t({1, 1, g.nrows, g.ncols});
    t.v = g.values;
    return t;
}

Grid grid_from_tensor(const nn::Tensor& t, const Grid& like, double cell_size) {
    if (t.shape.n != 1 || t.shape.c != 1) {
        throw ShapeError("grid_from_tensor expects a 1x1xHxW tensor, got " + t.shape.str());
    }
    Grid g(t.shape.h, t.shape.w);
    g.cell_size = cell_size;
    g.xll = like.xll;
    g.yll = like.yll;
    g.nodata_value = like.nodata_value;
    g.values = t.v;
    return g;
}

Grid reconstruct(const Grid& g, const msm::MsmModel& m, int factor, int block, int overlap) {
    if (factor < 2 || (factor & (factor - 1)) != 0) {
        throw ValueError("reconstruct factor must be a power of two >= 2");
    }
    int k = 0;
    for (int f = factor; f > 1; f >>= 1) ++k;
    const int total = static_cast<int>(m.subnets.size());
    if (k > total) {
        throw ValueError("reconstruct: factor " + std::to_string(factor) + " needs " +
                         std::to_string(k) + " stages, model has " + std::to_string(total));
    }

    int first_stage = 0;
    if (m.manifest.input_cell_size > 0) {
        first_stage = -1;
        for (int i = 0; i + k <= total; ++i) {
            const double expect = m.stage_cell_size(i);
            if (std::abs(g.cell_size - expect) <= 1e-9 * g.cell_size) {
                first_stage = i;
                break;
            }
        }
        if (first_stage < 0) {
            throw ValueError("reconstruct: no stage window matches input cell size " +
                             std::to_string(g.cell_size) + " (model starts at " +
                             std::to_string(m.manifest.input_cell_size) + ")");
        }
    }

    const int b = std::min({block, g.nrows, g.ncols});
    const int ov = std::min(overlap, b - 1 < 0 ? 0 : b - 1);
    auto tiles = split_into_tiles(g, b, ov);

    std::vector<Tile> out_tiles;
    out_tiles.reserve(tiles.size());
    for (const Tile& tile : tiles) {
        Tile out;
        out.row_off = tile.row_off * factor;
        out.col_off = tile.col_off * factor;
        bool has_nodata = false;
        for (double v : tile.grid.values) {
            if (v == tile.grid.nodata_value) {
                has_nodata = true;
                break;
            }
        }
        if (has_nodata) {
            out.grid = Grid(tile.grid.nrows * factor, tile.grid.ncols * factor,
                            tile.grid.nodata_value);
            out.grid.cell_size = tile.grid.cell_size / factor;
            out.grid.xll = tile.grid.xll;
            out.grid.yll = tile.grid.yll;
            out.grid.nodata_value = tile.grid.nodata_value;
        } else {
            auto outputs = msm::msm_forward(tensor_from_grid(tile.grid), m, first_stage, k);
            out.grid = grid_from_tensor(outputs.back(), tile.grid, tile.grid.cell_size / factor);
        }
        out_tiles.push_back(std::move(out));
    }
    Grid result = stitch_tiles(out_tiles, g.nrows * factor, g.ncols * factor);
    result.nodata_value = g.nodata_value;
    return result;
}

void write_history_csv(const std::vector<TrainRecord>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "iter,lr,loss\n";
    for (const TrainRecord& r : history) {
        out << r.iter << ',' << num(r.lr) << ',' << num(r.loss) << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace demsr
