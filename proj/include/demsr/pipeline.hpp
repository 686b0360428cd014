#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "demsr/grid.hpp"
#include "demsr/model.hpp"

namespace demsr {

struct TrainConfig {
    int n_scales = 2;
    int batch_size = 64;
    int patch_size = 32;  // patch edge at input resolution; 2^n times that at full res
    double lr = 1e-4;
    double lr_drop_factor = 10.0;
    long lr_drop_after = 250000;
    double weight_decay = 1e-4;
    long total_iters = 0;
    std::uint64_t seed = 0;
    int block = 500;
    int block_overlap = 250;
    int split_divisor = 4;
    /// Spread each batch across source areas instead of sampling uniformly
    /// over all blocks.
    bool stratified = false;

    int scale_factor() const { return 1 << n_scales; }
    void validate() const;
};

/// High-resolution training blocks; blocks containing nodata are discarded at
/// build time so sampling never has to mask.
struct BlockStore {
    struct Block {
        Grid grid;
        int area_id = 0;
    };
    std::vector<Block> blocks;
    int n_areas = 0;
};

/// Cuts each area into block x block grids at stride block - block_overlap.
/// Areas smaller than one block are skipped; a note per skip or per discarded
/// nodata block is appended to warnings when given.
BlockStore build_blocks(const std::vector<Grid>& areas, const TrainConfig& cfg,
                        std::vector<std::string>* warnings = nullptr);

struct Batch {
    nn::Tensor input;                 // N x 1 x patch x patch
    std::vector<nn::Tensor> targets;  // scale 1..n, doubling per scale
};

/// Uniformly samples batch_size blocks (with replacement), crops a random
/// high-resolution patch from each, and derives the input and per-scale
/// targets by NN downsampling.
Batch sample_batch(const BlockStore& store, const TrainConfig& cfg, nn::Rng& rng);

struct TrainRecord {
    long iter = 0;
    double lr = 0.0;
    double loss = 0.0;
};

struct TrainResult {
    msm::MsmModel model;
    std::vector<TrainRecord> history;
};

using CheckpointFn = std::function<void(long iter, const msm::MsmModel&)>;

/// He-initializes a model and runs sample -> forward -> loss -> backward ->
/// Adam for total_iters iterations. The learning rate drops by lr_drop_factor
/// exactly once, after lr_drop_after iterations. Aborts with an Error if the
/// loss becomes non-finite.
TrainResult train(const BlockStore& store, const TrainConfig& cfg,
                  const CheckpointFn& checkpoint = nullptr, long checkpoint_every = 0);

/// Tiled reconstruction at factor 2^k: tiles of block/overlap cells (clamped
/// down for small grids) are forwarded through k stages and stitched by
/// nearest-center ownership. Tiles containing nodata are emitted as nodata.
/// The stage window is chosen by matching g's cell size against the model
/// manifest; a model without a recorded cell size enters at stage 0.
Grid reconstruct(const Grid& g, const msm::MsmModel& m, int factor, int block = 250,
                 int overlap = 125);

/// 1-channel tensor view of a grid (no nodata handling).
nn::Tensor tensor_from_grid(const Grid& g);
/// Grid from a 1x1xHxW tensor, georeferenced like `like` but with the given
/// cell size.
Grid grid_from_tensor(const nn::Tensor& t, const Grid& like, double cell_size);

/// Writes "iter,lr,loss" CSV rows for a training history.
void write_history_csv(const std::vector<TrainRecord>& history, const std::string& path);

}  // namespace demsr
