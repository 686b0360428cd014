#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "demsr/autodiff.hpp"
#include "demsr/optim.hpp"
#include "demsr/tensor.hpp"

namespace demsr::msm {

using nn::Parameter;
using nn::Rng;
using nn::Tape;
using nn::Tensor;

/// Trunk width of every subnetwork (feature channels).
inline constexpr int kWidth = 64;
inline constexpr int kModelFormatVersion = 1;

struct ConvParams {
    Parameter weight;
    Parameter bias;
};

/// Information distillation block: six 3x3 convolutions with a channel split
/// after the third, a concat of the kept shallow channels with the deep
/// output, and a 1x1 bottleneck back to kWidth channels (no ReLU after it).
///
/// With split divisor s: conv1-3 keep kWidth channels; the split keeps
/// kWidth/s and passes the rest; conv4 maps the pass portion back to kWidth,
/// conv5-6 stay at kWidth; the bottleneck maps kWidth/s + kWidth -> kWidth.
struct IdbParams {
    ConvParams conv1, conv2, conv3, conv4, conv5, conv6;
    ConvParams bottleneck;
    int split_divisor = 4;
};

/// One 2x-reconstruction stage: two 3x3 convolutions, two IDBs, and a 4x4
/// stride-2 transposed convolution projecting kWidth features to the 1-channel
/// residual, which is added to the NN-upsampled input.
struct SubnetParams {
    ConvParams conv_a;   // 1 -> kWidth
    ConvParams conv_b;   // kWidth -> kWidth
    IdbParams idb1, idb2;
    ConvParams out_proj;  // transposed conv, kWidth -> 1
};

struct ModelManifest {
    int version = kModelFormatVersion;
    int n_scales = 1;
    int split_divisor = 4;
    double input_cell_size = 0.0;  // resolution the first stage consumes; 0 = unset
    std::string training;          // free-form training metadata
};

/// Chain of 2x subnetworks; stage i consumes the output resolution of stage
/// i-1. A trained chain may be entered at any intermediate stage whose
/// expected input resolution matches the given grid.
struct MsmModel {
    ModelManifest manifest;
    std::vector<SubnetParams> subnets;

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    /// Input cell size expected when entering at `stage` (0-based).
    double stage_cell_size(int stage) const;
};

/// He-initialized model (biases zero). split_divisor must divide kWidth and
/// leave a non-empty pass portion.
MsmModel make_model(int n_scales, int split_divisor, double input_cell_size, Rng& rng);
/// All-zero parameters; the residual path vanishes so every stage reduces to
/// NN upsampling. Used for identity checks.
MsmModel make_zero_model(int n_scales, int split_divisor, double input_cell_size);

// Inference path (no gradient bookkeeping; memory stays bounded by a few live
// feature maps).
Tensor idb_forward(const Tensor& x, const IdbParams& p);
Tensor subnet_forward(const Tensor& x, const SubnetParams& p);
/// Runs n_stages stages starting at first_stage (-1 = all remaining) and
/// returns every intermediate reconstruction, coarsest first.
std::vector<Tensor> msm_forward(const Tensor& x, const MsmModel& m, int first_stage = 0,
                                int n_stages = -1);

// Training path (same kernels, recorded on a tape).
Tape::Id idb_forward(Tape& t, Tape::Id x, IdbParams& p);
Tape::Id subnet_forward(Tape& t, Tape::Id x, SubnetParams& p);
std::vector<Tape::Id> msm_forward(Tape& t, Tape::Id x, MsmModel& m);

/// Sum over scales of the per-scale mean absolute error, equal weights.
double multiscale_loss(std::span<const Tensor> recons, std::span<const Tensor> truths);
Tape::Id multiscale_loss(Tape& t, std::span<const Tape::Id> recons, std::vector<Tensor> truths);

/// Checkpoint format: a one-line magic+version header, a one-line JSON
/// manifest (n, s, cell size, named parameter shapes in order), then the
/// little-endian 64-bit parameter payload in manifest order.
void save_model(const MsmModel& m, std::ostream& out);
void save_model_file(const MsmModel& m, const std::string& path);
MsmModel load_model(std::istream& in);
MsmModel load_model_file(const std::string& path);

}  // namespace demsr::msm
