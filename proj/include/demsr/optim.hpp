#pragma once

#include <span>
#include <string>

#include "demsr/tensor.hpp"

namespace demsr::nn {

/// Learnable tensor with its accumulated gradient and Adam moment buffers,
/// all of identical shape.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;

    Parameter() = default;
    Parameter(std::string name_, Tensor value_)
        : name(std::move(name_)),
          value(std::move(value_)),
          grad(value.shape),
          adam_m(value.shape),
          adam_v(value.shape) {}

    void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), 0.0); }
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;
    long step_count = 0;

    void validate() const;
};

/// One Adam update with bias correction. Weight decay enters as a classic L2
/// term on the gradient (grad += weight_decay * value) before the moment
/// updates; gradients are zeroed afterwards. step_count increments first.
void adam_step(std::span<Parameter*> params, AdamConfig& cfg);

/// Zero-mean normal draws with standard deviation sqrt(2 / fan_in).
Tensor he_init(TensorShape shape, int fan_in, Rng& rng);

}  // namespace demsr::nn
