#include "demsr/optim.hpp"

#include <cmath>

#include "demsr/error.hpp"

namespace demsr::nn {

void AdamConfig::validate() const {
    if (!(lr > 0)) throw ValueError("adam: lr must be > 0");
    if (!(epsilon > 0)) throw ValueError("adam: epsilon must be > 0");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) {
        throw ValueError("adam: betas must lie in [0, 1)");
    }
    if (weight_decay < 0) throw ValueError("adam: weight_decay must be >= 0");
    if (step_count < 0) throw ValueError("adam: step_count must be >= 0");
}

void adam_step(std::span<Parameter*> params, AdamConfig& cfg) {
    cfg.validate();
    cfg.step_count += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(cfg.step_count));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(cfg.step_count));
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double g = p->grad.v[i] + cfg.weight_decay * p->value.v[i];
            const double m = cfg.beta1 * p->adam_m.v[i] + (1.0 - cfg.beta1) * g;
            const double v = cfg.beta2 * p->adam_v.v[i] + (1.0 - cfg.beta2) * g * g;
            p->adam_m.v[i] = m;
            p->adam_v.v[i] = v;
            p->value.v[i] -= cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
        }
        p->zero_grad();
    }
}

Tensor he_init(TensorShape shape, int fan_in, Rng& rng) {
    if (fan_in <= 0) throw ValueError("he_init: fan_in must be > 0");
    const double stddev = std::sqrt(2.0 / fan_in);
    Tensor t(shape);
    for (double& x : t.v) x = stddev * rng.normal();
    return t;
}

}  // namespace demsr::nn
