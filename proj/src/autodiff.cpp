#include "demsr/autodiff.hpp"

#include <cmath>
#include <memory>

#include "demsr/error.hpp"

namespace demsr::nn {

Tape::Id Tape::push(Tensor value, std::function<void(Tape&, Id)> backprop) {
    nodes_.push_back(Node{std::move(value), nullptr, std::move(backprop)});
    grads_.emplace_back();
    return static_cast<Id>(nodes_.size() - 1);
}

Tensor& Tape::grad_slot(Id id) {
    if (grads_[id].v.empty()) grads_[id] = Tensor(nodes_[id].value.shape);
    return grads_[id];
}

const Tensor& Tape::grad(Id id) { return grad_slot(id); }

Tape::Id Tape::input(Tensor t, bool needs_grad) {
    (void)needs_grad;  // inputs always have a grad slot; flag is documentation
    return push(std::move(t), nullptr);
}

Tape::Id Tape::param(Parameter& p) {
    Id id = push(p.value, nullptr);
    nodes_[id].param = &p;
    return id;
}

Tape::Id Tape::conv2d(Id x, Id w, Id b) {
    Tensor y = nn::conv2d(nodes_[x].value, nodes_[w].value, nodes_[b].value);
    return push(std::move(y), [x, w, b](Tape& t, Id self) {
        const Tensor& g = t.grads_[self];
        const Tensor& xv = t.nodes_[x].value;
        const Tensor& wv = t.nodes_[w].value;
        {
            Tensor dx = conv2d_backward_input(g, wv, xv.shape);
            Tensor& gx = t.grad_slot(x);
            for (std::size_t i = 0; i < gx.size(); ++i) gx.v[i] += dx.v[i];
        }
        conv2d_backward_params(g, xv, wv, t.grad_slot(w), t.grad_slot(b));
    });
}

Tape::Id Tape::transposed_conv2d(Id x, Id w, Id b) {
    Tensor y = nn::transposed_conv2d(nodes_[x].value, nodes_[w].value, nodes_[b].value);
    return push(std::move(y), [x, w, b](Tape& t, Id self) {
        const Tensor& g = t.grads_[self];
        const Tensor& xv = t.nodes_[x].value;
        const Tensor& wv = t.nodes_[w].value;
        {
            Tensor dx = transposed_conv2d_backward_input(g, wv, xv.shape);
            Tensor& gx = t.grad_slot(x);
            for (std::size_t i = 0; i < gx.size(); ++i) gx.v[i] += dx.v[i];
        }
        transposed_conv2d_backward_params(g, xv, wv, t.grad_slot(w), t.grad_slot(b));
    });
}

Tape::Id Tape::relu(Id x) {
    Tensor y = nn::relu(nodes_[x].value);
    return push(std::move(y), [x](Tape& t, Id self) {
        const Tensor& g = t.grads_[self];
        const Tensor& xv = t.nodes_[x].value;
        Tensor& gx = t.grad_slot(x);
        for (std::size_t i = 0; i < gx.size(); ++i) {
            if (xv.v[i] > 0.0) gx.v[i] += g.v[i];
        }
    });
}

Tape::Id Tape::add(Id a, Id b) {
    Tensor y = nn::add(nodes_[a].value, nodes_[b].value);
    return push(std::move(y), [a, b](Tape& t, Id self) {
        const Tensor& g = t.grads_[self];
        Tensor& ga = t.grad_slot(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += g.v[i];
        Tensor& gb = t.grad_slot(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] += g.v[i];
    });
}

Tape::Id Tape::concat_channels(Id a, Id b) {
    Tensor y = nn::concat_channels(nodes_[a].value, nodes_[b].value);
    return push(std::move(y), [a, b](Tape& t, Id self) {
        const Tensor& g = t.grads_[self];
        Tensor& ga = t.grad_slot(a);
        Tensor& gb = t.grad_slot(b);
        const std::size_t plane = static_cast<std::size_t>(g.shape.h) * g.shape.w;
        for (int n = 0; n < g.shape.n; ++n) {
            for (int c = 0; c < ga.shape.c; ++c) {
                const double* gp = g.plane(n, c);
                double* dst = ga.plane(n, c);
                for (std::size_t i = 0; i < plane; ++i) dst[i] += gp[i];
            }
            for (int c = 0; c < gb.shape.c; ++c) {
                const double* gp = g.plane(n, ga.shape.c + c);
                double* dst = gb.plane(n, c);
                for (std::size_t i = 0; i < plane; ++i) dst[i] += gp[i];
            }
        }
    });
}

std::pair<Tape::Id, Tape::Id> Tape::split_channels(Id x, int s) {
    auto [keep, pass] = nn::split_channels(nodes_[x].value, s);
    const int keep_c = keep.shape.c;
    Id keep_id = push(std::move(keep), [x](Tape& t, Id self) {
        const Tensor& g = t.grads_[self];
        Tensor& gx = t.grad_slot(x);
        const std::size_t plane = static_cast<std::size_t>(g.shape.h) * g.shape.w;
        for (int n = 0; n < g.shape.n; ++n) {
            for (int c = 0; c < g.shape.c; ++c) {
                const double* gp = g.plane(n, c);
                double* dst = gx.plane(n, c);
                for (std::size_t i = 0; i < plane; ++i) dst[i] += gp[i];
            }
        }
    });
    Id pass_id = push(std::move(pass), [x, keep_c](Tape& t, Id self) {
        const Tensor& g = t.grads_[self];
        Tensor& gx = t.grad_slot(x);
        const std::size_t plane = static_cast<std::size_t>(g.shape.h) * g.shape.w;
        for (int n = 0; n < g.shape.n; ++n) {
            for (int c = 0; c < g.shape.c; ++c) {
                const double* gp = g.plane(n, c);
                double* dst = gx.plane(n, keep_c + c);
                for (std::size_t i = 0; i < plane; ++i) dst[i] += gp[i];
            }
        }
    });
    return {keep_id, pass_id};
}

Tape::Id Tape::upsample2x_nn(Id x) {
    Tensor y = nn::upsample2x_nn(nodes_[x].value);
    return push(std::move(y), [x](Tape& t, Id self) {
        Tensor dx = upsample2x_nn_backward(t.grads_[self]);
        Tensor& gx = t.grad_slot(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx.v[i] += dx.v[i];
    });
}

Tape::Id Tape::sum(Id x) {
    Tensor y({1, 1, 1, 1});
    y.v[0] = nn::sum(nodes_[x].value);
    return push(std::move(y), [x](Tape& t, Id self) {
        const double g = t.grads_[self].v[0];
        Tensor& gx = t.grad_slot(x);
        for (std::size_t i = 0; i < gx.size(); ++i) gx.v[i] += g;
    });
}

Tape::Id Tape::l1_loss(Id pred, Tensor target) {
    const Tensor& p = nodes_[pred].value;
    if (!(p.shape == target.shape)) {
        throw ShapeError("l1_loss: prediction " + p.shape.str() + " vs target " +
                         target.shape.str());
    }
    Tensor y({1, 1, 1, 1});
    y.v[0] = mean_abs_error(p, target);
    auto tgt = std::make_shared<Tensor>(std::move(target));
    return push(std::move(y), [pred, tgt](Tape& t, Id self) {
        const double g = t.grads_[self].v[0];
        const Tensor& p = t.nodes_[pred].value;
        Tensor& gp = t.grad_slot(pred);
        const double scale = g / static_cast<double>(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = p.v[i] - tgt->v[i];
            if (d > 0.0) {
                gp.v[i] += scale;
            } else if (d < 0.0) {
                gp.v[i] -= scale;
            }
        }
    });
}

void Tape::backward(Id root) {
    if (nodes_[root].value.size() != 1) {
        throw ValueError("backward requires a scalar root, got shape " +
                         nodes_[root].value.shape.str());
    }
    grad_slot(root).v[0] = 1.0;
    for (Id id = root; id >= 0; --id) {
        if (grads_[id].v.empty()) continue;  // not on a path to the root
        Node& node = nodes_[id];
        if (node.backprop) node.backprop(*this, id);
        if (node.param) {
            Tensor& pg = node.param->grad;
            const Tensor& g = grads_[id];
            for (std::size_t i = 0; i < pg.size(); ++i) pg.v[i] += g.v[i];
        }
    }
}

}  // namespace demsr::nn
