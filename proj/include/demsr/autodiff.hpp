#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "demsr/optim.hpp"
#include "demsr/ops.hpp"
#include "demsr/tensor.hpp"

namespace demsr::nn {

/// Reverse-mode tape over whole tensors. Build a computation by calling the
/// op members, then call backward() on a scalar node; gradients of parameter
/// leaves accumulate into Parameter::grad, gradients of marked inputs are
/// readable through grad(). Node ids are already in topological order, so the
/// backward sweep is a single reverse pass over the node list.
class Tape {
  public:
    using Id = int;

    Id input(Tensor t, bool needs_grad = false);
    Id param(Parameter& p);

    Id conv2d(Id x, Id w, Id b);
    Id transposed_conv2d(Id x, Id w, Id b);
    Id relu(Id x);
    Id add(Id a, Id b);
    Id concat_channels(Id a, Id b);
    std::pair<Id, Id> split_channels(Id x, int s);
    Id upsample2x_nn(Id x);
    /// Scalar sum of all elements.
    Id sum(Id x);
    /// Scalar mean absolute error against a constant target.
    Id l1_loss(Id pred, Tensor target);

    /// Reverse sweep from a scalar root. Throws ValueError on non-scalar root.
    void backward(Id root);

    const Tensor& value(Id id) const { return nodes_[id].value; }
    /// Gradient of a marked input (or any node) after backward(); zero tensor
    /// if the node does not influence the root.
    const Tensor& grad(Id id);

    std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor value;
        Parameter* param = nullptr;
        std::function<void(Tape&, Id)> backprop;  // pulls grad(id) into inputs
    };

    Id push(Tensor value, std::function<void(Tape&, Id)> backprop);
    Tensor& grad_slot(Id id);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
};

}  // namespace demsr::nn
