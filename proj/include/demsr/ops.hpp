#pragma once

#include <utility>

#include "demsr/tensor.hpp"

namespace demsr::nn {

// Forward kernels. conv2d is stride-1 with zero padding (k-1)/2 on each side,
// so spatial dims are preserved; transposed_conv2d is the fixed 4x4/stride-2/
// pad-1 geometry that exactly doubles H and W.
//
// Weight layouts: conv2d weight is (Cout, Cin, kh, kw) with bias (Cout,1,1,1);
// transposed_conv2d weight is (Cin, Cout, 4, 4).

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor transposed_conv2d(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b);
std::pair<Tensor, Tensor> split_channels(const Tensor& x, int s);
Tensor upsample2x_nn(const Tensor& x);
double sum(const Tensor& x);
double mean_abs_error(const Tensor& a, const Tensor& b);

// Backward kernels (reverse-mode adjoints of the forwards above). All are
// written as gathers: every output element is owned by exactly one loop
// iteration, so thread count cannot change the accumulation order.

Tensor conv2d_backward_input(const Tensor& dy, const Tensor& w, TensorShape x_shape);
void conv2d_backward_params(const Tensor& dy, const Tensor& x, const Tensor& w, Tensor& dw,
                            Tensor& db);

Tensor transposed_conv2d_backward_input(const Tensor& dy, const Tensor& w, TensorShape x_shape);
void transposed_conv2d_backward_params(const Tensor& dy, const Tensor& x, const Tensor& w,
                                       Tensor& dw, Tensor& db);

Tensor upsample2x_nn_backward(const Tensor& dy);

}  // namespace demsr::nn
