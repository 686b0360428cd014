#include "demsr/tensor.hpp"

#include <cmath>
#include <numbers>

#include "demsr/error.hpp"

namespace demsr::nn {

std::string TensorShape::str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
}

Tensor::Tensor(TensorShape s, std::vector<double> vals) : shape(s), v(std::move(vals)) {
    if (v.size() != s.count()) {
        throw ShapeError("tensor value count " + std::to_string(v.size()) +
                         " does not match shape " + s.str());
    }
}

Tensor Tensor::full(TensorShape s, double value) {
    Tensor t(s);
    std::fill(t.v.begin(), t.v.end(), value);
    return t;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int n) {
    if (n <= 0) throw ValueError("uniform_int needs n > 0");
    int i = static_cast<int>(uniform() * n);
    return i < n ? i : n - 1;
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

}  // namespace demsr::nn
