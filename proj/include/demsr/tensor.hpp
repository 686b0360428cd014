#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace demsr::nn {

struct TensorShape {
    int n = 0, c = 0, h = 0, w = 0;

    bool operator==(const TensorShape&) const = default;
    std::size_t count() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    std::string str() const;
};

/// Dense N x C x H x W array of 64-bit reals, row-major with W fastest.
struct Tensor {
    TensorShape shape;
    std::vector<double> v;

    Tensor() = default;
    explicit Tensor(TensorShape s) : shape(s), v(s.count(), 0.0) {}
    Tensor(TensorShape s, std::vector<double> vals);

    static Tensor zeros(TensorShape s) { return Tensor(s); }
    static Tensor full(TensorShape s, double value);

    double& at(int n, int c, int y, int x) {
        return v[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x];
    }
    double at(int n, int c, int y, int x) const {
        return v[((static_cast<std::size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x];
    }
    double* plane(int n, int c) {
        return v.data() + (static_cast<std::size_t>(n) * shape.c + c) * shape.h * shape.w;
    }
    const double* plane(int n, int c) const {
        return v.data() + (static_cast<std::size_t>(n) * shape.c + c) * shape.h * shape.w;
    }
    std::size_t size() const { return v.size(); }
};

/// Deterministic seeded generator; part of the public contract so that every
/// stochastic operation is reproducible from (seed, call sequence).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n).
    int uniform_int(int n);
    /// Standard normal via Box-Muller (pairwise, second draw cached).
    double normal();

    std::uint64_t next_u64() { return eng_(); }

  private:
    // mt19937_64 output is fully specified by the standard; the uniform and
    // normal transforms above it are hand-rolled so results do not depend on
    // implementation-defined library distributions.
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace demsr::nn
