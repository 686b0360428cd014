#include "demsr/ops.hpp"

#include <algorithm>
#include <cmath>

#include "demsr/error.hpp"
#include "demsr/parallel.hpp"

namespace demsr::nn {

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (w.shape.c != x.shape.c) {
        throw ShapeError("conv2d: input has " + std::to_string(x.shape.c) +
                         " channels, weight expects " + std::to_string(w.shape.c));
    }
    if (w.shape.h % 2 == 0 || w.shape.w % 2 == 0) {
        throw ShapeError("conv2d: kernel dims must be odd, got " + w.shape.str());
    }
    if (static_cast<int>(b.size()) != w.shape.n) {
        throw ShapeError("conv2d: bias size " + std::to_string(b.size()) +
                         " != output channels " + std::to_string(w.shape.n));
    }
}

// One-pass 3x3 stencil: dst[y][x] += sum_k w9[k] * src[y+dy(k)-1][x+dx(k)-1],
// missing rows replaced by zeros, missing columns dropped. Row pointers keep
// the inner loop branch-free.
void stencil3x3_accum(double* dst, const double* src, int H, int W, const double* w9,
                      const double* zrow) {
    for (int y = 0; y < H; ++y) {
        const double* r0 = y > 0 ? src + static_cast<std::size_t>(y - 1) * W : zrow;
        const double* r1 = src + static_cast<std::size_t>(y) * W;
        const double* r2 = y + 1 < H ? src + static_cast<std::size_t>(y + 1) * W : zrow;
        double* d = dst + static_cast<std::size_t>(y) * W;
        if (W == 1) {
            d[0] += w9[1] * r0[0] + w9[4] * r1[0] + w9[7] * r2[0];
            continue;
        }
        d[0] += w9[1] * r0[0] + w9[2] * r0[1] + w9[4] * r1[0] + w9[5] * r1[1] + w9[7] * r2[0] +
                w9[8] * r2[1];
        for (int x = 1; x < W - 1; ++x) {
            d[x] += w9[0] * r0[x - 1] + w9[1] * r0[x] + w9[2] * r0[x + 1] + w9[3] * r1[x - 1] +
                    w9[4] * r1[x] + w9[5] * r1[x + 1] + w9[6] * r2[x - 1] + w9[7] * r2[x] +
                    w9[8] * r2[x + 1];
        }
        const int x = W - 1;
        d[x] += w9[0] * r0[x - 1] + w9[1] * r0[x] + w9[3] * r1[x - 1] + w9[4] * r1[x] +
                w9[6] * r2[x - 1] + w9[7] * r2[x];
    }
}

// All nine weight-gradient dots in one pass: acc[k] += sum_{y,x} g[y][x] *
// src[y+dy(k)-1][x+dx(k)-1].
void stencil3x3_weight_accum(double* acc9, const double* g, const double* src, int H, int W,
                             const double* zrow) {
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0, a8 = 0;
    for (int y = 0; y < H; ++y) {
        const double* r0 = y > 0 ? src + static_cast<std::size_t>(y - 1) * W : zrow;
        const double* r1 = src + static_cast<std::size_t>(y) * W;
        const double* r2 = y + 1 < H ? src + static_cast<std::size_t>(y + 1) * W : zrow;
        const double* gr = g + static_cast<std::size_t>(y) * W;
        if (W == 1) {
            a1 += gr[0] * r0[0];
            a4 += gr[0] * r1[0];
            a7 += gr[0] * r2[0];
            continue;
        }
        {
            const double gv = gr[0];
            a1 += gv * r0[0];
            a2 += gv * r0[1];
            a4 += gv * r1[0];
            a5 += gv * r1[1];
            a7 += gv * r2[0];
            a8 += gv * r2[1];
        }
        for (int x = 1; x < W - 1; ++x) {
            const double gv = gr[x];
            a0 += gv * r0[x - 1];
            a1 += gv * r0[x];
            a2 += gv * r0[x + 1];
            a3 += gv * r1[x - 1];
            a4 += gv * r1[x];
            a5 += gv * r1[x + 1];
            a6 += gv * r2[x - 1];
            a7 += gv * r2[x];
            a8 += gv * r2[x + 1];
        }
        {
            const int x = W - 1;
            const double gv = gr[x];
            a0 += gv * r0[x - 1];
            a1 += gv * r0[x];
            a3 += gv * r1[x - 1];
            a4 += gv * r1[x];
            a6 += gv * r2[x - 1];
            a7 += gv * r2[x];
        }
    }
    acc9[0] += a0;
    acc9[1] += a1;
    acc9[2] += a2;
    acc9[3] += a3;
    acc9[4] += a4;
    acc9[5] += a5;
    acc9[6] += a6;
    acc9[7] += a7;
    acc9[8] += a8;
}

void check_tconv_shapes(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (w.shape.n != x.shape.c) {
        throw ShapeError("transposed_conv2d: input has " + std::to_string(x.shape.c) +
                         " channels, weight expects " + std::to_string(w.shape.n));
    }
    if (w.shape.h != 4 || w.shape.w != 4) {
        throw ShapeError("transposed_conv2d: kernel must be 4x4, got " + w.shape.str());
    }
    if (static_cast<int>(b.size()) != w.shape.c) {
        throw ShapeError("transposed_conv2d: bias size mismatch");
    }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
    check_conv_shapes(x, w, b);
    const int N = x.shape.n, Ci = x.shape.c, H = x.shape.h, W = x.shape.w;
    const int Co = w.shape.n, kh = w.shape.h, kw = w.shape.w;
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    Tensor y({N, Co, H, W});

    parallel_for(static_cast<std::size_t>(N) * Co, [&](std::size_t idx) {
        const int n = static_cast<int>(idx) / Co;
        const int o = static_cast<int>(idx) % Co;
        double* yp = y.plane(n, o);
        std::fill(yp, yp + static_cast<std::size_t>(H) * W, b.v[o]);
        std::vector<double> zrow(kh == 3 && kw == 3 ? W : 0, 0.0);
        for (int c = 0; c < Ci; ++c) {
            const double* xp = x.plane(n, c);
            const double* wk = w.plane(o, c);
            if (kh == 3 && kw == 3) {
                stencil3x3_accum(yp, xp, H, W, wk, zrow.data());
                continue;
            }
            for (int dy = 0; dy < kh; ++dy) {
                const int sy = dy - ph;
                const int y0 = std::max(0, -sy), y1 = std::min(H, H - sy);
                for (int dx = 0; dx < kw; ++dx) {
                    const int sx = dx - pw;
                    const int x0 = std::max(0, -sx), x1 = std::min(W, W - sx);
                    const double wv = wk[dy * kw + dx];
                    if (wv == 0.0) continue;
                    for (int yy = y0; yy < y1; ++yy) {
                        double* yr = yp + static_cast<std::size_t>(yy) * W;
                        const double* xr = xp + static_cast<std::size_t>(yy + sy) * W + sx;
                        for (int xx = x0; xx < x1; ++xx) yr[xx] += wv * xr[xx];
                    }
                }
            }
        }
    });
    return y;
}

Tensor conv2d_backward_input(const Tensor& dy, const Tensor& w, TensorShape x_shape) {
    const int N = x_shape.n, Ci = x_shape.c, H = x_shape.h, W = x_shape.w;
    const int Co = w.shape.n, kh = w.shape.h, kw = w.shape.w;
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    Tensor dx(x_shape);

    parallel_for(static_cast<std::size_t>(N) * Ci, [&](std::size_t idx) {
        const int n = static_cast<int>(idx) / Ci;
        const int c = static_cast<int>(idx) % Ci;
        double* dxp = dx.plane(n, c);
        std::vector<double> zrow(kh == 3 && kw == 3 ? W : 0, 0.0);
        double wf[9];
        for (int o = 0; o < Co; ++o) {
            const double* gp = dy.plane(n, o);
            const double* wk = w.plane(o, c);
            if (kh == 3 && kw == 3) {
                // Correlation against the upstream grad = stencil with the
                // 180-degree flipped kernel.
                for (int i = 0; i < 9; ++i) wf[i] = wk[8 - i];
                stencil3x3_accum(dxp, gp, H, W, wf, zrow.data());
                continue;
            }
            for (int dyk = 0; dyk < kh; ++dyk) {
                const int sy = ph - dyk;
                const int y0 = std::max(0, -sy), y1 = std::min(H, H - sy);
                for (int dxk = 0; dxk < kw; ++dxk) {
                    const int sx = pw - dxk;
                    const int x0 = std::max(0, -sx), x1 = std::min(W, W - sx);
                    const double wv = wk[dyk * kw + dxk];
                    if (wv == 0.0) continue;
                    for (int yy = y0; yy < y1; ++yy) {
                        double* dr = dxp + static_cast<std::size_t>(yy) * W;
                        const double* gr = gp + static_cast<std::size_t>(yy + sy) * W + sx;
                        for (int xx = x0; xx < x1; ++xx) dr[xx] += wv * gr[xx];
                    }
                }
            }
        }
    });
    return dx;
}

void conv2d_backward_params(const Tensor& dy, const Tensor& x, const Tensor& w, Tensor& dw,
                            Tensor& db) {
    const int N = x.shape.n, Ci = x.shape.c, H = x.shape.h, W = x.shape.w;
    const int Co = w.shape.n, kh = w.shape.h, kw = w.shape.w;
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;

    parallel_for(static_cast<std::size_t>(Co), [&](std::size_t o_idx) {
        const int o = static_cast<int>(o_idx);
        double bacc = 0.0;
        for (int n = 0; n < N; ++n) {
            const double* gp = dy.plane(n, o);
            for (std::size_t i = 0; i < static_cast<std::size_t>(H) * W; ++i) bacc += gp[i];
        }
        db.v[o] += bacc;
        std::vector<double> zrow(kh == 3 && kw == 3 ? W : 0, 0.0);
        for (int c = 0; c < Ci; ++c) {
            double* dwk = dw.plane(o, c);
            if (kh == 3 && kw == 3) {
                for (int n = 0; n < N; ++n) {
                    stencil3x3_weight_accum(dwk, dy.plane(n, o), x.plane(n, c), H, W,
                                            zrow.data());
                }
                continue;
            }
            for (int dyk = 0; dyk < kh; ++dyk) {
                const int sy = dyk - ph;
                const int y0 = std::max(0, -sy), y1 = std::min(H, H - sy);
                for (int dxk = 0; dxk < kw; ++dxk) {
                    const int sx = dxk - pw;
                    const int x0 = std::max(0, -sx), x1 = std::min(W, W - sx);
                    double acc = 0.0;
                    for (int n = 0; n < N; ++n) {
                        const double* gp = dy.plane(n, o);
                        const double* xp = x.plane(n, c);
                        for (int yy = y0; yy < y1; ++yy) {
                            const double* gr = gp + static_cast<std::size_t>(yy) * W;
                            const double* xr = xp + static_cast<std::size_t>(yy + sy) * W + sx;
                            for (int xx = x0; xx < x1; ++xx) acc += gr[xx] * xr[xx];
                        }
                    }
                    dwk[dyk * kw + dxk] += acc;
                }
            }
        }
    });
}

Tensor transposed_conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
    check_tconv_shapes(x, w, b);
    const int N = x.shape.n, Ci = x.shape.c, H = x.shape.h, W = x.shape.w;
    const int Co = w.shape.c;
    const int Ho = 2 * H, Wo = 2 * W;
    Tensor y({N, Co, Ho, Wo});

    parallel_for(static_cast<std::size_t>(N) * Co, [&](std::size_t idx) {
        const int n = static_cast<int>(idx) / Co;
        const int o = static_cast<int>(idx) % Co;
        double* yp = y.plane(n, o);
        std::fill(yp, yp + static_cast<std::size_t>(Ho) * Wo, b.v[o]);
        for (int c = 0; c < Ci; ++c) {
            const double* xp = x.plane(n, c);
            const double* wk = w.plane(c, o);
            for (int Y = 0; Y < Ho; ++Y) {
                double* yr = yp + static_cast<std::size_t>(Y) * Wo;
                for (int ky = (Y + 1) & 1; ky < 4; ky += 2) {
                    const int num_y = Y + 1 - ky;
                    if (num_y < 0) break;
                    const int iy = num_y / 2;
                    if (iy >= H) continue;
                    const double* xr = xp + static_cast<std::size_t>(iy) * W;
                    for (int X = 0; X < Wo; ++X) {
                        double acc = 0.0;
                        for (int kx = (X + 1) & 1; kx < 4; kx += 2) {
                            const int num_x = X + 1 - kx;
                            if (num_x < 0) break;
                            const int ix = num_x / 2;
                            if (ix >= W) continue;
                            acc += wk[ky * 4 + kx] * xr[ix];
                        }
                        yr[X] += acc;
                    }
                }
            }
        }
    });
    return y;
}

Tensor transposed_conv2d_backward_input(const Tensor& dy, const Tensor& w, TensorShape x_shape) {
    const int N = x_shape.n, Ci = x_shape.c, H = x_shape.h, W = x_shape.w;
    const int Co = w.shape.c;
    const int Ho = dy.shape.h, Wo = dy.shape.w;
    Tensor dx(x_shape);

    parallel_for(static_cast<std::size_t>(N) * Ci, [&](std::size_t idx) {
        const int n = static_cast<int>(idx) / Ci;
        const int c = static_cast<int>(idx) % Ci;
        double* dxp = dx.plane(n, c);
        for (int o = 0; o < Co; ++o) {
            const double* gp = dy.plane(n, o);
            const double* wk = w.plane(c, o);
            for (int iy = 0; iy < H; ++iy) {
                double* dr = dxp + static_cast<std::size_t>(iy) * W;
                for (int ky = 0; ky < 4; ++ky) {
                    const int Y = 2 * iy + ky - 1;
                    if (Y < 0 || Y >= Ho) continue;
                    const double* gr = gp + static_cast<std::size_t>(Y) * Wo;
                    for (int ix = 0; ix < W; ++ix) {
                        double acc = 0.0;
                        for (int kx = 0; kx < 4; ++kx) {
                            const int X = 2 * ix + kx - 1;
                            if (X < 0 || X >= Wo) continue;
                            acc += wk[ky * 4 + kx] * gr[X];
                        }
                        dr[ix] += acc;
                    }
                }
            }
        }
    });
    return dx;
}

void transposed_conv2d_backward_params(const Tensor& dy, const Tensor& x, const Tensor& w,
                                       Tensor& dw, Tensor& db) {
    const int N = x.shape.n, Ci = x.shape.c, H = x.shape.h, W = x.shape.w;
    const int Co = w.shape.c;
    const int Ho = dy.shape.h, Wo = dy.shape.w;

    for (int o = 0; o < Co; ++o) {
        double bacc = 0.0;
        for (int n = 0; n < N; ++n) {
            const double* gp = dy.plane(n, o);
            for (std::size_t i = 0; i < static_cast<std::size_t>(Ho) * Wo; ++i) bacc += gp[i];
        }
        db.v[o] += bacc;
    }

    parallel_for(static_cast<std::size_t>(Ci), [&](std::size_t c_idx) {
        const int c = static_cast<int>(c_idx);
        for (int o = 0; o < Co; ++o) {
            double* dwk = dw.plane(c, o);
            for (int ky = 0; ky < 4; ++ky) {
                for (int kx = 0; kx < 4; ++kx) {
                    double acc = 0.0;
                    for (int n = 0; n < N; ++n) {
                        const double* xp = x.plane(n, c);
                        const double* gp = dy.plane(n, o);
                        for (int iy = 0; iy < H; ++iy) {
                            const int Y = 2 * iy + ky - 1;
                            if (Y < 0 || Y >= Ho) continue;
                            const double* xr = xp + static_cast<std::size_t>(iy) * W;
                            const double* gr = gp + static_cast<std::size_t>(Y) * Wo;
                            for (int ix = 0; ix < W; ++ix) {
                                const int X = 2 * ix + kx - 1;
                                if (X < 0 || X >= Wo) continue;
                                acc += xr[ix] * gr[X];
                            }
                        }
                    }
                    dwk[ky * 4 + kx] += acc;
                }
            }
        }
    });
}

Tensor relu(const Tensor& x) {
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = x.v[i] > 0.0 ? x.v[i] : 0.0;
    return y;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!(a.shape == b.shape)) {
        throw ShapeError("add: shape mismatch " + a.shape.str() + " vs " + b.shape.str());
    }
    Tensor y(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) y.v[i] = a.v[i] + b.v[i];
    return y;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.shape.n != b.shape.n || a.shape.h != b.shape.h || a.shape.w != b.shape.w) {
        throw ShapeError("concat_channels: spatial/batch mismatch " + a.shape.str() + " vs " +
                         b.shape.str());
    }
    Tensor y({a.shape.n, a.shape.c + b.shape.c, a.shape.h, a.shape.w});
    const std::size_t plane = static_cast<std::size_t>(a.shape.h) * a.shape.w;
    for (int n = 0; n < a.shape.n; ++n) {
        for (int c = 0; c < a.shape.c; ++c) {
            std::copy_n(a.plane(n, c), plane, y.plane(n, c));
        }
        for (int c = 0; c < b.shape.c; ++c) {
            std::copy_n(b.plane(n, c), plane, y.plane(n, a.shape.c + c));
        }
    }
    return y;
}

std::pair<Tensor, Tensor> split_channels(const Tensor& x, int s) {
    if (s < 1 || x.shape.c % s != 0) {
        throw ShapeError("split_channels: divisor " + std::to_string(s) +
                         " does not divide channel count " + std::to_string(x.shape.c));
    }
    const int keep_c = x.shape.c / s;
    const int pass_c = x.shape.c - keep_c;
    Tensor keep({x.shape.n, keep_c, x.shape.h, x.shape.w});
    Tensor pass({x.shape.n, pass_c, x.shape.h, x.shape.w});
    const std::size_t plane = static_cast<std::size_t>(x.shape.h) * x.shape.w;
    for (int n = 0; n < x.shape.n; ++n) {
        for (int c = 0; c < keep_c; ++c) std::copy_n(x.plane(n, c), plane, keep.plane(n, c));
        for (int c = 0; c < pass_c; ++c) {
            std::copy_n(x.plane(n, keep_c + c), plane, pass.plane(n, c));
        }
    }
    return {std::move(keep), std::move(pass)};
}

Tensor upsample2x_nn(const Tensor& x) {
    Tensor y({x.shape.n, x.shape.c, 2 * x.shape.h, 2 * x.shape.w});
    const int H = x.shape.h, W = x.shape.w;
    for (int n = 0; n < x.shape.n; ++n) {
        for (int c = 0; c < x.shape.c; ++c) {
            const double* xp = x.plane(n, c);
            double* yp = y.plane(n, c);
            for (int r = 0; r < 2 * H; ++r) {
                const double* xr = xp + static_cast<std::size_t>(r / 2) * W;
                double* yr = yp + static_cast<std::size_t>(r) * 2 * W;
                for (int col = 0; col < 2 * W; ++col) yr[col] = xr[col / 2];
            }
        }
    }
    return y;
}

Tensor upsample2x_nn_backward(const Tensor& dy) {
    const int H = dy.shape.h / 2, W = dy.shape.w / 2;
    Tensor dx({dy.shape.n, dy.shape.c, H, W});
    for (int n = 0; n < dy.shape.n; ++n) {
        for (int c = 0; c < dy.shape.c; ++c) {
            const double* gp = dy.plane(n, c);
            double* dp = dx.plane(n, c);
            for (int r = 0; r < H; ++r) {
                const double* g0 = gp + static_cast<std::size_t>(2 * r) * 2 * W;
                const double* g1 = gp + static_cast<std::size_t>(2 * r + 1) * 2 * W;
                double* dr = dp + static_cast<std::size_t>(r) * W;
                for (int col = 0; col < W; ++col) {
                    dr[col] = g0[2 * col] + g0[2 * col + 1] + g1[2 * col] + g1[2 * col + 1];
                }
            }
        }
    }
    return dx;
}

double sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.v) acc += v;
    return acc;
}

double mean_abs_error(const Tensor& a, const Tensor& b) {
    if (!(a.shape == b.shape)) {
        throw ShapeError("mean_abs_error: shape mismatch " + a.shape.str() + " vs " +
                         b.shape.str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a.v[i] - b.v[i]);
    return acc / static_cast<double>(a.size());
}

}  // namespace demsr::nn
