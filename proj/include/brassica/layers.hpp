#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "brassica/gemm.hpp"
#include "brassica/tensor.hpp"

namespace brassica {

// Output extent of a convolution/pooling axis: floor((in + 2*pad - k)/stride) + 1.
inline int64_t conv_out_extent(int64_t in, int64_t k, int64_t stride, int64_t pad) {
    return (in + 2 * pad - k) / stride + 1;
}

template <typename T>
struct ConvParamsT {
    int64_t in_channels = 1;
    int64_t out_channels = 1;
    int64_t kh = 3, kw = 3;
    int64_t sh = 1, sw = 1;
    int64_t ph = 0, pw = 0;
    TensorT<T> weights;  // (out_channels, in_channels, kh, kw)
    TensorT<T> bias;     // (1, out_channels, 1, 1)

    static ConvParamsT make(int64_t in_c, int64_t out_c, int64_t kh, int64_t kw, int64_t sh,
                            int64_t sw, int64_t ph, int64_t pw) {
        if (in_c < 1 || out_c < 1 || kh < 1 || kw < 1 || sh < 1 || sw < 1 || ph < 0 || pw < 0) {
            throw ArgumentError("ConvParams: invalid dimensions");
        }
        ConvParamsT p;
        p.in_channels = in_c;
        p.out_channels = out_c;
        p.kh = kh;
        p.kw = kw;
        p.sh = sh;
        p.sw = sw;
        p.ph = ph;
        p.pw = pw;
        p.weights = TensorT<T>(Shape4(out_c, in_c, kh, kw));
        p.bias = TensorT<T>(Shape4(1, out_c, 1, 1));
        return p;
    }

    Shape4 output_shape(const Shape4& in) const {
        if (in.c != in_channels) {
            throw ShapeError("conv2d: input has " + std::to_string(in.c) +
                             " channels, params expect " + std::to_string(in_channels));
        }
        const int64_t oh = conv_out_extent(in.h, kh, sh, ph);
        const int64_t ow = conv_out_extent(in.w, kw, sw, pw);
        if (oh < 1 || ow < 1) {
            throw ShapeError("conv2d: degenerate output extent for input " + in.to_string());
        }
        return Shape4(in.n, out_channels, oh, ow);
    }
};

struct PoolParams {
    int64_t kh = 2, kw = 2;
    int64_t sh = 2, sw = 2;

    Shape4 output_shape(const Shape4& in) const {
        if (kh > in.h || kw > in.w) {
            throw ShapeError("maxpool: window (" + std::to_string(kh) + "x" + std::to_string(kw) +
                             ") larger than input " + in.to_string());
        }
        return Shape4(in.n, in.c, conv_out_extent(in.h, kh, sh, 0),
                      conv_out_extent(in.w, kw, sw, 0));
    }
};

template <typename T>
struct DenseParamsT {
    int64_t in_features = 1;
    int64_t out_features = 1;
    TensorT<T> weights;  // (1, 1, out_features, in_features)
    TensorT<T> bias;     // (1, out_features, 1, 1)

    static DenseParamsT make(int64_t in_f, int64_t out_f) {
        if (in_f < 1 || out_f < 1) throw ArgumentError("DenseParams: invalid dimensions");
        DenseParamsT p;
        p.in_features = in_f;
        p.out_features = out_f;
        p.weights = TensorT<T>(Shape4(1, 1, out_f, in_f));
        p.bias = TensorT<T>(Shape4(1, out_f, 1, 1));
        return p;
    }
};

struct DropoutParams {
    double rate = 0.5;
    bool train = true;
};

template <typename T>
struct ConvGradT {
    TensorT<T> input_grad;
    TensorT<T> weight_grad;
    TensorT<T> bias_grad;
};

template <typename T>
struct DenseGradT {
    TensorT<T> input_grad;
    TensorT<T> weight_grad;
    TensorT<T> bias_grad;
};

using ConvParams = ConvParamsT<float>;
using DenseParams = DenseParamsT<float>;
using ConvGrad = ConvGradT<float>;
using DenseGrad = DenseGradT<float>;

// ---------------------------------------------------------------------------
// Convolution. Two implementations: a nested-loop reference that stays as the
// oracle, and an im2col fast path that must match it within 1e-5 elementwise.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> conv2d_forward_naive(const TensorT<T>& x, const ConvParamsT<T>& p) {
    const Shape4 os = p.output_shape(x.shape());
    const Shape4& is = x.shape();
    TensorT<T> y(os);
    for (int64_t n = 0; n < os.n; ++n) {
        for (int64_t o = 0; o < os.c; ++o) {
            for (int64_t i = 0; i < os.h; ++i) {
                for (int64_t j = 0; j < os.w; ++j) {
                    T acc = p.bias[o];
                    for (int64_t c = 0; c < p.in_channels; ++c) {
                        for (int64_t u = 0; u < p.kh; ++u) {
                            const int64_t ih = i * p.sh + u - p.ph;
                            if (ih < 0 || ih >= is.h) continue;
                            for (int64_t v = 0; v < p.kw; ++v) {
                                const int64_t iw = j * p.sw + v - p.pw;
                                if (iw < 0 || iw >= is.w) continue;
                                acc += p.weights.at(o, c, u, v) * x.at(n, c, ih, iw);
                            }
                        }
                    }
                    y.at(n, o, i, j) = acc;
                }
            }
        }
    }
    require_finite(y, "conv2d_forward");
    return y;
}

namespace detail {

// Patch matrix P (C*kh*kw rows, oh*ow columns) for one image; zero padding.
template <typename T>
void im2col(const TensorT<T>& x, int64_t n, const ConvParamsT<T>& p, int64_t oh, int64_t ow,
            T* P) {
    const Shape4& is = x.shape();
    const int64_t cols = oh * ow;
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < p.in_channels; ++c) {
        const T* plane = x.data() + (n * is.c + c) * is.plane();
        for (int64_t u = 0; u < p.kh; ++u) {
            for (int64_t v = 0; v < p.kw; ++v) {
                T* row = P + ((c * p.kh + u) * p.kw + v) * cols;
                for (int64_t i = 0; i < oh; ++i) {
                    const int64_t ih = i * p.sh + u - p.ph;
                    if (ih < 0 || ih >= is.h) {
                        for (int64_t j = 0; j < ow; ++j) row[i * ow + j] = T(0);
                        continue;
                    }
                    const T* src = plane + ih * is.w;
                    for (int64_t j = 0; j < ow; ++j) {
                        const int64_t iw = j * p.sw + v - p.pw;
                        row[i * ow + j] = (iw < 0 || iw >= is.w) ? T(0) : src[iw];
                    }
                }
            }
        }
    }
}

// Transposed patch matrix (oh*ow rows, C*kh*kw columns) for the backward pass.
template <typename T>
void im2col_t(const TensorT<T>& x, int64_t n, const ConvParamsT<T>& p, int64_t oh, int64_t ow,
              T* PT) {
    const Shape4& is = x.shape();
    const int64_t ckk = p.in_channels * p.kh * p.kw;
#pragma omp parallel for schedule(static)
    for (int64_t s = 0; s < oh * ow; ++s) {
        const int64_t i = s / ow;
        const int64_t j = s % ow;
        T* row = PT + s * ckk;
        for (int64_t c = 0; c < p.in_channels; ++c) {
            const T* plane = x.data() + (n * is.c + c) * is.plane();
            for (int64_t u = 0; u < p.kh; ++u) {
                const int64_t ih = i * p.sh + u - p.ph;
                for (int64_t v = 0; v < p.kw; ++v) {
                    const int64_t iw = j * p.sw + v - p.pw;
                    const bool in = ih >= 0 && ih < is.h && iw >= 0 && iw < is.w;
                    row[(c * p.kh + u) * p.kw + v] = in ? plane[ih * is.w + iw] : T(0);
                }
            }
        }
    }
}

// Accumulates patch gradients (oh*ow rows, C*kh*kw columns) back into the
// input gradient. Parallel over channels: each channel's scatter touches a
// disjoint plane, and within a channel positions are visited in fixed order.
template <typename T>
void col2im_t(const T* dPT, const ConvParamsT<T>& p, int64_t oh, int64_t ow, TensorT<T>& dx,
              int64_t n) {
    const Shape4& is = dx.shape();
    const int64_t ckk = p.in_channels * p.kh * p.kw;
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < p.in_channels; ++c) {
        T* plane = dx.data() + (n * is.c + c) * is.plane();
        for (int64_t s = 0; s < oh * ow; ++s) {
            const int64_t i = s / ow;
            const int64_t j = s % ow;
            const T* row = dPT + s * ckk + c * p.kh * p.kw;
            for (int64_t u = 0; u < p.kh; ++u) {
                const int64_t ih = i * p.sh + u - p.ph;
                if (ih < 0 || ih >= is.h) continue;
                for (int64_t v = 0; v < p.kw; ++v) {
                    const int64_t iw = j * p.sw + v - p.pw;
                    if (iw < 0 || iw >= is.w) continue;
                    plane[ih * is.w + iw] += row[u * p.kw + v];
                }
            }
        }
    }
}

}  // namespace detail

// Fast path: per-image im2col followed by a weights-by-patches matmul.
template <typename T>
TensorT<T> conv2d_forward(const TensorT<T>& x, const ConvParamsT<T>& p) {
    const Shape4 os = p.output_shape(x.shape());
    const int64_t ckk = p.in_channels * p.kh * p.kw;
    const int64_t cols = os.h * os.w;
    TensorT<T> y(os);
    auto& P = detail::scratch<T>(0, size_t(ckk * cols));
    for (int64_t n = 0; n < os.n; ++n) {
        detail::im2col(x, n, p, os.h, os.w, P.data());
        T* y_n = y.data() + n * os.c * cols;
        for (int64_t o = 0; o < os.c; ++o) {
            std::fill(y_n + o * cols, y_n + (o + 1) * cols, p.bias[o]);
        }
        detail::gemm_nn(os.c, cols, ckk, p.weights.data(), P.data(), y_n, /*accumulate=*/true);
    }
    require_finite(y, "conv2d_forward");
    return y;
}

template <typename T>
ConvGradT<T> conv2d_backward_naive(const TensorT<T>& x, const ConvParamsT<T>& p,
                                   const TensorT<T>& upstream) {
    const Shape4 os = p.output_shape(x.shape());
    if (upstream.shape() != os) {
        throw ShapeError("conv2d_backward: upstream shape " + upstream.shape().to_string() +
                         " does not match output " + os.to_string());
    }
    const Shape4& is = x.shape();
    ConvGradT<T> g{TensorT<T>(is), TensorT<T>(p.weights.shape()), TensorT<T>(p.bias.shape())};
    for (int64_t n = 0; n < os.n; ++n) {
        for (int64_t o = 0; o < os.c; ++o) {
            for (int64_t i = 0; i < os.h; ++i) {
                for (int64_t j = 0; j < os.w; ++j) {
                    const T up = upstream.at(n, o, i, j);
                    g.bias_grad[o] += up;
                    for (int64_t c = 0; c < p.in_channels; ++c) {
                        for (int64_t u = 0; u < p.kh; ++u) {
                            const int64_t ih = i * p.sh + u - p.ph;
                            if (ih < 0 || ih >= is.h) continue;
                            for (int64_t v = 0; v < p.kw; ++v) {
                                const int64_t iw = j * p.sw + v - p.pw;
                                if (iw < 0 || iw >= is.w) continue;
                                g.weight_grad.at(o, c, u, v) += up * x.at(n, c, ih, iw);
                                g.input_grad.at(n, c, ih, iw) += up * p.weights.at(o, c, u, v);
                            }
                        }
                    }
                }
            }
        }
    }
    return g;
}

template <typename T>
ConvGradT<T> conv2d_backward(const TensorT<T>& x, const ConvParamsT<T>& p,
                             const TensorT<T>& upstream) {
    const Shape4 os = p.output_shape(x.shape());
    if (upstream.shape() != os) {
        throw ShapeError("conv2d_backward: upstream shape " + upstream.shape().to_string() +
                         " does not match output " + os.to_string());
    }
    const int64_t ckk = p.in_channels * p.kh * p.kw;
    const int64_t cols = os.h * os.w;
    ConvGradT<T> g{TensorT<T>(x.shape()), TensorT<T>(p.weights.shape()),
                   TensorT<T>(p.bias.shape())};
    auto& PT = detail::scratch<T>(1, size_t(cols * ckk));
    auto& dYT = detail::scratch<T>(2, size_t(cols * os.c));
    auto& dPT = detail::scratch<T>(3, size_t(cols * ckk));
    for (int64_t n = 0; n < os.n; ++n) {
        const T* up_n = upstream.data() + n * os.c * cols;
        detail::im2col_t(x, n, p, os.h, os.w, PT.data());
        // dW += upstream_n * P_n^T; images accumulate in batch order.
        detail::gemm_nn(os.c, ckk, cols, up_n, PT.data(), g.weight_grad.data(),
                        /*accumulate=*/true);
        for (int64_t o = 0; o < os.c; ++o) {
            T acc = 0;
            for (int64_t s = 0; s < cols; ++s) acc += up_n[o * cols + s];
            g.bias_grad[o] += acc;
        }
        detail::transpose(os.c, cols, up_n, dYT.data());
        detail::gemm_nn(cols, ckk, os.c, dYT.data(), p.weights.data(), dPT.data());
        detail::col2im_t(dPT.data(), p, os.h, os.w, g.input_grad, n);
    }
    require_finite(g.input_grad, "conv2d_backward input_grad");
    require_finite(g.weight_grad, "conv2d_backward weight_grad");
    require_finite(g.bias_grad, "conv2d_backward bias_grad");
    return g;
}

// ---------------------------------------------------------------------------
// Max pooling with an argmax record for exact backward routing.
// ---------------------------------------------------------------------------

struct PoolArgmax {
    Shape4 input_shape;
    Shape4 output_shape;
    // Winning flat index (h*W + w) inside the (n, c) plane per output element.
    std::vector<int32_t> winner;
};

template <typename T>
std::pair<TensorT<T>, PoolArgmax> maxpool_forward(const TensorT<T>& x, const PoolParams& p) {
    const Shape4 os = p.output_shape(x.shape());
    const Shape4& is = x.shape();
    TensorT<T> y(os);
    PoolArgmax rec{is, os, std::vector<int32_t>(size_t(os.elements()))};
#pragma omp parallel for schedule(static)
    for (int64_t nc = 0; nc < os.n * os.c; ++nc) {
        const T* plane = x.data() + nc * is.plane();
        T* out = y.data() + nc * os.plane();
        int32_t* win = rec.winner.data() + nc * os.plane();
        for (int64_t i = 0; i < os.h; ++i) {
            for (int64_t j = 0; j < os.w; ++j) {
                int64_t best_idx = (i * p.sh) * is.w + (j * p.sw);
                T best = plane[best_idx];
                for (int64_t u = 0; u < p.kh; ++u) {
                    for (int64_t v = 0; v < p.kw; ++v) {
                        const int64_t idx = (i * p.sh + u) * is.w + (j * p.sw + v);
                        if (plane[idx] > best) {  // ties keep the lowest flat index
                            best = plane[idx];
                            best_idx = idx;
                        }
                    }
                }
                out[i * os.w + j] = best;
                win[i * os.w + j] = int32_t(best_idx);
            }
        }
    }
    return {std::move(y), std::move(rec)};
}

template <typename T>
TensorT<T> maxpool_backward(const PoolArgmax& rec, const TensorT<T>& upstream) {
    if (upstream.shape() != rec.output_shape) {
        throw ShapeError("maxpool_backward: upstream shape " + upstream.shape().to_string() +
                         " does not match recorded output " + rec.output_shape.to_string());
    }
    TensorT<T> dx(rec.input_shape);
    const int64_t out_plane = rec.output_shape.plane();
    const int64_t in_plane = rec.input_shape.plane();
#pragma omp parallel for schedule(static)
    for (int64_t nc = 0; nc < rec.output_shape.n * rec.output_shape.c; ++nc) {
        T* dst = dx.data() + nc * in_plane;
        const T* up = upstream.data() + nc * out_plane;
        const int32_t* win = rec.winner.data() + nc * out_plane;
        for (int64_t s = 0; s < out_plane; ++s) dst[win[s]] += up[s];
    }
    return dx;
}

// ---------------------------------------------------------------------------
// ReLU, dropout, dense, softmax.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
    TensorT<T> y(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    return y;
}

// Subgradient at 0 is 0.
template <typename T>
TensorT<T> relu_backward(const TensorT<T>& x, const TensorT<T>& upstream) {
    if (!x.same_shape(upstream)) throw ShapeError("relu_backward: shape mismatch");
    TensorT<T> dx(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T(0) ? upstream[i] : T(0);
    return dx;
}

// Inverted dropout: the mask holds 0 or 1/(1-rate), so eval is the identity
// and backward is a plain elementwise product with the mask.
template <typename T>
std::pair<TensorT<T>, TensorT<T>> dropout(const TensorT<T>& x, const DropoutParams& p, Rng& rng) {
    if (p.rate < 0.0 || p.rate >= 1.0) {
        throw ArgumentError("dropout: rate must lie in [0,1), got " + std::to_string(p.rate));
    }
    if (!p.train || p.rate == 0.0) {
        return {x, TensorT<T>(x.shape(), T(1))};
    }
    const T scale = T(1.0 / (1.0 - p.rate));
    TensorT<T> mask(x.shape());
    for (int64_t i = 0; i < x.size(); ++i) {
        mask[i] = rng.next_double() < p.rate ? T(0) : scale;
    }
    TensorT<T> y(x.shape());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < x.size(); ++i) y[i] = x[i] * mask[i];
    return {std::move(y), std::move(mask)};
}

template <typename T>
TensorT<T> dropout_apply(const TensorT<T>& x, const TensorT<T>& mask) {
    return map_binary(x, mask, BinaryOp::mul);
}

template <typename T>
TensorT<T> dropout_backward(const TensorT<T>& mask, const TensorT<T>& upstream) {
    return map_binary(upstream, mask, BinaryOp::mul);
}

template <typename T>
TensorT<T> dense_forward(const TensorT<T>& x, const DenseParamsT<T>& p) {
    const Shape4& is = x.shape();
    if (is.c != p.in_features || is.h != 1 || is.w != 1) {
        throw ShapeError("dense_forward: expected (n," + std::to_string(p.in_features) +
                         ",1,1), got " + is.to_string());
    }
    TensorT<T> y(Shape4(is.n, p.out_features, 1, 1));
    detail::gemm_nt(is.n, p.out_features, p.in_features, x.data(), p.weights.data(), y.data());
#pragma omp parallel for schedule(static)
    for (int64_t n = 0; n < is.n; ++n) {
        for (int64_t o = 0; o < p.out_features; ++o) y[n * p.out_features + o] += p.bias[o];
    }
    require_finite(y, "dense_forward");
    return y;
}

template <typename T>
DenseGradT<T> dense_backward(const TensorT<T>& x, const DenseParamsT<T>& p,
                             const TensorT<T>& upstream) {
    const Shape4& is = x.shape();
    const Shape4& us = upstream.shape();
    if (is.c != p.in_features || is.h != 1 || is.w != 1) {
        throw ShapeError("dense_backward: input shape mismatch " + is.to_string());
    }
    if (us.n != is.n || us.c != p.out_features || us.h != 1 || us.w != 1) {
        throw ShapeError("dense_backward: upstream shape mismatch " + us.to_string());
    }
    DenseGradT<T> g{TensorT<T>(is), TensorT<T>(p.weights.shape()), TensorT<T>(p.bias.shape())};
    // dx = upstream * W
    detail::gemm_nn(is.n, p.in_features, p.out_features, upstream.data(), p.weights.data(),
                    g.input_grad.data());
    // dW[o][i] = sum_b upstream[b][o] * x[b][i], batch-summed in fixed order.
#pragma omp parallel for schedule(static)
    for (int64_t o = 0; o < p.out_features; ++o) {
        T* w_row = g.weight_grad.data() + o * p.in_features;
        for (int64_t b = 0; b < is.n; ++b) {
            const T up = upstream[b * p.out_features + o];
            const T* x_row = x.data() + b * p.in_features;
            for (int64_t i = 0; i < p.in_features; ++i) w_row[i] += up * x_row[i];
        }
    }
    for (int64_t b = 0; b < is.n; ++b) {
        for (int64_t o = 0; o < p.out_features; ++o) {
            g.bias_grad[o] += upstream[b * p.out_features + o];
        }
    }
    return g;
}

// Row-wise softmax over channels with mandatory max subtraction.
template <typename T>
TensorT<T> softmax(const TensorT<T>& logits) {
    const Shape4& s = logits.shape();
    if (s.h != 1 || s.w != 1) {
        throw ShapeError("softmax: expected (n,k,1,1), got " + s.to_string());
    }
    require_finite(logits, "softmax logits");
    TensorT<T> y(s);
#pragma omp parallel for schedule(static)
    for (int64_t n = 0; n < s.n; ++n) {
        const T* row = logits.data() + n * s.c;
        T* out = y.data() + n * s.c;
        T mx = row[0];
        for (int64_t c = 1; c < s.c; ++c) mx = std::max(mx, row[c]);
        double denom = 0.0;
        for (int64_t c = 0; c < s.c; ++c) {
            const double e = std::exp(double(row[c] - mx));
            out[c] = T(e);
            denom += e;
        }
        for (int64_t c = 0; c < s.c; ++c) out[c] = T(double(out[c]) / denom);
    }
    return y;
}

}  // namespace brassica
