#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "brassica/network.hpp"
#include "brassica/tensor.hpp"

namespace brassica {

struct TrainConfig {
    double learning_rate = 0.001;
    int64_t batch_size = 64;
    int64_t epochs = 200;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;
    bool shuffle_each_epoch = true;
    // Optional plateau stop (off by default; the reference schedule runs the
    // full epoch budget): stop when the best validation loss has not improved
    // by more than 1e-4 for 10 consecutive epochs.
    bool plateau_stop = false;

    void validate() const {
        if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1)) {
            throw ConfigError("adam betas must lie in (0,1)");
        }
        if (!(adam_eps > 0)) throw ConfigError("adam_eps must be > 0");
    }
};

// One-hot encoding of class labels as a (n, k, 1, 1) tensor.
template <typename T>
TensorT<T> one_hot(const std::vector<int>& labels, int64_t k) {
    TensorT<T> t(Shape4(int64_t(labels.size()), k, 1, 1));
    for (size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 0 || int64_t(c) >= k) {
            throw ArgumentError("one_hot: label " + std::to_string(c) + " out of range [0," +
                                std::to_string(k) + ")");
        }
        t[int64_t(i) * k + c] = T(1);
    }
    return t;
}

// Mean categorical cross-entropy: -(1/N) sum_n log p_n[true], probabilities
// clamped to >= 1e-12 before the log. Accumulated in double, batch order.
template <typename T>
double cross_entropy(const TensorT<T>& probabilities, const TensorT<T>& targets) {
    if (!probabilities.same_shape(targets)) {
        throw ShapeError("cross_entropy: shape mismatch " +
                         probabilities.shape().to_string() + " vs " +
                         targets.shape().to_string());
    }
    const Shape4& s = probabilities.shape();
    if (s.h != 1 || s.w != 1) throw ShapeError("cross_entropy: expected (n,k,1,1)");
    double acc = 0.0;
    for (int64_t n = 0; n < s.n; ++n) {
        double row = 0.0;
        int64_t ones = 0;
        for (int64_t c = 0; c < s.c; ++c) {
            const double t = double(targets[n * s.c + c]);
            if (t != 0.0 && t != 1.0) throw ArgumentError("cross_entropy: targets not one-hot");
            if (t == 1.0) {
                ++ones;
                row = std::log(std::max(double(probabilities[n * s.c + c]), 1e-12));
            }
        }
        if (ones != 1) throw ArgumentError("cross_entropy: targets not one-hot");
        acc -= row;
    }
    const double loss = acc / double(s.n);
    if (!std::isfinite(loss)) throw NumericError("cross_entropy: non-finite loss");
    return loss;
}

// Per-parameter Adam moments; shapes mirror the parameters they track.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    int64_t t = 0;

    static AdamState init(const std::vector<NetParamRef<float>>& params) {
        AdamState s;
        s.m.reserve(params.size());
        s.v.reserve(params.size());
        for (const auto& p : params) {
            s.m.emplace_back(p.value->shape());
            s.v.emplace_back(p.value->shape());
        }
        return s;
    }
};

// One Adam update over every parameter:
//   m <- b1 m + (1-b1) g ;  v <- b2 v + (1-b2) g^2
//   mhat = m / (1 - b1^t) ; vhat = v / (1 - b2^t)
//   theta <- theta - lr * mhat / (sqrt(vhat) + eps)
// Element math runs in double and is stored back to float.
inline void adam_step(std::vector<NetParamRef<float>>& params, AdamState& state,
                      const TrainConfig& cfg) {
    if (params.size() != state.m.size()) {
        throw ArgumentError("adam_step: state does not match parameter list");
    }
    state.t += 1;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double bc1 = 1.0 - std::pow(b1, double(state.t));
    const double bc2 = 1.0 - std::pow(b2, double(state.t));
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& theta = *params[pi].value;
        const Tensor& g = *params[pi].grad;
        if (!theta.same_shape(g)) {
            throw ShapeError("adam_step: gradient shape mismatch for " + params[pi].name);
        }
        if (!all_finite(g)) {
            throw NumericError("adam_step: non-finite gradient for " + params[pi].name);
        }
        Tensor& m = state.m[pi];
        Tensor& v = state.v[pi];
        for (int64_t i = 0; i < theta.size(); ++i) {
            const double gi = double(g[i]);
            const double mi = b1 * double(m[i]) + (1.0 - b1) * gi;
            const double vi = b2 * double(v[i]) + (1.0 - b2) * gi * gi;
            m[i] = float(mi);
            v[i] = float(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            theta[i] = float(double(theta[i]) - cfg.learning_rate * mhat /
                                                   (std::sqrt(vhat) + cfg.adam_eps));
        }
    }
}

}  // namespace brassica
