#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "brassica/tensor.hpp"

namespace brassica {

// One coordinate block of a gradient check: a tensor the objective depends
// on, plus the analytic gradient the backward pass produced for it.
struct GradCheckCoord {
    TensorD* tensor = nullptr;
    const TensorD* analytic = nullptr;
    std::string name;
};

struct GradCheckOptions {
    double step = 1e-5;
    // Tensors larger than this get a seeded random subset of coordinates.
    int64_t max_coords_per_tensor = 200;
};

// Central finite differences of objective() against the analytic gradients,
// at 64-bit precision. objective() must re-evaluate the forward pass with the
// current contents of every coordinate tensor; typically it is
// sum(upstream * forward(...)) or a scalar loss. Returns the worst relative
// error over all checked coordinates.
inline double gradient_check(const std::function<double()>& objective,
                             std::vector<GradCheckCoord> coords, Rng& rng,
                             const GradCheckOptions& opts = {}) {
    if (!(opts.step > 0)) throw ArgumentError("gradient_check: step must be > 0");
    double worst = 0.0;
    for (auto& coord : coords) {
        TensorD& t = *coord.tensor;
        const TensorD& analytic = *coord.analytic;
        if (!t.same_shape(analytic)) {
            throw ShapeError("gradient_check: analytic gradient shape mismatch for " + coord.name);
        }
        std::vector<int64_t> idx(size_t(t.size()));
        std::iota(idx.begin(), idx.end(), 0);
        if (t.size() > opts.max_coords_per_tensor) {
            rng.shuffle(idx);
            idx.resize(size_t(opts.max_coords_per_tensor));
        }
        for (int64_t i : idx) {
            const double saved = t[i];
            const double h = opts.step * std::max(1.0, std::abs(saved));
            t[i] = saved + h;
            const double plus = objective();
            t[i] = saved - h;
            const double minus = objective();
            t[i] = saved;
            const double fd = (plus - minus) / (2.0 * h);
            const double a = analytic[i];
            if (!std::isfinite(fd) || !std::isfinite(a)) {
                throw NumericError("gradient_check: non-finite gradient for " + coord.name);
            }
            const double denom = std::max({std::abs(a), std::abs(fd), 1e-3});
            worst = std::max(worst, std::abs(a - fd) / denom);
        }
    }
    return worst;
}

// Convenience objective for layer checks: sum(upstream (*) forward()).
inline std::function<double()> weighted_output_objective(std::function<TensorD()> forward,
                                                         TensorD upstream) {
    return [forward = std::move(forward), upstream = std::move(upstream)]() {
        TensorD y = forward();
        return reduce_sum(map_binary(y, upstream, BinaryOp::mul));
    };
}

}  // namespace brassica
