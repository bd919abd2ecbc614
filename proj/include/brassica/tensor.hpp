#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "brassica/errors.hpp"

namespace brassica {

// Dense 4-D shape in (batch, channel, height, width) order. All extents are
// strictly positive and the element count is overflow-checked at construction.
struct Shape4 {
    int64_t n = 1;
    int64_t c = 1;
    int64_t h = 1;
    int64_t w = 1;

    Shape4() = default;

    Shape4(int64_t n_, int64_t c_, int64_t h_, int64_t w_) : n(n_), c(c_), h(h_), w(w_) {
        if (n < 1 || c < 1 || h < 1 || w < 1) {
            throw ShapeError("Shape4: all extents must be >= 1, got " + to_string());
        }
        uint64_t count = 1;
        for (uint64_t d : {uint64_t(n), uint64_t(c), uint64_t(h), uint64_t(w)}) {
            if (__builtin_mul_overflow(count, d, &count) || count > kMaxElements) {
                throw ShapeError("Shape4: element count overflows, " + to_string());
            }
        }
    }

    int64_t elements() const { return n * c * h * w; }
    int64_t plane() const { return h * w; }

    bool operator==(const Shape4&) const = default;

    std::string to_string() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
               "," + std::to_string(w) + ")";
    }

    // Leaves headroom below SIZE_MAX/sizeof(double) on 64-bit platforms.
    static constexpr uint64_t kMaxElements = uint64_t(1) << 48;
};

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t rotl64(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

// Deterministic PRNG: a splitmix64 mixer expands the seed into the state of a
// xoshiro256** generator. Identical seeds produce identical streams on every
// platform; this is the only randomness source in the engine.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t sm = seed;
        for (auto& s : state_) s = detail::splitmix64(sm);
    }

    uint64_t next_u64() {
        const uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53-bit resolution.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0,1) as float, from the double draw so float/double paths
    // consume the stream identically.
    float next_float() { return float(next_double()); }

    // Uniform in [lo, hi); rounding can never push a sample onto hi.
    template <typename T>
    T uniform(T lo, T hi) {
        if (!(lo < hi)) throw ArgumentError("Rng::uniform: requires lo < hi");
        T v = T(double(lo) + next_double() * (double(hi) - double(lo)));
        if (v >= hi) v = std::nextafter(hi, lo);
        return v;
    }

    // Uniform integer in [0, bound). bound must be > 0.
    uint64_t next_below(uint64_t bound) { return next_u64() % bound; }

    // Derives an independent stream, e.g. one per class or per epoch.
    Rng fork(uint64_t salt) {
        uint64_t s = next_u64() ^ (salt * 0x9e3779b97f4a7c15ull);
        return Rng(s);
    }

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    uint64_t state_[4];
};

// Dense row-major (n, c, h, w) tensor. Instantiated with float for training
// and double for gradient checking.
template <typename T>
class TensorT {
  public:
    TensorT() : shape_{}, data_(1, T(0)) {}

    explicit TensorT(const Shape4& shape, T fill = T(0))
        : shape_(shape), data_(size_t(shape.elements()), fill) {}

    TensorT(const Shape4& shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        if (int64_t(data_.size()) != shape_.elements()) {
            throw ShapeError("Tensor: data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_.to_string());
        }
    }

    const Shape4& shape() const { return shape_; }
    int64_t size() const { return int64_t(data_.size()); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    T& operator[](int64_t i) { return data_[size_t(i)]; }
    const T& operator[](int64_t i) const { return data_[size_t(i)]; }

    T& at(int64_t n, int64_t c, int64_t h, int64_t w) { return data_[size_t(index(n, c, h, w))]; }
    const T& at(int64_t n, int64_t c, int64_t h, int64_t w) const {
        return data_[size_t(index(n, c, h, w))];
    }

    int64_t index(int64_t n, int64_t c, int64_t h, int64_t w) const {
        return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }

    bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

    // Converts between precisions (float training path <-> double check path).
    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out(shape_);
        for (int64_t i = 0; i < size(); ++i) out[i] = U(data_[size_t(i)]);
        return out;
    }

  private:
    Shape4 shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

enum class BinaryOp { add, sub, mul };

template <typename T>
TensorT<T> zeros(const Shape4& shape) {
    return TensorT<T>(shape, T(0));
}

inline Tensor zeros(const Shape4& shape) { return Tensor(shape, 0.0f); }

// i.i.d. samples in [lo, hi), filled in flat-index order from the stream.
template <typename T>
TensorT<T> uniform(const Shape4& shape, T lo, T hi, Rng& rng) {
    if (!(lo < hi)) throw ArgumentError("uniform: requires lo < hi");
    TensorT<T> out(shape);
    for (int64_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(lo, hi);
    return out;
}

template <typename T>
TensorT<T> map_binary(const TensorT<T>& a, const TensorT<T>& b, BinaryOp op) {
    if (!a.same_shape(b)) {
        throw ShapeError("map_binary: shape mismatch " + a.shape().to_string() + " vs " +
                         b.shape().to_string());
    }
    TensorT<T> out(a.shape());
    const int64_t n = a.size();
    switch (op) {
        case BinaryOp::add:
            for (int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
            break;
        case BinaryOp::sub:
            for (int64_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
            break;
        case BinaryOp::mul:
            for (int64_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
            break;
    }
    return out;
}

// Sum of all elements, accumulated in double in flat-index ascending order.
// The order is part of the contract: results feed reported numbers and must
// be run-to-run identical.
template <typename T>
double reduce_sum(const TensorT<T>& a) {
    double acc = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) acc += double(a[i]);
    if (!std::isfinite(acc)) throw NumericError("reduce_sum: non-finite result");
    return acc;
}

// Per-batch argmax over channels for (n, k, 1, 1) tensors. Ties resolve to
// the lowest index.
template <typename T>
std::vector<int> argmax_channel(const TensorT<T>& a) {
    const Shape4& s = a.shape();
    if (s.h != 1 || s.w != 1) {
        throw ShapeError("argmax_channel: expected h == w == 1, got " + s.to_string());
    }
    std::vector<int> out(size_t(s.n));
    for (int64_t n = 0; n < s.n; ++n) {
        int best = 0;
        T best_v = a.at(n, 0, 0, 0);
        for (int64_t c = 1; c < s.c; ++c) {
            T v = a.at(n, c, 0, 0);
            if (v > best_v) {
                best_v = v;
                best = int(c);
            }
        }
        out[size_t(n)] = best;
    }
    return out;
}

template <typename T>
bool all_finite(const TensorT<T>& a) {
    for (int64_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i])) return false;
    }
    return true;
}

template <typename T>
void require_finite(const TensorT<T>& a, const char* what) {
    if (!all_finite(a)) throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace brassica
