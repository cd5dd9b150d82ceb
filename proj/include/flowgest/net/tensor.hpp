#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowgest/error.hpp"

namespace flowgest::net {

// Dense NCHW tensor. Vectors (biases, BN parameters) use shape [1, C, 1, 1].
template <typename T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<size_t>(n_) * c_ * h_ * w_, fill) {
        if (n_ <= 0 || c_ <= 0 || h_ <= 0 || w_ <= 0) fail("Tensor4: dims must be positive");
    }

    size_t size() const { return data.size(); }
    size_t sample_size() const { return static_cast<size_t>(c) * h * w; }

    T& at(int i, int j, int y, int x) {
        return data[((static_cast<size_t>(i) * c + j) * h + y) * w + x];
    }
    T at(int i, int j, int y, int x) const {
        return data[((static_cast<size_t>(i) * c + j) * h + y) * w + x];
    }
    T* sample(int i) { return data.data() + static_cast<size_t>(i) * sample_size(); }
    const T* sample(int i) const { return data.data() + static_cast<size_t>(i) * sample_size(); }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }
    std::string shape_str() const {
        return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
               "," + std::to_string(w) + "]";
    }
    void zero() { std::fill(data.begin(), data.end(), T(0)); }

    template <typename U>
    Tensor4<U> cast() const {
        Tensor4<U> out(n, c, h, w);
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using TensorF = Tensor4<float>;
using TensorD = Tensor4<double>;

}  // namespace flowgest::net
