#include "flowgest/net/init.hpp"

#include <cstdint>
#include <fstream>

namespace flowgest::net {

template <typename T>
Tensor4<T> cross_modality_init(const Tensor4<T>& rgb_kernel, int target_channels) {
    if (rgb_kernel.c != 3)
        fail("cross_modality_init: source kernel must have 3 input channels, got " +
             std::to_string(rgb_kernel.c));
    if (target_channels < 1) fail("cross_modality_init: bad target channel count");
    Tensor4<T> out(rgb_kernel.n, target_channels, rgb_kernel.h, rgb_kernel.w);
    const T third = T(1) / T(3);
    for (int o = 0; o < rgb_kernel.n; ++o) {
        for (int y = 0; y < rgb_kernel.h; ++y) {
            for (int x = 0; x < rgb_kernel.w; ++x) {
                const T mean = (rgb_kernel.at(o, 0, y, x) + rgb_kernel.at(o, 1, y, x) +
                                rgb_kernel.at(o, 2, y, x)) *
                               third;
                for (int c = 0; c < target_channels; ++c) out.at(o, c, y, x) = mean;
            }
        }
    }
    return out;
}

template Tensor4<float> cross_modality_init<float>(const Tensor4<float>&, int);
template Tensor4<double> cross_modality_init<double>(const Tensor4<double>&, int);

void write_tensor(const TensorF& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write tensor file '" + path + "'");
    const uint32_t dims[4] = {static_cast<uint32_t>(t.n), static_cast<uint32_t>(t.c),
                              static_cast<uint32_t>(t.h), static_cast<uint32_t>(t.w)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(t.data.data()), t.size() * sizeof(float));
    if (!out.flush()) fail("tensor write failed for '" + path + "'");
}

TensorF read_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open tensor file '" + path + "'");
    uint32_t dims[4];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) fail("'" + path + "' is not a tensor file");
    for (uint32_t d : dims)
        if (d == 0 || d > (1u << 24)) fail("'" + path + "': implausible tensor dims");
    TensorF t(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
              static_cast<int>(dims[3]));
    in.read(reinterpret_cast<char*>(t.data.data()), t.size() * sizeof(float));
    if (!in) fail("'" + path + "' is truncated");
    return t;
}

}  // namespace flowgest::net
