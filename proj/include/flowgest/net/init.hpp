#pragma once

#include <string>

#include "flowgest/net/tensor.hpp"

namespace flowgest::net {

// Average a pretrained RGB kernel [out, 3, k, k] over its channels and
// replicate the mean across all target channels, giving [out, target, k, k].
template <typename T>
Tensor4<T> cross_modality_init(const Tensor4<T>& rgb_kernel, int target_channels);

// Flat tensor file: 4 x little-endian u32 dims, then f32 values, row-major.
void write_tensor(const TensorF& t, const std::string& path);
TensorF read_tensor(const std::string& path);

}  // namespace flowgest::net
