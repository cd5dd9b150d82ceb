#pragma once

#include <string>

#include "flowgest/image.hpp"

namespace flowgest {

// Reads an 8-bit PNG or baseline JPEG (sniffed from the file magic) as
// grayscale or RGB. Throws Error on missing, truncated or corrupt files.
Image8 read_image(const std::string& path);

// Lossless 8-bit PNG. Compression level 1: planes are written in bulk and
// the zlib search levels buy little on flow data.
void write_png(const Image8& img, const std::string& path);

// Baseline (non-progressive) JPEG; grayscale in stays grayscale out.
void write_jpeg(const Image8& img, const std::string& path, int quality = 90);

}  // namespace flowgest
