#pragma once

#include <string>

#include "jffra/tensor.hpp"

namespace jffra {

// 8-bit PNG <-> [0,1] tensors. Gray maps to C=1, RGB/RGBA (alpha dropped) to
// C=3.
Tensor read_png(const std::string& path);
void write_png(const std::string& path, const Tensor& img);

}  // namespace jffra
