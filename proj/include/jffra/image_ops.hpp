#pragma once

#include "jffra/tensor.hpp"

namespace jffra {

// Separable bicubic resize (Catmull-Rom family, a = -0.5) with half-pixel
// centers and edge-clamped taps. Downscaling widens the kernel for
// antialiasing when `antialias` is set.
Tensor bicubic_resize(const Tensor& img, int out_h, int out_w, bool antialias);

// Reflect-pad an H x W x C image on bottom/right to (out_h, out_w).
Tensor pad_reflect(const Tensor& img, int out_h, int out_w);

}  // namespace jffra
