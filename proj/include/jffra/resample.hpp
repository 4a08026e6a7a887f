#pragma once

#include "jffra/core_types.hpp"

namespace jffra {

struct WarpConfig {
    enum class Interp { bilinear };
    enum class Boundary { zero_pad };
    Interp interpolation = Interp::bilinear;
    Boundary boundary = Boundary::zero_pad;
};

// Backward bilinear warp of an H x W x C field by flow (dx, dy), zero padding
// outside the grid.
Tensor warp(const Tensor& field, const FlowField& flow, const WarpConfig& cfg = {});

// Resize the flow grid bilinearly and scale displacement magnitudes by the
// same factor.
FlowField scale_flow(const FlowField& flow, double spatial_factor);

// m = exp(-alpha * ||gt_ref - warp(gt_other, flow)||_2^2), squared L2 over
// channels.
OcclusionMask compute_occlusion_mask(const Tensor& gt_ref, const Tensor& gt_other,
                                     const FlowField& flow, double alpha);

}  // namespace jffra
