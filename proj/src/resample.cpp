#include "jffra/resample.hpp"

#include <cmath>

#include "jffra/nn_ops.hpp"

namespace jffra {

Tensor warp(const Tensor& field, const FlowField& flow, const WarpConfig&) {
    ag::NoGradGuard ng;
    return ag::warp_bilinear(ag::constant(field), ag::constant(flow.values))->val;
}

FlowField scale_flow(const FlowField& flow, double spatial_factor) {
    if (spatial_factor <= 0.0) throw ParamError("scale_flow: factor must be positive");
    const int out_h = static_cast<int>(std::lround(flow.h() * spatial_factor));
    const int out_w = static_cast<int>(std::lround(flow.w() * spatial_factor));
    if (out_h < 1 || out_w < 1) throw ParamError("scale_flow: resulting dimension < 1");
    ag::NoGradGuard ng;
    Tensor resized = ag::resize_bilinear(ag::constant(flow.values), out_h, out_w)->val;
    for (int64_t i = 0; i < resized.numel(); ++i) resized[i] *= spatial_factor;
    return FlowField{std::move(resized), flow.from_time, flow.to_time};
}

OcclusionMask compute_occlusion_mask(const Tensor& gt_ref, const Tensor& gt_other,
                                     const FlowField& flow, double alpha) {
    if (alpha <= 0.0) throw ParamError("occlusion_mask: alpha must be positive");
    require_same_shape(gt_ref, gt_other, "occlusion_mask");
    Tensor warped = warp(gt_other, flow);
    const int H = gt_ref.dim(0), W = gt_ref.dim(1), C = gt_ref.dim(2);
    Tensor m({H, W});
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            double sq = 0.0;
            for (int c = 0; c < C; ++c) {
                const double d = gt_ref.at(h, w, c) - warped.at(h, w, c);
                sq += d * d;
            }
            m[static_cast<int64_t>(h) * W + w] = std::exp(-alpha * sq);
        }
    return OcclusionMask{std::move(m)};
}

}  // namespace jffra
