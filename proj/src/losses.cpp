#include "jffra/losses.hpp"

#include "jffra/nn_ops.hpp"
#include "jffra/resample.hpp"

namespace jffra {

ag::Var temporal_consistency_loss(const ag::Var& rest_t, const ag::Var& rest_other,
                                  const Tensor& gt_t, const Tensor& gt_other,
                                  const FlowField& flow_gt, double alpha) {
    require_same_shape(rest_t->val, rest_other->val, "temporal_consistency_loss");
    require_same_shape(rest_t->val, gt_t, "temporal_consistency_loss");
    ag::Var warped = ag::warp_bilinear(rest_other, ag::constant(flow_gt.values));
    OcclusionMask mask = compute_occlusion_mask(gt_t, gt_other, flow_gt, alpha);
    return ag::masked_l1_mean(rest_t, warped, ag::constant(std::move(mask.values)));
}

TotalLoss total_loss(const ag::Var& rest_t, const Tensor& gt_t, const ag::Var& rest_prev,
                     const ag::Var& rest_next, const Tensor& gt_prev, const Tensor& gt_next,
                     const FlowField& flow_prev_gt, const FlowField& flow_next_gt,
                     const LossWeights& weights) {
    weights.validate();
    ag::Var recon = ag::l1_mean(rest_t, ag::constant(gt_t));
    ag::Var lt_prev =
        temporal_consistency_loss(rest_t, rest_prev, gt_t, gt_prev, flow_prev_gt, weights.alpha);
    ag::Var lt_next =
        temporal_consistency_loss(rest_t, rest_next, gt_t, gt_next, flow_next_gt, weights.alpha);
    TotalLoss out;
    out.reconstruction = recon->val[0];
    out.temporal_prev = lt_prev->val[0];
    out.temporal_next = lt_next->val[0];
    out.total = ag::add(recon, ag::add(ag::scale(lt_prev, weights.w1), ag::scale(lt_next, weights.w2)));
    return out;
}

}  // namespace jffra
