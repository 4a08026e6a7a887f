#pragma once

#include "jffra/autograd.hpp"
#include "jffra/core_types.hpp"

namespace jffra {

struct LossWeights {
    double w1 = 0.2;
    double w2 = 0.2;
    double alpha = 0.2;

    void validate() const {
        if (w1 < 0 || w2 < 0 || alpha < 0) throw ConfigError("LossWeights: negative weight");
    }
};

// Occlusion-masked warping loss between the restored reference frame and the
// restored neighbor warped by ground-truth flow. Mask and flow derive from the
// GT pair only and carry no gradient.
ag::Var temporal_consistency_loss(const ag::Var& rest_t, const ag::Var& rest_other,
                                  const Tensor& gt_t, const Tensor& gt_other,
                                  const FlowField& flow_gt, double alpha);

struct TotalLoss {
    ag::Var total;
    double reconstruction = 0.0;
    double temporal_prev = 0.0;
    double temporal_next = 0.0;
};

// reconstruction L1 + w1 * L^T_{t,t-1} + w2 * L^T_{t,t+1}
TotalLoss total_loss(const ag::Var& rest_t, const Tensor& gt_t, const ag::Var& rest_prev,
                     const ag::Var& rest_next, const Tensor& gt_prev, const Tensor& gt_next,
                     const FlowField& flow_prev_gt, const FlowField& flow_next_gt,
                     const LossWeights& weights);

}  // namespace jffra
