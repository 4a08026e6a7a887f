#pragma once

#include <vector>

#include "jffra/nn_ops.hpp"
#include "jffra/rng.hpp"

namespace jffra {

// Parameters of one joint flow/feature refinement block: a three-layer conv
// flow head over (cost volume ⊕ F_ref ⊕ F_other) and the windowed-attention
// projections over the 3C'-channel concatenation.
struct JffrParams {
    ag::Var fh_w1, fh_b1, fh_w2, fh_b2, fh_w3, fh_b3;
    ag::Var wq, wk, wv, wo;  // 3C' x 3C'
    int channels = 0;        // C'
    int head_count = 3;
    int window_size = 8;
    int cost_radius = 4;
    bool flow_refinement = true;     // disabled = ablation "attention without refined flow"
    bool residual_to_warped = false;  // residuals onto warped instead of original neighbors

    std::vector<ag::Var> params() const;
};

// Final conv layer (and bias) zero-initialized so an untrained head outputs 0.
JffrParams make_jffr_params(int channels, int hidden, int heads, int window, int cost_radius,
                            Rng& rng);

struct LevelState {
    ag::Var f_prev, f_ref, f_next;  // H x W x C'
    ag::Var flow_prev, flow_next;   // H x W x 2
    int level = 0;
};

// Predicts a per-pixel flow offset from the cost volume and the two feature
// maps. cost is H x W x (2r+1)^2.
ag::Var flow_head(const ag::Var& cost, const ag::Var& f_ref, const ag::Var& f_other,
                  const JffrParams& p);

// Element-wise flow update.
ag::Var refine_flow(const ag::Var& flow, const ag::Var& offset);

// Flow-guided windowed attention over [F_t ⊕ F_{t-1} ⊕ F_{t+1}]; returns the
// per-frame residuals split back out of the projected attention output.
struct AttentionResult {
    ag::Var r_ref, r_prev, r_next;
};
AttentionResult attention_refine(const ag::Var& f_prev_upd, const ag::Var& f_ref,
                                 const ag::Var& f_next_upd, const JffrParams& p,
                                 ag::AttentionCapture* capture = nullptr);

LevelState jffr_forward(const LevelState& state, const JffrParams& p,
                        ag::AttentionCapture* capture = nullptr);

}  // namespace jffra
