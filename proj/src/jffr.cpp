#include "jffra/jffr.hpp"

#include <cmath>

namespace jffra {

std::vector<ag::Var> JffrParams::params() const {
    return {fh_w1, fh_b1, fh_w2, fh_b2, fh_w3, fh_b3, wq, wk, wv, wo};
}

JffrParams make_jffr_params(int channels, int hidden, int heads, int window, int cost_radius,
                            Rng& rng) {
    const int d = 3 * channels;
    if (d % heads != 0) throw ParamError("make_jffr_params: 3C' not divisible by head count");
    const int dd = (2 * cost_radius + 1) * (2 * cost_radius + 1);
    const int in1 = dd + 2 * channels;
    JffrParams p;
    p.channels = channels;
    p.head_count = heads;
    p.window_size = window;
    p.cost_radius = cost_radius;
    p.fh_w1 = ag::param(rng.randn({hidden, 3, 3, in1}, std::sqrt(2.0 / (9.0 * in1))));
    p.fh_b1 = ag::param(Tensor({hidden}));
    p.fh_w2 = ag::param(rng.randn({hidden, 3, 3, hidden}, std::sqrt(2.0 / (9.0 * hidden))));
    p.fh_b2 = ag::param(Tensor({hidden}));
    p.fh_w3 = ag::param(Tensor({2, 3, 3, hidden}));  // zero init: untrained head emits 0
    p.fh_b3 = ag::param(Tensor({2}));
    const double ps = std::sqrt(1.0 / d);
    p.wq = ag::param(rng.randn({d, d}, ps));
    p.wk = ag::param(rng.randn({d, d}, ps));
    p.wv = ag::param(rng.randn({d, d}, ps));
    p.wo = ag::param(rng.randn({d, d}, ps));
    return p;
}

ag::Var flow_head(const ag::Var& cost, const ag::Var& f_ref, const ag::Var& f_other,
                  const JffrParams& p) {
    ag::Var x = ag::concat_channels({cost, f_ref, f_other});
    x = ag::leaky_relu(ag::conv2d(x, p.fh_w1, p.fh_b1));
    x = ag::leaky_relu(ag::conv2d(x, p.fh_w2, p.fh_b2));
    return ag::conv2d(x, p.fh_w3, p.fh_b3);
}

ag::Var refine_flow(const ag::Var& flow, const ag::Var& offset) {
    require_same_shape(flow->val, offset->val, "refine_flow");
    return ag::add(flow, offset);
}

AttentionResult attention_refine(const ag::Var& f_prev_upd, const ag::Var& f_ref,
                                 const ag::Var& f_next_upd, const JffrParams& p,
                                 ag::AttentionCapture* capture) {
    const int c = f_ref->val.dim(2);
    ag::Var x = ag::concat_channels({f_ref, f_prev_upd, f_next_upd});
    ag::Var y = ag::window_attention(x, p.wq, p.wk, p.wv, p.wo, p.head_count, p.window_size, capture);
    auto parts = ag::split_channels(y, {c, c, c});
    return AttentionResult{parts[0], parts[1], parts[2]};
}

LevelState jffr_forward(const LevelState& state, const JffrParams& p,
                        ag::AttentionCapture* capture) {
    ag::Var flow_prev = state.flow_prev;
    ag::Var flow_next = state.flow_next;
    if (p.flow_refinement) {
        ag::Var proj_prev = ag::warp_bilinear(state.f_prev, flow_prev);
        ag::Var cost_prev = ag::cost_volume_channels(state.f_ref, proj_prev, p.cost_radius);
        flow_prev = refine_flow(flow_prev, flow_head(cost_prev, state.f_ref, state.f_prev, p));

        ag::Var proj_next = ag::warp_bilinear(state.f_next, flow_next);
        ag::Var cost_next = ag::cost_volume_channels(state.f_ref, proj_next, p.cost_radius);
        flow_next = refine_flow(flow_next, flow_head(cost_next, state.f_ref, state.f_next, p));
    }

    ag::Var f_prev_upd = ag::warp_bilinear(state.f_prev, flow_prev);
    ag::Var f_next_upd = ag::warp_bilinear(state.f_next, flow_next);
    AttentionResult res = attention_refine(f_prev_upd, state.f_ref, f_next_upd, p, capture);

    LevelState out;
    out.level = state.level;
    out.f_ref = ag::add(state.f_ref, res.r_ref);
    if (p.residual_to_warped) {
        out.f_prev = ag::add(f_prev_upd, res.r_prev);
        out.f_next = ag::add(f_next_upd, res.r_next);
    } else {
        out.f_prev = ag::add(state.f_prev, res.r_prev);
        out.f_next = ag::add(state.f_next, res.r_next);
    }
    out.flow_prev = flow_prev;
    out.flow_next = flow_next;
    return out;
}

}  // namespace jffra
