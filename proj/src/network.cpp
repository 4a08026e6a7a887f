#include "jffra/network.hpp"

#include <cmath>
#include <cstring>

#include "jffra/image_ops.hpp"

namespace jffra {

std::string task_name(Task t) {
    switch (t) {
        case Task::denoise: return "denoise";
        case Task::sr_x4: return "sr_x4";
        case Task::deblur: return "deblur";
    }
    return "denoise";
}

Task task_from_name(const std::string& s) {
    if (s == "denoise") return Task::denoise;
    if (s == "sr_x4") return Task::sr_x4;
    if (s == "deblur") return Task::deblur;
    throw ConfigError("unknown task: " + s);
}

void NetworkConfig::validate() const {
    if (levels < 1) throw ConfigError("NetworkConfig: levels must be >= 1");
    if (base_channels < 1) throw ConfigError("NetworkConfig: base_channels must be >= 1");
    if (t_in < 1 || t_in % 2 == 0) throw ConfigError("NetworkConfig: t_in must be odd");
    if (in_channels != 1 && in_channels != 3) throw ConfigError("NetworkConfig: in_channels must be 1 or 3");
    if (window_size < 1) throw ConfigError("NetworkConfig: window_size must be >= 1");
    if ((3 * base_channels) % head_count != 0)
        throw ConfigError("NetworkConfig: 3*base_channels must be divisible by head_count");
}

ModelParams make_model_params(const NetworkConfig& cfg, Rng& rng) {
    cfg.validate();
    ModelParams p;
    p.cfg = cfg;
    const int C = cfg.in_channels;
    const int C0 = cfg.base_channels;
    p.ctx_w1 = ag::param(rng.randn({C0, 3, 3, 3, C}, std::sqrt(2.0 / (27.0 * C))));
    p.ctx_b1 = ag::param(Tensor({C0}));
    p.ctx_w2 = ag::param(rng.randn({C0, 3, 3, 3, C0}, std::sqrt(2.0 / (27.0 * C0))));
    p.ctx_b2 = ag::param(Tensor({C0}));

    for (int i = 0; i < cfg.levels; ++i) {
        const int ci = C0 << i;
        JffrParams jp = make_jffr_params(ci, cfg.flow_head_hidden, cfg.head_count, cfg.window_size,
                                         cfg.cost_radius, rng);
        jp.flow_refinement = cfg.flow_refinement;
        jp.residual_to_warped = cfg.residual_to_warped;
        p.enc.push_back(std::move(jp));
    }
    for (int i = 0; i < cfg.levels - 1; ++i) {
        const int ci = C0 << i;
        JffrParams jp = make_jffr_params(ci, cfg.flow_head_hidden, cfg.head_count, cfg.window_size,
                                         cfg.cost_radius, rng);
        jp.flow_refinement = cfg.flow_refinement;
        jp.residual_to_warped = cfg.residual_to_warped;
        p.dec.push_back(std::move(jp));

        const int cn = C0 << (i + 1);
        p.down_w.push_back(ag::param(rng.randn({cn, 3, 3, ci}, std::sqrt(2.0 / (9.0 * ci)))));
        p.down_b.push_back(ag::param(Tensor({cn})));
        p.up_w.push_back(ag::param(rng.randn({4 * ci, 3, 3, cn}, std::sqrt(2.0 / (9.0 * cn)))));
        p.up_b.push_back(ag::param(Tensor({4 * ci})));
    }

    if (cfg.task == Task::sr_x4) {
        p.head_w.push_back(ag::param(rng.randn({4 * C0, 3, 3, C0}, std::sqrt(2.0 / (9.0 * C0)))));
        p.head_b.push_back(ag::param(Tensor({4 * C0})));
        p.head_w.push_back(ag::param(rng.randn({4 * C0, 3, 3, C0}, std::sqrt(2.0 / (9.0 * C0)))));
        p.head_b.push_back(ag::param(Tensor({4 * C0})));
        p.head_w.push_back(ag::param(Tensor({C, 3, 3, C0})));  // zero init
        p.head_b.push_back(ag::param(Tensor({C})));
    } else {
        p.head_w.push_back(ag::param(rng.randn({C0, 3, 3, C0}, std::sqrt(2.0 / (9.0 * C0)))));
        p.head_b.push_back(ag::param(Tensor({C0})));
        p.head_w.push_back(ag::param(Tensor({C, 3, 3, C0})));  // zero init
        p.head_b.push_back(ag::param(Tensor({C})));
    }
    return p;
}

std::vector<std::pair<std::string, ag::Var>> ModelParams::named() const {
    std::vector<std::pair<std::string, ag::Var>> out;
    out.emplace_back("ctx.w1", ctx_w1);
    out.emplace_back("ctx.b1", ctx_b1);
    out.emplace_back("ctx.w2", ctx_w2);
    out.emplace_back("ctx.b2", ctx_b2);
    auto add_jffr = [&out](const std::string& prefix, const JffrParams& jp) {
        out.emplace_back(prefix + ".fh.w1", jp.fh_w1);
        out.emplace_back(prefix + ".fh.b1", jp.fh_b1);
        out.emplace_back(prefix + ".fh.w2", jp.fh_w2);
        out.emplace_back(prefix + ".fh.b2", jp.fh_b2);
        out.emplace_back(prefix + ".fh.w3", jp.fh_w3);
        out.emplace_back(prefix + ".fh.b3", jp.fh_b3);
        out.emplace_back(prefix + ".attn.wq", jp.wq);
        out.emplace_back(prefix + ".attn.wk", jp.wk);
        out.emplace_back(prefix + ".attn.wv", jp.wv);
        out.emplace_back(prefix + ".attn.wo", jp.wo);
    };
    for (size_t i = 0; i < enc.size(); ++i) add_jffr("enc" + std::to_string(i), enc[i]);
    for (size_t i = 0; i < dec.size(); ++i) add_jffr("dec" + std::to_string(i), dec[i]);
    for (size_t i = 0; i < down_w.size(); ++i) {
        out.emplace_back("down" + std::to_string(i) + ".w", down_w[i]);
        out.emplace_back("down" + std::to_string(i) + ".b", down_b[i]);
        out.emplace_back("up" + std::to_string(i) + ".w", up_w[i]);
        out.emplace_back("up" + std::to_string(i) + ".b", up_b[i]);
    }
    for (size_t i = 0; i < head_w.size(); ++i) {
        out.emplace_back("head" + std::to_string(i) + ".w", head_w[i]);
        out.emplace_back("head" + std::to_string(i) + ".b", head_b[i]);
    }
    return out;
}

std::vector<ag::Var> ModelParams::all() const {
    std::vector<ag::Var> out;
    for (auto& [name, v] : named()) out.push_back(v);
    return out;
}

namespace {

// Slices frame t out of a T x H x W x C activation.
ag::Var slice_time(const ag::Var& x, int t) {
    const int T = x->val.dim(0), H = x->val.dim(1), W = x->val.dim(2), C = x->val.dim(3);
    if (t < 0 || t >= T) throw ParamError("slice_time: index out of range");
    Tensor out({H, W, C});
    const int64_t n = out.numel();
    std::memcpy(out.data(), x->val.data() + static_cast<int64_t>(t) * n,
                static_cast<size_t>(n) * sizeof(double));
    return ag::make(std::move(out), {x}, [t](ag::Node& self) {
        Tensor& g = self.inputs[0]->g();
        const int64_t n = self.val.numel();
        double* dst = g.data() + static_cast<int64_t>(t) * n;
        for (int64_t i = 0; i < n; ++i) dst[i] += self.grad[i];
    });
}

}  // namespace

std::vector<ag::Var> temporal_context(const FrameWindow& window, const ModelParams& params) {
    if (window.t_in() != params.cfg.t_in) throw ShapeError("temporal_context: window size mismatch");
    ag::Var x = ag::constant(window.frames);
    x = ag::leaky_relu(ag::conv3d(x, params.ctx_w1, params.ctx_b1));
    x = ag::conv3d(x, params.ctx_w2, params.ctx_b2);
    std::vector<ag::Var> out;
    for (int t = 0; t < window.t_in(); ++t) out.push_back(slice_time(x, t));
    return out;
}

ag::Var scale_flow_var(const ag::Var& flow, double spatial_factor) {
    if (spatial_factor <= 0.0) throw ParamError("scale_flow: factor must be positive");
    const int out_h = static_cast<int>(std::lround(flow->val.dim(0) * spatial_factor));
    const int out_w = static_cast<int>(std::lround(flow->val.dim(1) * spatial_factor));
    if (out_h < 1 || out_w < 1) throw ParamError("scale_flow: resulting dimension < 1");
    return ag::scale(ag::resize_bilinear(flow, out_h, out_w), spatial_factor);
}

EncodeDecodeResult encode_decode(std::vector<ag::Var> features, const ag::Var& flow_prev,
                                 const ag::Var& flow_next, const ModelParams& params,
                                 ag::AttentionCapture* capture) {
    if (features.size() != 3) throw ShapeError("encode_decode: expected three feature maps");
    const int L = params.cfg.levels;
    LevelState st{features[0], features[1], features[2], flow_prev, flow_next, 0};
    std::vector<LevelState> skips(static_cast<size_t>(L));
    for (int i = 0; i < L; ++i) {
        st.level = i;
        st = jffr_forward(st, params.enc[static_cast<size_t>(i)], capture);
        skips[static_cast<size_t>(i)] = st;
        if (i < L - 1) {
            for (ag::Var* f : {&st.f_prev, &st.f_ref, &st.f_next})
                *f = ag::leaky_relu(ag::conv2d(*f, params.down_w[static_cast<size_t>(i)],
                                               params.down_b[static_cast<size_t>(i)], 2));
            st.flow_prev = scale_flow_var(st.flow_prev, 0.5);
            st.flow_next = scale_flow_var(st.flow_next, 0.5);
        }
    }
    for (int i = L - 2; i >= 0; --i) {
        for (int k = 0; k < 3; ++k) {
            ag::Var* f = k == 0 ? &st.f_prev : (k == 1 ? &st.f_ref : &st.f_next);
            const ag::Var* skip =
                k == 0 ? &skips[static_cast<size_t>(i)].f_prev
                       : (k == 1 ? &skips[static_cast<size_t>(i)].f_ref : &skips[static_cast<size_t>(i)].f_next);
            ag::Var up = ag::pixel_shuffle2(ag::conv2d(*f, params.up_w[static_cast<size_t>(i)],
                                                       params.up_b[static_cast<size_t>(i)]));
            *f = ag::add(up, *skip);
        }
        st.flow_prev = scale_flow_var(st.flow_prev, 2.0);
        st.flow_next = scale_flow_var(st.flow_next, 2.0);
        st.level = i;
        st = jffr_forward(st, params.dec[static_cast<size_t>(i)], capture);
    }
    return EncodeDecodeResult{st.f_ref, st.flow_prev, st.flow_next};
}

ag::Var reconstruct(const ag::Var& features, const Tensor& reference_frame,
                    const ModelParams& params) {
    const auto& cfg = params.cfg;
    if (cfg.task == Task::sr_x4) {
        ag::Var x = ag::pixel_shuffle2(ag::conv2d(features, params.head_w[0], params.head_b[0]));
        x = ag::leaky_relu(x);
        x = ag::pixel_shuffle2(ag::conv2d(x, params.head_w[1], params.head_b[1]));
        x = ag::leaky_relu(x);
        ag::Var r = ag::conv2d(x, params.head_w[2], params.head_b[2]);
        Tensor anchor = bicubic_resize(reference_frame, 4 * reference_frame.dim(0),
                                       4 * reference_frame.dim(1), false);
        return ag::clamp01(ag::add(ag::constant(std::move(anchor)), r));
    }
    ag::Var x = ag::leaky_relu(ag::conv2d(features, params.head_w[0], params.head_b[0]));
    ag::Var r = ag::conv2d(x, params.head_w[1], params.head_b[1]);
    if (r->val.dim(2) != reference_frame.dim(2))
        throw ConfigError("reconstruct: head output channels do not match frame");
    if (cfg.residual_output) return ag::clamp01(ag::add(ag::constant(reference_frame), r));
    return ag::clamp01(r);
}

ForwardResult forward(const FrameWindow& window, const FlowField& flow_prev,
                      const FlowField& flow_next, const ModelParams& params,
                      ag::AttentionCapture* capture) {
    const auto& cfg = params.cfg;
    const int H = window.frames.dim(1), W = window.frames.dim(2), C = window.frames.dim(3);
    if (flow_prev.h() != H || flow_prev.w() != W || flow_next.h() != H || flow_next.w() != W)
        throw ShapeError("forward: flow/frame spatial mismatch");
    const int M = cfg.spatial_multiple();
    const int Hp = (H + M - 1) / M * M;
    const int Wp = (W + M - 1) / M * M;

    FrameWindow win = window;
    FlowField fp = flow_prev, fn = flow_next;
    if (Hp != H || Wp != W) {
        Tensor padded({window.t_in(), Hp, Wp, C});
        const int64_t fsz = static_cast<int64_t>(Hp) * Wp * C;
        for (int t = 0; t < window.t_in(); ++t) {
            Tensor f = pad_reflect(window.frame(t), Hp, Wp);
            std::memcpy(padded.data() + static_cast<int64_t>(t) * fsz, f.data(),
                        static_cast<size_t>(fsz) * sizeof(double));
        }
        win.frames = std::move(padded);
        fp.values = pad_reflect(flow_prev.values, Hp, Wp);
        fn.values = pad_reflect(flow_next.values, Hp, Wp);
    }

    std::vector<ag::Var> feats = temporal_context(win, params);
    EncodeDecodeResult ed = encode_decode(
        {feats[static_cast<size_t>(win.reference_index - 1)], feats[static_cast<size_t>(win.reference_index)],
         feats[static_cast<size_t>(win.reference_index + 1)]},
        ag::constant(fp.values), ag::constant(fn.values), params, capture);

    ag::Var restored = reconstruct(ed.features, win.reference_frame(), params);

    ForwardResult out;
    const int scale_out = cfg.task == Task::sr_x4 ? 4 : 1;
    out.restored = (restored->val.dim(0) == scale_out * H && restored->val.dim(1) == scale_out * W)
                       ? restored
                       : ag::crop2d(restored, 0, 0, scale_out * H, scale_out * W);
    out.flow_prev = (ed.flow_prev->val.dim(0) == H && ed.flow_prev->val.dim(1) == W)
                        ? ed.flow_prev
                        : ag::crop2d(ed.flow_prev, 0, 0, H, W);
    out.flow_next = (ed.flow_next->val.dim(0) == H && ed.flow_next->val.dim(1) == W)
                        ? ed.flow_next
                        : ag::crop2d(ed.flow_next, 0, 0, H, W);
    return out;
}

}  // namespace jffra
