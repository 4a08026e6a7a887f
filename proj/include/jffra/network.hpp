#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jffra/core_types.hpp"
#include "jffra/jffr.hpp"

namespace jffra {

enum class Task { denoise, sr_x4, deblur };

std::string task_name(Task t);
Task task_from_name(const std::string& s);

struct NetworkConfig {
    int levels = 3;
    int base_channels = 32;  // doubles per encoder level
    int in_channels = 3;     // frame channels (3 RGB, 1 for tests)
    int t_in = 3;
    int window_size = 8;
    Task task = Task::denoise;
    bool residual_output = true;
    int head_count = 3;
    int cost_radius = 4;
    int flow_head_hidden = 32;
    bool flow_refinement = true;
    bool residual_to_warped = false;

    void validate() const;
    // spatial sizes must be padded to a multiple of this before the forward
    int spatial_multiple() const { return window_size * (1 << (levels - 1)); }
};

struct ModelParams {
    NetworkConfig cfg;
    ag::Var ctx_w1, ctx_b1, ctx_w2, ctx_b2;  // 3-d conv stack
    std::vector<JffrParams> enc;              // one per level
    std::vector<JffrParams> dec;              // levels-1, finest first
    std::vector<ag::Var> down_w, down_b;      // stride-2 convs C_i -> C_{i+1}
    std::vector<ag::Var> up_w, up_b;          // convs C_{i+1} -> 4*C_i (sub-pixel x2)
    std::vector<ag::Var> head_w, head_b;      // task head conv stack

    std::vector<std::pair<std::string, ag::Var>> named() const;
    std::vector<ag::Var> all() const;
};

ModelParams make_model_params(const NetworkConfig& cfg, Rng& rng);

// Two 3x3x3 conv layers over the t_in frame stack; returns per-frame feature
// maps (prev, ref, next) at full resolution.
std::vector<ag::Var> temporal_context(const FrameWindow& window, const ModelParams& params);

struct EncodeDecodeResult {
    ag::Var features;   // reference-frame features at level 0
    ag::Var flow_prev;  // refined flows at level 0
    ag::Var flow_next;
};

EncodeDecodeResult encode_decode(std::vector<ag::Var> features, const ag::Var& flow_prev,
                                 const ag::Var& flow_next, const ModelParams& params,
                                 ag::AttentionCapture* capture = nullptr);

// Task head. denoise/deblur: residual on the reference frame; sr_x4: residual
// on the bicubic x4 upsample of the reference frame. Output clamped to [0,1].
ag::Var reconstruct(const ag::Var& features, const Tensor& reference_frame, const ModelParams& params);

struct ForwardResult {
    ag::Var restored;   // clamped restored reference frame
    ag::Var flow_prev;  // final level-0 flows (for flow-quality inspection)
    ag::Var flow_next;
};

// Full pass: temporal context -> encoder/decoder JFFR stack -> reconstruction.
// Pads inputs by reflection to the required spatial multiple and crops back.
ForwardResult forward(const FrameWindow& window, const FlowField& flow_prev,
                      const FlowField& flow_next, const ModelParams& params,
                      ag::AttentionCapture* capture = nullptr);

// Differentiable flow rescale (grid resize + magnitude scaling).
ag::Var scale_flow_var(const ag::Var& flow, double spatial_factor);

}  // namespace jffra
