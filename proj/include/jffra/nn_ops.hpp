#pragma once

#include <vector>

#include "jffra/autograd.hpp"

namespace jffra::ag {

// 2-d convolution over H x W x Cin input. Weight layout: Cout x kh x kw x Cin
// (each output channel's weights are one contiguous im2col row). Zero padding
// (kh-1)/2 x (kw-1)/2, so stride 1 preserves the spatial size and stride 2
// halves it (even inputs).
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride = 1);

// 3-d convolution over T x H x W x Cin, kernel kt x kh x kw, stride 1,
// zero padding preserving all dims. Weight layout: Cout x kt x kh x kw x Cin.
Var conv3d(const Var& x, const Var& weight, const Var& bias);

// Backward bilinear warp: out[h,w] = field sampled at (w + dx, h + dy),
// out-of-grid taps read as zero. field is H x W x C, flow is H x W x 2.
Var warp_bilinear(const Var& field, const Var& flow);

// Bilinear resize with half-pixel centers and edge-clamped sampling.
Var resize_bilinear(const Var& x, int out_h, int out_w);

// Cost volume in channel layout: out is H x W x (2r+1)^2 where channel
// (l+r)*(2r+1)+(m+r) holds sum_c |f_ref[h,w,c] - f_proj[h+l,w+m,c]| with
// out-of-grid taps of f_proj read as zero.
Var cost_volume_channels(const Var& f_ref, const Var& f_proj, int r);

// H x W x 4C -> 2H x 2W x C channel-to-space rearrangement.
Var pixel_shuffle2(const Var& x);

struct AttentionCapture {
    // one row-stochastic matrix (n x n, row-major) per (window, head)
    std::vector<Tensor> maps;
};

// Non-overlapping windowed multi-head self-attention over an H x W x D map.
// Pads with zeros to window multiples, crops back. Weights wq/wk/wv/wo are
// D x D (out x in), no biases. Returns the attention output projected by wo.
Var window_attention(const Var& x, const Var& wq, const Var& wk, const Var& wv, const Var& wo,
                     int heads, int window, AttentionCapture* capture = nullptr);

}  // namespace jffra::ag
