#include "jffra/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace jffra {

namespace {

// Catmull-Rom family cubic, a = -0.5
double cubic_kernel(double x) {
    const double a = -0.5;
    x = std::fabs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

struct TapSet {
    std::vector<int> idx;
    std::vector<double> wt;
};

std::vector<TapSet> build_taps(int in_n, int out_n, bool antialias) {
    const double ratio = static_cast<double>(in_n) / out_n;
    const double support_scale = (antialias && ratio > 1.0) ? ratio : 1.0;
    const double support = 2.0 * support_scale;
    std::vector<TapSet> taps(static_cast<size_t>(out_n));
    for (int o = 0; o < out_n; ++o) {
        const double center = (o + 0.5) * ratio - 0.5;
        const int lo = static_cast<int>(std::floor(center - support)) + 1;
        const int hi = static_cast<int>(std::floor(center + support));
        TapSet& t = taps[static_cast<size_t>(o)];
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double w = cubic_kernel((i - center) / support_scale);
            if (w == 0.0) continue;
            t.idx.push_back(std::clamp(i, 0, in_n - 1));
            t.wt.push_back(w);
            sum += w;
        }
        for (double& w : t.wt) w /= sum;
    }
    return taps;
}

}  // namespace

Tensor bicubic_resize(const Tensor& img, int out_h, int out_w, bool antialias) {
    if (img.ndim() != 3) throw ShapeError("bicubic_resize: input must be H x W x C");
    if (out_h < 1 || out_w < 1) throw ParamError("bicubic_resize: output dims must be >= 1");
    const int H = img.dim(0), W = img.dim(1), C = img.dim(2);

    const auto taps_h = build_taps(H, out_h, antialias);
    const auto taps_w = build_taps(W, out_w, antialias);

    Tensor mid({out_h, W, C});
    for (int oh = 0; oh < out_h; ++oh) {
        const TapSet& t = taps_h[static_cast<size_t>(oh)];
        for (int w = 0; w < W; ++w)
            for (int c = 0; c < C; ++c) {
                double v = 0.0;
                for (size_t k = 0; k < t.idx.size(); ++k) v += t.wt[k] * img.at(t.idx[k], w, c);
                mid.at(oh, w, c) = v;
            }
    }
    Tensor out({out_h, out_w, C});
    for (int oh = 0; oh < out_h; ++oh)
        for (int ow = 0; ow < out_w; ++ow) {
            const TapSet& t = taps_w[static_cast<size_t>(ow)];
            for (int c = 0; c < C; ++c) {
                double v = 0.0;
                for (size_t k = 0; k < t.idx.size(); ++k) v += t.wt[k] * mid.at(oh, t.idx[k], c);
                out.at(oh, ow, c) = v;
            }
        }
    return out;
}

Tensor pad_reflect(const Tensor& img, int out_h, int out_w) {
    if (img.ndim() != 3) throw ShapeError("pad_reflect: input must be H x W x C");
    const int H = img.dim(0), W = img.dim(1), C = img.dim(2);
    if (out_h < H || out_w < W) throw ParamError("pad_reflect: target smaller than input");
    Tensor out({out_h, out_w, C});
    for (int h = 0; h < out_h; ++h) {
        int sh = h;
        while (sh >= H) sh = 2 * H - 2 - sh >= 0 ? 2 * H - 2 - sh : 0;
        for (int w = 0; w < out_w; ++w) {
            int sw = w;
            while (sw >= W) sw = 2 * W - 2 - sw >= 0 ? 2 * W - 2 - sw : 0;
            for (int c = 0; c < C; ++c) out.at(h, w, c) = img.at(sh, sw, c);
        }
    }
    return out;
}

}  // namespace jffra
