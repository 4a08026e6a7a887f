#include "jffra/cost_volume.hpp"

#include <cmath>

#include "jffra/nn_ops.hpp"

namespace jffra {

void CostVolume::validate() const {
    if (values.ndim() != 4) throw ShapeError("CostVolume: values must be d_h x d_w x H x W");
    if (values.dim(0) != 2 * radius + 1 || values.dim(1) != 2 * radius + 1)
        throw ShapeError("CostVolume: offset dims must be 2r+1");
    for (int64_t i = 0; i < values.numel(); ++i)
        if (values[i] < 0.0) throw RangeError("CostVolume: negative entry");
}

CostVolume build_cost_volume(const FeatureMap& f_ref, const FeatureMap& f_proj, int r) {
    ag::NoGradGuard ng;
    Tensor ch = ag::cost_volume_channels(ag::constant(f_ref.values), ag::constant(f_proj.values), r)->val;
    const int H = ch.dim(0), W = ch.dim(1), D = 2 * r + 1;
    Tensor out({D, D, H, W});
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w)
            for (int a = 0; a < D; ++a)
                for (int b = 0; b < D; ++b)
                    out.at4(a, b, h, w) = ch.at(h, w, a * D + b);
    return CostVolume{std::move(out), r};
}

CostVolume cost_volume_oracle(const FeatureMap& f_ref, const FeatureMap& f_proj, int r) {
    require_same_shape(f_ref.values, f_proj.values, "cost_volume_oracle");
    if (r < 1) throw ParamError("cost_volume_oracle: radius must be >= 1");
    const int H = f_ref.values.dim(0), W = f_ref.values.dim(1), C = f_ref.values.dim(2);
    if (static_cast<int64_t>(H) * W > 4096) throw ParamError("cost_volume_oracle: input too large");
    const int D = 2 * r + 1;
    Tensor out({D, D, H, W});
    for (int l = -r; l <= r; ++l)
        for (int m = -r; m <= r; ++m)
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w) {
                    double s = 0.0;
                    for (int c = 0; c < C; ++c) {
                        const int hh = h + l, ww = w + m;
                        const double pv = (hh >= 0 && hh < H && ww >= 0 && ww < W)
                                              ? f_proj.values.at(hh, ww, c)
                                              : 0.0;
                        s += std::fabs(f_ref.values.at(h, w, c) - pv);
                    }
                    out.at4(l + r, m + r, h, w) = s;
                }
    return CostVolume{std::move(out), r};
}

}  // namespace jffra
