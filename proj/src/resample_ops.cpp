#include <cmath>

#include "jffra/kernels.hpp"
#include "jffra/nn_ops.hpp"

namespace jffra::ag {

Var warp_bilinear(const Var& field, const Var& flow) {
    if (field->val.ndim() != 3) throw ShapeError("warp: field must be H x W x C");
    if (flow->val.ndim() != 3 || flow->val.dim(2) != 2) throw ShapeError("warp: flow must be H x W x 2");
    const int H = field->val.dim(0), W = field->val.dim(1), C = field->val.dim(2);
    if (flow->val.dim(0) != H || flow->val.dim(1) != W)
        throw ShapeError("warp: field/flow spatial shape mismatch");

    Tensor out({H, W, C});
    const Tensor& f = field->val;
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            const double x = w + flow->val.at(h, w, 0);
            const double y = h + flow->val.at(h, w, 1);
            const int x0 = static_cast<int>(std::floor(x));
            const int y0 = static_cast<int>(std::floor(y));
            const double fx = x - x0, fy = y - y0;
            const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            for (int c = 0; c < C; ++c) {
                double v = 0.0;
                for (int k = 0; k < 4; ++k)
                    if (ys[k] >= 0 && ys[k] < H && xs[k] >= 0 && xs[k] < W)
                        v += wts[k] * f.at(ys[k], xs[k], c);
                out.at(h, w, c) = v;
            }
        }

    return make(std::move(out), {field, flow}, [H, W, C](Node& self) {
        const Var& field = self.inputs[0];
        const Var& flow = self.inputs[1];
        const Tensor& f = field->val;
        Tensor* gf = field->requires_grad ? &field->g() : nullptr;
        Tensor* gflow = flow->requires_grad ? &flow->g() : nullptr;
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                const double x = w + flow->val.at(h, w, 0);
                const double y = h + flow->val.at(h, w, 1);
                const int x0 = static_cast<int>(std::floor(x));
                const int y0 = static_cast<int>(std::floor(y));
                const double fx = x - x0, fy = y - y0;
                const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
                const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
                const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
                const bool in[4] = {
                    ys[0] >= 0 && ys[0] < H && xs[0] >= 0 && xs[0] < W,
                    ys[1] >= 0 && ys[1] < H && xs[1] >= 0 && xs[1] < W,
                    ys[2] >= 0 && ys[2] < H && xs[2] >= 0 && xs[2] < W,
                    ys[3] >= 0 && ys[3] < H && xs[3] >= 0 && xs[3] < W};
                double gdx = 0.0, gdy = 0.0;
                for (int c = 0; c < C; ++c) {
                    const double go = self.grad.at(h, w, c);
                    if (go == 0.0) continue;
                    if (gf)
                        for (int k = 0; k < 4; ++k)
                            if (in[k]) gf->at(ys[k], xs[k], c) += go * wts[k];
                    if (gflow) {
                        const double v00 = in[0] ? f.at(ys[0], xs[0], c) : 0.0;
                        const double v01 = in[1] ? f.at(ys[1], xs[1], c) : 0.0;
                        const double v10 = in[2] ? f.at(ys[2], xs[2], c) : 0.0;
                        const double v11 = in[3] ? f.at(ys[3], xs[3], c) : 0.0;
                        gdx += go * ((1 - fy) * (v01 - v00) + fy * (v11 - v10));
                        gdy += go * ((1 - fx) * (v10 - v00) + fx * (v11 - v01));
                    }
                }
                if (gflow) {
                    gflow->at(h, w, 0) += gdx;
                    gflow->at(h, w, 1) += gdy;
                }
            }
    });
}

namespace {
struct ResizeTap {
    int lo, hi;
    double frac;
};
inline ResizeTap resize_tap(int out_i, int out_n, int in_n) {
    const double src = (out_i + 0.5) * static_cast<double>(in_n) / out_n - 0.5;
    const int i0 = static_cast<int>(std::floor(src));
    ResizeTap t;
    t.frac = src - i0;
    t.lo = std::min(std::max(i0, 0), in_n - 1);
    t.hi = std::min(std::max(i0 + 1, 0), in_n - 1);
    return t;
}
}  // namespace

Var resize_bilinear(const Var& x, int out_h, int out_w) {
    if (x->val.ndim() != 3) throw ShapeError("resize: input must be H x W x C");
    if (out_h < 1 || out_w < 1) throw ParamError("resize: output dims must be >= 1");
    const int H = x->val.dim(0), W = x->val.dim(1), C = x->val.dim(2);
    if (out_h == H && out_w == W) return x;
    Tensor out({out_h, out_w, C});
    for (int oh = 0; oh < out_h; ++oh) {
        const ResizeTap ty = resize_tap(oh, out_h, H);
        for (int ow = 0; ow < out_w; ++ow) {
            const ResizeTap tx = resize_tap(ow, out_w, W);
            for (int c = 0; c < C; ++c)
                out.at(oh, ow, c) = (1 - ty.frac) * ((1 - tx.frac) * x->val.at(ty.lo, tx.lo, c) +
                                                     tx.frac * x->val.at(ty.lo, tx.hi, c)) +
                                    ty.frac * ((1 - tx.frac) * x->val.at(ty.hi, tx.lo, c) +
                                               tx.frac * x->val.at(ty.hi, tx.hi, c));
        }
    }
    return make(std::move(out), {x}, [out_h, out_w, H, W, C](Node& self) {
        Tensor& g = self.inputs[0]->g();
        for (int oh = 0; oh < out_h; ++oh) {
            const ResizeTap ty = resize_tap(oh, out_h, H);
            for (int ow = 0; ow < out_w; ++ow) {
                const ResizeTap tx = resize_tap(ow, out_w, W);
                for (int c = 0; c < C; ++c) {
                    const double go = self.grad.at(oh, ow, c);
                    g.at(ty.lo, tx.lo, c) += go * (1 - ty.frac) * (1 - tx.frac);
                    g.at(ty.lo, tx.hi, c) += go * (1 - ty.frac) * tx.frac;
                    g.at(ty.hi, tx.lo, c) += go * ty.frac * (1 - tx.frac);
                    g.at(ty.hi, tx.hi, c) += go * ty.frac * tx.frac;
                }
            }
        }
    });
}

Var cost_volume_channels(const Var& f_ref, const Var& f_proj, int r) {
    require_same_shape(f_ref->val, f_proj->val, "cost_volume");
    if (f_ref->val.ndim() != 3) throw ShapeError("cost_volume: features must be H x W x C");
    if (r < 1) throw ParamError("cost_volume: radius must be >= 1");
    const int H = f_ref->val.dim(0), W = f_ref->val.dim(1), C = f_ref->val.dim(2);
    const int D = 2 * r + 1;
    const int DD = D * D;
    Tensor out({H, W, DD});
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            const double* ref = f_ref->val.data() + (static_cast<int64_t>(h) * W + w) * C;
            double* o = out.data() + (static_cast<int64_t>(h) * W + w) * DD;
            for (int l = -r; l <= r; ++l) {
                const int hh = h + l;
                for (int m = -r; m <= r; ++m) {
                    const int ww = w + m;
                    const int ch = (l + r) * D + (m + r);
                    if (hh >= 0 && hh < H && ww >= 0 && ww < W) {
                        const double* pj = f_proj->val.data() + (static_cast<int64_t>(hh) * W + ww) * C;
                        o[ch] = kernels::sad(ref, pj, static_cast<size_t>(C));
                    } else {
                        double s = 0.0;
                        for (int c = 0; c < C; ++c) s += std::fabs(ref[c]);
                        o[ch] = s;
                    }
                }
            }
        }
    return make(std::move(out), {f_ref, f_proj}, [H, W, C, r, D, DD](Node& self) {
        const Tensor& ref = self.inputs[0]->val;
        const Tensor& proj = self.inputs[1]->val;
        Tensor* gr = self.inputs[0]->requires_grad ? &self.inputs[0]->g() : nullptr;
        Tensor* gp = self.inputs[1]->requires_grad ? &self.inputs[1]->g() : nullptr;
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                const double* go = self.grad.data() + (static_cast<int64_t>(h) * W + w) * DD;
                for (int l = -r; l <= r; ++l) {
                    const int hh = h + l;
                    for (int m = -r; m <= r; ++m) {
                        const int ww = w + m;
                        const double g = go[(l + r) * D + (m + r)];
                        if (g == 0.0) continue;
                        const bool in = hh >= 0 && hh < H && ww >= 0 && ww < W;
                        for (int c = 0; c < C; ++c) {
                            const double pv = in ? proj.at(hh, ww, c) : 0.0;
                            const double diff = ref.at(h, w, c) - pv;
                            const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
                            if (gr) gr->at(h, w, c) += g * s;
                            if (gp && in) gp->at(hh, ww, c) -= g * s;
                        }
                    }
                }
            }
    });
}

Var pixel_shuffle2(const Var& x) {
    if (x->val.ndim() != 3) throw ShapeError("pixel_shuffle2: input must be H x W x C");
    const int H = x->val.dim(0), W = x->val.dim(1), C4 = x->val.dim(2);
    if (C4 % 4 != 0) throw ShapeError("pixel_shuffle2: channels must be divisible by 4");
    const int C = C4 / 4;
    Tensor out({2 * H, 2 * W, C});
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx)
                    for (int c = 0; c < C; ++c)
                        out.at(2 * h + dy, 2 * w + dx, c) = x->val.at(h, w, (dy * 2 + dx) * C + c);
    return make(std::move(out), {x}, [H, W, C](Node& self) {
        Tensor& g = self.inputs[0]->g();
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                        for (int c = 0; c < C; ++c)
                            g.at(h, w, (dy * 2 + dx) * C + c) += self.grad.at(2 * h + dy, 2 * w + dx, c);
    });
}

}  // namespace jffra::ag
