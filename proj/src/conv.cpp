#include <vector>

#include "jffra/kernels.hpp"
#include "jffra/nn_ops.hpp"

namespace jffra::ag {

namespace {

// Gathers the im2col matrix: one row of length kh*kw*Cin per output pixel.
void im2col(const Tensor& x, int kh, int kw, int stride, int out_h, int out_w,
            std::vector<double>& cols) {
    const int H = x.dim(0), W = x.dim(1), C = x.dim(2);
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    const size_t K = static_cast<size_t>(kh) * kw * C;
    cols.assign(static_cast<size_t>(out_h) * out_w * K, 0.0);
    for (int oh = 0; oh < out_h; ++oh) {
        for (int ow = 0; ow < out_w; ++ow) {
            double* row = cols.data() + (static_cast<size_t>(oh) * out_w + ow) * K;
            for (int dh = 0; dh < kh; ++dh) {
                const int ih = oh * stride + dh - ph;
                if (ih < 0 || ih >= H) continue;
                for (int dw = 0; dw < kw; ++dw) {
                    const int iw = ow * stride + dw - pw;
                    if (iw < 0 || iw >= W) continue;
                    const double* src = x.data() + (static_cast<int64_t>(ih) * W + iw) * C;
                    double* dst = row + (static_cast<size_t>(dh) * kw + dw) * C;
                    for (int c = 0; c < C; ++c) dst[c] = src[c];
                }
            }
        }
    }
}

void col2im_add(const std::vector<double>& cols, int kh, int kw, int stride, int out_h, int out_w,
                Tensor& gx) {
    const int H = gx.dim(0), W = gx.dim(1), C = gx.dim(2);
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    const size_t K = static_cast<size_t>(kh) * kw * C;
    for (int oh = 0; oh < out_h; ++oh) {
        for (int ow = 0; ow < out_w; ++ow) {
            const double* row = cols.data() + (static_cast<size_t>(oh) * out_w + ow) * K;
            for (int dh = 0; dh < kh; ++dh) {
                const int ih = oh * stride + dh - ph;
                if (ih < 0 || ih >= H) continue;
                for (int dw = 0; dw < kw; ++dw) {
                    const int iw = ow * stride + dw - pw;
                    if (iw < 0 || iw >= W) continue;
                    double* dst = gx.data() + (static_cast<int64_t>(ih) * W + iw) * C;
                    const double* src = row + (static_cast<size_t>(dh) * kw + dw) * C;
                    for (int c = 0; c < C; ++c) dst[c] += src[c];
                }
            }
        }
    }
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride) {
    if (x->val.ndim() != 3) throw ShapeError("conv2d: input must be H x W x C");
    if (weight->val.ndim() != 4) throw ShapeError("conv2d: weight must be Cout x kh x kw x Cin");
    const int H = x->val.dim(0), W = x->val.dim(1), C = x->val.dim(2);
    const int Cout = weight->val.dim(0), kh = weight->val.dim(1), kw = weight->val.dim(2);
    if (weight->val.dim(3) != C) throw ShapeError("conv2d: input channels do not match weight");
    if (bias->val.numel() != Cout) throw ShapeError("conv2d: bias size mismatch");
    if (stride < 1) throw ParamError("conv2d: stride must be >= 1");
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    const int out_h = (H + 2 * ph - kh) / stride + 1;
    const int out_w = (W + 2 * pw - kw) / stride + 1;
    const size_t K = static_cast<size_t>(kh) * kw * C;

    std::vector<double> cols;
    im2col(x->val, kh, kw, stride, out_h, out_w, cols);

    Tensor out({out_h, out_w, Cout});
    const int64_t M = static_cast<int64_t>(out_h) * out_w;
    for (int64_t m = 0; m < M; ++m) {
        const double* row = cols.data() + static_cast<size_t>(m) * K;
        for (int n = 0; n < Cout; ++n)
            out[m * Cout + n] = kernels::dot(row, weight->val.data() + static_cast<size_t>(n) * K, K) +
                                bias->val[n];
    }

    return make(std::move(out), {x, weight, bias},
                [kh, kw, stride, out_h, out_w, K](Node& self) {
                    const Var& x = self.inputs[0];
                    const Var& weight = self.inputs[1];
                    const Var& bias = self.inputs[2];
                    const int Cout = weight->val.dim(0);
                    const int64_t M = static_cast<int64_t>(out_h) * out_w;
                    std::vector<double> cols;
                    im2col(x->val, kh, kw, stride, out_h, out_w, cols);

                    if (weight->requires_grad) {
                        Tensor& gw = weight->g();
                        for (int64_t m = 0; m < M; ++m) {
                            const double* row = cols.data() + static_cast<size_t>(m) * K;
                            for (int n = 0; n < Cout; ++n) {
                                const double gy = self.grad[m * Cout + n];
                                if (gy != 0.0)
                                    kernels::axpy(gy, row, gw.data() + static_cast<size_t>(n) * K, K);
                            }
                        }
                    }
                    if (bias->requires_grad) {
                        Tensor& gb = bias->g();
                        for (int64_t m = 0; m < M; ++m)
                            for (int n = 0; n < Cout; ++n) gb[n] += self.grad[m * Cout + n];
                    }
                    if (x->requires_grad) {
                        std::vector<double> gcols(cols.size(), 0.0);
                        for (int64_t m = 0; m < M; ++m) {
                            double* row = gcols.data() + static_cast<size_t>(m) * K;
                            for (int n = 0; n < Cout; ++n) {
                                const double gy = self.grad[m * Cout + n];
                                if (gy != 0.0)
                                    kernels::axpy(gy, weight->val.data() + static_cast<size_t>(n) * K,
                                                  row, K);
                            }
                        }
                        col2im_add(gcols, kh, kw, stride, out_h, out_w, x->g());
                    }
                });
}

Var conv3d(const Var& x, const Var& weight, const Var& bias) {
    if (x->val.ndim() != 4) throw ShapeError("conv3d: input must be T x H x W x C");
    if (weight->val.ndim() != 5) throw ShapeError("conv3d: weight must be Cout x kt x kh x kw x Cin");
    const int T = x->val.dim(0), H = x->val.dim(1), W = x->val.dim(2), C = x->val.dim(3);
    const int Cout = weight->val.dim(0), kt = weight->val.dim(1), kh = weight->val.dim(2),
              kw = weight->val.dim(3);
    if (weight->val.dim(4) != C) throw ShapeError("conv3d: input channels do not match weight");
    if (bias->val.numel() != Cout) throw ShapeError("conv3d: bias size mismatch");
    const int pt = (kt - 1) / 2, ph = (kh - 1) / 2, pw = (kw - 1) / 2;

    Tensor out({T, H, W, Cout});
    const double* wd = weight->val.data();
    for (int t = 0; t < T; ++t)
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                double* o = out.data() + ((static_cast<int64_t>(t) * H + h) * W + w) * Cout;
                for (int n = 0; n < Cout; ++n) o[n] = bias->val[n];
                for (int dt = 0; dt < kt; ++dt) {
                    const int it = t + dt - pt;
                    if (it < 0 || it >= T) continue;
                    for (int dh = 0; dh < kh; ++dh) {
                        const int ih = h + dh - ph;
                        if (ih < 0 || ih >= H) continue;
                        for (int dw = 0; dw < kw; ++dw) {
                            const int iw = w + dw - pw;
                            if (iw < 0 || iw >= W) continue;
                            const double* src =
                                x->val.data() + ((static_cast<int64_t>(it) * H + ih) * W + iw) * C;
                            for (int n = 0; n < Cout; ++n) {
                                const double* wrow =
                                    wd + ((((static_cast<int64_t>(n) * kt + dt) * kh + dh) * kw + dw)) * C;
                                o[n] += kernels::dot(src, wrow, static_cast<size_t>(C));
                            }
                        }
                    }
                }
            }

    return make(std::move(out), {x, weight, bias}, [T, H, W, C, kt, kh, kw](Node& self) {
        const Var& x = self.inputs[0];
        const Var& weight = self.inputs[1];
        const Var& bias = self.inputs[2];
        const int Cout = weight->val.dim(0);
        const int pt = (kt - 1) / 2, ph = (kh - 1) / 2, pw = (kw - 1) / 2;
        const double* wd = weight->val.data();
        Tensor* gx = x->requires_grad ? &x->g() : nullptr;
        Tensor* gw = weight->requires_grad ? &weight->g() : nullptr;
        Tensor* gb = bias->requires_grad ? &bias->g() : nullptr;
        for (int t = 0; t < T; ++t)
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w) {
                    const double* go =
                        self.grad.data() + ((static_cast<int64_t>(t) * H + h) * W + w) * Cout;
                    if (gb)
                        for (int n = 0; n < Cout; ++n) (*gb)[n] += go[n];
                    for (int dt = 0; dt < kt; ++dt) {
                        const int it = t + dt - pt;
                        if (it < 0 || it >= T) continue;
                        for (int dh = 0; dh < kh; ++dh) {
                            const int ih = h + dh - ph;
                            if (ih < 0 || ih >= H) continue;
                            for (int dw = 0; dw < kw; ++dw) {
                                const int iw = w + dw - pw;
                                if (iw < 0 || iw >= W) continue;
                                const int64_t in_off =
                                    ((static_cast<int64_t>(it) * H + ih) * W + iw) * C;
                                for (int n = 0; n < Cout; ++n) {
                                    if (go[n] == 0.0) continue;
                                    const int64_t w_off =
                                        (((static_cast<int64_t>(n) * kt + dt) * kh + dh) * kw + dw) * C;
                                    if (gw)
                                        kernels::axpy(go[n], x->val.data() + in_off,
                                                      gw->data() + w_off, static_cast<size_t>(C));
                                    if (gx)
                                        kernels::axpy(go[n], wd + w_off, gx->data() + in_off,
                                                      static_cast<size_t>(C));
                                }
                            }
                        }
                    }
                }
    });
}

}  // namespace jffra::ag
