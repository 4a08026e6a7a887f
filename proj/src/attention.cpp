#include <cmath>
#include <memory>
#include <vector>

#include "jffra/kernels.hpp"
#include "jffra/nn_ops.hpp"

namespace jffra::ag {

namespace {

// Per-window intermediates kept alive for the backward pass.
struct WindowSaved {
    std::vector<double> x, q, k, v, a, o;  // x,q,k,v,o: n x d; a: heads x n x n
};

struct AttnSaved {
    std::vector<WindowSaved> windows;
    int Hp = 0, Wp = 0;
};

void gather_window(const Tensor& x, int h0, int w0, int win, int D, std::vector<double>& dst) {
    const int H = x.dim(0), W = x.dim(1);
    dst.assign(static_cast<size_t>(win) * win * D, 0.0);
    for (int i = 0; i < win; ++i) {
        const int h = h0 + i;
        if (h >= H) continue;
        for (int j = 0; j < win; ++j) {
            const int w = w0 + j;
            if (w >= W) continue;
            const double* src = x.data() + (static_cast<int64_t>(h) * W + w) * D;
            double* d = dst.data() + (static_cast<size_t>(i) * win + j) * D;
            for (int c = 0; c < D; ++c) d[c] = src[c];
        }
    }
}

// y[i,:] = x[i,:] * W^T with W stored row-major (out x in)
void project(const std::vector<double>& x, const double* w, int n, int d, std::vector<double>& y) {
    y.resize(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i) {
        const double* xi = x.data() + static_cast<size_t>(i) * d;
        double* yi = y.data() + static_cast<size_t>(i) * d;
        for (int j = 0; j < d; ++j) yi[j] = kernels::dot(xi, w + static_cast<size_t>(j) * d, d);
    }
}

}  // namespace

Var window_attention(const Var& x, const Var& wq, const Var& wk, const Var& wv, const Var& wo,
                     int heads, int window, AttentionCapture* capture) {
    if (x->val.ndim() != 3) throw ShapeError("attention: input must be H x W x D");
    const int H = x->val.dim(0), W = x->val.dim(1), D = x->val.dim(2);
    for (const Var* w : {&wq, &wk, &wv, &wo})
        if ((*w)->val.ndim() != 2 || (*w)->val.dim(0) != D || (*w)->val.dim(1) != D)
            throw ShapeError("attention: projection matrices must be D x D");
    if (heads < 1 || D % heads != 0) throw ParamError("attention: D must be divisible by head count");
    if (window < 1) throw ParamError("attention: window must be >= 1");

    const int dh = D / heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const int n = window * window;
    const int nwh = (H + window - 1) / window;
    const int nww = (W + window - 1) / window;

    auto saved = std::make_shared<AttnSaved>();
    saved->windows.resize(static_cast<size_t>(nwh) * nww);

    Tensor out({H, W, D});
    std::vector<double> tmp_row(n);
    for (int bw = 0; bw < nwh * nww; ++bw) {
        const int h0 = (bw / nww) * window;
        const int w0 = (bw % nww) * window;
        WindowSaved& ws = saved->windows[static_cast<size_t>(bw)];
        gather_window(x->val, h0, w0, window, D, ws.x);
        project(ws.x, wq->val.data(), n, D, ws.q);
        project(ws.x, wk->val.data(), n, D, ws.k);
        project(ws.x, wv->val.data(), n, D, ws.v);
        ws.a.assign(static_cast<size_t>(heads) * n * n, 0.0);
        ws.o.assign(static_cast<size_t>(n) * D, 0.0);
        for (int hd = 0; hd < heads; ++hd) {
            const int off = hd * dh;
            double* A = ws.a.data() + static_cast<size_t>(hd) * n * n;
            for (int i = 0; i < n; ++i) {
                double mx = -1e300;
                for (int j = 0; j < n; ++j) {
                    tmp_row[j] = att_scale * kernels::dot(ws.q.data() + static_cast<size_t>(i) * D + off,
                                                          ws.k.data() + static_cast<size_t>(j) * D + off,
                                                          dh);
                    mx = std::max(mx, tmp_row[j]);
                }
                double sum = 0.0;
                for (int j = 0; j < n; ++j) {
                    tmp_row[j] = std::exp(tmp_row[j] - mx);
                    sum += tmp_row[j];
                }
                double* arow = A + static_cast<size_t>(i) * n;
                for (int j = 0; j < n; ++j) arow[j] = tmp_row[j] / sum;
                // O_h[i,:] = sum_j A[i,j] V_h[j,:]
                double* orow = ws.o.data() + static_cast<size_t>(i) * D + off;
                for (int j = 0; j < n; ++j)
                    kernels::axpy(arow[j], ws.v.data() + static_cast<size_t>(j) * D + off, orow, dh);
            }
            if (capture) {
                Tensor amap({n, n});
                std::copy(A, A + static_cast<size_t>(n) * n, amap.data());
                capture->maps.push_back(std::move(amap));
            }
        }
        // Y = O Wo^T scattered back
        for (int i = 0; i < n; ++i) {
            const int h = h0 + i / window, w = w0 + i % window;
            if (h >= H || w >= W) continue;
            double* dst = out.data() + (static_cast<int64_t>(h) * W + w) * D;
            const double* oi = ws.o.data() + static_cast<size_t>(i) * D;
            for (int j = 0; j < D; ++j)
                dst[j] = kernels::dot(oi, wo->val.data() + static_cast<size_t>(j) * D, D);
        }
    }

    return make(std::move(out), {x, wq, wk, wv, wo},
                [saved, heads, window, D, H, W, dh, att_scale, n, nwh, nww](Node& self) {
                    const Var& x = self.inputs[0];
                    const Var& wq = self.inputs[1];
                    const Var& wk = self.inputs[2];
                    const Var& wv = self.inputs[3];
                    const Var& wo = self.inputs[4];
                    Tensor* gx = x->requires_grad ? &x->g() : nullptr;
                    Tensor* gwq = wq->requires_grad ? &wq->g() : nullptr;
                    Tensor* gwk = wk->requires_grad ? &wk->g() : nullptr;
                    Tensor* gwv = wv->requires_grad ? &wv->g() : nullptr;
                    Tensor* gwo = wo->requires_grad ? &wo->g() : nullptr;

                    std::vector<double> gy, go, gq, gk, gv, ga, gs, gxw;
                    for (int bw = 0; bw < nwh * nww; ++bw) {
                        const int h0 = (bw / nww) * window;
                        const int w0 = (bw % nww) * window;
                        const WindowSaved& ws = saved->windows[static_cast<size_t>(bw)];
                        // gather dY for this window (zero where padded)
                        gy.assign(static_cast<size_t>(n) * D, 0.0);
                        for (int i = 0; i < n; ++i) {
                            const int h = h0 + i / window, w = w0 + i % window;
                            if (h >= H || w >= W) continue;
                            const double* src = self.grad.data() + (static_cast<int64_t>(h) * W + w) * D;
                            std::copy(src, src + D, gy.data() + static_cast<size_t>(i) * D);
                        }
                        // dO = dY Wo; dWo += dY^T O
                        go.assign(static_cast<size_t>(n) * D, 0.0);
                        for (int i = 0; i < n; ++i) {
                            const double* gyi = gy.data() + static_cast<size_t>(i) * D;
                            double* goi = go.data() + static_cast<size_t>(i) * D;
                            for (int j = 0; j < D; ++j) {
                                if (gyi[j] == 0.0) continue;
                                kernels::axpy(gyi[j], wo->val.data() + static_cast<size_t>(j) * D, goi, D);
                                if (gwo)
                                    kernels::axpy(gyi[j], ws.o.data() + static_cast<size_t>(i) * D,
                                                  gwo->data() + static_cast<size_t>(j) * D, D);
                            }
                        }
                        gq.assign(static_cast<size_t>(n) * D, 0.0);
                        gk.assign(static_cast<size_t>(n) * D, 0.0);
                        gv.assign(static_cast<size_t>(n) * D, 0.0);
                        ga.resize(static_cast<size_t>(n) * n);
                        gs.resize(static_cast<size_t>(n) * n);
                        for (int hd = 0; hd < heads; ++hd) {
                            const int off = hd * dh;
                            const double* A = ws.a.data() + static_cast<size_t>(hd) * n * n;
                            // dA = dO_h V_h^T ; dV_h += A^T dO_h
                            for (int i = 0; i < n; ++i) {
                                const double* goi = go.data() + static_cast<size_t>(i) * D + off;
                                for (int j = 0; j < n; ++j)
                                    ga[static_cast<size_t>(i) * n + j] = kernels::dot(
                                        goi, ws.v.data() + static_cast<size_t>(j) * D + off, dh);
                                const double* arow = A + static_cast<size_t>(i) * n;
                                for (int j = 0; j < n; ++j)
                                    kernels::axpy(arow[j], goi,
                                                  gv.data() + static_cast<size_t>(j) * D + off, dh);
                            }
                            // softmax backward: dS = A ⊙ (dA − rowsum(dA ⊙ A))
                            for (int i = 0; i < n; ++i) {
                                const double* arow = A + static_cast<size_t>(i) * n;
                                const double* garow = ga.data() + static_cast<size_t>(i) * n;
                                double dotv = kernels::dot(arow, garow, n);
                                double* gsrow = gs.data() + static_cast<size_t>(i) * n;
                                for (int j = 0; j < n; ++j) gsrow[j] = arow[j] * (garow[j] - dotv);
                            }
                            // dQ_h = scale dS K_h ; dK_h = scale dS^T Q_h
                            for (int i = 0; i < n; ++i) {
                                const double* gsrow = gs.data() + static_cast<size_t>(i) * n;
                                double* gqi = gq.data() + static_cast<size_t>(i) * D + off;
                                for (int j = 0; j < n; ++j) {
                                    const double s = att_scale * gsrow[j];
                                    if (s == 0.0) continue;
                                    kernels::axpy(s, ws.k.data() + static_cast<size_t>(j) * D + off, gqi,
                                                  dh);
                                    kernels::axpy(s, ws.q.data() + static_cast<size_t>(i) * D + off,
                                                  gk.data() + static_cast<size_t>(j) * D + off, dh);
                                }
                            }
                        }
                        // back through projections: dX += dQ Wq + dK Wk + dV Wv; dW += dP^T X
                        gxw.assign(static_cast<size_t>(n) * D, 0.0);
                        struct Proj {
                            const std::vector<double>* gp;
                            const Var* w;
                            Tensor* gw;
                        } projs[3] = {{&gq, &wq, gwq}, {&gk, &wk, gwk}, {&gv, &wv, gwv}};
                        for (auto& pr : projs) {
                            for (int i = 0; i < n; ++i) {
                                const double* gpi = pr.gp->data() + static_cast<size_t>(i) * D;
                                double* gxi = gxw.data() + static_cast<size_t>(i) * D;
                                const double* xi = ws.x.data() + static_cast<size_t>(i) * D;
                                for (int j = 0; j < D; ++j) {
                                    if (gpi[j] == 0.0) continue;
                                    kernels::axpy(gpi[j],
                                                  (*pr.w)->val.data() + static_cast<size_t>(j) * D, gxi,
                                                  D);
                                    if (pr.gw)
                                        kernels::axpy(gpi[j], xi,
                                                      pr.gw->data() + static_cast<size_t>(j) * D, D);
                                }
                            }
                        }
                        if (gx)
                            for (int i = 0; i < n; ++i) {
                                const int h = h0 + i / window, w = w0 + i % window;
                                if (h >= H || w >= W) continue;
                                double* dst = gx->data() + (static_cast<int64_t>(h) * W + w) * D;
                                const double* src = gxw.data() + static_cast<size_t>(i) * D;
                                for (int c = 0; c < D; ++c) dst[c] += src[c];
                            }
                    }
                });
}

}  // namespace jffra::ag
