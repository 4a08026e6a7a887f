#include "jffra/autograd.hpp"

#include <cmath>
#include <unordered_set>

namespace jffra::ag {

static thread_local bool g_grad_enabled = true;

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Var constant(Tensor t) {
    auto n = std::make_shared<Node>();
    n->val = std::move(t);
    return n;
}

Var param(Tensor t) {
    auto n = std::make_shared<Node>();
    n->val = std::move(t);
    n->requires_grad = true;
    return n;
}

Var make(Tensor val, std::vector<Var> inputs, std::function<void(Node&)> bwd) {
    auto n = std::make_shared<Node>();
    n->val = std::move(val);
    bool need = false;
    if (g_grad_enabled)
        for (const auto& in : inputs)
            if (in->requires_grad) need = true;
    if (need) {
        n->requires_grad = true;
        n->is_leaf = false;
        n->inputs = std::move(inputs);
        n->backward_fn = std::move(bwd);
    }
    return n;
}

void backward(const Var& loss) {
    if (loss->val.numel() != 1)
        throw ParamError("backward: loss must be scalar");
    // iterative DFS topological order
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx == 0 && visited.count(node)) {
            stack.pop_back();
            continue;
        }
        if (idx < node->inputs.size()) {
            Node* child = node->inputs[idx].get();
            ++idx;
            if (!visited.count(child) && child->requires_grad) stack.emplace_back(child, 0);
        } else {
            if (!visited.count(node)) {
                visited.insert(node);
                order.push_back(node);
            }
            stack.pop_back();
        }
    }
    loss->g()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (!n->is_leaf && n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

void zero_grad(const std::vector<Var>& params) {
    for (const auto& p : params)
        if (!p->grad.empty()) p->grad.zero();
}

// ---- elementwise ----

Var add(const Var& a, const Var& b) {
    require_same_shape(a->val, b->val, "add");
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->val[i] + b->val[i];
    return make(std::move(out), {a, b}, [](Node& self) {
        const int64_t n = self.val.numel();
        for (int k = 0; k < 2; ++k)
            if (self.inputs[k]->requires_grad) {
                Tensor& g = self.inputs[k]->g();
                for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i];
            }
    });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a->val, b->val, "sub");
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->val[i] - b->val[i];
    return make(std::move(out), {a, b}, [](Node& self) {
        const int64_t n = self.val.numel();
        if (self.inputs[0]->requires_grad) {
            Tensor& g = self.inputs[0]->g();
            for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i];
        }
        if (self.inputs[1]->requires_grad) {
            Tensor& g = self.inputs[1]->g();
            for (int64_t i = 0; i < n; ++i) g[i] -= self.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a->val, b->val, "mul");
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->val[i] * b->val[i];
    return make(std::move(out), {a, b}, [](Node& self) {
        const int64_t n = self.val.numel();
        if (self.inputs[0]->requires_grad) {
            Tensor& g = self.inputs[0]->g();
            const Tensor& bv = self.inputs[1]->val;
            for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i] * bv[i];
        }
        if (self.inputs[1]->requires_grad) {
            Tensor& g = self.inputs[1]->g();
            const Tensor& av = self.inputs[0]->val;
            for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i] * av[i];
        }
    });
}

Var scale(const Var& a, double s) {
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->val[i] * s;
    return make(std::move(out), {a}, [s](Node& self) {
        Tensor& g = self.inputs[0]->g();
        const int64_t n = self.val.numel();
        for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i] * s;
    });
}

Var add_scalar(const Var& a, double s) {
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->val[i] + s;
    return make(std::move(out), {a}, [](Node& self) {
        Tensor& g = self.inputs[0]->g();
        const int64_t n = self.val.numel();
        for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i];
    });
}

Var leaky_relu(const Var& a, double slope) {
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->val[i] > 0.0 ? a->val[i] : slope * a->val[i];
    return make(std::move(out), {a}, [slope](Node& self) {
        Tensor& g = self.inputs[0]->g();
        const Tensor& av = self.inputs[0]->val;
        const int64_t n = self.val.numel();
        for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i] * (av[i] > 0.0 ? 1.0 : slope);
    });
}

Var exp_(const Var& a) {
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = std::exp(a->val[i]);
    return make(std::move(out), {a}, [](Node& self) {
        Tensor& g = self.inputs[0]->g();
        const int64_t n = self.val.numel();
        for (int64_t i = 0; i < n; ++i) g[i] += self.grad[i] * self.val[i];
    });
}

Var clamp01(const Var& a) {
    Tensor out(a->val.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) {
        const double v = a->val[i];
        // keep NaN visible instead of silently clamping it to 0
        out[i] = std::isnan(v) ? v : std::min(1.0, std::max(0.0, v));
    }
    return make(std::move(out), {a}, [](Node& self) {
        Tensor& g = self.inputs[0]->g();
        const Tensor& av = self.inputs[0]->val;
        const int64_t n = self.val.numel();
        for (int64_t i = 0; i < n; ++i)
            if (av[i] > 0.0 && av[i] < 1.0) g[i] += self.grad[i];
    });
}

Var sum_all(const Var& a) {
    Tensor out({1});
    const int64_t n = a->val.numel();
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += a->val[i];
    out[0] = s;
    return make(std::move(out), {a}, [](Node& self) {
        Tensor& g = self.inputs[0]->g();
        const int64_t n = g.numel();
        const double d = self.grad[0];
        for (int64_t i = 0; i < n; ++i) g[i] += d;
    });
}

Var mean_all(const Var& a) {
    const int64_t n = a->val.numel();
    return scale(sum_all(a), n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
}

Var l1_mean(const Var& a, const Var& b) {
    require_same_shape(a->val, b->val, "l1_mean");
    if (a->val.ndim() != 3) throw ShapeError("l1_mean: expected H x W x C");
    const int64_t pixels = static_cast<int64_t>(a->val.dim(0)) * a->val.dim(1);
    const int64_t n = a->val.numel();
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += std::fabs(a->val[i] - b->val[i]);
    Tensor out({1});
    out[0] = s / static_cast<double>(pixels);
    return make(std::move(out), {a, b}, [pixels](Node& self) {
        const Tensor& av = self.inputs[0]->val;
        const Tensor& bv = self.inputs[1]->val;
        const int64_t n = av.numel();
        const double d = self.grad[0] / static_cast<double>(pixels);
        for (int k = 0; k < 2; ++k) {
            if (!self.inputs[k]->requires_grad) continue;
            Tensor& g = self.inputs[k]->g();
            const double sgn_mult = (k == 0) ? 1.0 : -1.0;
            for (int64_t i = 0; i < n; ++i) {
                const double diff = av[i] - bv[i];
                if (diff > 0.0)
                    g[i] += sgn_mult * d;
                else if (diff < 0.0)
                    g[i] -= sgn_mult * d;
            }
        }
    });
}

Var masked_l1_mean(const Var& a, const Var& b, const Var& mask) {
    require_same_shape(a->val, b->val, "masked_l1_mean");
    if (a->val.ndim() != 3 || mask->val.ndim() != 2)
        throw ShapeError("masked_l1_mean: expected H x W x C frames and H x W mask");
    if (mask->val.dim(0) != a->val.dim(0) || mask->val.dim(1) != a->val.dim(1))
        throw ShapeError("masked_l1_mean: mask spatial shape mismatch");
    const int H = a->val.dim(0), W = a->val.dim(1), C = a->val.dim(2);
    const int64_t pixels = static_cast<int64_t>(H) * W;
    double s = 0.0;
    for (int64_t p = 0; p < pixels; ++p) {
        double d = 0.0;
        for (int c = 0; c < C; ++c) d += std::fabs(a->val[p * C + c] - b->val[p * C + c]);
        s += mask->val[p] * d;
    }
    Tensor out({1});
    out[0] = s / static_cast<double>(pixels);
    return make(std::move(out), {a, b, mask}, [C, pixels](Node& self) {
        const Tensor& av = self.inputs[0]->val;
        const Tensor& bv = self.inputs[1]->val;
        const Tensor& mv = self.inputs[2]->val;
        const double d0 = self.grad[0] / static_cast<double>(pixels);
        for (int k = 0; k < 2; ++k) {
            if (!self.inputs[k]->requires_grad) continue;
            Tensor& g = self.inputs[k]->g();
            const double sgn_mult = (k == 0) ? 1.0 : -1.0;
            for (int64_t p = 0; p < pixels; ++p) {
                const double dm = d0 * mv[p];
                for (int c = 0; c < C; ++c) {
                    const double diff = av[p * C + c] - bv[p * C + c];
                    if (diff > 0.0)
                        g[p * C + c] += sgn_mult * dm;
                    else if (diff < 0.0)
                        g[p * C + c] -= sgn_mult * dm;
                }
            }
        }
        if (self.inputs[2]->requires_grad) {
            Tensor& g = self.inputs[2]->g();
            for (int64_t p = 0; p < pixels; ++p) {
                double d = 0.0;
                for (int c = 0; c < C; ++c) d += std::fabs(av[p * C + c] - bv[p * C + c]);
                g[p] += d0 * d;
            }
        }
    });
}

Var concat_channels(const std::vector<Var>& xs) {
    if (xs.empty()) throw ParamError("concat_channels: empty input");
    const int H = xs[0]->val.dim(0), W = xs[0]->val.dim(1);
    int Ctot = 0;
    for (const auto& x : xs) {
        if (x->val.ndim() != 3 || x->val.dim(0) != H || x->val.dim(1) != W)
            throw ShapeError("concat_channels: spatial shape mismatch");
        Ctot += x->val.dim(2);
    }
    Tensor out({H, W, Ctot});
    const int64_t pixels = static_cast<int64_t>(H) * W;
    for (int64_t p = 0; p < pixels; ++p) {
        int off = 0;
        for (const auto& x : xs) {
            const int c = x->val.dim(2);
            for (int i = 0; i < c; ++i) out[p * Ctot + off + i] = x->val[p * c + i];
            off += c;
        }
    }
    return make(std::move(out), xs, [Ctot, pixels](Node& self) {
        for (int64_t p = 0; p < pixels; ++p) {
            int off = 0;
            for (auto& x : self.inputs) {
                const int c = x->val.dim(2);
                if (x->requires_grad) {
                    Tensor& g = x->g();
                    for (int i = 0; i < c; ++i) g[p * c + i] += self.grad[p * Ctot + off + i];
                }
                off += c;
            }
        }
    });
}

std::vector<Var> split_channels(const Var& x, const std::vector<int>& widths) {
    if (x->val.ndim() != 3) throw ShapeError("split_channels: expected H x W x C");
    const int H = x->val.dim(0), W = x->val.dim(1), C = x->val.dim(2);
    int total = 0;
    for (int w : widths) total += w;
    if (total != C) throw ShapeError("split_channels: widths do not sum to channel count");
    const int64_t pixels = static_cast<int64_t>(H) * W;
    std::vector<Var> out;
    int off = 0;
    for (int wdt : widths) {
        Tensor t({H, W, wdt});
        for (int64_t p = 0; p < pixels; ++p)
            for (int i = 0; i < wdt; ++i) t[p * wdt + i] = x->val[p * C + off + i];
        const int o = off;
        out.push_back(make(std::move(t), {x}, [o, wdt, C, pixels](Node& self) {
            Tensor& g = self.inputs[0]->g();
            for (int64_t p = 0; p < pixels; ++p)
                for (int i = 0; i < wdt; ++i) g[p * C + o + i] += self.grad[p * wdt + i];
        }));
        off += wdt;
    }
    return out;
}

Var crop2d(const Var& x, int h0, int w0, int h, int w) {
    if (x->val.ndim() != 3) throw ShapeError("crop2d: expected H x W x C");
    const int H = x->val.dim(0), W = x->val.dim(1), C = x->val.dim(2);
    if (h0 < 0 || w0 < 0 || h0 + h > H || w0 + w > W) throw ParamError("crop2d: window out of bounds");
    Tensor out({h, w, C});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int c = 0; c < C; ++c) out.at(i, j, c) = x->val.at(i + h0, j + w0, c);
    return make(std::move(out), {x}, [h0, w0, h, w, C](Node& self) {
        Tensor& g = self.inputs[0]->g();
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                for (int c = 0; c < C; ++c) g.at(i + h0, j + w0, c) += self.grad.at(i, j, c);
    });
}

Var pad2d_zero(const Var& x, int h, int w) {
    if (x->val.ndim() != 3) throw ShapeError("pad2d_zero: expected H x W x C");
    const int H = x->val.dim(0), W = x->val.dim(1), C = x->val.dim(2);
    if (h < H || w < W) throw ParamError("pad2d_zero: target smaller than input");
    if (h == H && w == W) return x;
    Tensor out({h, w, C});
    for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j)
            for (int c = 0; c < C; ++c) out.at(i, j, c) = x->val.at(i, j, c);
    return make(std::move(out), {x}, [H, W, C](Node& self) {
        Tensor& g = self.inputs[0]->g();
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j)
                for (int c = 0; c < C; ++c) g.at(i, j, c) += self.grad.at(i, j, c);
    });
}

}  // namespace jffra::ag
