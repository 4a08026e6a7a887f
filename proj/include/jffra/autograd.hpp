#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "jffra/tensor.hpp"

// Reverse-mode autodiff over Tensor. Graphs are built eagerly; backward()
// walks the tape in reverse topological order. Gradients accumulate, so
// call zero_grad on parameters between steps.
namespace jffra::ag {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor val;
    Tensor grad;
    bool requires_grad = false;
    bool is_leaf = true;
    std::vector<Var> inputs;
    std::function<void(Node&)> backward_fn;

    Tensor& g() {
        if (grad.empty() && val.numel() > 0) grad = Tensor(val.shape());
        return grad;
    }
};

Var constant(Tensor t);
Var param(Tensor t);

bool grad_enabled();

// Disables tape recording in scope (inference / detached forwards).
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// Creates an interior node. When grad is disabled or no input requires grad,
// the node is detached (no inputs, no backward_fn).
Var make(Tensor val, std::vector<Var> inputs, std::function<void(Node&)> bwd);

void backward(const Var& loss);

// ---- elementwise / reduction ops ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var leaky_relu(const Var& a, double slope = 0.1);
Var exp_(const Var& a);
Var clamp01(const Var& a);
Var sum_all(const Var& a);
Var mean_all(const Var& a);
// mean over pixels of sum over channels of |a-b|; a,b are H x W x C
Var l1_mean(const Var& a, const Var& b);
// mean over pixels of mask ⊙ (sum over channels |a-b|); mask is H x W
Var masked_l1_mean(const Var& a, const Var& b, const Var& mask);

Var concat_channels(const std::vector<Var>& xs);
std::vector<Var> split_channels(const Var& x, const std::vector<int>& widths);

// Spatial crop of an H x W x C tensor (backward scatters zeros outside).
Var crop2d(const Var& x, int h0, int w0, int h, int w);
// Zero-pad an H x W x C tensor on bottom/right to (h, w).
Var pad2d_zero(const Var& x, int h, int w);

void zero_grad(const std::vector<Var>& params);

}  // namespace jffra::ag
