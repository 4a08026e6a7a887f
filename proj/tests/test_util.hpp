#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "jffra/autograd.hpp"
#include "jffra/rng.hpp"

namespace jffra::test {

struct FdReport {
    int checked = 0;
    int passed = 0;
    double worst = 0.0;

    double pass_rate() const { return checked ? static_cast<double>(passed) / checked : 1.0; }
};

// Central-difference gradient check of a scalar loss against reverse-mode
// gradients, on `samples` randomly chosen parameter coordinates.
inline FdReport fd_check(const std::function<ag::Var()>& build,
                         const std::vector<ag::Var>& params, int samples, uint64_t seed,
                         double eps = 1e-6, double tol = 1e-4) {
    ag::zero_grad(params);
    ag::Var loss = build();
    ag::backward(loss);
    std::vector<Tensor> grads;
    for (const auto& p : params) grads.push_back(p->g());

    std::vector<std::pair<int, int64_t>> coords;
    for (int pi = 0; pi < static_cast<int>(params.size()); ++pi)
        for (int64_t j = 0; j < params[static_cast<size_t>(pi)]->val.numel(); ++j)
            coords.emplace_back(pi, j);

    Rng rng(seed);
    FdReport rep;
    for (int s = 0; s < samples && !coords.empty(); ++s) {
        const auto [pi, j] = coords[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int>(coords.size()) - 1))];
        double& v = params[static_cast<size_t>(pi)]->val[j];
        const double saved = v;
        v = saved + eps;
        const double lp = build()->val[0];
        v = saved - eps;
        const double lm = build()->val[0];
        v = saved;
        const double fd = (lp - lm) / (2.0 * eps);
        const double an = grads[static_cast<size_t>(pi)][j];
        const double err = std::abs(an - fd) / std::max({1.0e-6, std::abs(an), std::abs(fd)});
        ++rep.checked;
        if (err < tol || std::abs(an - fd) < 1e-9) ++rep.passed;
        rep.worst = std::max(rep.worst, err);
    }
    return rep;
}

inline Tensor rand_tensor(Rng& rng, std::vector<int> shape, double lo = 0.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = lo + (hi - lo) * rng.uniform();
    return t;
}

}  // namespace jffra::test
