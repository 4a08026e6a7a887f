#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jffra/losses.hpp"
#include "test_util.hpp"

using namespace jffra;
using test::fd_check;
using test::rand_tensor;

namespace {

FlowField zero_flow(int h, int w) { return FlowField{Tensor({h, w, 2})}; }

}  // namespace

TEST_CASE("temporal loss vanishes for identical aligned frames") {
    Rng rng(1);
    Tensor gt = rand_tensor(rng, {4, 4, 3});
    auto r = ag::constant(rand_tensor(rng, {4, 4, 3}));
    auto loss = temporal_consistency_loss(r, r, gt, gt, zero_flow(4, 4), 0.2);
    CHECK(loss->val[0] == doctest::Approx(0.0));
}

TEST_CASE("1x1x1 hand value") {
    Tensor gt({1, 1, 1}, 0.5);
    auto rt = ag::constant(Tensor({1, 1, 1}, 0.8));
    auto ro = ag::constant(Tensor({1, 1, 1}, 0.5));
    // GT pair identical -> mask 1; |0.8 - 0.5| = 0.3
    auto loss = temporal_consistency_loss(rt, ro, gt, gt, zero_flow(1, 1), 0.2);
    CHECK(loss->val[0] == doctest::Approx(0.3));
}

TEST_CASE("near-zero mask suppresses restored-frame differences") {
    Tensor gt_t({1, 1, 1}, 1.0);
    Tensor gt_o({1, 1, 1}, 0.0);
    auto rt = ag::constant(Tensor({1, 1, 1}, 1.0));
    auto ro = ag::constant(Tensor({1, 1, 1}, 0.0));
    // alpha huge -> mask = exp(-1e8) ~ 0
    auto loss = temporal_consistency_loss(rt, ro, gt_t, gt_o, zero_flow(1, 1), 1e8);
    CHECK(loss->val[0] < 1e-12);
    CHECK(loss->val[0] >= 0.0);
}

TEST_CASE("perturbations under a tiny mask move the loss proportionally little") {
    Rng rng(2);
    Tensor gt_t = rand_tensor(rng, {3, 3, 1});
    Tensor gt_o(gt_t.shape());
    for (int64_t i = 0; i < gt_o.numel(); ++i) gt_o[i] = gt_t[i] + 6.0;  // mask ~ exp(-7.2)
    auto rt = ag::constant(rand_tensor(rng, {3, 3, 1}));
    Tensor ro_v = rand_tensor(rng, {3, 3, 1});
    auto l0 = temporal_consistency_loss(rt, ag::constant(ro_v), gt_t, gt_o, zero_flow(3, 3), 5.0);
    ro_v[4] += 0.5;
    auto l1 = temporal_consistency_loss(rt, ag::constant(ro_v), gt_t, gt_o, zero_flow(3, 3), 5.0);
    CHECK(std::fabs(l1->val[0] - l0->val[0]) < 1e-6 * 0.5);
}

TEST_CASE("total loss composes components with the configured weights") {
    Rng rng(3);
    Tensor gt_t = rand_tensor(rng, {4, 4, 3});
    Tensor gt_p = rand_tensor(rng, {4, 4, 3});
    Tensor gt_n = rand_tensor(rng, {4, 4, 3});
    auto rt = ag::constant(rand_tensor(rng, {4, 4, 3}));
    auto rp = ag::constant(rand_tensor(rng, {4, 4, 3}));
    auto rn = ag::constant(rand_tensor(rng, {4, 4, 3}));
    LossWeights w;  // defaults 0.2 / 0.2 / 0.2

    TotalLoss tl = total_loss(rt, gt_t, rp, rn, gt_p, gt_n, zero_flow(4, 4), zero_flow(4, 4), w);
    CHECK(tl.total->val[0] == doctest::Approx(tl.reconstruction + 0.2 * tl.temporal_prev +
                                              0.2 * tl.temporal_next));
    CHECK(tl.reconstruction >= 0.0);
    CHECK(tl.temporal_prev >= 0.0);
    CHECK(tl.temporal_next >= 0.0);

    LossWeights w0;
    w0.w1 = 0.0;
    w0.w2 = 0.0;
    TotalLoss plain = total_loss(rt, gt_t, rp, rn, gt_p, gt_n, zero_flow(4, 4), zero_flow(4, 4), w0);
    CHECK(plain.total->val[0] == doctest::Approx(plain.reconstruction));

    // perfect restoration of a static scene: zero flow aligns neighbors exactly
    TotalLoss zero = total_loss(ag::constant(gt_t), gt_t, ag::constant(gt_t), ag::constant(gt_t),
                                gt_t, gt_t, zero_flow(4, 4), zero_flow(4, 4), w);
    CHECK(zero.total->val[0] == doctest::Approx(0.0));

    LossWeights bad;
    bad.w1 = -0.1;
    CHECK_THROWS_AS(total_loss(rt, gt_t, rp, rn, gt_p, gt_n, zero_flow(4, 4), zero_flow(4, 4), bad),
                    ConfigError);
}

TEST_CASE("total loss gradients pass finite differences") {
    Rng rng(4);
    Tensor gt_t = rand_tensor(rng, {4, 4, 1});
    Tensor gt_p = rand_tensor(rng, {4, 4, 1});
    Tensor gt_n = rand_tensor(rng, {4, 4, 1});
    Tensor fl({4, 4, 2});
    for (int64_t i = 0; i < fl.numel(); ++i) fl[i] = (rng.uniform() - 0.5) * 1.3 + 0.2;
    FlowField flow_p{fl}, flow_n{fl};
    auto rt = ag::param(rand_tensor(rng, {4, 4, 1}));
    auto rp = ag::param(rand_tensor(rng, {4, 4, 1}));
    auto rn = ag::param(rand_tensor(rng, {4, 4, 1}));
    LossWeights w;
    auto build = [&] {
        return total_loss(rt, gt_t, rp, rn, gt_p, gt_n, flow_p, flow_n, w).total;
    };
    auto rep = fd_check(build, {rt, rp, rn}, 100, 5, 1e-6, 1e-4);
    CHECK(rep.pass_rate() >= 0.95);
}

TEST_CASE("gradients flow only through restored frames, not GT inputs") {
    Rng rng(5);
    Tensor gt_t = rand_tensor(rng, {3, 3, 1});
    Tensor gt_o = rand_tensor(rng, {3, 3, 1});
    auto rt = ag::param(rand_tensor(rng, {3, 3, 1}));
    auto ro = ag::param(rand_tensor(rng, {3, 3, 1}));
    auto loss = temporal_consistency_loss(rt, ro, gt_t, gt_o, zero_flow(3, 3), 0.2);
    ag::backward(loss);
    // perturbing GT changes the mask constant but the same graph still only
    // reaches rt and ro; both receive gradient
    double g = 0.0;
    for (int64_t i = 0; i < rt->g().numel(); ++i) g += std::fabs(rt->g()[i]) + std::fabs(ro->g()[i]);
    CHECK(g > 0.0);
}
