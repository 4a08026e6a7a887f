#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jffra/resample.hpp"
#include "jffra/rng.hpp"
#include "test_util.hpp"

using namespace jffra;
using test::rand_tensor;

namespace {

FlowField const_flow(int h, int w, double dx, double dy) {
    Tensor v({h, w, 2});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            v.at(i, j, 0) = dx;
            v.at(i, j, 1) = dy;
        }
    return FlowField{std::move(v)};
}

Tensor ramp(int h, int w) {
    Tensor f({h, w, 1});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) f.at(i, j, 0) = j;
    return f;
}

}  // namespace

TEST_CASE("zero flow is the identity warp") {
    Rng rng(1);
    Tensor f = rand_tensor(rng, {6, 7, 3});
    Tensor out = warp(f, const_flow(6, 7, 0.0, 0.0));
    for (int64_t i = 0; i < f.numel(); ++i) CHECK(out[i] == f[i]);
}

TEST_CASE("integer flow equals exact index shifting with zero padding") {
    Tensor f = ramp(8, 8);
    Tensor out = warp(f, const_flow(8, 8, 1.0, 0.0));
    for (int h = 0; h < 8; ++h) {
        for (int w = 0; w < 7; ++w) CHECK(out.at(h, w, 0) == doctest::Approx(w + 1.0));
        CHECK(out.at(h, 7, 0) == 0.0);  // samples x=8, fully outside
    }

    // random field, random integer in-bounds shift: exact equality
    Rng rng(2);
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Tensor g = rand_tensor(rng, {6, 6, 2});
        const int dx = rng.uniform_int(-2, 2), dy = rng.uniform_int(-2, 2);
        Tensor shifted = warp(g, const_flow(6, 6, dx, dy));
        for (int h = 0; h < 6; ++h)
            for (int w = 0; w < 6; ++w)
                for (int c = 0; c < 2; ++c) {
                    const int sh = h + dy, sw = w + dx;
                    const double want =
                        (sh >= 0 && sh < 6 && sw >= 0 && sw < 6) ? g.at(sh, sw, c) : 0.0;
                    CHECK(shifted.at(h, w, c) == want);
                }
    }
}

TEST_CASE("half-pixel flow on a ramp interpolates linearly") {
    Tensor f = ramp(8, 8);
    Tensor out = warp(f, const_flow(8, 8, 0.5, 0.0));
    for (int h = 0; h < 8; ++h)
        for (int w = 0; w < 6; ++w) CHECK(out.at(h, w, 0) == doctest::Approx(w + 0.5));
}

TEST_CASE("warp is linear in the field argument") {
    Rng rng(3);
    Tensor fl({5, 5, 2});
    for (int64_t i = 0; i < fl.numel(); ++i) fl[i] = (rng.uniform() - 0.5) * 3.0;
    FlowField flow{std::move(fl)};
    Tensor f = rand_tensor(rng, {5, 5, 2}), g = rand_tensor(rng, {5, 5, 2});
    const double a = 1.7, b = -0.4;
    Tensor combo({5, 5, 2});
    for (int64_t i = 0; i < combo.numel(); ++i) combo[i] = a * f[i] + b * g[i];
    Tensor wc = warp(combo, flow), wf = warp(f, flow), wg = warp(g, flow);
    for (int64_t i = 0; i < wc.numel(); ++i)
        CHECK(wc[i] == doctest::Approx(a * wf[i] + b * wg[i]).epsilon(1e-6));
}

TEST_CASE("warp rejects mismatched shapes") {
    Tensor f({4, 4, 1});
    CHECK_THROWS_AS(warp(f, const_flow(5, 4, 0.0, 0.0)), ShapeError);
}

TEST_CASE("scale_flow scales grid and magnitudes together") {
    FlowField flow = const_flow(16, 16, 4.0, -2.0);
    FlowField half = scale_flow(flow, 0.5);
    CHECK(half.h() == 8);
    CHECK(half.w() == 8);
    for (int h = 0; h < 8; ++h)
        for (int w = 0; w < 8; ++w) {
            CHECK(half.values.at(h, w, 0) == doctest::Approx(2.0));
            CHECK(half.values.at(h, w, 1) == doctest::Approx(-1.0));
        }

    FlowField same = scale_flow(flow, 1.0);
    for (int64_t i = 0; i < same.values.numel(); ++i) CHECK(same.values[i] == flow.values[i]);

    // round trip on constants is exact
    FlowField back = scale_flow(half, 2.0);
    for (int64_t i = 0; i < back.values.numel(); ++i)
        CHECK(back.values[i] == doctest::Approx(flow.values[i]));

    CHECK_THROWS_AS(scale_flow(const_flow(2, 2, 0.0, 0.0), 0.1), ParamError);
}

TEST_CASE("smooth flow survives a x2 up/down round trip") {
    // low curvature keeps the bilinear down-up smoothing error tiny
    Tensor v({8, 8, 2});
    for (int h = 0; h < 8; ++h)
        for (int w = 0; w < 8; ++w) {
            v.at(h, w, 0) = std::sin(0.08 * h) + 0.1 * w;
            v.at(h, w, 1) = std::cos(0.06 * w) - 0.05 * h;
        }
    FlowField flow{v};
    FlowField rt = scale_flow(scale_flow(flow, 2.0), 0.5);
    // interior RMS; border pixels see edge-clamped sampling
    double se = 0.0;
    int n = 0;
    for (int h = 1; h < 7; ++h)
        for (int w = 1; w < 7; ++w)
            for (int c = 0; c < 2; ++c) {
                const double d = rt.values.at(h, w, c) - v.at(h, w, c);
                se += d * d;
                ++n;
            }
    CHECK(std::sqrt(se / n) < 1e-3);
}

TEST_CASE("occlusion mask hand values and monotonicity") {
    Tensor ref({1, 1, 3}, 0.0);
    Tensor other({1, 1, 3}, 0.0);
    FlowField zero = const_flow(1, 1, 0.0, 0.0);

    OcclusionMask m1 = compute_occlusion_mask(ref, ref, zero, 0.2);
    CHECK(m1.values[0] == doctest::Approx(1.0));

    // per-channel difference (1,1,1), alpha 0.2 -> exp(-0.6)
    for (int c = 0; c < 3; ++c) other.at(0, 0, c) = 1.0;
    OcclusionMask m2 = compute_occlusion_mask(ref, other, zero, 0.2);
    CHECK(m2.values[0] == doctest::Approx(std::exp(-0.6)).epsilon(1e-9));
    CHECK(m2.values[0] == doctest::Approx(0.5488).epsilon(1e-3));

    // larger differences never increase the mask, entries stay in (0,1]
    double prev = 1.0;
    for (double d = 0.0; d <= 8.0; d += 0.5) {
        for (int c = 0; c < 3; ++c) other.at(0, 0, c) = d;
        const double v = compute_occlusion_mask(ref, other, zero, 0.2).values[0];
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }

    CHECK_THROWS_AS(compute_occlusion_mask(ref, other, zero, 0.0), ParamError);
}
