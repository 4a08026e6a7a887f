#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jffra/metrics.hpp"
#include "test_util.hpp"

using namespace jffra;
using test::rand_tensor;

TEST_CASE("psnr hand values") {
    Rng rng(1);
    Tensor a = rand_tensor(rng, {8, 8, 3});
    CHECK(std::isinf(psnr(a, a)));

    Tensor b(a.shape());
    for (int64_t i = 0; i < a.numel(); ++i) b[i] = a[i] + 0.1;
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));

    // 8-bit convention: uniform diff 25 at peak 255
    Tensor x({4, 4, 1}, 100.0), y({4, 4, 1}, 125.0);
    CHECK(psnr(x, y, 255.0) == doctest::Approx(20.0 * std::log10(255.0 / 25.0)).epsilon(1e-9));
    CHECK(psnr(x, y, 255.0) == doctest::Approx(20.1720).epsilon(1e-4));

    CHECK(psnr(a, b) == psnr(b, a));
    CHECK_THROWS_AS(psnr(a, Tensor({4, 4, 3})), ShapeError);
}

TEST_CASE("ssim self-similarity, symmetry and range") {
    Rng rng(2);
    Tensor a = rand_tensor(rng, {16, 16, 3});
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    Tensor b = rand_tensor(rng, {16, 16, 3});
    const double s = ssim(a, b);
    CHECK(s == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);

    CHECK_THROWS_AS(ssim(Tensor({8, 8, 1}), Tensor({8, 8, 1})), ParamError);
}

TEST_CASE("ssim of constant images matches the luminance closed form") {
    const double ua = 0.3, ub = 0.8, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    Tensor a({12, 12, 1}, ua), b({12, 12, 1}, ub);
    // zero variance: structure term is c2/c2 = 1
    const double want = (2 * ua * ub + c1) / (ua * ua + ub * ub + c1);
    CHECK(ssim(a, b) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("inverted random images score low ssim") {
    Rng rng(3);
    Tensor a = rand_tensor(rng, {24, 24, 1}, 0.0, 1.0);
    Tensor b(a.shape());
    for (int64_t i = 0; i < a.numel(); ++i) b[i] = 1.0 - a[i];
    CHECK(ssim(a, b) < 0.2);
}

TEST_CASE("opw of a static restored clip against static GT is zero") {
    Tensor frames({3, 16, 16, 1});
    Rng rng(4);
    Tensor f = rand_tensor(rng, {16, 16, 1});
    for (int t = 0; t < 3; ++t)
        for (int64_t i = 0; i < f.numel(); ++i) frames[t * f.numel() + i] = f[i];
    VideoClip clip{frames, std::nullopt};
    FlowProvider p;
    CHECK(opw(clip, clip, p, 0.2) == doctest::Approx(0.0));
}

TEST_CASE("opw grows linearly in a uniform single-frame perturbation") {
    Rng rng(5);
    Tensor f = rand_tensor(rng, {16, 16, 1}, 0.1, 0.7);
    Tensor frames({3, 16, 16, 1});
    for (int t = 0; t < 3; ++t)
        for (int64_t i = 0; i < f.numel(); ++i) frames[t * f.numel() + i] = f[i];
    VideoClip gt{frames, std::nullopt};
    FlowProvider p;
    double prev = 0.0;
    for (double delta : {0.05, 0.10, 0.15}) {
        VideoClip restored = gt;
        for (int64_t i = 0; i < f.numel(); ++i) restored.frames[f.numel() + i] += delta;
        const double v = opw(restored, gt, p, 0.2);
        // frame 1 appears in both consecutive pairs; mask is 1 on static GT
        CHECK(v == doctest::Approx(delta).epsilon(1e-9));
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("opw rejects short or mismatched clips") {
    VideoClip one{Tensor({1, 8, 8, 1}), std::nullopt};
    FlowProvider p;
    CHECK_THROWS_AS(opw(one, one, p, 0.2), ParamError);
}

TEST_CASE("report aggregates are arithmetic means") {
    MetricReport r;
    r.per_frame = {{0, 30.0, 0.9}, {1, 34.0, 0.8}, {2, 32.0, 0.85}};
    r.finalize();
    CHECK(r.mean_psnr == doctest::Approx(32.0).epsilon(1e-9));
    CHECK(r.mean_ssim == doctest::Approx(0.85).epsilon(1e-9));

    r.dataset_id = "clips";
    r.opw = 0.1;
    const std::string text = r.to_text();
    CHECK(text.find("frame 0 psnr 30.000000") != std::string::npos);
    CHECK(text.find("aggregate mean_psnr 32.000000") != std::string::npos);
}
