#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "jffra/flow_provider.hpp"
#include "jffra/resample.hpp"
#include "test_util.hpp"

using namespace jffra;
using test::rand_tensor;

namespace {

// band-limited random frame so block matching has texture to lock onto
Tensor textured_frame(uint64_t seed, int h, int w) {
    Rng rng(seed);
    Tensor f({h, w, 1});
    const double a1 = rng.uniform() * 2.0 * M_PI, a2 = rng.uniform() * 2.0 * M_PI;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            f.at(i, j, 0) = 0.5 + 0.2 * std::sin(0.7 * i + a1) + 0.2 * std::cos(0.9 * j + a2) +
                            0.1 * std::sin(0.35 * (i + j));
    return f;
}

Tensor shift_frame(const Tensor& f, int dy, int dx) {
    // shifted[h,w] = f[h+dy, w+dx] with edge clamping (content moves by (-dx,-dy))
    Tensor out(f.shape());
    const int H = f.dim(0), W = f.dim(1);
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w)
            out.at(h, w, 0) = f.at(std::clamp(h + dy, 0, H - 1), std::clamp(w + dx, 0, W - 1), 0);
    return out;
}

}  // namespace

TEST_CASE("identical frames give zero flow") {
    Tensor f = textured_frame(1, 32, 32);
    FlowProvider p;
    FlowField flow = estimate_flow(p, f, f);
    for (int64_t i = 0; i < flow.values.numel(); ++i) CHECK(flow.values[i] == 0.0);
}

TEST_CASE("block matching recovers integer translations in the interior") {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        Rng rng(100 + seed);
        const int dx = rng.uniform_int(-4, 4), dy = rng.uniform_int(-4, 4);
        Tensor ref = textured_frame(seed, 40, 40);
        // other[h,w] = ref[h-dy, w-dx]: sampling other at (w+dx, h+dy) returns ref
        Tensor other = shift_frame(ref, -dy, -dx);
        FlowProvider p;
        FlowField flow = estimate_flow(p, ref, other);
        // interior blocks away from the clamped edges must match exactly
        for (int h = 12; h < 28; ++h)
            for (int w = 12; w < 28; ++w) {
                CHECK(flow.values.at(h, w, 0) == doctest::Approx(dx).epsilon(1e-9));
                CHECK(flow.values.at(h, w, 1) == doctest::Approx(dy).epsilon(1e-9));
            }
    }
}

TEST_CASE("block matching tolerates mild noise") {
    Tensor ref = textured_frame(42, 40, 40);
    Tensor other = shift_frame(ref, -2, -3);  // true flow (dx, dy) = (3, 2)
    std::mt19937_64 eng(7);
    std::normal_distribution<double> noise(0.0, 10.0 / 255.0);
    for (int64_t i = 0; i < other.numel(); ++i)
        other[i] = std::clamp(other[i] + noise(eng), 0.0, 1.0);
    FlowProvider p;
    FlowField flow = estimate_flow(p, ref, other);
    double err = 0.0;
    int n = 0;
    for (int h = 12; h < 28; ++h)
        for (int w = 12; w < 28; ++w) {
            err += std::hypot(flow.values.at(h, w, 0) - 3.0, flow.values.at(h, w, 1) - 2.0);
            ++n;
        }
    CHECK(err / n < 1.0);
}

TEST_CASE("ties resolve to the smallest displacement") {
    // constant frames: every candidate scores identically
    Tensor f({16, 16, 1}, 0.5);
    FlowProvider p;
    FlowField flow = estimate_flow(p, f, f);
    for (int64_t i = 0; i < flow.values.numel(); ++i) CHECK(flow.values[i] == 0.0);
}

TEST_CASE("synthetic translation flow warps the shifted frame back") {
    Tensor ref = textured_frame(5, 24, 24);
    FlowField flow = synthetic_flow(FlowProvider::Motion::translation, 24, 24, 2.0, -1.0, 0.0);
    // warp samples other at (w+2, h-1), so other[h-1, w+2] must equal ref[h, w]
    Tensor other = shift_frame(ref, 1, -2);
    Tensor warped = warp(other, flow);
    for (int h = 4; h < 20; ++h)
        for (int w = 4; w < 20; ++w)
            CHECK(warped.at(h, w, 0) == doctest::Approx(ref.at(h, w, 0)).epsilon(1e-9));
}

TEST_CASE("synthetic oracle scales motion by signed frame distance") {
    FlowProvider p;
    p.kind = FlowProvider::Kind::synthetic_oracle;
    p.tx = 1.5;
    p.ty = -0.5;
    Tensor f({8, 8, 1}, 0.5);
    FlowField prev = estimate_flow(p, f, f, 3, 2);  // one step back
    CHECK(prev.values.at(0, 0, 0) == doctest::Approx(-1.5));
    CHECK(prev.values.at(0, 0, 1) == doctest::Approx(0.5));
    FlowField next2 = estimate_flow(p, f, f, 3, 5);  // two steps forward
    CHECK(next2.values.at(0, 0, 0) == doctest::Approx(3.0));
    CHECK(next2.values.at(0, 0, 1) == doctest::Approx(-1.0));
    FlowField same = estimate_flow(p, f, f, 3, 3);
    CHECK(same.values.at(0, 0, 0) == 0.0);
}

TEST_CASE("synthetic rotation flow is zero at the center and bounded") {
    FlowField flow = synthetic_flow(FlowProvider::Motion::rotation_small, 9, 9, 0.0, 0.0, 5.0);
    CHECK(flow.values.at(4, 4, 0) == doctest::Approx(0.0));
    CHECK(flow.values.at(4, 4, 1) == doctest::Approx(0.0));
    // |flow| <= r * theta at the corners
    const double theta = 5.0 * M_PI / 180.0;
    const double rmax = std::sqrt(32.0);
    for (int h = 0; h < 9; ++h)
        for (int w = 0; w < 9; ++w)
            CHECK(std::hypot(flow.values.at(h, w, 0), flow.values.at(h, w, 1)) <=
                  rmax * theta + 1e-9);

    CHECK_THROWS_AS(synthetic_flow(FlowProvider::Motion::rotation_small, 4, 4, 0, 0, 6.0),
                    ParamError);
    CHECK_THROWS_AS(synthetic_flow(FlowProvider::Motion::translation, 4, 4, 9.0, 0, 0),
                    ParamError);
}

TEST_CASE("flow files round-trip through the binary format") {
    Rng rng(77);
    FlowField flow{rand_tensor(rng, {6, 9, 2}, -8.0, 8.0), 2, 1};
    const std::string path = "test_flow.jflo";
    write_flow_file(path, flow);
    FlowField back = read_flow_file(path);
    REQUIRE(back.h() == 6);
    REQUIRE(back.w() == 9);
    for (int64_t i = 0; i < flow.values.numel(); ++i)
        CHECK(back.values[i] == doctest::Approx(flow.values[i]).epsilon(1e-6));
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_flow_file("missing.jflo"), DataError);
}

TEST_CASE("external provider reads per-pair files") {
    namespace fs = std::filesystem;
    fs::create_directories("test_flows");
    FlowField flow{Tensor({8, 8, 2}, 1.25), 1, 0};
    write_flow_file("test_flows/flow_000001_000000.jflo", flow);
    FlowProvider p;
    p.kind = FlowProvider::Kind::external;
    p.flow_dir = "test_flows";
    Tensor f({8, 8, 1}, 0.5);
    FlowField got = estimate_flow(p, f, f, 1, 0);
    CHECK(got.from_time == 1);
    CHECK(got.to_time == 0);
    for (int64_t i = 0; i < got.values.numel(); ++i) CHECK(got.values[i] == doctest::Approx(1.25));
    fs::remove_all("test_flows");
}
