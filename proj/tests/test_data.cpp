#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "jffra/data.hpp"
#include "jffra/image_ops.hpp"
#include "test_util.hpp"

using namespace jffra;
using test::rand_tensor;
namespace fs = std::filesystem;

namespace {

VideoClip random_clip(uint64_t seed, int t, int h, int w, int c) {
    Rng rng(seed);
    Tensor frames = rand_tensor(rng, {t, h, w, c}, 0.1, 0.9);
    return VideoClip{std::move(frames), std::nullopt};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("awgn with sigma 0 is the identity") {
    VideoClip clip = random_clip(1, 2, 8, 8, 3);
    DegradationSpec spec{DegradationSpec::Kind::awgn, 0.0, 7};
    VideoClip out = degrade(clip, spec);
    for (int64_t i = 0; i < clip.frames.numel(); ++i) CHECK(out.frames[i] == clip.frames[i]);
}

TEST_CASE("awgn noise has the configured standard deviation") {
    // mid-gray frames keep clipping negligible
    Tensor frames({4, 64, 64, 1}, 0.5);
    VideoClip clip{frames, std::nullopt};
    DegradationSpec spec{DegradationSpec::Kind::awgn, 25.0, 3};
    VideoClip noisy = degrade(clip, spec);
    double mean = 0.0, var = 0.0;
    const int64_t n = clip.frames.numel();
    for (int64_t i = 0; i < n; ++i) mean += noisy.frames[i] - 0.5;
    mean /= n;
    for (int64_t i = 0; i < n; ++i) {
        const double d = noisy.frames[i] - 0.5 - mean;
        var += d * d;
    }
    const double sd = std::sqrt(var / n);
    CHECK(sd == doctest::Approx(25.0 / 255.0).epsilon(0.02));
    CHECK(std::fabs(mean) < 0.002);
    CHECK(noisy.frames.min() >= 0.0);
    CHECK(noisy.frames.max() <= 1.0);
}

TEST_CASE("awgn is deterministic per seed and varies across seeds") {
    VideoClip clip = random_clip(2, 2, 16, 16, 1);
    DegradationSpec s1{DegradationSpec::Kind::awgn, 15.0, 11};
    VideoClip a = degrade(clip, s1);
    VideoClip b = degrade(clip, s1);
    for (int64_t i = 0; i < a.frames.numel(); ++i) CHECK(a.frames[i] == b.frames[i]);

    DegradationSpec s2{DegradationSpec::Kind::awgn, 15.0, 12};
    VideoClip c = degrade(clip, s2);
    double diff = 0.0;
    for (int64_t i = 0; i < a.frames.numel(); ++i) diff += std::fabs(a.frames[i] - c.frames[i]);
    CHECK(diff > 0.0);
}

TEST_CASE("bicubic_x4 downsamples each frame by 4") {
    VideoClip clip = random_clip(3, 2, 16, 24, 3);
    DegradationSpec spec{DegradationSpec::Kind::bicubic_x4, 0.0, 0};
    VideoClip lq = degrade(clip, spec);
    CHECK(lq.t() == 2);
    CHECK(lq.h() == 4);
    CHECK(lq.w() == 6);
    CHECK(lq.frames.min() >= 0.0);
    CHECK(lq.frames.max() <= 1.0);

    // constant frames survive the antialiased resample exactly
    Tensor flat({1, 16, 16, 1}, 0.25);
    VideoClip out = degrade(VideoClip{flat, std::nullopt}, spec);
    for (int64_t i = 0; i < out.frames.numel(); ++i)
        CHECK(out.frames[i] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("degradation spec validates sigma range") {
    DegradationSpec bad{DegradationSpec::Kind::awgn, 80.0, 0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("clips round-trip through the png directory layout") {
    TempDir dir("test_ds");
    VideoClip clip = random_clip(4, 3, 12, 10, 3);
    save_clip(clip, (dir.path / "clip_a").string());
    save_clip(random_clip(5, 2, 12, 10, 3), (dir.path / "clip_b").string());

    Dataset ds = ingest_dataset(dir.path.string());
    REQUIRE(ds.clips.size() == 2);
    CHECK(ds.clips[0].name == "clip_a");
    CHECK(ds.clips[0].t == 3);
    CHECK(ds.clips[1].t == 2);
    CHECK(ds.total_frames() == 5);

    VideoClip back = load_clip(ds.clips[0]);
    REQUIRE(back.frames.shape() == clip.frames.shape());
    // 8-bit quantization: within half a step
    for (int64_t i = 0; i < clip.frames.numel(); ++i)
        CHECK(std::fabs(back.frames[i] - clip.frames[i]) <= 0.5 / 255.0 + 1e-9);
}

TEST_CASE("manifest filters and dataset errors name the offender") {
    TempDir dir("test_ds_manifest");
    save_clip(random_clip(6, 2, 8, 8, 1), (dir.path / "keep").string());
    save_clip(random_clip(7, 2, 8, 8, 1), (dir.path / "skip").string());

    Dataset ds = ingest_dataset(dir.path.string(), {"keep"});
    REQUIRE(ds.clips.size() == 1);
    CHECK(ds.clips[0].name == "keep");

    std::ofstream mf((dir.path / "manifest.txt").string());
    mf << "# comment line\nkeep \n\n";
    mf.close();
    auto names = read_manifest((dir.path / "manifest.txt").string());
    REQUIRE(names.size() == 1);
    CHECK(names[0] == "keep");

    CHECK_THROWS_AS(ingest_dataset((dir.path / "nope").string()), DataError);

    fs::create_directories(dir.path / "empty_clip");
    CHECK_THROWS_WITH_AS(ingest_dataset(dir.path.string()),
                         doctest::Contains("empty_clip"), DataError);
}

TEST_CASE("inconsistent frame shapes are rejected") {
    TempDir dir("test_ds_bad");
    save_clip(random_clip(8, 1, 8, 8, 1), (dir.path / "bad").string());
    // append a frame of a different size
    VideoClip odd = random_clip(9, 1, 6, 6, 1);
    Tensor f = odd.frame(0);
    {
        VideoClip tmp{Tensor({1, 6, 6, 1}, std::vector<double>(f.data(), f.data() + f.numel())),
                      std::nullopt};
        save_clip(tmp, (dir.path / "bad_tmp").string());
    }
    fs::rename(dir.path / "bad_tmp" / "000000.png", dir.path / "bad" / "000001.png");
    fs::remove_all(dir.path / "bad_tmp");
    CHECK_THROWS_WITH_AS(ingest_dataset(dir.path.string()), doctest::Contains("bad"), DataError);
}

TEST_CASE("sample_batch is deterministic and spatially aligned") {
    std::vector<VideoClip> hq = {random_clip(10, 6, 24, 24, 1), random_clip(11, 5, 24, 24, 1)};
    std::vector<VideoClip> lq;
    for (auto& c : hq) {
        DegradationSpec spec{DegradationSpec::Kind::awgn, 20.0, 1};
        lq.push_back(degrade(c, spec));
    }
    FlowProvider p;
    SampleBatch b1 = sample_batch(hq, lq, 4, 8, 3, p, 99);
    SampleBatch b2 = sample_batch(hq, lq, 4, 8, 3, p, 99);
    REQUIRE(b1.hq_windows.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(b1.patch_origin[i].clip == b2.patch_origin[i].clip);
        CHECK(b1.patch_origin[i].t == b2.patch_origin[i].t);
        CHECK(b1.patch_origin[i].h0 == b2.patch_origin[i].h0);
        CHECK(b1.patch_origin[i].w0 == b2.patch_origin[i].w0);
        for (int64_t j = 0; j < b1.hq_windows[i].frames.numel(); ++j)
            CHECK(b1.hq_windows[i].frames[j] == b2.hq_windows[i].frames[j]);

        // windows never cross clip boundaries
        const auto& po = b1.patch_origin[i];
        CHECK(po.t >= 1);
        CHECK(po.t <= hq[po.clip].t() - 2);

        // the HQ crop matches the clip content at the recorded origin
        Tensor ref = b1.hq_windows[i].reference_frame();
        Tensor src = hq[po.clip].frame(po.t);
        for (int h = 0; h < 8; ++h)
            for (int w = 0; w < 8; ++w)
                CHECK(ref.at(h, w, 0) == src.at(po.h0 + h, po.w0 + w, 0));

        // LQ crop aligns with the degraded clip at the same origin
        Tensor lref = b1.lq_windows[i].reference_frame();
        Tensor lsrc = lq[po.clip].frame(po.t);
        CHECK(lref.at(0, 0, 0) == lsrc.at(po.h0, po.w0, 0));

        CHECK(b1.gt_flows[i].first.values.dim(0) == 8);
        CHECK(b1.gt_flows[i].second.to_time == po.t + 1);
    }
    SampleBatch b3 = sample_batch(hq, lq, 4, 8, 3, p, 100);
    bool same = true;
    for (int i = 0; i < 4 && same; ++i)
        same = b3.patch_origin[i].t == b1.patch_origin[i].t &&
               b3.patch_origin[i].h0 == b1.patch_origin[i].h0 &&
               b3.patch_origin[i].w0 == b1.patch_origin[i].w0;
    CHECK_FALSE(same);
}

TEST_CASE("sr sampling aligns crops to multiples of 4 and downsamples the patch") {
    std::vector<VideoClip> hq = {random_clip(12, 5, 32, 32, 1)};
    FlowProvider p;
    SampleBatch b = sample_batch(hq, {}, 3, 16, 3, p, 5, true);
    for (int i = 0; i < 3; ++i) {
        CHECK(b.patch_origin[i].h0 % 4 == 0);
        CHECK(b.patch_origin[i].w0 % 4 == 0);
        CHECK(b.lq_windows[i].frames.dim(1) == 4);
        CHECK(b.hq_windows[i].frames.dim(1) == 16);
        // LQ patch equals the clamped antialiased bicubic downsample of the HQ crop
        Tensor want = bicubic_resize(b.hq_windows[i].reference_frame(), 4, 4, true);
        for (int64_t j = 0; j < want.numel(); ++j)
            CHECK(b.lq_windows[i].reference_frame()[j] ==
                  doctest::Approx(std::min(1.0, std::max(0.0, want[j]))).epsilon(1e-12));
    }
}
