#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jffra/core_types.hpp"
#include "jffra/rng.hpp"

using namespace jffra;

TEST_CASE("make_clip converts 8-bit values to unit range") {
    Tensor f({2, 2, 1});
    f[0] = 0.0;
    f[1] = 128.0;
    f[2] = 255.0;
    f[3] = 64.0;
    VideoClip clip = make_clip(std::vector<Tensor>{f}, ValueRange::eight_bit);
    CHECK(clip.frames[0] == doctest::Approx(0.0));
    CHECK(clip.frames[1] == doctest::Approx(128.0 / 255.0));
    CHECK(clip.frames[2] == doctest::Approx(1.0));
    CHECK(clip.frames[3] == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("make_clip rejects bad inputs") {
    Tensor f({2, 2, 1}, 0.5);
    CHECK_THROWS_AS(make_clip(std::vector<Tensor>{}, ValueRange::unit), ShapeError);

    Tensor over({2, 2, 1}, 1.5);
    CHECK_THROWS_AS(make_clip(std::vector<Tensor>{over}, ValueRange::unit), RangeError);

    // 8-bit values must be integers in [0,255]
    Tensor frac({2, 2, 1}, 0.5);
    CHECK_THROWS_AS(make_clip(std::vector<Tensor>{frac}, ValueRange::eight_bit), RangeError);

    Tensor other({3, 3, 1}, 0.5);
    CHECK_THROWS_AS(make_clip(std::vector<Tensor>{f, other}, ValueRange::unit), ShapeError);

    Tensor c2({2, 2, 2}, 0.5);
    CHECK_THROWS_AS(make_clip(std::vector<Tensor>{c2}, ValueRange::unit), ShapeError);
}

TEST_CASE("extract_windows enumerates centered windows") {
    Tensor frames({7, 2, 2, 1});
    for (int t = 0; t < 7; ++t)
        for (int i = 0; i < 4; ++i) frames[t * 4 + i] = t / 10.0;
    VideoClip clip{frames, std::nullopt};

    auto wins = extract_windows(clip, 3, 1);
    REQUIRE(wins.size() == 7);  // stride 1: one window per frame
    for (size_t i = 0; i < wins.size(); ++i) {
        CHECK(wins[i].source_time == static_cast<int>(i));
        CHECK(wins[i].reference_index == 1);
        CHECK(wins[i].reference_frame()[0] == doctest::Approx(i / 10.0));
    }
    // boundary windows replicate the edge frame
    CHECK(wins[0].frame(0)[0] == doctest::Approx(0.0));
    CHECK(wins[6].frame(2)[0] == doctest::Approx(0.6));
    // interior windows hold the true neighbors
    CHECK(wins[3].frame(0)[0] == doctest::Approx(0.2));
    CHECK(wins[3].frame(2)[0] == doctest::Approx(0.4));

    auto strided = extract_windows(clip, 3, 2);
    REQUIRE(strided.size() == 4);  // t = 0, 2, 4, 6
    CHECK(strided[1].source_time == 2);

    auto wide = extract_windows(clip, 5, 1);
    REQUIRE(wide.size() == 7);
    CHECK(wide[0].reference_index == 2);

    CHECK_THROWS_AS(extract_windows(clip, 4, 1), ParamError);  // T_in must be odd
}

TEST_CASE("window_at replicates edge frames") {
    Tensor frames({4, 1, 1, 1});
    for (int t = 0; t < 4; ++t) frames[t] = t * 0.1;
    VideoClip clip{frames, std::nullopt};

    auto w0 = window_at(clip, 0, 3);
    CHECK(w0.frame(0)[0] == doctest::Approx(0.0));  // t-1 clamps to 0
    CHECK(w0.frame(1)[0] == doctest::Approx(0.0));
    CHECK(w0.frame(2)[0] == doctest::Approx(0.1));
    CHECK(w0.source_time == 0);

    auto w3 = window_at(clip, 3, 3);
    CHECK(w3.frame(1)[0] == doctest::Approx(0.3));
    CHECK(w3.frame(2)[0] == doctest::Approx(0.3));  // t+1 clamps to 3
}

TEST_CASE("occlusion mask validation enforces (0,1]") {
    OcclusionMask m{Tensor({2, 2}, 0.5)};
    CHECK_NOTHROW(m.validate());
    m.values[0] = 0.0;
    CHECK_THROWS_AS(m.validate(), RangeError);
    m.values[0] = 1.5;
    CHECK_THROWS_AS(m.validate(), RangeError);
}

TEST_CASE("clip validation catches out-of-range values") {
    Tensor frames({2, 2, 2, 3}, 0.5);
    VideoClip clip{frames, std::nullopt};
    CHECK_NOTHROW(clip.validate());
    clip.frames[0] = -0.1;
    CHECK_THROWS_AS(clip.validate(), RangeError);
}
