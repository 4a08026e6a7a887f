#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "jffra/kernels.hpp"
#include "jffra/rng.hpp"

using namespace jffra;

namespace {

std::vector<double> rand_vec(Rng& rng, size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = (rng.uniform() * 2.0 - 1.0) * scale;
    return v;
}

}  // namespace

TEST_CASE("scalar kernels match hand results") {
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, -5.0, 6.0};
    CHECK(kernels::scalar::dot(a, b, 3) == doctest::Approx(12.0));
    CHECK(kernels::scalar::sad(a, b, 3) == doctest::Approx(3.0 + 7.0 + 3.0));
    CHECK(kernels::scalar::sum(a, 3) == doctest::Approx(6.0));
    double y[] = {1.0, 1.0, 1.0};
    kernels::scalar::axpy(2.0, a, y, 3);
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[1] == doctest::Approx(5.0));
    CHECK(y[2] == doctest::Approx(7.0));
}

TEST_CASE("zero-length inputs") {
    CHECK(kernels::scalar::dot(nullptr, nullptr, 0) == 0.0);
    CHECK(kernels::scalar::sad(nullptr, nullptr, 0) == 0.0);
    CHECK(kernels::scalar::sum(nullptr, 0) == 0.0);
    kernels::scalar::axpy(1.0, nullptr, nullptr, 0);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels agree with scalar across sizes and seeds") {
    if (!__builtin_cpu_supports("avx2")) return;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        // sizes straddle the vector width and remainder handling
        for (size_t n : {1ul, 3ul, 4ul, 7ul, 8ul, 15ul, 64ul, 1021ul}) {
            auto a = rand_vec(rng, n, 10.0);
            auto b = rand_vec(rng, n, 10.0);
            const double rd = kernels::scalar::dot(a.data(), b.data(), n);
            const double vd = kernels::avx2::dot(a.data(), b.data(), n);
            CHECK(std::abs(rd - vd) <= 1e-12 * std::max(1.0, std::abs(rd)));
            const double rs = kernels::scalar::sad(a.data(), b.data(), n);
            const double vs = kernels::avx2::sad(a.data(), b.data(), n);
            CHECK(std::abs(rs - vs) <= 1e-12 * std::max(1.0, std::abs(rs)));
            const double ru = kernels::scalar::sum(a.data(), n);
            const double vu = kernels::avx2::sum(a.data(), n);
            CHECK(std::abs(ru - vu) <= 1e-12 * std::max(1.0, std::abs(ru)));
            auto y1 = b, y2 = b;
            kernels::scalar::axpy(1.7, a.data(), y1.data(), n);
            kernels::avx2::axpy(1.7, a.data(), y2.data(), n);
            for (size_t i = 0; i < n; ++i)
                CHECK(std::abs(y1[i] - y2[i]) <= 1e-12 * std::max(1.0, std::abs(y1[i])));
        }
    }
}
#endif

TEST_CASE("active table resolves to a usable implementation") {
    const auto& t = kernels::active();
    CHECK(t.dot != nullptr);
    const double a[] = {2.0, 3.0};
    CHECK(t.dot(a, a, 2) == doctest::Approx(13.0));
    CHECK((std::string(t.name) == "scalar" || std::string(t.name) == "avx2"));
}
