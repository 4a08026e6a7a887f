#pragma once

#include <cstdint>
#include <random>

#include "jffra/tensor.hpp"

namespace jffra {

struct Rng {
    std::mt19937_64 eng;

    explicit Rng(uint64_t seed) : eng(seed) {}

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }

    Tensor randn(std::vector<int> shape, double stddev) {
        Tensor t(std::move(shape));
        for (int64_t i = 0; i < t.numel(); ++i) t[i] = normal() * stddev;
        return t;
    }
};

}  // namespace jffra
