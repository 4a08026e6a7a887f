#pragma once

#include "jffra/core_types.hpp"

namespace jffra {

// 4-d L1 cost volume: values[l+r, m+r, h, w] = sum_c |f_ref[h,w,c] -
// f_proj[h+l, w+m, c]|, out-of-grid taps of f_proj read as zero. Index (r, r)
// on the offset axes is displacement (0,0).
struct CostVolume {
    Tensor values;  // (2r+1) x (2r+1) x H x W
    int radius = 0;

    void validate() const;
};

CostVolume build_cost_volume(const FeatureMap& f_ref, const FeatureMap& f_proj, int r);

// Brute-force oracle with the identical contract, explicit loops over
// l, m, h, w, c. Intended for small test inputs.
CostVolume cost_volume_oracle(const FeatureMap& f_ref, const FeatureMap& f_proj, int r);

}  // namespace jffra
