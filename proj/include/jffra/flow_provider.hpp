#pragma once

#include <string>

#include "jffra/core_types.hpp"

namespace jffra {

// Supplies initial optical flow on degraded inputs behind a pluggable
// interface. block_match is a classical SAD estimator; synthetic_oracle
// returns a fixed analytic field (test harnesses and synthetic ground truth);
// external reads precomputed per-pair .jflo files.
struct FlowProvider {
    enum class Kind { block_match, synthetic_oracle, external };
    Kind kind = Kind::block_match;

    // block_match
    int block_size = 8;
    int search_radius = 8;

    // synthetic_oracle: analytic field evaluated on the frame grid
    enum class Motion { translation, rotation_small };
    Motion motion = Motion::translation;
    double tx = 0.0, ty = 0.0;      // pixels
    double angle_deg = 0.0;         // rotation about frame center

    // external
    std::string flow_dir;
};

// Returns flow aligning `other` onto `ref`'s grid (backward-warp convention).
// For the external kind, frame indices select the file
// <flow_dir>/flow_<ref>_<other>.jflo.
FlowField estimate_flow(const FlowProvider& provider, const Tensor& ref, const Tensor& other,
                        int ref_time = 0, int other_time = 0);

// Analytic ground-truth flow for synthetic motions. translation: constant
// (tx, ty), |t| <= 8 px. rotation_small: rotation about the grid center,
// |angle| <= 5 degrees.
FlowField synthetic_flow(FlowProvider::Motion kind, int h, int w, double tx, double ty,
                         double angle_deg);

// Per-pair binary flow file: magic "JFLO", u32 H, u32 W (little-endian), then
// H*W*2 float32 row-major (dx then dy per pixel).
void write_flow_file(const std::string& path, const FlowField& flow);
FlowField read_flow_file(const std::string& path);

}  // namespace jffra
