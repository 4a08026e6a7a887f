#pragma once

#include <optional>
#include <vector>

#include "jffra/tensor.hpp"

namespace jffra {

// Ordered frame sequence, T x H x W x C, values in [0,1].
struct VideoClip {
    Tensor frames;  // T x H x W x C
    std::optional<double> frame_rate;

    int t() const { return frames.dim(0); }
    int h() const { return frames.dim(1); }
    int w() const { return frames.dim(2); }
    int c() const { return frames.dim(3); }

    Tensor frame(int t) const;
    void validate() const;
};

// 2N+1 consecutive frames centered on the frame being restored.
struct FrameWindow {
    Tensor frames;        // T_in x H x W x C
    int reference_index;  // (T_in - 1) / 2
    int source_time;      // index of the reference frame in the parent clip

    int t_in() const { return frames.dim(0); }
    Tensor frame(int t) const;
    Tensor reference_frame() const { return frame(reference_index); }
};

// Per-pixel displacement aligning a source frame onto the reference grid
// (backward-warp convention: sample source at grid + (dx, dy)).
struct FlowField {
    Tensor values;  // H x W x 2 (channel 0 = dx, channel 1 = dy)
    int from_time = 0;
    int to_time = 0;

    int h() const { return values.dim(0); }
    int w() const { return values.dim(1); }
};

struct FeatureMap {
    Tensor values;  // H' x W' x C'
    int level = 0;
};

// Per-pixel weight in (0,1]; exp of a non-positive argument.
struct OcclusionMask {
    Tensor values;  // H x W

    void validate() const;
};

enum class ValueRange { unit, eight_bit };

VideoClip make_clip(const std::vector<Tensor>& frames, ValueRange range);
VideoClip make_clip(Tensor stacked, ValueRange range);

std::vector<FrameWindow> extract_windows(const VideoClip& clip, int t_in, int stride);

// Single window centered at reference time t with edge replication.
FrameWindow window_at(const VideoClip& clip, int t, int t_in);

}  // namespace jffra
