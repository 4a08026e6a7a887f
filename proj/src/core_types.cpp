#include "jffra/core_types.hpp"

#include <cmath>
#include <cstring>

namespace jffra {

Tensor VideoClip::frame(int t) const {
    if (t < 0 || t >= frames.dim(0)) throw ParamError("VideoClip::frame: index out of range");
    const int H = frames.dim(1), W = frames.dim(2), C = frames.dim(3);
    Tensor out({H, W, C});
    const int64_t n = out.numel();
    std::memcpy(out.data(), frames.data() + static_cast<int64_t>(t) * n, static_cast<size_t>(n) * sizeof(double));
    return out;
}

void VideoClip::validate() const {
    if (frames.ndim() != 4) throw ShapeError("VideoClip: frames must be T x H x W x C");
    if (t() < 1 || h() < 1 || w() < 1) throw ShapeError("VideoClip: empty dimensions");
    if (c() != 1 && c() != 3) throw ShapeError("VideoClip: C must be 1 or 3");
    for (int64_t i = 0; i < frames.numel(); ++i) {
        const double v = frames[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw RangeError("VideoClip: value outside [0,1]");
    }
}

Tensor FrameWindow::frame(int t) const {
    if (t < 0 || t >= frames.dim(0)) throw ParamError("FrameWindow::frame: index out of range");
    const int H = frames.dim(1), W = frames.dim(2), C = frames.dim(3);
    Tensor out({H, W, C});
    const int64_t n = out.numel();
    std::memcpy(out.data(), frames.data() + static_cast<int64_t>(t) * n, static_cast<size_t>(n) * sizeof(double));
    return out;
}

void OcclusionMask::validate() const {
    if (values.ndim() != 2) throw ShapeError("OcclusionMask: must be H x W");
    for (int64_t i = 0; i < values.numel(); ++i)
        if (!(values[i] > 0.0 && values[i] <= 1.0))
            throw RangeError("OcclusionMask: entry outside (0,1]");
}

VideoClip make_clip(Tensor stacked, ValueRange range) {
    if (stacked.ndim() != 4) throw ShapeError("make_clip: expected T x H x W x C stack");
    if (range == ValueRange::eight_bit) {
        for (int64_t i = 0; i < stacked.numel(); ++i) {
            const double v = stacked[i];
            if (!std::isfinite(v) || v < 0.0 || v > 255.0 || v != std::floor(v))
                throw RangeError("make_clip: eight_bit values must be integers in [0,255]");
            stacked[i] = v / 255.0;
        }
    }
    VideoClip clip{std::move(stacked), std::nullopt};
    clip.validate();
    return clip;
}

VideoClip make_clip(const std::vector<Tensor>& frames, ValueRange range) {
    if (frames.empty()) throw ShapeError("make_clip: empty frame stack");
    const auto& s0 = frames[0].shape();
    if (frames[0].ndim() != 3) throw ShapeError("make_clip: frames must be H x W x C");
    for (const auto& f : frames)
        if (f.shape() != s0) throw ShapeError("make_clip: non-uniform frame shapes");
    Tensor stacked({static_cast<int>(frames.size()), s0[0], s0[1], s0[2]});
    const int64_t n = frames[0].numel();
    for (size_t t = 0; t < frames.size(); ++t)
        std::memcpy(stacked.data() + static_cast<int64_t>(t) * n, frames[t].data(),
                    static_cast<size_t>(n) * sizeof(double));
    return make_clip(std::move(stacked), range);
}

FrameWindow window_at(const VideoClip& clip, int t, int t_in) {
    if (t_in % 2 == 0) throw ParamError("window_at: T_in must be odd");
    if (t < 0 || t >= clip.t()) throw ParamError("window_at: reference time out of range");
    const int n = t_in / 2;
    const int H = clip.h(), W = clip.w(), C = clip.c();
    Tensor frames({t_in, H, W, C});
    const int64_t fsz = static_cast<int64_t>(H) * W * C;
    for (int k = 0; k < t_in; ++k) {
        // edge replication at clip boundaries
        int src = std::clamp(t - n + k, 0, clip.t() - 1);
        std::memcpy(frames.data() + static_cast<int64_t>(k) * fsz,
                    clip.frames.data() + static_cast<int64_t>(src) * fsz,
                    static_cast<size_t>(fsz) * sizeof(double));
    }
    return FrameWindow{std::move(frames), n, t};
}

std::vector<FrameWindow> extract_windows(const VideoClip& clip, int t_in, int stride) {
    if (t_in % 2 == 0) throw ParamError("extract_windows: T_in must be odd");
    if (t_in > clip.t() + 2 * (t_in / 2)) throw ParamError("extract_windows: T_in too large");
    if (stride < 1) throw ParamError("extract_windows: stride must be >= 1");
    std::vector<FrameWindow> out;
    for (int t = 0; t < clip.t(); t += stride) out.push_back(window_at(clip, t, t_in));
    return out;
}

}  // namespace jffra
