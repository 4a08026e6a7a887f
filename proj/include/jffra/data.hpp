#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jffra/core_types.hpp"
#include "jffra/flow_provider.hpp"

namespace jffra {

struct DegradationSpec {
    enum class Kind { awgn, bicubic_x4, none };
    Kind kind = Kind::none;
    double sigma = 0.0;  // 0-255 scale, applied as sigma/255
    uint64_t seed = 0;

    void validate() const;
};

DegradationSpec::Kind degradation_kind_from_name(const std::string& s);

// awgn: add i.i.d. Gaussian noise (sigma/255), clamp to [0,1];
// bicubic_x4: antialiased bicubic downsample of each frame by 4; none: identity.
VideoClip degrade(const VideoClip& clip, const DegradationSpec& spec);

// Immutable index of a `root/<clip>/NNNNNN.png` dataset layout.
struct Dataset {
    struct ClipEntry {
        std::string name;
        std::vector<std::string> frame_paths;
        int t = 0, h = 0, w = 0, c = 0;
    };
    std::vector<ClipEntry> clips;

    int total_frames() const;
};

// manifest: clip names to include; empty = all clips under root.
Dataset ingest_dataset(const std::string& root, const std::vector<std::string>& manifest = {});
std::vector<std::string> read_manifest(const std::string& path);

VideoClip load_clip(const Dataset::ClipEntry& entry);
void save_clip(const VideoClip& clip, const std::string& dir);

struct PatchOrigin {
    int clip = 0, t = 0, h0 = 0, w0 = 0;
};

struct SampleBatch {
    std::vector<FrameWindow> lq_windows;
    std::vector<FrameWindow> hq_windows;
    std::vector<std::pair<FlowField, FlowField>> gt_flows;  // (prev, next) per window
    std::vector<PatchOrigin> patch_origin;
};

// Uniform clip/time/patch sampling; the same crop is applied to LQ and HQ, GT
// flows come from the configured provider on the HQ patches. Deterministic
// given rng_seed. For sr_x4 the LQ patch is the bicubic x4 downsample of the
// HQ patch crop (crop aligned to multiples of 4).
SampleBatch sample_batch(const std::vector<VideoClip>& hq_clips,
                         const std::vector<VideoClip>& lq_clips, int batch_size, int patch,
                         int t_in, const FlowProvider& gt_provider, uint64_t rng_seed,
                         bool sr_mode = false);

}  // namespace jffra
