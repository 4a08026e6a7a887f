#include "jffra/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "jffra/image_ops.hpp"
#include "jffra/png_io.hpp"

namespace fs = std::filesystem;

namespace jffra {

void DegradationSpec::validate() const {
    if (sigma < 0.0 || sigma > 50.0) throw ConfigError("DegradationSpec: sigma must be in [0,50]");
}

DegradationSpec::Kind degradation_kind_from_name(const std::string& s) {
    if (s == "awgn") return DegradationSpec::Kind::awgn;
    if (s == "bicubic_x4") return DegradationSpec::Kind::bicubic_x4;
    if (s == "none") return DegradationSpec::Kind::none;
    throw ConfigError("unknown degradation kind: " + s);
}

VideoClip degrade(const VideoClip& clip, const DegradationSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case DegradationSpec::Kind::none:
            return clip;
        case DegradationSpec::Kind::awgn: {
            VideoClip out = clip;
            if (spec.sigma == 0.0) return out;
            std::mt19937_64 eng(spec.seed);
            std::normal_distribution<double> dist(0.0, spec.sigma / 255.0);
            for (int64_t i = 0; i < out.frames.numel(); ++i)
                out.frames[i] = std::min(1.0, std::max(0.0, out.frames[i] + dist(eng)));
            return out;
        }
        case DegradationSpec::Kind::bicubic_x4: {
            const int oh = clip.h() / 4, ow = clip.w() / 4;
            if (oh < 1 || ow < 1) throw ConfigError("degrade: frames too small for bicubic_x4");
            Tensor frames({clip.t(), oh, ow, clip.c()});
            const int64_t fsz = static_cast<int64_t>(oh) * ow * clip.c();
            for (int t = 0; t < clip.t(); ++t) {
                Tensor small = bicubic_resize(clip.frame(t), oh, ow, true);
                // clamp: bicubic overshoot may leave [0,1]
                for (int64_t i = 0; i < small.numel(); ++i)
                    small[i] = std::min(1.0, std::max(0.0, small[i]));
                std::memcpy(frames.data() + static_cast<int64_t>(t) * fsz, small.data(),
                            static_cast<size_t>(fsz) * sizeof(double));
            }
            return VideoClip{std::move(frames), clip.frame_rate};
        }
    }
    throw ConfigError("degrade: unsupported kind");
}

int Dataset::total_frames() const {
    int n = 0;
    for (const auto& c : clips) n += c.t;
    return n;
}

Dataset ingest_dataset(const std::string& root, const std::vector<std::string>& manifest) {
    if (!fs::is_directory(root)) throw DataError("ingest_dataset: not a directory: " + root);
    std::vector<std::string> clip_names;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) clip_names.push_back(e.path().filename().string());
    std::sort(clip_names.begin(), clip_names.end());
    if (!manifest.empty()) {
        std::vector<std::string> filtered;
        for (const auto& n : clip_names)
            if (std::find(manifest.begin(), manifest.end(), n) != manifest.end())
                filtered.push_back(n);
        clip_names = std::move(filtered);
    }
    if (clip_names.empty()) throw DataError("ingest_dataset: no clips under " + root);

    Dataset ds;
    for (const auto& name : clip_names) {
        Dataset::ClipEntry entry;
        entry.name = name;
        for (const auto& e : fs::directory_iterator(fs::path(root) / name))
            if (e.is_regular_file() && e.path().extension() == ".png")
                entry.frame_paths.push_back(e.path().string());
        std::sort(entry.frame_paths.begin(), entry.frame_paths.end());
        if (entry.frame_paths.empty())
            throw DataError("ingest_dataset: clip '" + name + "' has no frames");
        for (size_t i = 0; i < entry.frame_paths.size(); ++i) {
            Tensor f = read_png(entry.frame_paths[i]);
            if (i == 0) {
                entry.h = f.dim(0);
                entry.w = f.dim(1);
                entry.c = f.dim(2);
            } else if (f.dim(0) != entry.h || f.dim(1) != entry.w || f.dim(2) != entry.c) {
                throw DataError("ingest_dataset: inconsistent frame shapes in clip '" + name + "'");
            }
        }
        entry.t = static_cast<int>(entry.frame_paths.size());
        ds.clips.push_back(std::move(entry));
    }
    return ds;
}

std::vector<std::string> read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("read_manifest: cannot open " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(f, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty() && line[0] != '#') names.push_back(line);
    }
    return names;
}

VideoClip load_clip(const Dataset::ClipEntry& entry) {
    std::vector<Tensor> frames;
    for (const auto& p : entry.frame_paths) frames.push_back(read_png(p));
    return make_clip(frames, ValueRange::unit);
}

void save_clip(const VideoClip& clip, const std::string& dir) {
    fs::create_directories(dir);
    for (int t = 0; t < clip.t(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "%06d.png", t);
        write_png((fs::path(dir) / name).string(), clip.frame(t));
    }
}

namespace {

Tensor crop_frame(const Tensor& f, int h0, int w0, int h, int w) {
    Tensor out({h, w, f.dim(2)});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int c = 0; c < f.dim(2); ++c) out.at(i, j, c) = f.at(h0 + i, w0 + j, c);
    return out;
}

FrameWindow crop_window(const VideoClip& clip, int t, int t_in, int h0, int w0, int patch) {
    const int n = t_in / 2;
    Tensor frames({t_in, patch, patch, clip.c()});
    const int64_t fsz = static_cast<int64_t>(patch) * patch * clip.c();
    for (int k = 0; k < t_in; ++k) {
        Tensor f = crop_frame(clip.frame(t - n + k), h0, w0, patch, patch);
        std::memcpy(frames.data() + static_cast<int64_t>(k) * fsz, f.data(),
                    static_cast<size_t>(fsz) * sizeof(double));
    }
    return FrameWindow{std::move(frames), n, t};
}

}  // namespace

SampleBatch sample_batch(const std::vector<VideoClip>& hq_clips,
                         const std::vector<VideoClip>& lq_clips, int batch_size, int patch,
                         int t_in, const FlowProvider& gt_provider, uint64_t rng_seed,
                         bool sr_mode) {
    if (hq_clips.empty()) throw ParamError("sample_batch: empty dataset");
    if (!sr_mode && hq_clips.size() != lq_clips.size())
        throw ParamError("sample_batch: LQ/HQ clip count mismatch");
    std::mt19937_64 eng(rng_seed);
    const int n = t_in / 2;

    SampleBatch batch;
    for (int b = 0; b < batch_size; ++b) {
        const int ci = std::uniform_int_distribution<int>(0, static_cast<int>(hq_clips.size()) - 1)(eng);
        const VideoClip& hq = hq_clips[static_cast<size_t>(ci)];
        if (hq.t() < t_in) throw ParamError("sample_batch: clip shorter than T_in");
        if (patch > hq.h() || patch > hq.w())
            throw ParamError("sample_batch: patch larger than frames");
        const int t = std::uniform_int_distribution<int>(n, hq.t() - 1 - n)(eng);
        int h0 = std::uniform_int_distribution<int>(0, hq.h() - patch)(eng);
        int w0 = std::uniform_int_distribution<int>(0, hq.w() - patch)(eng);
        if (sr_mode) {
            h0 &= ~3;
            w0 &= ~3;
        }

        FrameWindow hq_win = crop_window(hq, t, t_in, h0, w0, patch);
        FrameWindow lq_win;
        if (sr_mode) {
            const int lp = patch / 4;
            Tensor lf({t_in, lp, lp, hq.c()});
            const int64_t fsz = static_cast<int64_t>(lp) * lp * hq.c();
            for (int k = 0; k < t_in; ++k) {
                Tensor small = bicubic_resize(hq_win.frame(k), lp, lp, true);
                for (int64_t i = 0; i < small.numel(); ++i)
                    small[i] = std::min(1.0, std::max(0.0, small[i]));
                std::memcpy(lf.data() + static_cast<int64_t>(k) * fsz, small.data(),
                            static_cast<size_t>(fsz) * sizeof(double));
            }
            lq_win = FrameWindow{std::move(lf), n, t};
        } else {
            lq_win = crop_window(lq_clips[static_cast<size_t>(ci)], t, t_in, h0, w0, patch);
        }

        const Tensor gt_ref = hq_win.reference_frame();
        FlowField fp = estimate_flow(gt_provider, gt_ref, hq_win.frame(n - 1), t, t - 1);
        FlowField fn = estimate_flow(gt_provider, gt_ref, hq_win.frame(n + 1), t, t + 1);

        batch.hq_windows.push_back(std::move(hq_win));
        batch.lq_windows.push_back(std::move(lq_win));
        batch.gt_flows.emplace_back(std::move(fp), std::move(fn));
        batch.patch_origin.push_back(PatchOrigin{ci, t, h0, w0});
    }
    return batch;
}

}  // namespace jffra
