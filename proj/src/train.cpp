#include "jffra/train.hpp"

#include "jffra/png_io.hpp"
#include "jffra/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace jffra {

bool deterministic_mode() {
    const char* v = std::getenv("JFFRA_DETERMINISTIC");
    return v && std::strcmp(v, "1") == 0;
}

double lr_at(const OptimizerConfig& opt, int iter, int total) {
    if (iter < 1 || total < 1) throw ParamError("lr_at: bad iteration");
    if (opt.lr_final > opt.lr_init) throw ConfigError("lr_final must be <= lr_init");
    const int k = opt.milestones;
    const double factor = std::pow(opt.lr_final / opt.lr_init, 1.0 / k);
    int passed = 0;
    for (int j = 1; j <= k; ++j) {
        const int milestone = 1 + static_cast<int>(std::lround(static_cast<double>(total - 1) * j / k));
        if (iter >= milestone && total > 1) ++passed;
    }
    return opt.lr_init * std::pow(factor, passed);
}

void adam_step(std::vector<ag::Var>& params, AdamState& state, const OptimizerConfig& opt,
               double lr) {
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p->val.shape());
            state.v.emplace_back(p->val.shape());
        }
    }
    if (state.m.size() != params.size()) throw ParamError("adam_step: state size mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        ag::Var& p = params[i];
        if (p->grad.empty()) continue;
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (int64_t j = 0; j < p->val.numel(); ++j) {
            const double g = p->grad[j];
            m[j] = opt.beta1 * m[j] + (1.0 - opt.beta1) * g;
            v[j] = opt.beta2 * v[j] + (1.0 - opt.beta2) * g * g;
            p->val[j] -= lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + opt.eps);
        }
    }
}

// ---- config I/O ----

static json provider_to_json(const FlowProvider& p) {
    json j;
    switch (p.kind) {
        case FlowProvider::Kind::block_match: j["kind"] = "block_match"; break;
        case FlowProvider::Kind::synthetic_oracle: j["kind"] = "synthetic_oracle"; break;
        case FlowProvider::Kind::external: j["kind"] = "external"; break;
    }
    j["block_size"] = p.block_size;
    j["search_radius"] = p.search_radius;
    j["motion"] = p.motion == FlowProvider::Motion::translation ? "translation" : "rotation_small";
    j["tx"] = p.tx;
    j["ty"] = p.ty;
    j["angle_deg"] = p.angle_deg;
    j["flow_dir"] = p.flow_dir;
    return j;
}

static FlowProvider provider_from_json(const json& j) {
    FlowProvider p;
    const std::string kind = j.value("kind", "block_match");
    if (kind == "block_match")
        p.kind = FlowProvider::Kind::block_match;
    else if (kind == "synthetic_oracle")
        p.kind = FlowProvider::Kind::synthetic_oracle;
    else if (kind == "external")
        p.kind = FlowProvider::Kind::external;
    else
        throw ConfigError("unknown flow provider kind: " + kind);
    p.block_size = j.value("block_size", 8);
    p.search_radius = j.value("search_radius", 8);
    p.motion = j.value("motion", "translation") == "rotation_small"
                   ? FlowProvider::Motion::rotation_small
                   : FlowProvider::Motion::translation;
    p.tx = j.value("tx", 0.0);
    p.ty = j.value("ty", 0.0);
    p.angle_deg = j.value("angle_deg", 0.0);
    p.flow_dir = j.value("flow_dir", "");
    return p;
}

static json network_to_json(const NetworkConfig& c) {
    return json{{"levels", c.levels},
                {"base_channels", c.base_channels},
                {"in_channels", c.in_channels},
                {"t_in", c.t_in},
                {"window_size", c.window_size},
                {"task", task_name(c.task)},
                {"residual_output", c.residual_output},
                {"head_count", c.head_count},
                {"cost_radius", c.cost_radius},
                {"flow_head_hidden", c.flow_head_hidden},
                {"flow_refinement", c.flow_refinement},
                {"residual_to_warped", c.residual_to_warped}};
}

static NetworkConfig network_from_json(const json& j) {
    NetworkConfig c;
    c.levels = j.value("levels", 3);
    c.base_channels = j.value("base_channels", 32);
    c.in_channels = j.value("in_channels", 3);
    c.t_in = j.value("t_in", 3);
    c.window_size = j.value("window_size", 8);
    c.task = task_from_name(j.value("task", "denoise"));
    c.residual_output = j.value("residual_output", true);
    c.head_count = j.value("head_count", 3);
    c.cost_radius = j.value("cost_radius", 4);
    c.flow_head_hidden = j.value("flow_head_hidden", 32);
    c.flow_refinement = j.value("flow_refinement", true);
    c.residual_to_warped = j.value("residual_to_warped", false);
    c.validate();
    return c;
}

void TrainConfig::validate() const {
    network.validate();
    loss.validate();
    if (iterations < 1) throw ConfigError("TrainConfig: iterations must be >= 1");
    if (optimizer.lr_final > optimizer.lr_init)
        throw ConfigError("TrainConfig: lr_final must be <= lr_init");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (patch < network.spatial_multiple())
        throw ConfigError("TrainConfig: patch must be >= window_size * 2^(levels-1)");
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    TrainConfig c;
    if (j.contains("network")) c.network = network_from_json(j["network"]);
    if (j.contains("loss")) {
        c.loss.w1 = j["loss"].value("w1", 0.2);
        c.loss.w2 = j["loss"].value("w2", 0.2);
        c.loss.alpha = j["loss"].value("alpha", 0.2);
    }
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        c.optimizer.lr_init = o.value("lr_init", 1e-4);
        c.optimizer.lr_final = o.value("lr_final", 1e-6);
        c.optimizer.milestones = o.value("milestones", 4);
    }
    c.iterations = j.value("iterations", 2000);
    c.batch_size = j.value("batch_size", 2);
    c.patch = j.value("patch", 64);
    c.seed = j.value("seed", static_cast<uint64_t>(0));
    c.dataset_root = j.value("dataset_root", "");
    c.manifest_path = j.value("manifest", "");
    if (j.contains("degradation")) {
        const json& d = j["degradation"];
        c.degradation.kind = degradation_kind_from_name(d.value("kind", "none"));
        c.degradation.sigma = d.value("sigma", 0.0);
        c.degradation.seed = d.value("seed", static_cast<uint64_t>(0));
    }
    c.checkpoint_every = j.value("checkpoint_every", 500);
    if (j.contains("flow_provider")) c.flow_provider = provider_from_json(j["flow_provider"]);
    if (j.contains("gt_flow_provider"))
        c.gt_flow_provider = provider_from_json(j["gt_flow_provider"]);
    else
        c.gt_flow_provider = c.flow_provider;
    c.checkpoint_path = j.value("checkpoint_path", "jffra.ckpt");
    c.log_path = j.value("log_path", "");
    c.validate();
    return c;
}

// ---- checkpoint I/O ----

namespace {

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_tensor(std::ostream& os, const Tensor& t) {
    write_u32(os, static_cast<uint32_t>(t.ndim()));
    for (int d : t.shape()) write_u32(os, static_cast<uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.numel() * sizeof(double)));
}
uint32_t read_u32(std::istream& is) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
uint64_t read_u64(std::istream& is) {
    uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
std::string read_string(std::istream& is) {
    const uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}
Tensor read_tensor(std::istream& is) {
    const uint32_t nd = read_u32(is);
    std::vector<int> shape;
    for (uint32_t i = 0; i < nd; ++i) shape.push_back(static_cast<int>(read_u32(is)));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
    return t;
}

constexpr char kCkptMagic[8] = {'J', 'F', 'R', 'A', 'C', 'K', 'P', 'T'};

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params, const AdamState& adam,
                     int iteration, uint64_t seed) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("save_checkpoint: cannot open " + path);
    os.write(kCkptMagic, 8);
    write_u32(os, 1);  // version
    write_string(os, network_to_json(params.cfg).dump());
    const auto named = params.named();
    write_u32(os, static_cast<uint32_t>(named.size()));
    for (const auto& [name, v] : named) {
        write_string(os, name);
        write_tensor(os, v->val);
    }
    write_u32(os, static_cast<uint32_t>(adam.m.size()));
    write_u64(os, static_cast<uint64_t>(adam.step));
    for (const auto& t : adam.m) write_tensor(os, t);
    for (const auto& t : adam.v) write_tensor(os, t);
    write_u32(os, static_cast<uint32_t>(iteration));
    write_u64(os, seed);
    if (!os) throw DataError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw DataError("load_checkpoint: bad magic in " + path);
    const uint32_t version = read_u32(is);
    if (version != 1) throw DataError("load_checkpoint: unsupported version");
    Checkpoint ck;
    ck.network = network_from_json(json::parse(read_string(is)));
    const uint32_t count = read_u32(is);
    for (uint32_t i = 0; i < count; ++i) {
        std::string name = read_string(is);
        ck.tensors.emplace_back(std::move(name), read_tensor(is));
    }
    const uint32_t acount = read_u32(is);
    ck.adam.step = static_cast<int64_t>(read_u64(is));
    for (uint32_t i = 0; i < acount; ++i) ck.adam.m.push_back(read_tensor(is));
    for (uint32_t i = 0; i < acount; ++i) ck.adam.v.push_back(read_tensor(is));
    ck.iteration = static_cast<int>(read_u32(is));
    ck.seed = read_u64(is);
    if (!is) throw DataError("load_checkpoint: truncated file " + path);
    return ck;
}

ModelParams params_from_checkpoint(const Checkpoint& ck) {
    Rng rng(ck.seed);
    ModelParams params = make_model_params(ck.network, rng);
    auto named = params.named();
    if (named.size() != ck.tensors.size())
        throw DataError("params_from_checkpoint: parameter count mismatch");
    for (size_t i = 0; i < named.size(); ++i) {
        if (named[i].first != ck.tensors[i].first)
            throw DataError("params_from_checkpoint: parameter name mismatch: " + named[i].first);
        if (named[i].second->val.shape() != ck.tensors[i].second.shape())
            throw DataError("params_from_checkpoint: shape mismatch for " + named[i].first);
        named[i].second->val = ck.tensors[i].second;
    }
    return params;
}

// ---- training ----

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t iter) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (iter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

VideoClip clip_from_window(const FrameWindow& win) {
    return VideoClip{win.frames, std::nullopt};
}

// Initial flows for a window over a tiny clip, estimated on its own frames.
std::pair<FlowField, FlowField> window_flows(const VideoClip& lq, int t,
                                             const FlowProvider& provider) {
    const int tp = std::max(t - 1, 0);
    const int tn = std::min(t + 1, lq.t() - 1);
    const Tensor ref = lq.frame(t);
    FlowField fp = estimate_flow(provider, ref, lq.frame(tp), t, tp);
    FlowField fn = estimate_flow(provider, ref, lq.frame(tn), t, tn);
    return {std::move(fp), std::move(fn)};
}

}  // namespace

TrainResult train_on_clips(const TrainConfig& cfg, const std::vector<VideoClip>& hq_clips,
                           ModelParams& params, AdamState& adam, int start_iteration) {
    cfg.validate();
    const bool sr_mode = cfg.network.task == Task::sr_x4;

    std::vector<VideoClip> lq_clips;
    if (!sr_mode) {
        for (size_t i = 0; i < hq_clips.size(); ++i) {
            DegradationSpec spec = cfg.degradation;
            spec.seed = cfg.degradation.seed + i;
            lq_clips.push_back(degrade(hq_clips[i], spec));
        }
    }

    auto vars = params.all();
    TrainResult result;
    result.checkpoint_path = cfg.checkpoint_path;
    std::ofstream log;
    if (!cfg.log_path.empty()) {
        log.open(cfg.log_path, start_iteration > 0 ? std::ios::app : std::ios::out);
        if (!log) throw DataError("train: cannot open log " + cfg.log_path);
    }

    for (int iter = start_iteration + 1; iter <= cfg.iterations; ++iter) {
        SampleBatch batch =
            sample_batch(hq_clips, lq_clips, cfg.batch_size, cfg.patch, cfg.network.t_in,
                         cfg.gt_flow_provider, mix_seed(cfg.seed, static_cast<uint64_t>(iter)),
                         sr_mode);

        ag::Var loss_sum;
        double recon = 0.0, tprev = 0.0, tnext = 0.0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const VideoClip lq = clip_from_window(batch.lq_windows[static_cast<size_t>(b)]);
            const FrameWindow& hq_win = batch.hq_windows[static_cast<size_t>(b)];
            const int rc = hq_win.reference_index;

            auto run = [&](int t) {
                auto [fp, fn] = window_flows(lq, t, cfg.flow_provider);
                return forward(window_at(lq, t, cfg.network.t_in), fp, fn, params).restored;
            };
            ag::Var rest_prev, rest_next;
            {
                // neighbor restorations enter the temporal loss as constants
                ag::NoGradGuard ng;
                rest_prev = run(rc - 1);
                rest_next = run(rc + 1);
            }
            ag::Var rest_t = run(rc);

            TotalLoss tl = total_loss(rest_t, hq_win.reference_frame(), rest_prev, rest_next,
                                      hq_win.frame(rc - 1), hq_win.frame(rc + 1),
                                      batch.gt_flows[static_cast<size_t>(b)].first,
                                      batch.gt_flows[static_cast<size_t>(b)].second, cfg.loss);
            loss_sum = loss_sum ? ag::add(loss_sum, tl.total) : tl.total;
            recon += tl.reconstruction;
            tprev += tl.temporal_prev;
            tnext += tl.temporal_next;
        }
        ag::Var loss = ag::scale(loss_sum, 1.0 / cfg.batch_size);

        if (!std::isfinite(loss->val[0])) {
            save_checkpoint(cfg.checkpoint_path + ".diag", params, adam, iter - 1, cfg.seed);
            throw NumericalError("train: non-finite loss at iteration " + std::to_string(iter));
        }

        ag::zero_grad(vars);
        ag::backward(loss);
        const double lr = lr_at(cfg.optimizer, iter, cfg.iterations);
        adam_step(vars, adam, cfg.optimizer, lr);

        RunRecord rec;
        rec.iteration = iter;
        rec.total = loss->val[0];
        rec.reconstruction = recon / cfg.batch_size;
        rec.temporal_prev = tprev / cfg.batch_size;
        rec.temporal_next = tnext / cfg.batch_size;
        rec.lr = lr;
        result.log.push_back(rec);
        if (log)
            log << "iter " << rec.iteration << " total " << rec.total << " recon "
                << rec.reconstruction << " tprev " << rec.temporal_prev << " tnext "
                << rec.temporal_next << " lr " << rec.lr << "\n";

        if (cfg.checkpoint_every > 0 && iter % cfg.checkpoint_every == 0)
            save_checkpoint(cfg.checkpoint_path, params, adam, iter, cfg.seed);
    }
    save_checkpoint(cfg.checkpoint_path, params, adam, cfg.iterations, cfg.seed);
    return result;
}

TrainResult train(const TrainConfig& cfg, const std::string& resume_from) {
    cfg.validate();
    Dataset ds = ingest_dataset(cfg.dataset_root, cfg.manifest_path.empty()
                                                      ? std::vector<std::string>{}
                                                      : read_manifest(cfg.manifest_path));
    std::vector<VideoClip> hq_clips;
    for (const auto& entry : ds.clips) hq_clips.push_back(load_clip(entry));

    AdamState adam;
    int start = 0;
    ModelParams params = [&] {
        if (resume_from.empty()) {
            Rng rng(cfg.seed);
            return make_model_params(cfg.network, rng);
        }
        Checkpoint ck = load_checkpoint(resume_from);
        adam = ck.adam;
        start = ck.iteration;
        return params_from_checkpoint(ck);
    }();
    return train_on_clips(cfg, hq_clips, params, adam, start);
}

VideoClip restore_clip(const VideoClip& lq, const ModelParams& params,
                       const FlowProvider& provider) {
    const int scale_out = params.cfg.task == Task::sr_x4 ? 4 : 1;
    Tensor frames({lq.t(), scale_out * lq.h(), scale_out * lq.w(), lq.c()});
    const int64_t fsz = static_cast<int64_t>(frames.dim(1)) * frames.dim(2) * frames.dim(3);
    ag::NoGradGuard ng;
    for (int t = 0; t < lq.t(); ++t) {
        FrameWindow win = window_at(lq, t, params.cfg.t_in);
        const int n = win.reference_index;
        const int tp = std::max(t - 1, 0), tn = std::min(t + 1, lq.t() - 1);
        FlowField fp = estimate_flow(provider, win.frame(n), win.frame(n - 1), t, tp);
        FlowField fn = estimate_flow(provider, win.frame(n), win.frame(n + 1), t, tn);
        ForwardResult res = forward(win, fp, fn, params);
        std::memcpy(frames.data() + static_cast<int64_t>(t) * fsz, res.restored->val.data(),
                    static_cast<size_t>(fsz) * sizeof(double));
    }
    return VideoClip{std::move(frames), lq.frame_rate};
}

MetricReport evaluate(const ModelParams& params, const Dataset& dataset,
                      const DegradationSpec& degradation, const FlowProvider& provider,
                      double opw_alpha) {
    if (params.cfg.task == Task::sr_x4 && degradation.kind != DegradationSpec::Kind::bicubic_x4 &&
        degradation.kind != DegradationSpec::Kind::none)
        throw ConfigError("evaluate: sr_x4 checkpoint requires bicubic_x4 degradation");
    if (params.cfg.task != Task::sr_x4 && degradation.kind == DegradationSpec::Kind::bicubic_x4)
        throw ConfigError("evaluate: bicubic_x4 degradation requires an sr_x4 checkpoint");
    MetricReport report;
    report.sigma = degradation.sigma;
    double opw_total = 0.0;
    int opw_clips = 0;
    int frame_index = 0;
    for (size_t ci = 0; ci < dataset.clips.size(); ++ci) {
        VideoClip hq = load_clip(dataset.clips[ci]);
        DegradationSpec spec = degradation;
        spec.seed = degradation.seed + ci;
        VideoClip lq = degrade(hq, spec);
        VideoClip restored = restore_clip(lq, params, provider);
        for (int t = 0; t < hq.t(); ++t) {
            MetricReport::FrameEntry e;
            e.frame = frame_index++;
            e.psnr = psnr(restored.frame(t), hq.frame(t));
            e.ssim = ssim(restored.frame(t), hq.frame(t));
            report.per_frame.push_back(e);
        }
        if (hq.t() >= 2) {
            opw_total += opw(restored, hq, provider, opw_alpha);
            ++opw_clips;
        }
    }
    report.finalize();
    report.opw = opw_clips > 0 ? opw_total / opw_clips : 0.0;
    return report;
}

void restore(const std::string& checkpoint_path, const std::string& input_dir,
             const std::string& output_dir, const FlowProvider& provider) {
    Checkpoint ck = load_checkpoint(checkpoint_path);
    ModelParams params = params_from_checkpoint(ck);

    Dataset::ClipEntry entry;
    entry.name = fs::path(input_dir).filename().string();
    for (const auto& e : fs::directory_iterator(input_dir))
        if (e.is_regular_file() && e.path().extension() == ".png")
            entry.frame_paths.push_back(e.path().string());
    std::sort(entry.frame_paths.begin(), entry.frame_paths.end());
    if (entry.frame_paths.empty()) throw DataError("restore: no PNG frames in " + input_dir);

    VideoClip lq = load_clip(entry);
    const auto t0 = std::chrono::steady_clock::now();
    VideoClip out = restore_clip(lq, params, provider);
    const auto t1 = std::chrono::steady_clock::now();

    fs::create_directories(output_dir);
    std::vector<std::string> written;
    try {
        for (int t = 0; t < out.t(); ++t) {
            const std::string name = fs::path(entry.frame_paths[static_cast<size_t>(t)]).filename().string();
            const std::string path = (fs::path(output_dir) / name).string();
            write_png(path, out.frame(t));
            written.push_back(path);
        }
    } catch (...) {
        for (const auto& p : written) fs::remove(p);
        throw;
    }
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    std::cout << "restored " << out.t() << " frames from " << entry.name << " in " << secs
              << " s\n";
}

}  // namespace jffra
