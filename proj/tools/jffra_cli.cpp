#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "jffra/data.hpp"
#include "jffra/metrics.hpp"
#include "jffra/train.hpp"

using namespace jffra;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

FlowProvider provider_from_flags(const std::string& kind, const std::string& flow_dir) {
    FlowProvider p;
    if (kind == "block_match")
        p.kind = FlowProvider::Kind::block_match;
    else if (kind == "external")
        p.kind = FlowProvider::Kind::external;
    else
        throw ConfigError("unknown flow provider: " + kind);
    p.flow_dir = flow_dir;
    return p;
}

void write_report(const MetricReport& report, const std::string& path) {
    const std::string text = report.to_text();
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot open report file: " + path);
    f << text;
    std::cout << text;
}

int run(int argc, char** argv) {
    CLI::App app{"joint flow and feature restoration for video"};
    app.require_subcommand(1);

    auto* deg = app.add_subcommand("degrade", "write a degraded copy of a clip directory");
    std::string deg_in, deg_out, deg_kind = "awgn";
    double deg_sigma = 25.0;
    uint64_t deg_seed = 0;
    deg->add_option("--in", deg_in, "input clip directory")->required();
    deg->add_option("--out", deg_out, "output clip directory")->required();
    deg->add_option("--kind", deg_kind, "awgn | bicubic_x4 | none");
    deg->add_option("--sigma", deg_sigma, "noise sigma on the 0-255 scale");
    deg->add_option("--seed", deg_seed, "noise seed");

    auto* tr = app.add_subcommand("train", "train from a JSON config");
    std::string tr_config, tr_resume;
    tr->add_option("--config", tr_config, "JSON training config")->required();
    tr->add_option("--resume", tr_resume, "checkpoint to resume from");

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ev_ckpt, ev_data, ev_kind = "awgn", ev_report, ev_flow = "block_match",
                ev_flow_dir, ev_manifest;
    double ev_sigma = 25.0;
    uint64_t ev_seed = 0;
    ev->add_option("--ckpt", ev_ckpt, "checkpoint file")->required();
    ev->add_option("--data", ev_data, "dataset root")->required();
    ev->add_option("--manifest", ev_manifest, "clip manifest file");
    ev->add_option("--kind", ev_kind, "degradation: awgn | bicubic_x4 | none");
    ev->add_option("--sigma", ev_sigma, "noise sigma on the 0-255 scale");
    ev->add_option("--seed", ev_seed, "degradation seed");
    ev->add_option("--flow", ev_flow, "flow provider: block_match | external");
    ev->add_option("--flow-dir", ev_flow_dir, "directory of .jflo files (external)");
    ev->add_option("--report", ev_report, "report output path (default stdout)");

    auto* rs = app.add_subcommand("restore", "restore a degraded clip directory");
    std::string rs_ckpt, rs_in, rs_out, rs_flow = "block_match", rs_flow_dir;
    rs->add_option("--ckpt", rs_ckpt, "checkpoint file")->required();
    rs->add_option("--in", rs_in, "degraded clip directory")->required();
    rs->add_option("--out", rs_out, "restored clip directory")->required();
    rs->add_option("--flow", rs_flow, "flow provider: block_match | external");
    rs->add_option("--flow-dir", rs_flow_dir, "directory of .jflo files (external)");

    auto* mt = app.add_subcommand("metrics", "score a restored clip against ground truth");
    std::string mt_restored, mt_gt, mt_report, mt_flow = "block_match", mt_flow_dir;
    double mt_alpha = 0.2;
    mt->add_option("--restored", mt_restored, "restored clip directory")->required();
    mt->add_option("--gt", mt_gt, "ground-truth clip directory")->required();
    mt->add_option("--flow", mt_flow, "flow provider: block_match | external");
    mt->add_option("--flow-dir", mt_flow_dir, "directory of .jflo files (external)");
    mt->add_option("--alpha", mt_alpha, "occlusion mask sharpness");
    mt->add_option("--report", mt_report, "report output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    if (deg->parsed()) {
        Dataset one = ingest_dataset(std::filesystem::path(deg_in).parent_path().string(),
                                     {std::filesystem::path(deg_in).filename().string()});
        DegradationSpec spec;
        spec.kind = degradation_kind_from_name(deg_kind);
        spec.sigma = deg_sigma;
        spec.seed = deg_seed;
        spec.validate();
        save_clip(degrade(load_clip(one.clips.at(0)), spec), deg_out);
        std::cout << "wrote " << one.clips.at(0).t << " frames to " << deg_out << "\n";
    } else if (tr->parsed()) {
        TrainConfig cfg = load_train_config(tr_config);
        TrainResult res = train(cfg, tr_resume);
        std::cout << "trained " << cfg.iterations << " iterations, checkpoint at "
                  << res.checkpoint_path << "\n";
        if (!res.log.empty())
            std::cout << "final loss " << res.log.back().total << "\n";
    } else if (ev->parsed()) {
        Checkpoint ck = load_checkpoint(ev_ckpt);
        ModelParams params = params_from_checkpoint(ck);
        Dataset ds = ingest_dataset(
            ev_data, ev_manifest.empty() ? std::vector<std::string>{} : read_manifest(ev_manifest));
        DegradationSpec spec;
        spec.kind = degradation_kind_from_name(ev_kind);
        spec.sigma = ev_sigma;
        spec.seed = ev_seed;
        spec.validate();
        MetricReport report =
            evaluate(params, ds, spec, provider_from_flags(ev_flow, ev_flow_dir));
        report.dataset_id = ev_data;
        report.checkpoint_id = ev_ckpt;
        write_report(report, ev_report);
    } else if (rs->parsed()) {
        restore(rs_ckpt, rs_in, rs_out, provider_from_flags(rs_flow, rs_flow_dir));
    } else if (mt->parsed()) {
        auto load_dir = [](const std::string& dir) {
            Dataset one = ingest_dataset(std::filesystem::path(dir).parent_path().string(),
                                         {std::filesystem::path(dir).filename().string()});
            return load_clip(one.clips.at(0));
        };
        VideoClip restored = load_dir(mt_restored);
        VideoClip gt = load_dir(mt_gt);
        if (restored.t() != gt.t()) throw DataError("metrics: frame count mismatch");
        MetricReport report;
        for (int t = 0; t < gt.t(); ++t) {
            MetricReport::FrameEntry e;
            e.frame = t;
            e.psnr = psnr(restored.frame(t), gt.frame(t));
            e.ssim = ssim(restored.frame(t), gt.frame(t));
            report.per_frame.push_back(e);
        }
        report.finalize();
        if (gt.t() >= 2)
            report.opw = opw(restored, gt, provider_from_flags(mt_flow, mt_flow_dir), mt_alpha);
        report.dataset_id = mt_gt;
        write_report(report, mt_report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParamError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
