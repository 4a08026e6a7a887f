#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jffra/data.hpp"
#include "jffra/losses.hpp"
#include "jffra/metrics.hpp"
#include "jffra/network.hpp"

namespace jffra {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OptimizerConfig {
    double lr_init = 1e-4;
    double lr_final = 1e-6;
    int milestones = 4;  // geometric step decay at evenly spaced iterations
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

// lr for 1-based iteration `iter` of a `total`-iteration run: lr_init at
// iteration 1, decays by (lr_final/lr_init)^(1/milestones) at each milestone,
// lr_final from the last milestone (the final iteration) on.
double lr_at(const OptimizerConfig& opt, int iter, int total);

struct TrainConfig {
    NetworkConfig network;
    LossWeights loss;
    OptimizerConfig optimizer;
    int iterations = 2000;
    int batch_size = 2;
    int patch = 64;
    uint64_t seed = 0;
    std::string dataset_root;
    std::string manifest_path;
    DegradationSpec degradation;
    int checkpoint_every = 500;
    FlowProvider flow_provider;     // initial flow on LQ frames
    FlowProvider gt_flow_provider;  // loss flow on GT frames
    std::string checkpoint_path = "jffra.ckpt";
    std::string log_path;

    void validate() const;
};

TrainConfig load_train_config(const std::string& path);

struct AdamState {
    std::vector<Tensor> m, v;
    int64_t step = 0;
};

void adam_step(std::vector<ag::Var>& params, AdamState& state, const OptimizerConfig& opt,
               double lr);

struct Checkpoint {
    NetworkConfig network;
    std::vector<std::pair<std::string, Tensor>> tensors;
    AdamState adam;
    int iteration = 0;
    uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const ModelParams& params, const AdamState& adam,
                     int iteration, uint64_t seed);
Checkpoint load_checkpoint(const std::string& path);
ModelParams params_from_checkpoint(const Checkpoint& ck);

struct RunRecord {
    int iteration = 0;
    double total = 0.0, reconstruction = 0.0, temporal_prev = 0.0, temporal_next = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    std::vector<RunRecord> log;
    std::string checkpoint_path;
};

TrainResult train(const TrainConfig& cfg, const std::string& resume_from = "");

// In-memory variant used by tests and harnesses.
TrainResult train_on_clips(const TrainConfig& cfg, const std::vector<VideoClip>& hq_clips,
                           ModelParams& params, AdamState& adam, int start_iteration = 0);

// Restores every frame of a degraded clip with stride-1 windows.
VideoClip restore_clip(const VideoClip& lq, const ModelParams& params,
                       const FlowProvider& provider);

MetricReport evaluate(const ModelParams& params, const Dataset& dataset,
                      const DegradationSpec& degradation, const FlowProvider& provider,
                      double opw_alpha = 0.2);

void restore(const std::string& checkpoint_path, const std::string& input_dir,
             const std::string& output_dir, const FlowProvider& provider);

bool deterministic_mode();

}  // namespace jffra
