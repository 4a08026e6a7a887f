#pragma once

#include <string>
#include <vector>

#include "jffra/core_types.hpp"
#include "jffra/flow_provider.hpp"

namespace jffra {

double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);  // +inf for MSE = 0
double ssim(const Tensor& a, const Tensor& b);

// Optical-flow-based warping metric: mean over consecutive pairs of the
// mask-normalized L1 warping error between restored frames, with flow and
// mask computed from the GT clip.
double opw(const VideoClip& restored, const VideoClip& gt, const FlowProvider& provider,
           double alpha);

struct MetricReport {
    struct FrameEntry {
        int frame = 0;
        double psnr = 0.0;
        double ssim = 0.0;
    };
    std::vector<FrameEntry> per_frame;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double opw = 0.0;
    std::string dataset_id, checkpoint_id;
    double sigma = 0.0;

    void finalize();  // recompute aggregate means from per_frame
    std::string to_text() const;
};

}  // namespace jffra
