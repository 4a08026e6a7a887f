#include "jffra/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "jffra/resample.hpp"

namespace jffra {

double psnr(const Tensor& a, const Tensor& b, double peak) {
    require_same_shape(a, b, "psnr");
    const int64_t n = a.numel();
    double mse = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

namespace {

Tensor luminance(const Tensor& img) {
    const int H = img.dim(0), W = img.dim(1), C = img.dim(2);
    Tensor y({H, W});
    if (C == 1) {
        for (int64_t i = 0; i < y.numel(); ++i) y[i] = img[i];
    } else {
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                y[static_cast<int64_t>(h) * W + w] =
                    0.299 * img.at(h, w, 0) + 0.587 * img.at(h, w, 1) + 0.114 * img.at(h, w, 2);
    }
    return y;
}

}  // namespace

double ssim(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "ssim");
    const int H = a.dim(0), W = a.dim(1);
    constexpr int win = 11;
    if (H < win || W < win) throw ParamError("ssim: image smaller than 11x11 window");
    const Tensor ya = luminance(a), yb = luminance(b);

    // 11-tap Gaussian, sigma = 1.5
    double g[win];
    double gsum = 0.0;
    for (int i = 0; i < win; ++i) {
        const double x = i - 5;
        g[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
        gsum += g[i];
    }
    for (double& v : g) v /= gsum;

    constexpr double k1 = 0.01, k2 = 0.03, peak = 1.0;
    const double c1 = (k1 * peak) * (k1 * peak);
    const double c2 = (k2 * peak) * (k2 * peak);

    double total = 0.0;
    int64_t count = 0;
    for (int h = 0; h + win <= H; ++h)
        for (int w = 0; w + win <= W; ++w) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double wt = g[i] * g[j];
                    const double va = ya[static_cast<int64_t>(h + i) * W + (w + j)];
                    const double vb = yb[static_cast<int64_t>(h + i) * W + (w + j)];
                    mu_a += wt * va;
                    mu_b += wt * vb;
                    aa += wt * va * va;
                    bb += wt * vb * vb;
                    ab += wt * va * vb;
                }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            const double s = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                             ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            total += s;
            ++count;
        }
    return total / static_cast<double>(count);
}

double opw(const VideoClip& restored, const VideoClip& gt, const FlowProvider& provider,
           double alpha) {
    if (restored.t() != gt.t()) throw ParamError("opw: clip length mismatch");
    require_same_shape(restored.frames, gt.frames, "opw");
    if (restored.t() < 2) throw ParamError("opw: clip length must be >= 2");
    double total = 0.0;
    for (int t = 1; t < restored.t(); ++t) {
        const Tensor gt_t = gt.frame(t), gt_p = gt.frame(t - 1);
        const FlowField flow = estimate_flow(provider, gt_t, gt_p, t, t - 1);
        const OcclusionMask mask = compute_occlusion_mask(gt_t, gt_p, flow, alpha);
        const Tensor rt = restored.frame(t);
        const Tensor rp_w = warp(restored.frame(t - 1), flow);
        const int H = rt.dim(0), W = rt.dim(1), C = rt.dim(2);
        double num = 0.0, den = 0.0;
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) {
                double d = 0.0;
                for (int c = 0; c < C; ++c) d += std::fabs(rt.at(h, w, c) - rp_w.at(h, w, c));
                const double m = mask.values[static_cast<int64_t>(h) * W + w];
                num += m * d;
                den += m;
            }
        total += num / den;
    }
    return total / static_cast<double>(restored.t() - 1);
}

void MetricReport::finalize() {
    double ps = 0.0, ss = 0.0;
    for (const auto& e : per_frame) {
        ps += e.psnr;
        ss += e.ssim;
    }
    const double n = per_frame.empty() ? 1.0 : static_cast<double>(per_frame.size());
    mean_psnr = ps / n;
    mean_ssim = ss / n;
}

std::string MetricReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    os << "# metric report\n";
    os << "dataset " << dataset_id << "\n";
    os << "checkpoint " << checkpoint_id << "\n";
    os << "sigma " << sigma << "\n";
    for (const auto& e : per_frame)
        os << "frame " << e.frame << " psnr " << e.psnr << " ssim " << e.ssim << "\n";
    os << "aggregate mean_psnr " << mean_psnr << " mean_ssim " << mean_ssim << " opw " << opw
       << "\n";
    return os.str();
}

}  // namespace jffra
