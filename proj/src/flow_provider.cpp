#include "jffra/flow_provider.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "jffra/nn_ops.hpp"

namespace jffra {

namespace {

double block_sad(const Tensor& ref, const Tensor& other, int h0, int w0, int bs, int dy, int dx) {
    const int H = ref.dim(0), W = ref.dim(1), C = ref.dim(2);
    double s = 0.0;
    for (int i = 0; i < bs; ++i) {
        const int h = h0 + i;
        if (h >= H) break;
        for (int j = 0; j < bs; ++j) {
            const int w = w0 + j;
            if (w >= W) break;
            const int hh = h + dy, ww = w + dx;
            const bool in = hh >= 0 && hh < H && ww >= 0 && ww < W;
            for (int c = 0; c < C; ++c) {
                const double ov = in ? other.at(hh, ww, c) : 0.0;
                s += std::fabs(ref.at(h, w, c) - ov);
            }
        }
    }
    return s;
}

FlowField block_match_flow(const FlowProvider& p, const Tensor& ref, const Tensor& other) {
    const int H = ref.dim(0), W = ref.dim(1);
    const int bs = p.block_size, r = p.search_radius;
    const int nbh = (H + bs - 1) / bs, nbw = (W + bs - 1) / bs;

    // candidate displacements ordered by magnitude, then (dy, dx); ties keep
    // the earliest candidate
    std::vector<std::pair<int, int>> cands;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) cands.emplace_back(dy, dx);
    std::stable_sort(cands.begin(), cands.end(), [](auto a, auto b) {
        const int ma = a.first * a.first + a.second * a.second;
        const int mb = b.first * b.first + b.second * b.second;
        if (ma != mb) return ma < mb;
        return a < b;
    });

    Tensor block_flow({nbh, nbw, 2});
    for (int bh = 0; bh < nbh; ++bh)
        for (int bw = 0; bw < nbw; ++bw) {
            double best = 1e300;
            int best_dy = 0, best_dx = 0;
            for (const auto& [dy, dx] : cands) {
                const double s = block_sad(ref, other, bh * bs, bw * bs, bs, dy, dx);
                if (s < best) {
                    best = s;
                    best_dy = dy;
                    best_dx = dx;
                }
            }
            block_flow.at(bh, bw, 0) = best_dx;
            block_flow.at(bh, bw, 1) = best_dy;
        }

    // broadcast per-block vectors, smoothed bilinearly between block centers
    ag::NoGradGuard ng;
    Tensor values = ag::resize_bilinear(ag::constant(block_flow), H, W)->val;
    return FlowField{std::move(values), 0, 0};
}

}  // namespace

FlowField synthetic_flow(FlowProvider::Motion kind, int h, int w, double tx, double ty,
                         double angle_deg) {
    if (h < 1 || w < 1) throw ParamError("synthetic_flow: empty grid");
    Tensor values({h, w, 2});
    if (kind == FlowProvider::Motion::translation) {
        if (std::fabs(tx) > 8.0 || std::fabs(ty) > 8.0)
            throw ParamError("synthetic_flow: |translation| must be <= 8 px");
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                values.at(i, j, 0) = tx;
                values.at(i, j, 1) = ty;
            }
    } else {
        if (std::fabs(angle_deg) > 5.0)
            throw ParamError("synthetic_flow: |angle| must be <= 5 degrees");
        const double th = angle_deg * M_PI / 180.0;
        const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
        // backward map: sample the source at the point that rotates onto the
        // reference pixel
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const double y = i - cy, x = j - cx;
                const double sx = std::cos(th) * x - std::sin(th) * y;
                const double sy = std::sin(th) * x + std::cos(th) * y;
                values.at(i, j, 0) = sx - x;
                values.at(i, j, 1) = sy - y;
            }
    }
    return FlowField{std::move(values), 0, 0};
}

FlowField estimate_flow(const FlowProvider& provider, const Tensor& ref, const Tensor& other,
                        int ref_time, int other_time) {
    require_same_shape(ref, other, "estimate_flow");
    FlowField flow;
    switch (provider.kind) {
        case FlowProvider::Kind::block_match:
            flow = block_match_flow(provider, ref, other);
            break;
        case FlowProvider::Kind::synthetic_oracle:
            if (ref_time == other_time) {
                flow = synthetic_flow(FlowProvider::Motion::translation, ref.dim(0), ref.dim(1), 0, 0, 0);
            } else {
                // per-step motion scaled by the signed frame distance
                const double steps = other_time - ref_time;
                if (provider.motion == FlowProvider::Motion::translation)
                    flow = synthetic_flow(provider.motion, ref.dim(0), ref.dim(1),
                                          provider.tx * steps, provider.ty * steps, 0.0);
                else
                    flow = synthetic_flow(provider.motion, ref.dim(0), ref.dim(1), 0.0, 0.0,
                                          provider.angle_deg * steps);
            }
            break;
        case FlowProvider::Kind::external: {
            char name[64];
            std::snprintf(name, sizeof(name), "flow_%06d_%06d.jflo", ref_time, other_time);
            flow = read_flow_file(provider.flow_dir + "/" + name);
            if (flow.h() != ref.dim(0) || flow.w() != ref.dim(1))
                throw ShapeError("estimate_flow: external flow shape mismatch");
            break;
        }
    }
    flow.from_time = ref_time;
    flow.to_time = other_time;
    return flow;
}

void write_flow_file(const std::string& path, const FlowField& flow) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("write_flow_file: cannot open " + path);
    f.write("JFLO", 4);
    const uint32_t H = static_cast<uint32_t>(flow.h()), W = static_cast<uint32_t>(flow.w());
    f.write(reinterpret_cast<const char*>(&H), 4);
    f.write(reinterpret_cast<const char*>(&W), 4);
    std::vector<float> buf(static_cast<size_t>(H) * W * 2);
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(flow.values[static_cast<int64_t>(i)]);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    if (!f) throw DataError("write_flow_file: write failed for " + path);
}

FlowField read_flow_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("read_flow_file: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "JFLO", 4) != 0)
        throw DataError("read_flow_file: bad magic in " + path);
    uint32_t H = 0, W = 0;
    f.read(reinterpret_cast<char*>(&H), 4);
    f.read(reinterpret_cast<char*>(&W), 4);
    if (!f || H == 0 || W == 0) throw DataError("read_flow_file: bad header in " + path);
    std::vector<float> buf(static_cast<size_t>(H) * W * 2);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    if (!f) throw DataError("read_flow_file: truncated file " + path);
    Tensor values({static_cast<int>(H), static_cast<int>(W), 2});
    for (size_t i = 0; i < buf.size(); ++i) values[static_cast<int64_t>(i)] = buf[i];
    return FlowField{std::move(values), 0, 0};
}

}  // namespace jffra
