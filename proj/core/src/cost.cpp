// SPDX-License-Identifier: Apache-2.0
#include "litepose/cost.hpp"

#include <sstream>

#include "json.hpp"

namespace litepose {

namespace {

int down_dim(int h, int k, int stride) {
    if (stride == 1) return h;
    return (h + 2 * (k / 2) - k) / 2 + 1;
}

// k^2 * cin * cout * h * w / groups at the given resolution; params include
// the folded per-channel norm scale/shift (2 per output channel).
std::pair<long long, long long> plain_conv_cost(int k, int cin, int cout, int h,
                                                int w, int groups) {
    long long kk = (long long)k * k;
    long long params = kk * cin * cout / groups + 2LL * cout;
    long long macs = kk * cin * cout / groups * h * w;
    return {params, macs};
}

}  // namespace

std::pair<long long, long long> layer_cost(const BlockSpec& b, int h_in, int w_in) {
    switch (b.kind) {
        case BlockKind::Concat:
            return {0, 0};
        case BlockKind::TransposedConv: {
            int h = h_in * b.stride, w = w_in * b.stride;
            return plain_conv_cost(b.kernel, b.in_channels, b.out_channels, h, w,
                                   b.groups);
        }
        case BlockKind::InvertedResidual: {
            int h = down_dim(h_in, b.kernel, b.stride);
            int w = down_dim(w_in, b.kernel, b.stride);
            int mid = b.expanded_channels();
            long long params = 0, macs = 0;
            if (mid != b.in_channels) {
                auto [p, m] = plain_conv_cost(1, b.in_channels, mid, h_in, w_in, 1);
                params += p, macs += m;
            }
            auto [dp, dm] = plain_conv_cost(b.kernel, mid, mid, h, w, mid);
            params += dp, macs += dm;
            auto [pp, pm] = plain_conv_cost(1, mid, b.out_channels, h, w, 1);
            params += pp, macs += pm;
            return {params, macs};
        }
        default: {
            int h = down_dim(h_in, b.kernel, b.stride);
            int w = down_dim(w_in, b.kernel, b.stride);
            return plain_conv_cost(b.kernel, b.in_channels, b.out_channels, h, w,
                                   b.groups);
        }
    }
}

CostReport model_cost(const ArchConfig& cfg, int resolution) {
    auto shapes = shape_trace(cfg, resolution);  // validates as a side effect
    CostReport report;
    int h = resolution;
    size_t i = 0;
    for (const BlockSpec* b : cfg.all_blocks()) {
        const LayerShape& s = shapes[i++];
        auto [params, macs] = layer_cost(*b, h, h);
        report.per_layer.push_back({s.name, b->kind, b->kernel, b->in_channels,
                                    b->out_channels, s.h, s.w, params, macs});
        report.total_params += params;
        report.total_macs += macs;
        if (b->kind != BlockKind::HeadConv) h = s.h;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Multi-branch family

namespace {

BlockSpec plain(int k, int s, int cin, int cout) {
    BlockSpec b;
    b.kind = BlockKind::PlainConv;
    b.kernel = k;
    b.stride = s;
    b.in_channels = cin;
    b.out_channels = cout;
    return b;
}

}  // namespace

std::vector<MultiBranchLayer> multibranch_layers(const MultiBranchConfig& cfg,
                                                 int R) {
    if (cfg.block_counts.size() != 4)
        throw std::invalid_argument("multi-branch config needs 4 stages");
    for (size_t n = 0; n < 4; ++n)
        if (cfg.block_counts[n].size() != n + 1)
            throw std::invalid_argument("stage " + std::to_string(n + 1) + " needs " +
                                        std::to_string(n + 1) + " branch counts");
    if (R <= 0 || R % 32 != 0)
        throw std::invalid_argument("resolution must be a positive multiple of 32");

    const int W = cfg.base_channel;
    const int J = cfg.num_joints;
    auto res = [&](int i) { return R >> (i + 1); };  // branch i, 1-based
    auto bw = [&](int i) { return W << (i - 1); };

    std::vector<MultiBranchLayer> out;
    auto add = [&](const std::string& name, BlockSpec b, int h) {
        out.push_back({name, b, h, h});
    };
    // residual basic block: two 3x3 convs at constant width
    auto basic = [&](const std::string& name, int c, int h) {
        add(name + ".conv1", plain(3, 1, c, c), h);
        add(name + ".conv2", plain(3, 1, c, c), h);
    };

    add("stem.0", plain(3, 2, 3, cfg.stem_channels), R);
    add("stem.1", plain(3, 2, cfg.stem_channels, cfg.stem_channels), R / 2);

    // stage 1: bottleneck blocks (1x1 down, 3x3, 1x1 up 4x) at R/4
    const int s1w = cfg.stage1_width, s1out = 4 * cfg.stage1_width;
    int cin = cfg.stem_channels;
    for (int b = 0; b < cfg.block_counts[0][0]; ++b) {
        std::string name = "stage1." + std::to_string(b);
        add(name + ".conv1", plain(1, 1, cin, s1w), res(1));
        add(name + ".conv2", plain(3, 1, s1w, s1w), res(1));
        add(name + ".conv3", plain(1, 1, s1w, s1out), res(1));
        if (cin != s1out) add(name + ".down", plain(1, 1, cin, s1out), res(1));
        cin = s1out;
    }
    add("transition1.0", plain(3, 1, s1out, bw(1)), res(1));
    add("transition1.1", plain(3, 2, s1out, bw(2)), res(1));

    for (int n = 2; n <= 4; ++n) {
        std::string sn = "stage" + std::to_string(n);
        int repeats = cfg.modules[n - 2];
        for (int i = 1; i <= n; ++i)
            for (int b = 0; b < repeats * cfg.block_counts[size_t(n - 1)][size_t(i - 1)];
                 ++b)
                basic(sn + ".b" + std::to_string(i) + "." + std::to_string(b), bw(i),
                      res(i));
        // exchange unit: every ordered branch pair trades features once
        for (int i = 1; i <= n; ++i) {
            for (int j = 1; j <= n; ++j) {
                if (i == j) continue;
                std::string fn =
                    sn + ".fuse" + std::to_string(i) + std::to_string(j);
                if (i < j) {
                    for (int s = i; s < j; ++s) {
                        int ci = bw(i), co = s == j - 1 ? bw(j) : bw(i);
                        add(fn + "." + std::to_string(s - i), plain(3, 2, ci, co),
                            res(s));
                    }
                } else {
                    // upsampling is nearest-neighbor (free); only the width changes
                    add(fn, plain(1, 1, bw(i), bw(j)), res(i));
                }
            }
        }
        if (n < 4)
            add("transition" + std::to_string(n), plain(3, 2, bw(n), bw(n + 1)),
                res(n));
    }

    const int hw = cfg.head_width_per_16 * W / 16;
    add("head.tags", plain(1, 1, bw(1), 2 * J), res(1));
    BlockSpec up = plain(4, 2, bw(1) + 2 * J, hw);
    up.kind = BlockKind::TransposedConv;
    add("head.deconv", up, res(1));
    for (int b = 0; b < cfg.head_blocks; ++b)
        basic("head.block" + std::to_string(b), hw, res(1) * 2);
    add("head.joints", plain(1, 1, hw, J), res(1) * 2);
    return out;
}

CostReport model_cost(const MultiBranchConfig& cfg, int resolution) {
    CostReport report;
    for (const auto& layer : multibranch_layers(cfg, resolution)) {
        auto [params, macs] = layer_cost(layer.block, layer.h_in, layer.w_in);
        const BlockSpec& b = layer.block;
        int h = b.kind == BlockKind::TransposedConv ? layer.h_in * b.stride
                                                    : down_dim(layer.h_in, b.kernel, b.stride);
        report.per_layer.push_back({layer.name, b.kind, b.kernel, b.in_channels,
                                    b.out_channels, h, h, params, macs});
        report.total_params += params;
        report.total_macs += macs;
    }
    return report;
}

CostReport model_cost(const MultiBranchConfig& cfg) {
    return model_cost(cfg, cfg.input_resolution);
}

std::vector<std::pair<int, CostReport>> kernel_sweep(
    const ArchConfig& cfg, const std::vector<int>& kernels) {
    std::vector<std::pair<int, CostReport>> out;
    for (int k : kernels)
        out.emplace_back(k, model_cost(with_depthwise_kernel(cfg, k),
                                       cfg.input_resolution));
    return out;
}

std::string cost_report_csv(const CostReport& report) {
    std::ostringstream os;
    os << "layer,kind,kernel,cin,cout,h,w,params,macs\n";
    for (const auto& l : report.per_layer)
        os << l.layer << ',' << to_string(l.kind) << ',' << l.kernel << ',' << l.cin
           << ',' << l.cout << ',' << l.h << ',' << l.w << ',' << l.params << ','
           << l.macs << '\n';
    os << "total,,,,,,," << report.total_params << ',' << report.total_macs << '\n';
    return os.str();
}

std::string cost_report_json(const CostReport& report, const std::string& model,
                             int resolution) {
    nlohmann::json j;
    j["model"] = model;
    j["resolution"] = resolution;
    j["total_params"] = report.total_params;
    j["total_macs"] = report.total_macs;
    j["mparams"] = report.mparams();
    j["gmacs"] = report.gmacs();
    j["layers"] = nlohmann::json::array();
    for (const auto& l : report.per_layer)
        j["layers"].push_back({{"layer", l.layer},
                               {"kind", to_string(l.kind)},
                               {"kernel", l.kernel},
                               {"cin", l.cin},
                               {"cout", l.cout},
                               {"h", l.h},
                               {"w", l.w},
                               {"params", l.params},
                               {"macs", l.macs}});
    return j.dump(1);
}

}  // namespace litepose
