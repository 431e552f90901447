// SPDX-License-Identifier: Apache-2.0
#include "litepose/arch.hpp"

#include <algorithm>
#include <cmath>

#include "embedded_data.hpp"
#include "json.hpp"

namespace litepose {

using nlohmann::json;

const char* to_string(BlockKind kind) {
    switch (kind) {
        case BlockKind::StemConv: return "stem-conv";
        case BlockKind::InvertedResidual: return "inverted-residual";
        case BlockKind::PlainConv: return "plain-conv";
        case BlockKind::TransposedConv: return "transposed-conv";
        case BlockKind::Concat: return "concat";
        case BlockKind::HeadConv: return "head-conv";
    }
    return "?";
}

BlockKind block_kind_from_string(const std::string& s) {
    for (BlockKind k : {BlockKind::StemConv, BlockKind::InvertedResidual,
                        BlockKind::PlainConv, BlockKind::TransposedConv,
                        BlockKind::Concat, BlockKind::HeadConv}) {
        if (s == to_string(k)) return k;
    }
    throw std::invalid_argument("unknown block kind '" + s + "'");
}

int BlockSpec::expanded_channels() const {
    double mid = expand_ratio * in_channels;
    int m = int(std::llround(mid));
    if (std::abs(mid - m) > 1e-9)
        throw std::invalid_argument("expand ratio does not yield integral width");
    return m;
}

int ArchConfig::downsample_factor() const {
    int f = 1;
    for (const auto& stage : stages)
        for (const auto& b : stage) f *= b.stride;
    return f;
}

int ArchConfig::layer_count() const {
    int n = 0;
    for (const auto* b : all_blocks())
        if (b->weight_bearing()) ++n;
    return n;
}

std::vector<const BlockSpec*> ArchConfig::all_blocks() const {
    std::vector<const BlockSpec*> out;
    for (const auto& stage : stages)
        for (const auto& b : stage) out.push_back(&b);
    for (const auto& b : deconv_head) out.push_back(&b);
    return out;
}

// ---------------------------------------------------------------------------
// JSON schema

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return it.key() == a;
            }) == allowed.end())
            throw std::invalid_argument("unknown field '" + it.key() + "' in " + where);
    }
}

BlockSpec block_from_json(const json& j) {
    reject_unknown(j, {"kind", "k", "s", "cin", "cout", "expand", "groups", "fuse_from"},
                   "block");
    BlockSpec b;
    b.kind = block_kind_from_string(j.at("kind").get<std::string>());
    b.kernel = j.at("k").get<int>();
    b.stride = j.at("s").get<int>();
    b.in_channels = j.at("cin").get<int>();
    b.out_channels = j.at("cout").get<int>();
    b.expand_ratio = j.at("expand").get<double>();
    b.groups = j.at("groups").get<int>();
    b.fuse_from = j.value("fuse_from", -1);
    return b;
}

json block_to_json(const BlockSpec& b) {
    json j{{"kind", to_string(b.kind)}, {"k", b.kernel},      {"s", b.stride},
           {"cin", b.in_channels},      {"cout", b.out_channels},
           {"expand", b.expand_ratio},  {"groups", b.groups}};
    if (b.fuse_from >= 0) j["fuse_from"] = b.fuse_from;
    return j;
}

}  // namespace

ArchConfig arch_from_json(const std::string& text) {
    json j = json::parse(text);
    reject_unknown(j, {"name", "input_resolution", "num_joints", "stages",
                       "deconv_head", "outputs"},
                   "architecture");
    ArchConfig cfg;
    cfg.name = j.at("name").get<std::string>();
    cfg.input_resolution = j.at("input_resolution").get<int>();
    cfg.num_joints = j.at("num_joints").get<int>();
    for (const auto& stage : j.at("stages")) {
        cfg.stages.emplace_back();
        for (const auto& b : stage) cfg.stages.back().push_back(block_from_json(b));
    }
    for (const auto& b : j.at("deconv_head"))
        cfg.deconv_head.push_back(block_from_json(b));
    cfg.outputs = j.at("outputs").get<std::vector<int>>();
    return cfg;
}

std::string arch_to_json(const ArchConfig& cfg, int indent) {
    json j;
    j["name"] = cfg.name;
    j["input_resolution"] = cfg.input_resolution;
    j["num_joints"] = cfg.num_joints;
    j["stages"] = json::array();
    for (const auto& stage : cfg.stages) {
        json s = json::array();
        for (const auto& b : stage) s.push_back(block_to_json(b));
        j["stages"].push_back(std::move(s));
    }
    j["deconv_head"] = json::array();
    for (const auto& b : cfg.deconv_head) j["deconv_head"].push_back(block_to_json(b));
    j["outputs"] = cfg.outputs;
    return j.dump(indent);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

const std::vector<std::pair<std::string, std::string>>& arch_preset_files() {
    static const std::vector<std::pair<std::string, std::string>> files = {
        {"litepose-supernet", "presets/litepose_supernet.json"},
        {"litepose-s", "presets/litepose_s.json"},
        {"litepose-xs", "presets/litepose_xs.json"},
        {"litepose-m", "presets/litepose_m.json"},
        {"litepose-l", "presets/litepose_l.json"},
        {"litepose-half", "presets/litepose_half.json"},
    };
    return files;
}

// Branch block counts of the four published multi-branch shrink levels.
const std::vector<std::vector<std::vector<int>>>& shrink_block_counts() {
    static const std::vector<std::vector<std::vector<int>>> levels = {
        {{4}, {4, 4}, {4, 4, 4}, {4, 4, 4, 4}},
        {{4}, {3, 4}, {2, 3, 4}, {1, 2, 3, 4}},
        {{4}, {1, 4}, {1, 1, 4}, {1, 1, 1, 4}},
        {{4}, {0, 4}, {0, 0, 4}, {0, 0, 0, 4}},
    };
    return levels;
}

MultiBranchConfig multibranch_preset(int level) {
    MultiBranchConfig cfg;
    cfg.name = "multibranch-shrink" + std::to_string(level);
    cfg.base_channel = level < 2 ? 16 : 18;
    cfg.block_counts = shrink_block_counts()[size_t(level)];
    return cfg;
}

}  // namespace

PresetConfig preset(const std::string& name) {
    for (const auto& [n, file] : arch_preset_files())
        if (n == name) return arch_from_json(detail::embedded_file(file));
    for (int level = 0; level < 4; ++level)
        if (name == "multibranch-shrink" + std::to_string(level))
            return multibranch_preset(level);
    std::string msg = "unknown preset '" + name + "'; have:";
    for (const auto& n : preset_names()) msg += " " + n;
    throw std::invalid_argument(msg);
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [n, file] : arch_preset_files()) v.push_back(n);
        for (int level = 0; level < 4; ++level)
            v.push_back("multibranch-shrink" + std::to_string(level));
        return v;
    }();
    return names;
}

// ---------------------------------------------------------------------------
// Validation and shape propagation

namespace {

int down_dim(int h, int k, int stride) {
    if (stride == 1) return h;
    return (h + 2 * (k / 2) - k) / 2 + 1;
}

}  // namespace

std::vector<Violation> validate(const ArchConfig& cfg) {
    std::vector<Violation> out;
    auto bad = [&](const std::string& layer, const std::string& rule) {
        out.push_back({layer, rule});
    };
    if (cfg.input_resolution <= 0) bad("model", "input_resolution must be positive");
    if (cfg.num_joints <= 0) bad("model", "num_joints must be positive");
    if (cfg.stages.empty()) bad("model", "at least one stage required");

    std::vector<int> stage_out;  // output channels per stage
    int cur = 3;
    int idx = 0;
    for (size_t si = 0; si < cfg.stages.size(); ++si) {
        for (size_t bi = 0; bi < cfg.stages[si].size(); ++bi) {
            const BlockSpec& b = cfg.stages[si][bi];
            std::string layer =
                "stage" + std::to_string(si) + "." + std::to_string(bi);
            if (b.kind == BlockKind::Concat || b.kind == BlockKind::TransposedConv ||
                b.kind == BlockKind::HeadConv)
                bad(layer, "head-only block kind inside a stage");
            if (b.kind == BlockKind::StemConv && !(si == 0 && bi == 0))
                bad(layer, "stem-conv only allowed as the first block");
            if (b.stride != 1 && b.stride != 2) bad(layer, "stride must be 1 or 2");
            if (b.kernel < 1 || b.kernel % 2 == 0) bad(layer, "kernel must be odd");
            if (b.in_channels != cur) bad(layer, "input channels do not chain");
            if (b.out_channels < 1) bad(layer, "output channels must be positive");
            if (b.kind == BlockKind::InvertedResidual) {
                if (b.expand_ratio < 1.0) bad(layer, "expand ratio below 1");
            } else if (b.groups < 1 ||
                       (long long)(b.kernel) * b.kernel * b.in_channels *
                               b.out_channels % b.groups !=
                           0) {
                bad(layer, "groups must divide the kernel volume");
            }
            cur = b.out_channels;
            ++idx;
        }
        stage_out.push_back(cur);
    }

    int head_convs = 0;
    for (size_t bi = 0; bi < cfg.deconv_head.size(); ++bi) {
        const BlockSpec& b = cfg.deconv_head[bi];
        std::string layer = "head." + std::to_string(bi);
        if (b.in_channels != cur) bad(layer, "input channels do not chain");
        switch (b.kind) {
            case BlockKind::Concat: {
                if (b.fuse_from < 0 || b.fuse_from >= int(stage_out.size())) {
                    bad(layer, "fuse_from out of range");
                } else if (b.out_channels !=
                           b.in_channels + stage_out[size_t(b.fuse_from)]) {
                    bad(layer, "concat width must be cin plus the fused stage width");
                }
                break;
            }
            case BlockKind::TransposedConv:
                if (b.stride != 2) bad(layer, "transposed conv must upsample 2x");
                break;
            case BlockKind::HeadConv:
                ++head_convs;
                if (b.stride != 1 || b.kernel != 1)
                    bad(layer, "head conv must be 1x1 stride 1");
                break;
            default:
                bad(layer, "stage-only block kind inside the head");
        }
        // head convs are taps: they do not change the running width
        if (b.kind != BlockKind::HeadConv) cur = b.out_channels;
    }
    if (head_convs != int(cfg.outputs.size()))
        bad("head", "outputs list must match the head conv count");
    return out;
}

std::vector<LayerShape> shape_trace(const ArchConfig& cfg, int resolution) {
    auto violations = validate(cfg);
    if (!violations.empty())
        throw std::invalid_argument("invalid architecture: " + violations[0].layer +
                                    ": " + violations[0].rule);
    if (resolution <= 0 || resolution % cfg.downsample_factor() != 0)
        throw std::invalid_argument(
            "resolution " + std::to_string(resolution) + " not divisible by the " +
            std::to_string(cfg.downsample_factor()) + "x downsampling factor");

    std::vector<LayerShape> out;
    std::vector<std::pair<int, int>> stage_shape;  // (channels, h) per stage
    int h = resolution, c = 3, idx = 0;
    for (size_t si = 0; si < cfg.stages.size(); ++si) {
        for (size_t bi = 0; bi < cfg.stages[si].size(); ++bi) {
            const BlockSpec& b = cfg.stages[si][bi];
            h = down_dim(h, b.kernel, b.stride);
            c = b.out_channels;
            out.push_back({idx++, "stage" + std::to_string(si) + "." + std::to_string(bi),
                           b.kind, h, h, c});
        }
        stage_shape.emplace_back(c, h);
    }
    for (size_t bi = 0; bi < cfg.deconv_head.size(); ++bi) {
        const BlockSpec& b = cfg.deconv_head[bi];
        int oc = b.out_channels;
        int oh = h;
        if (b.kind == BlockKind::TransposedConv) oh = h * b.stride;
        if (b.kind == BlockKind::Concat) {
            auto [sc, sh] = stage_shape[size_t(b.fuse_from)];
            if (sh != h)
                throw std::invalid_argument("head." + std::to_string(bi) +
                                            ": fused stage resolution mismatch");
        }
        out.push_back({idx++, "head." + std::to_string(bi), b.kind, oh, oh, oc});
        if (b.kind != BlockKind::HeadConv) {
            h = oh;
            c = oc;
        }
    }
    return out;
}

ArchConfig with_depthwise_kernel(ArchConfig cfg, int k) {
    for (auto& stage : cfg.stages)
        for (auto& b : stage)
            if (b.kind == BlockKind::InvertedResidual ||
                (b.kind == BlockKind::PlainConv && b.groups > 1))
                b.kernel = k;
    return cfg;
}

ArchConfig without_fusion(const ArchConfig& cfg) {
    ArchConfig out = cfg;
    out.deconv_head.clear();
    int cur = cfg.stages.back().back().out_channels;
    for (BlockSpec b : cfg.deconv_head) {
        if (b.kind == BlockKind::Concat) continue;
        b.in_channels = cur;
        out.deconv_head.push_back(b);
        if (b.kind != BlockKind::HeadConv) cur = b.out_channels;
    }
    return out;
}

}  // namespace litepose
