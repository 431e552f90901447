// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace litepose {

enum class BlockKind {
    StemConv,
    InvertedResidual,
    PlainConv,
    TransposedConv,
    Concat,
    HeadConv,
};

const char* to_string(BlockKind kind);
BlockKind block_kind_from_string(const std::string& s);

/// One layer of a network description. For inverted residuals the spec is a
/// whole expand/depthwise/project unit; sub-convs are derived, not stored.
struct BlockSpec {
    BlockKind kind = BlockKind::PlainConv;
    int kernel = 3;
    int stride = 1;
    int in_channels = 0;
    int out_channels = 0;
    double expand_ratio = 1.0;
    int groups = 1;
    int fuse_from = -1;  ///< stage index whose output a concat pulls in; -1 = none

    bool weight_bearing() const { return kind != BlockKind::Concat; }
    bool has_residual() const {
        return kind == BlockKind::InvertedResidual && stride == 1 &&
               in_channels == out_channels;
    }
    /// Hidden width of an inverted residual.
    int expanded_channels() const;
};

struct LayerShape {
    int index = 0;  ///< position in the flattened block walk (concats included)
    std::string name;
    BlockKind kind;
    int h = 0, w = 0, c = 0;
};

struct Violation {
    std::string layer;
    std::string rule;
};

/// Full single-branch network: backbone stages plus a fusion deconv head.
/// stages[0] is the stem; deconv_head entries run after the last stage and
/// head-conv entries mark the supervised outputs, in `outputs` order.
struct ArchConfig {
    std::string name;
    int input_resolution = 0;
    int num_joints = 0;
    std::vector<std::vector<BlockSpec>> stages;
    std::vector<BlockSpec> deconv_head;
    std::vector<int> outputs;  ///< downsampling factor of each head output

    /// Net downsampling factor of the backbone (product of strides).
    int downsample_factor() const;
    /// Count of weight-bearing blocks (symbol K in the search space).
    int layer_count() const;
    /// Flattened view over all blocks, stem through head.
    std::vector<const BlockSpec*> all_blocks() const;
};

/// HRNet-style multi-branch network, described by its branch block counts.
/// Branch i of stage n runs at input/2^(i+1) with base_channel*2^(i-1)
/// channels; stage n repeats its refinement unit `modules[n-2]` times.
struct MultiBranchConfig {
    std::string name;
    int base_channel = 16;
    std::vector<std::vector<int>> block_counts;  ///< A_n = [a_1..a_n], 4 stages
    int input_resolution = 512;
    int num_joints = 14;

    // layout constants (stem / stage-1 / head), shared by the whole family
    int stem_channels = 64;
    int stage1_width = 48;      ///< bottleneck width; stage-1 output is 4x this
    int modules[3] = {1, 2, 3}; ///< refinement units per stage 2/3/4
    int head_width_per_16 = 24; ///< deconv head width, scaled by base/16
    int head_blocks = 1;
};

using PresetConfig = std::variant<ArchConfig, MultiBranchConfig>;

/// Named architectures shipped as data. Throws std::invalid_argument for
/// unknown names; see preset_names() for the accepted set.
PresetConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

std::vector<Violation> validate(const ArchConfig& cfg);

/// Per-layer output shapes at the given input resolution. Throws
/// std::invalid_argument when the resolution is not divisible by the net
/// downsampling factor, or when the config itself is invalid.
std::vector<LayerShape> shape_trace(const ArchConfig& cfg, int resolution);

/// Copy with every depthwise kernel (inverted-residual and grouped plain
/// conv) replaced by k.
ArchConfig with_depthwise_kernel(ArchConfig cfg, int k);

/// Copy with all fusion concats removed and the head rewired accordingly.
ArchConfig without_fusion(const ArchConfig& cfg);

ArchConfig arch_from_json(const std::string& json_text);
std::string arch_to_json(const ArchConfig& cfg, int indent = 1);

}  // namespace litepose
