// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "litepose/arch.hpp"

namespace litepose {

struct LayerCost {
    std::string layer;
    BlockKind kind;
    int kernel = 0, cin = 0, cout = 0, h = 0, w = 0;
    long long params = 0;
    long long macs = 0;
};

struct CostReport {
    std::vector<LayerCost> per_layer;
    long long total_params = 0;
    long long total_macs = 0;

    double gmacs() const { return double(total_macs) / 1e9; }
    double mparams() const { return double(total_params) / 1e6; }
};

/// Analytic cost of one block at its output resolution.
///   conv: macs = k^2*cin*cout*h*w/groups, params = k^2*cin*cout/groups + 2*cout
///   transposed conv: same formula, h/w are the OUTPUT dims
///   inverted residual: expand (1x1, at input res) + depthwise + project
///   concat: free
/// The 2*cout params are the folded per-channel norm scale/shift.
/// h_in/w_in are the block input dims (the expand conv of an inverted
/// residual runs before the stride).
std::pair<long long, long long> layer_cost(const BlockSpec& b, int h_in, int w_in);

CostReport model_cost(const ArchConfig& cfg, int resolution);
CostReport model_cost(const MultiBranchConfig& cfg, int resolution);
CostReport model_cost(const MultiBranchConfig& cfg);  ///< at cfg.input_resolution

/// Flattened (name, block, h_in, w_in) layer list of a multi-branch config;
/// shared by the cost model and reporting.
struct MultiBranchLayer {
    std::string name;
    BlockSpec block;
    int h_in = 0, w_in = 0;
};
std::vector<MultiBranchLayer> multibranch_layers(const MultiBranchConfig& cfg,
                                                 int resolution);

/// Cost of cfg with every depthwise kernel swapped for each k in kernels.
std::vector<std::pair<int, CostReport>> kernel_sweep(const ArchConfig& cfg,
                                                     const std::vector<int>& kernels);

std::string cost_report_csv(const CostReport& report);
std::string cost_report_json(const CostReport& report, const std::string& model,
                             int resolution);

}  // namespace litepose
