// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "litepose/arch.hpp"
#include "litepose/rng.hpp"
#include "litepose/supernet.hpp"

namespace litepose {

/// Dense CHW float tensor.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), data(size_t(c_) * h_ * w_, 0.f) {}
    float& at(int ci, int hi, int wi) { return data[(size_t(ci) * h + hi) * w + wi]; }
    float at(int ci, int hi, int wi) const { return data[(size_t(ci) * h + hi) * w + wi]; }
    size_t numel() const { return data.size(); }
};

/// Weights for one weight-bearing block. Inverted residuals carry up to
/// three convolutions (expand, depthwise, project); others use only [0].
struct ConvWeights {
    // kernel layout: [cout][cin/groups][k][k]
    std::vector<float> kernel;
    std::vector<float> bias;
};

struct LayerWeights {
    std::vector<ConvWeights> convs;
};

struct ModelWeights {
    std::vector<LayerWeights> layers;  // one entry per block in all_blocks() order

    std::uint64_t parameter_count() const;
};

/// Allocates weight buffers shaped for `arch` and fills them with small
/// uniform values derived from `seed` (reproducible across platforms).
ModelWeights random_weights(const ArchConfig& arch, std::uint64_t seed);

struct ForwardResult {
    std::vector<Tensor> outputs;        // one per arch.outputs entry
    std::uint64_t macs = 0;             // multiply-accumulates actually executed
};

/// Runs the network on one input (3 x res x res). Counts MACs as it goes;
/// the count must agree exactly with the analytic cost model.
ForwardResult forward(const ArchConfig& arch, const ModelWeights& weights,
                      const Tensor& input);

/// Forward pass through the full supernet with per-layer channel masks:
/// channels >= active[i] are zeroed after each searchable layer. Used to
/// check extraction equivalence.
ForwardResult masked_forward(const ArchConfig& arch, const ModelWeights& weights,
                             const Tensor& input, const std::vector<int>& active_channels);

/// Slices supernet weights down to the extracted subnet: prefix channels
/// everywhere, segment-wise prefixes across fusion concats. The result pairs
/// with extract_subnet(space, choice).
ModelWeights extract_weights(const SearchSpace& space, const SubnetChoice& choice,
                             const ModelWeights& supernet_weights);

/// Per-searchable-layer active channel counts implied by a choice; the
/// argument masked_forward expects.
std::vector<int> active_channels(const SearchSpace& space, const SubnetChoice& choice);

/// Primitive ops, exposed for direct testing. conv2d zero-pads by (k-1)/2;
/// conv_transpose2d is its exact adjoint (padding (k-stride)/2, kernel layout
/// [cin][cout][k][k]) and upsamples by `stride`. Both count one MAC per
/// multiply executed, padding taps included, so the totals agree exactly
/// with the analytic cost model.
Tensor conv2d(const Tensor& in, const ConvWeights& w, int cout, int k, int stride,
              int groups, std::uint64_t* macs);
Tensor conv_transpose2d(const Tensor& in, const ConvWeights& w, int cout, int k,
                        int stride, std::uint64_t* macs);
Tensor relu6(Tensor t);

}  // namespace litepose
