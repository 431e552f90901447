// SPDX-License-Identifier: Apache-2.0
#include "litepose/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace litepose {

namespace {

int down_dim(int h, int k, int stride) {
    if (stride == 1) return h;
    return (h + 2 * (k / 2) - k) / 2 + 1;
}

float clamp6(float v) { return v < 0.f ? 0.f : (v > 6.f ? 6.f : v); }

}  // namespace

Tensor relu6(Tensor t) {
    for (float& v : t.data) v = clamp6(v);
    return t;
}

Tensor conv2d(const Tensor& in, const ConvWeights& w, int cout, int k, int stride,
              int groups, std::uint64_t* macs) {
    if (in.c % groups != 0 || cout % groups != 0)
        throw std::invalid_argument("channels not divisible by groups");
    if (w.kernel.size() != size_t(cout) * (in.c / groups) * k * k)
        throw std::invalid_argument("conv2d kernel size does not match layer shape");
    const int p = (k - 1) / 2;
    const int ho = (in.h + 2 * p - k) / stride + 1;
    const int wo = (in.w + 2 * p - k) / stride + 1;
    const int cig = in.c / groups, cog = cout / groups;
    Tensor out(cout, ho, wo);
    for (int co = 0; co < cout; ++co) {
        const int g = co / cog;
        const float* kw = w.kernel.data() + size_t(co) * cig * k * k;
        for (int oh = 0; oh < ho; ++oh) {
            for (int ow = 0; ow < wo; ++ow) {
                float acc = w.bias.empty() ? 0.f : w.bias[size_t(co)];
                for (int ci = 0; ci < cig; ++ci) {
                    for (int kh = 0; kh < k; ++kh) {
                        const int ih = oh * stride - p + kh;
                        for (int kwi = 0; kwi < k; ++kwi) {
                            const int iw = ow * stride - p + kwi;
                            const bool inside =
                                ih >= 0 && ih < in.h && iw >= 0 && iw < in.w;
                            const float v =
                                inside ? in.at(g * cig + ci, ih, iw) : 0.f;
                            acc += kw[(size_t(ci) * k + kh) * k + kwi] * v;
                        }
                    }
                }
                out.at(co, oh, ow) = acc;
            }
        }
    }
    if (macs) *macs += std::uint64_t(k) * k * cig * cout * ho * wo;
    return out;
}

Tensor conv_transpose2d(const Tensor& in, const ConvWeights& w, int cout, int k,
                        int stride, std::uint64_t* macs) {
    if (w.kernel.size() != size_t(in.c) * cout * k * k)
        throw std::invalid_argument(
            "conv_transpose2d kernel size does not match layer shape");
    const int p = (k - stride) / 2;
    const int ho = in.h * stride, wo = in.w * stride;
    Tensor out(cout, ho, wo);
    // Gather form of the zero-insertion convolution. Taps that fall between
    // input samples or outside the border multiply zero; they still count,
    // matching the analytic k^2*cin*cout*h_out*w_out.
    for (int co = 0; co < cout; ++co) {
        for (int oh = 0; oh < ho; ++oh) {
            for (int ow = 0; ow < wo; ++ow) {
                float acc = w.bias.empty() ? 0.f : w.bias[size_t(co)];
                for (int ci = 0; ci < in.c; ++ci) {
                    const float* kw =
                        w.kernel.data() + (size_t(ci) * cout + co) * k * k;
                    for (int kh = 0; kh < k; ++kh) {
                        const int t = oh + p - kh;
                        for (int kwi = 0; kwi < k; ++kwi) {
                            const int u = ow + p - kwi;
                            float v = 0.f;
                            if (t >= 0 && u >= 0 && t % stride == 0 &&
                                u % stride == 0 && t / stride < in.h &&
                                u / stride < in.w)
                                v = in.at(ci, t / stride, u / stride);
                            acc += kw[size_t(kh) * k + kwi] * v;
                        }
                    }
                }
                out.at(co, oh, ow) = acc;
            }
        }
    }
    if (macs) *macs += std::uint64_t(k) * k * in.c * cout * ho * wo;
    return out;
}

// ---------------------------------------------------------------------------
// Weights

std::uint64_t ModelWeights::parameter_count() const {
    std::uint64_t n = 0;
    for (const auto& l : layers)
        for (const auto& c : l.convs) n += c.kernel.size() + c.bias.size();
    return n;
}

namespace {

ConvWeights random_conv(int cin_per_group, int cout, int k, Rng& rng) {
    ConvWeights w;
    w.kernel.resize(size_t(cout) * cin_per_group * k * k);
    w.bias.resize(size_t(cout));
    const float bound = 1.f / std::sqrt(float(cin_per_group) * k * k);
    for (float& v : w.kernel) v = rng.uniform(-bound, bound);
    for (float& v : w.bias) v = rng.uniform(-0.05f, 0.05f);
    return w;
}

}  // namespace

ModelWeights random_weights(const ArchConfig& arch, std::uint64_t seed) {
    Rng root(seed);
    ModelWeights weights;
    std::uint64_t li = 0;
    for (const BlockSpec* b : arch.all_blocks()) {
        Rng rng = root.split(li++);
        LayerWeights lw;
        switch (b->kind) {
            case BlockKind::Concat:
                break;
            case BlockKind::InvertedResidual: {
                const int mid = b->expanded_channels();
                if (mid != b->in_channels)
                    lw.convs.push_back(random_conv(b->in_channels, mid, 1, rng));
                lw.convs.push_back(random_conv(1, mid, b->kernel, rng));
                lw.convs.push_back(random_conv(mid, b->out_channels, 1, rng));
                break;
            }
            case BlockKind::TransposedConv: {
                // layout [cin][cout][k][k]; bias is per OUTPUT channel
                ConvWeights w;
                w.kernel.resize(size_t(b->in_channels) * b->out_channels *
                                b->kernel * b->kernel);
                w.bias.resize(size_t(b->out_channels));
                const float bound =
                    1.f / std::sqrt(float(b->in_channels) * b->kernel * b->kernel);
                for (float& v : w.kernel) v = rng.uniform(-bound, bound);
                for (float& v : w.bias) v = rng.uniform(-0.05f, 0.05f);
                lw.convs.push_back(std::move(w));
                break;
            }
            default:
                lw.convs.push_back(random_conv(b->in_channels / b->groups,
                                               b->out_channels, b->kernel, rng));
        }
        weights.layers.push_back(std::move(lw));
    }
    return weights;
}

// ---------------------------------------------------------------------------
// Forward pass

namespace {

// Zeroes channels >= keep.
void mask_tail(Tensor& t, int keep) {
    for (int c = keep; c < t.c; ++c)
        for (int h = 0; h < t.h; ++h)
            for (int w = 0; w < t.w; ++w) t.at(c, h, w) = 0.f;
}

// Shared forward. When active is non-null it holds per-searchable-layer kept
// channel counts (supernet masking); internals of inverted residuals are
// masked to expand*active_in so the pass matches the extracted subnet.
ForwardResult run_forward(const ArchConfig& arch, const ModelWeights& weights,
                          const Tensor& input, const std::vector<int>* active) {
    auto blocks = arch.all_blocks();
    if (weights.layers.size() != blocks.size())
        throw std::invalid_argument("weights do not match the architecture");
    if (input.c != 3)
        throw std::invalid_argument("input must have 3 channels");

    ForwardResult result;
    Tensor cur = input;
    int cur_active = input.c;
    std::vector<Tensor> stage_out;
    std::vector<int> stage_active;

    size_t bi = 0, si = 0, in_stage = 0, searchable = 0;
    for (const BlockSpec* b : blocks) {
        const LayerWeights& lw = weights.layers[bi];
        int a_out = b->out_channels;
        if (active && (b->kind == BlockKind::StemConv ||
                       b->kind == BlockKind::InvertedResidual ||
                       b->kind == BlockKind::TransposedConv)) {
            if (searchable >= active->size())
                throw std::invalid_argument("active channel list too short");
            a_out = (*active)[searchable++];
        }
        switch (b->kind) {
            case BlockKind::StemConv:
            case BlockKind::PlainConv: {
                cur = relu6(conv2d(cur, lw.convs[0], b->out_channels, b->kernel,
                                   b->stride, b->groups, &result.macs));
                if (active) mask_tail(cur, a_out);
                cur_active = a_out;
                break;
            }
            case BlockKind::InvertedResidual: {
                const int mid = b->expanded_channels();
                const int mid_active =
                    active ? int(b->expand_ratio * cur_active + 0.5) : mid;
                Tensor x = cur;
                size_t ci = 0;
                if (mid != b->in_channels) {
                    x = relu6(conv2d(x, lw.convs[ci++], mid, 1, 1, 1, &result.macs));
                    if (active) mask_tail(x, mid_active);
                }
                x = relu6(conv2d(x, lw.convs[ci++], mid, b->kernel, b->stride, mid,
                                 &result.macs));
                if (active) mask_tail(x, mid_active);
                x = conv2d(x, lw.convs[ci], b->out_channels, 1, 1, 1, &result.macs);
                if (b->stride == 1 && cur.h == x.h) {
                    // channel-prefix residual: well-defined even when slicing
                    // leaves cin != cout
                    const int overlap = std::min(cur.c, x.c);
                    for (int c = 0; c < overlap; ++c)
                        for (int h = 0; h < x.h; ++h)
                            for (int w = 0; w < x.w; ++w)
                                x.at(c, h, w) += cur.at(c, h, w);
                }
                if (active) mask_tail(x, a_out);
                cur = std::move(x);
                cur_active = a_out;
                break;
            }
            case BlockKind::TransposedConv: {
                cur = relu6(conv_transpose2d(cur, lw.convs[0], b->out_channels,
                                             b->kernel, b->stride, &result.macs));
                if (active) mask_tail(cur, a_out);
                cur_active = a_out;
                break;
            }
            case BlockKind::Concat: {
                const Tensor& skip = stage_out.at(size_t(b->fuse_from));
                if (skip.h != cur.h || skip.w != cur.w)
                    throw std::invalid_argument("fusion resolution mismatch");
                Tensor cat(cur.c + skip.c, cur.h, cur.w);
                std::copy(cur.data.begin(), cur.data.end(), cat.data.begin());
                std::copy(skip.data.begin(), skip.data.end(),
                          cat.data.begin() + ptrdiff_t(cur.data.size()));
                cur = std::move(cat);
                cur_active = cur.c;
                break;
            }
            case BlockKind::HeadConv: {
                Tensor y =
                    conv2d(cur, lw.convs[0], b->out_channels, 1, 1, 1, &result.macs);
                result.outputs.push_back(std::move(y));
                break;  // taps the stream, does not replace it
            }
        }
        ++bi;
        if (si < arch.stages.size() && ++in_stage == arch.stages[si].size()) {
            stage_out.push_back(cur);
            stage_active.push_back(cur_active);
            ++si;
            in_stage = 0;
        }
    }
    return result;
}

}  // namespace

ForwardResult forward(const ArchConfig& arch, const ModelWeights& weights,
                      const Tensor& input) {
    return run_forward(arch, weights, input, nullptr);
}

ForwardResult masked_forward(const ArchConfig& arch, const ModelWeights& weights,
                             const Tensor& input,
                             const std::vector<int>& active_channels) {
    return run_forward(arch, weights, input, &active_channels);
}

// ---------------------------------------------------------------------------
// Weight slicing

std::vector<int> active_channels(const SearchSpace& space, const SubnetChoice& choice) {
    ArchConfig sub = extract_subnet(space, choice);
    std::vector<int> out;
    for (int i : searchable_layers(space.supernet))
        out.push_back(sub.all_blocks()[size_t(i)]->out_channels);
    return out;
}

namespace {

// Copies kernel rows/cols selected by output/input channel index lists.
// layout [rows][cols][k][k]
ConvWeights gather_conv(const ConvWeights& w, const std::vector<int>& rows,
                        int cols_full, const std::vector<int>& cols, int k) {
    ConvWeights out;
    out.kernel.resize(rows.size() * cols.size() * size_t(k) * k);
    size_t dst = 0;
    for (int r : rows)
        for (int c : cols)
            for (int t = 0; t < k * k; ++t)
                out.kernel[dst++] =
                    w.kernel[(size_t(r) * cols_full + c) * k * k + size_t(t)];
    if (!w.bias.empty()) {
        out.bias.reserve(rows.size());
        for (int r : rows) out.bias.push_back(w.bias[size_t(r)]);
    }
    return out;
}

std::vector<int> iota_prefix(int n) {
    std::vector<int> v(size_t(n), 0);
    for (int i = 0; i < n; ++i) v[size_t(i)] = i;
    return v;
}

}  // namespace

ModelWeights extract_weights(const SearchSpace& space, const SubnetChoice& choice,
                             const ModelWeights& supernet_weights) {
    const ArchConfig& sup = space.supernet;
    ArchConfig sub = extract_subnet(space, choice);
    auto sup_blocks = sup.all_blocks();
    auto sub_blocks = sub.all_blocks();
    if (supernet_weights.layers.size() != sup_blocks.size())
        throw std::invalid_argument("weights do not match the supernet");

    ModelWeights out;
    // Which channels of the current full-width tensor the subnet keeps. A
    // plain prefix inside the backbone; segmented prefixes after a concat.
    std::vector<int> keep = iota_prefix(3);
    int full = 3;
    std::vector<std::pair<std::vector<int>, int>> stage_keep;  // (keep, full width)

    size_t si = 0, in_stage = 0;
    for (size_t bi = 0; bi < sup_blocks.size(); ++bi) {
        const BlockSpec& fb = *sup_blocks[bi];
        const BlockSpec& eb = *sub_blocks[bi];
        const LayerWeights& lw = supernet_weights.layers[bi];
        LayerWeights sliced;
        switch (fb.kind) {
            case BlockKind::Concat: {
                const auto& [skeep, sfull] = stage_keep.at(size_t(fb.fuse_from));
                std::vector<int> merged = keep;
                for (int c : skeep) merged.push_back(full + c);
                keep = std::move(merged);
                full += sfull;
                break;
            }
            case BlockKind::InvertedResidual: {
                const int mid_full = fb.expanded_channels();
                const int mid_sub = eb.expanded_channels();
                auto mid_keep = iota_prefix(mid_sub);
                auto out_keep = iota_prefix(eb.out_channels);
                size_t ci = 0;
                if (mid_full != fb.in_channels)
                    sliced.convs.push_back(
                        gather_conv(lw.convs[ci++], mid_keep, fb.in_channels, keep, 1));
                sliced.convs.push_back(gather_conv(lw.convs[ci++], mid_keep, 1,
                                                   {0}, fb.kernel));
                sliced.convs.push_back(gather_conv(lw.convs[ci], out_keep, mid_full,
                                                   mid_keep, 1));
                keep = out_keep;
                full = fb.out_channels;
                break;
            }
            case BlockKind::TransposedConv: {
                // layout [cin][cout][k][k]: rows are inputs, bias is by cout,
                // so slice the bias separately
                auto out_keep = iota_prefix(eb.out_channels);
                ConvWeights kernel_only{lw.convs[0].kernel, {}};
                sliced.convs.push_back(gather_conv(kernel_only, keep,
                                                   fb.out_channels, out_keep,
                                                   fb.kernel));
                sliced.convs.back().bias.assign(
                    lw.convs[0].bias.begin(),
                    lw.convs[0].bias.begin() + eb.out_channels);
                keep = out_keep;
                full = fb.out_channels;
                break;
            }
            case BlockKind::HeadConv: {
                auto out_keep = iota_prefix(eb.out_channels);
                sliced.convs.push_back(
                    gather_conv(lw.convs[0], out_keep, fb.in_channels, keep, 1));
                break;  // taps: running width unchanged
            }
            default: {  // stem conv; grouped plain convs are not searchable
                auto out_keep = iota_prefix(eb.out_channels);
                sliced.convs.push_back(gather_conv(lw.convs[0], out_keep,
                                                   fb.in_channels / fb.groups, keep,
                                                   fb.kernel));
                keep = out_keep;
                full = fb.out_channels;
            }
        }
        out.layers.push_back(std::move(sliced));
        if (si < sup.stages.size() && ++in_stage == sup.stages[si].size()) {
            stage_keep.emplace_back(keep, full);
            ++si;
            in_stage = 0;
        }
    }
    return out;
}

}  // namespace litepose
