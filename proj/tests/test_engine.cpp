// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "litepose/cost.hpp"
#include "litepose/engine.hpp"
#include "test_util.hpp"

using namespace litepose;

namespace {

Tensor random_input(int c, int h, Rng& rng) {
    Tensor t(c, h, h);
    for (float& v : t.data) v = rng.uniform(-1.f, 1.f);
    return t;
}

}  // namespace

TEST_CASE("conv2d hand-checked: all-ones 3x3 kernel sums the window") {
    Tensor in(1, 2, 2);
    in.data = {1, 2, 3, 4};
    ConvWeights w;
    w.kernel.assign(9, 1.f);
    std::uint64_t macs = 0;
    Tensor out = conv2d(in, w, 1, 3, 1, 1, &macs);
    // padding 1 makes every 3x3 window cover the whole 2x2 input
    for (float v : out.data) CHECK(v == doctest::Approx(10.f));
    CHECK(macs == 9 * 2 * 2);  // padded taps count too
}

TEST_CASE("conv2d stride 2 with an identity kernel subsamples") {
    Tensor in(1, 4, 4);
    for (int i = 0; i < 16; ++i) in.data[size_t(i)] = float(i);
    ConvWeights w;
    w.kernel.assign(9, 0.f);
    w.kernel[4] = 1.f;  // center tap
    Tensor out = conv2d(in, w, 1, 3, 2, 1, nullptr);
    REQUIRE(out.h == 2);
    CHECK(out.at(0, 0, 0) == 0.f);
    CHECK(out.at(0, 0, 1) == 2.f);
    CHECK(out.at(0, 1, 0) == 8.f);
    CHECK(out.at(0, 1, 1) == 10.f);
}

TEST_CASE("grouped conv equals a dense conv with a block-diagonal kernel") {
    Rng rng(3);
    Tensor in = random_input(4, 5, rng);
    ConvWeights grouped;  // 2 groups: 4ch -> 6ch, layout [cout][cin/g][k][k]
    grouped.kernel.resize(6 * 2 * 9);
    grouped.bias.resize(6);
    for (float& v : grouped.kernel) v = rng.uniform(-1.f, 1.f);
    for (float& v : grouped.bias) v = rng.uniform(-1.f, 1.f);
    ConvWeights dense;
    dense.kernel.assign(6 * 4 * 9, 0.f);
    dense.bias = grouped.bias;
    for (int co = 0; co < 6; ++co)
        for (int ci = 0; ci < 2; ++ci)
            for (int t = 0; t < 9; ++t)
                dense.kernel[size_t((co * 4 + (co / 3) * 2 + ci) * 9 + t)] =
                    grouped.kernel[size_t((co * 2 + ci) * 9 + t)];
    Tensor a = conv2d(in, grouped, 6, 3, 1, 2, nullptr);
    Tensor b = conv2d(in, dense, 6, 3, 1, 1, nullptr);
    for (size_t i = 0; i < a.data.size(); ++i)
        CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-5));
}

TEST_CASE("transposed conv with a single center tap zero-stuffs") {
    Tensor in(1, 3, 3);
    for (int i = 0; i < 9; ++i) in.data[size_t(i)] = float(i + 1);
    ConvWeights w;
    w.kernel.assign(16, 0.f);  // k=4, [cin=1][cout=1][4][4]
    w.kernel[1 * 4 + 1] = 1.f;
    Tensor out = conv_transpose2d(in, w, 1, 4, 2, nullptr);
    REQUIRE(out.h == 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            float expect = (y % 2 == 0 && x % 2 == 0) ? in.at(0, y / 2, x / 2) : 0.f;
            CHECK(out.at(0, y, x) == expect);
        }
}

TEST_CASE("transposed conv is the adjoint of the strided conv") {
    Rng rng(17);
    const int cin = 3, cout = 5, k = 4, s = 2, h = 8;
    ConvWeights w;
    w.kernel.resize(size_t(cin) * cout * k * k);
    for (float& v : w.kernel) v = rng.uniform(-1.f, 1.f);
    // the same buffer reads as [cin][cout][k][k] for the up pass and as a
    // [cout_fwd=cin][cin_fwd=cout] conv kernel for the down pass
    Tensor x = random_input(cin, h, rng);
    Tensor y = random_input(cout, 2 * h, rng);
    Tensor up = conv_transpose2d(x, w, cout, k, s, nullptr);
    Tensor down = conv2d(y, w, cin, k, s, 1, nullptr);
    double ip_up = 0, ip_down = 0;
    for (size_t i = 0; i < up.data.size(); ++i) ip_up += double(up.data[i]) * y.data[i];
    for (size_t i = 0; i < x.data.size(); ++i) ip_down += double(x.data[i]) * down.data[i];
    CHECK(std::abs(ip_up - ip_down) / std::abs(ip_up) < 1e-5);
}

TEST_CASE("executed MACs equal the analytic model on random nets") {
    Rng rng(404);
    for (int i = 0; i < 30; ++i) {
        ArchConfig cfg = testutil::random_arch(rng);
        int res = std::min(cfg.input_resolution, 32);
        res -= res % 8;
        ModelWeights w = random_weights(cfg, 1000 + uint64_t(i));
        Rng ir = rng.split(uint64_t(i));
        ForwardResult fwd = forward(cfg, w, random_input(3, res, ir));
        CAPTURE(i);
        CHECK(fwd.macs == std::uint64_t(model_cost(cfg, res).total_macs));
        REQUIRE(fwd.outputs.size() == 2);
        CHECK(fwd.outputs[0].h == res / 4);
        CHECK(fwd.outputs[1].h == res / 2);
    }
}

TEST_CASE("masked supernet forward equals the extracted subnet") {
    SearchSpace space = testutil::toy_space({16, 32});
    ModelWeights weights = random_weights(space.supernet, 99);
    Rng rng(55);
    for (int trial = 0; trial < 10; ++trial) {
        SubnetChoice c = sample_choice(space, rng);
        ArchConfig sub = extract_subnet(space, c);
        ModelWeights sw = extract_weights(space, c, weights);
        Rng ir = rng.split(uint64_t(trial));
        Tensor in = random_input(3, c.resolution, ir);
        ForwardResult a = forward(sub, sw, in);
        ForwardResult b = masked_forward(space.supernet, weights, in,
                                         active_channels(space, c));
        REQUIRE(a.outputs.size() == b.outputs.size());
        CAPTURE(trial);
        for (size_t o = 0; o < a.outputs.size(); ++o) {
            REQUIRE(a.outputs[o].numel() <= b.outputs[o].numel());
            double worst = 0;
            for (size_t i = 0; i < a.outputs[o].data.size(); ++i) {
                double d = std::abs(a.outputs[o].data[i] - b.outputs[o].data[i]);
                double rel = d / (std::abs(b.outputs[o].data[i]) + 1e-12);
                worst = std::max(worst, std::min(d, rel));
            }
            CHECK(worst < 1e-6);
        }
    }
}

TEST_CASE("weights are reproducible and seed-sensitive") {
    auto cfg = testutil::toy_space().supernet;
    ModelWeights a = random_weights(cfg, 5), b = random_weights(cfg, 5);
    ModelWeights c = random_weights(cfg, 6);
    CHECK(a.parameter_count() == b.parameter_count());
    CHECK(a.layers[0].convs[0].kernel == b.layers[0].convs[0].kernel);
    CHECK(a.layers[0].convs[0].kernel != c.layers[0].convs[0].kernel);
}
