// SPDX-License-Identifier: Apache-2.0
//
// Release gate: one line per criterion, PASS or FAIL, nonzero exit when
// anything fails. Each check is self-contained so a failure pinpoints the
// broken guarantee.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "litepose/cost.hpp"
#include "litepose/decode.hpp"
#include "litepose/engine.hpp"
#include "litepose/eval.hpp"
#include "litepose/nas.hpp"
#include "litepose/shrink.hpp"
#include "litepose/supernet.hpp"
#include "test_util.hpp"

using namespace litepose;

namespace {

int failures = 0;

void verdict(int criterion, bool ok, const std::string& what) {
    std::printf("criterion %2d: %s  %s\n", criterion, ok ? "PASS" : "FAIL",
                what.c_str());
    if (!ok) ++failures;
}

bool within(double value, double target, double tol) {
    return std::abs(value - target) <= tol * target;
}

void budgets() {
    auto s = std::get<ArchConfig>(preset("litepose-s"));
    CostReport rs = model_cost(s, 448);
    verdict(1, within(rs.mparams(), 2.7, 0.02) && within(rs.gmacs(), 5.0, 0.02),
            "litepose-s at 448 costs 2.7 MParams / 5.0 GMACs within 2% (got " +
                std::to_string(rs.mparams()) + "M / " + std::to_string(rs.gmacs()) +
                "G)");
    auto xs = std::get<ArchConfig>(preset("litepose-xs"));
    CostReport rx = model_cost(xs, 256);
    verdict(2, within(rx.mparams(), 1.7, 0.02) && within(rx.gmacs(), 1.2, 0.02),
            "litepose-xs at 256 costs 1.7 MParams / 1.2 GMACs within 2% (got " +
                std::to_string(rx.mparams()) + "M / " + std::to_string(rx.gmacs()) +
                "G)");
}

void shrink_table() {
    const double expected[4] = {12.5, 10.1, 10.0, 9.2};
    bool ok = true;
    std::string got;
    for (int level = 0; level < 4; ++level) {
        double g = shrink_cost(shrink_level(level), shrink_level_base_channel(level),
                               512)
                       .gmacs();
        ok = ok && within(g, expected[level], 0.05);
        got += (level ? ", " : "") + std::to_string(g);
    }
    verdict(3, ok, "shrink levels cost 12.5/10.1/10.0/9.2 GMACs within 5% (got " +
                       got + ")");
}

void kernel_table() {
    auto half = std::get<ArchConfig>(preset("litepose-half"));
    auto sweep = kernel_sweep(half, {3, 5, 7});
    double plain = model_cost(without_fusion(half), 512).gmacs();
    double ratio = double(sweep[2].second.total_macs) /
                   double(sweep[0].second.total_macs);
    bool ok = within(sweep[0].second.gmacs(), 3.8, 0.05) &&
              within(sweep[1].second.gmacs(), 4.1, 0.05) &&
              within(plain, 4.1, 0.05) &&
              within(sweep[2].second.gmacs(), 4.7, 0.05) &&
              std::abs(ratio - 1.25) <= 0.05;
    verdict(4, ok,
            "half-width kernel sweep costs 3.8/4.1(/4.1 fused-off)/4.7 GMACs "
            "within 5%, k7:k3 ratio 1.25 +/- 0.05 (got " +
                std::to_string(sweep[0].second.gmacs()) + "/" +
                std::to_string(sweep[1].second.gmacs()) + "/" +
                std::to_string(plain) + "/" +
                std::to_string(sweep[2].second.gmacs()) + ", ratio " +
                std::to_string(ratio) + ")");
}

void engine_counter() {
    Rng rng(50051);
    int mismatches = 0;
    for (int i = 0; i < 100; ++i) {
        ArchConfig cfg = testutil::random_arch(rng);
        int res = std::min(cfg.input_resolution, 64);
        res -= res % 8;
        ModelWeights w = random_weights(cfg, uint64_t(i));
        Tensor input(3, res, res);
        Rng ir = rng.split(uint64_t(i));
        for (float& v : input.data) v = ir.uniform(-1.f, 1.f);
        ForwardResult fwd = forward(cfg, w, input);
        if (fwd.macs != uint64_t(model_cost(cfg, res).total_macs)) ++mismatches;
    }
    verdict(5, mismatches == 0,
            "executed MACs equal the analytic count on 100 random nets up to "
            "64x64 (" +
                std::to_string(mismatches) + " mismatches)");
}

void shrink_laws() {
    Rng rng(4242);
    auto random_config = [&] {
        ShrinkConfig c;
        for (size_t n = 0; n < 4; ++n) {
            c.stages.emplace_back();
            for (size_t i = 0; i <= n; ++i)
                c.stages.back().push_back(int(rng.below(5)));
        }
        return c;
    };
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        ShrinkConfig a = random_config(), b = random_config();
        ShrinkConfig below = a;
        for (auto& stage : below.stages)
            for (int& v : stage) v = int(rng.below(uint64_t(v + 1)));
        if (!is_shrunk_from(a, a)) ++violations;
        if (!is_shrunk_from(below, a)) ++violations;
        if (is_shrunk_from(a, b) && is_shrunk_from(b, a) && !(a == b)) ++violations;
        if (is_shrunk_from(a, b) && !is_shrunk_from(below, b)) ++violations;
        if (shrink_cost(below, 16, 128).total_macs >
            shrink_cost(a, 16, 128).total_macs)
            ++violations;
    }
    verdict(6, violations == 0,
            "shrink partial order laws and cost monotonicity hold on 1000 "
            "random pairs (" +
                std::to_string(violations) + " violations)");
}

void evolution_optimum() {
    // Separable landscape: each gene contributes independently, so a working
    // evolutionary loop must recover the enumerated optimum every time.
    auto fitness = [](const SubnetChoice& c) {
        double f = std::sin(0.37 * c.resolution);
        for (size_t i = 0; i < c.ratios.size(); ++i)
            f += std::sin(1.7 * double(i + 1) + 3.1 * c.ratios[i]);
        double macs = 0;
        for (double r : c.ratios) macs += r;
        return Evaluation{f, macs};
    };
    const SearchSpace spaces[] = {testutil::toy_space({16, 32}, {0.5, 1.0}),
                                  testutil::toy_space({16}, {0.25, 0.5, 1.0})};
    int bad = 0;
    for (const SearchSpace& space : spaces) {
        auto all = testutil::enumerate_space(space);
        double best = -1e30;
        for (const auto& c : all) best = std::max(best, fitness(c).fitness);
        for (uint64_t seed = 0; seed < 10; ++seed) {
            EvolutionParams p;
            p.population = 64;
            p.generations = int(50 * all.size());
            p.seed = seed;
            auto r = evolve(space, fitness, p);
            if (r.best_eval.fitness != best) ++bad;
            double so_far = -1e30;
            for (const auto& rec : r.history) {
                if (rec.improved && rec.eval.fitness < so_far) ++bad;
                so_far = std::max(so_far, rec.eval.fitness);
            }
        }
    }
    verdict(7, bad == 0,
            "evolution reaches the exhaustive optimum on 2 toy spaces x 10 "
            "seeds with monotone best-so-far (" +
                std::to_string(bad) + " misses)");
}

void extraction() {
    bool ok = true;
    // recorded choices rebuild the shipped presets
    SearchSpace sml = search_space("litepose-sml");
    SearchSpace xs = search_space("litepose-xs");
    const std::pair<const char*, const SearchSpace*> cases[] = {
        {"litepose-s", &sml}, {"litepose-xs", &xs}};
    for (const auto& [name, space] : cases) {
        ArchConfig sub = extract_subnet(*space, recorded_choice(name));
        auto ref = std::get<ArchConfig>(preset(name));
        auto a = sub.all_blocks(), b = ref.all_blocks();
        ok = ok && a.size() == b.size() && sub.input_resolution == ref.input_resolution;
        for (size_t i = 0; ok && i < a.size(); ++i)
            ok = a[i]->kind == b[i]->kind && a[i]->kernel == b[i]->kernel &&
                 a[i]->in_channels == b[i]->in_channels &&
                 a[i]->out_channels == b[i]->out_channels;
    }
    // masked supernet forward == extracted subnet forward
    SearchSpace toy = testutil::toy_space({16, 32});
    ModelWeights weights = random_weights(toy.supernet, 7);
    Rng rng(8);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        SubnetChoice c = sample_choice(toy, rng);
        ModelWeights sw = extract_weights(toy, c, weights);
        ArchConfig sub = extract_subnet(toy, c);
        Tensor in(3, c.resolution, c.resolution);
        Rng ir = rng.split(uint64_t(trial));
        for (float& v : in.data) v = ir.uniform(-1.f, 1.f);
        ForwardResult a = forward(sub, sw, in);
        ForwardResult b = masked_forward(toy.supernet, weights, in,
                                         active_channels(toy, c));
        for (size_t o = 0; o < a.outputs.size(); ++o)
            for (size_t i = 0; i < a.outputs[o].data.size(); ++i) {
                double d = std::abs(a.outputs[o].data[i] - b.outputs[o].data[i]);
                double rel = d / (std::abs(b.outputs[o].data[i]) + 1e-12);
                worst = std::max(worst, std::min(d, rel));
            }
    }
    ok = ok && worst < 1e-6;
    verdict(8, ok,
            "extraction rebuilds the presets and masked forward matches the "
            "extracted subnet (worst rel err " +
                std::to_string(worst) + ")");
}

void decode_roundtrip() {
    SyntheticParams params;
    Rng rng(161803);
    int bad_scenes = 0;
    std::vector<DetImage> dets;
    std::vector<GtImage> gts;
    for (int i = 0; i < 200; ++i) {
        Rng sr = rng.split(uint64_t(i));
        SyntheticScene scene = synthesize_scene(params, sr);
        DecodeParams dp;
        dp.num_joints = params.num_joints;
        auto poses = decode(scene.heatmaps, scene.tags, dp);
        bool exact = poses.size() == scene.people.size();
        for (const PersonPose& gt : scene.people) {
            auto it = std::find_if(poses.begin(), poses.end(),
                                   [&](const PersonPose& p) {
                                       return std::abs(p.tag - gt.tag) < 1e-9;
                                   });
            if (it == poses.end()) {
                exact = false;
                break;
            }
            for (size_t j = 0; j < gt.joints.size(); ++j) {
                if (it->joints[j].visible != gt.joints[j].visible) exact = false;
                if (gt.joints[j].visible && (it->joints[j].x != gt.joints[j].x ||
                                             it->joints[j].y != gt.joints[j].y))
                    exact = false;
            }
        }
        if (!exact) ++bad_scenes;
        dets.push_back({poses});
        gts.push_back({scene.people, std::vector<double>(scene.people.size(), 100.0)});
    }
    ApResult ap = average_precision(dets, gts, oks_table("crowdpose14"));
    bool ok = bad_scenes == 0 && ap.ap == 1.0 && ap.ap50 == 1.0 && ap.ap75 == 1.0;
    verdict(9, ok,
            "200 synthetic scenes decode exactly and score AP=AP50=AP75=1.0 (" +
                std::to_string(bad_scenes) + " inexact scenes, AP " +
                std::to_string(ap.ap) + ")");
}

void oks_units() {
    OksTable t = oks_table("crowdpose14");
    PersonPose gt;
    for (int j = 0; j < 14; ++j) gt.joints.push_back({3.0 * j, 2.0 * j, 1.0, true});
    bool exact_one = oks(gt, gt, 77.0, t) == 1.0;

    bool inv_e = true;
    const double s2 = 123.0;
    for (size_t j = 0; j < t.k.size(); ++j) {
        PersonPose g2, d2;
        g2.joints.assign(t.k.size(), {0, 0, 1.0, false});
        d2 = g2;
        g2.joints[j] = {1.0, 2.0, 1.0, true};
        d2.joints[j] = {1.0 + std::sqrt(2.0 * s2) * t.k[j], 2.0, 1.0, true};
        inv_e = inv_e && std::abs(oks(d2, g2, s2, t) - std::exp(-1.0)) < 1e-9;
    }

    PersonPose half = gt;
    for (size_t j = 7; j < 14; ++j) half.joints[j].visible = false;
    PersonPose moved = gt;
    for (size_t j = 7; j < 14; ++j) moved.joints[j].x += 5000;
    bool invariant = oks(moved, half, 77.0, t) == oks(gt, half, 77.0, t) &&
                     oks(moved, half, 77.0, t) == 1.0;
    verdict(10, exact_one && inv_e && invariant,
            "OKS is exactly 1 at zero error, 1/e at sqrt(2)*s*k within 1e-9, "
            "and ignores joints invisible in the truth");
}

void adjointness() {
    Rng rng(271828);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int cin = 2 + int(rng.below(4)), cout = 2 + int(rng.below(4));
        const int k = 4, s = 2, h = 8;
        ConvWeights w;
        w.kernel.resize(size_t(cin) * cout * k * k);
        for (float& v : w.kernel) v = rng.uniform(-1.f, 1.f);
        Tensor x(cin, h, h), y(cout, 2 * h, 2 * h);
        for (float& v : x.data) v = rng.uniform(-1.f, 1.f);
        for (float& v : y.data) v = rng.uniform(-1.f, 1.f);
        Tensor up = conv_transpose2d(x, w, cout, k, s, nullptr);
        Tensor down = conv2d(y, w, cin, k, s, 1, nullptr);
        double ip_up = 0, ip_down = 0;
        for (size_t i = 0; i < up.data.size(); ++i)
            ip_up += double(up.data[i]) * y.data[i];
        for (size_t i = 0; i < x.data.size(); ++i)
            ip_down += double(x.data[i]) * down.data[i];
        worst = std::max(worst, std::abs(ip_up - ip_down) /
                                    std::max(1.0, std::abs(ip_up)));
    }
    verdict(11, worst < 1e-5,
            "<upsample(x), y> == <x, downsample(y)> on 8x8 tensors within 1e-5 "
            "(worst " +
                std::to_string(worst) + ")");
}

}  // namespace

int main() {
    budgets();
    shrink_table();
    kernel_table();
    engine_counter();
    shrink_laws();
    evolution_optimum();
    extraction();
    decode_roundtrip();
    oks_units();
    adjointness();
    std::printf("%s (%d failing)\n", failures ? "GATE: FAIL" : "GATE: PASS", failures);
    return failures ? 1 : 0;
}
