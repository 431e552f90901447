// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "litepose/cost.hpp"
#include "litepose/decode.hpp"
#include "litepose/engine.hpp"
#include "litepose/nas.hpp"
#include "litepose/shrink.hpp"
#include "litepose/supernet.hpp"

using namespace litepose;

static void BM_ModelCost(benchmark::State& state) {
    auto cfg = std::get<ArchConfig>(preset("litepose-s"));
    for (auto _ : state) benchmark::DoNotOptimize(model_cost(cfg, 448).total_macs);
}
BENCHMARK(BM_ModelCost);

static void BM_MultiBranchCost(benchmark::State& state) {
    ShrinkConfig c = shrink_level(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(shrink_cost(c, 16, 512).total_macs);
}
BENCHMARK(BM_MultiBranchCost);

static void BM_ExtractSubnet(benchmark::State& state) {
    SearchSpace space = search_space("litepose-sml");
    SubnetChoice choice = recorded_choice("litepose-s");
    for (auto _ : state) benchmark::DoNotOptimize(extract_subnet(space, choice));
}
BENCHMARK(BM_ExtractSubnet);

static void BM_Forward(benchmark::State& state) {
    auto cfg = std::get<ArchConfig>(preset("litepose-xs"));
    ModelWeights weights = random_weights(cfg, 1);
    const int res = int(state.range(0));
    Tensor input(3, res, res);
    Rng rng(2);
    for (float& v : input.data) v = rng.uniform(-1.f, 1.f);
    for (auto _ : state) {
        ForwardResult r = forward(cfg, weights, input);
        benchmark::DoNotOptimize(r.macs);
    }
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Decode(benchmark::State& state) {
    SyntheticParams params;
    Rng rng(3);
    SyntheticScene scene = synthesize_scene(params, rng);
    DecodeParams dp;
    for (auto _ : state)
        benchmark::DoNotOptimize(decode(scene.heatmaps, scene.tags, dp));
}
BENCHMARK(BM_Decode);

static void BM_Evolve(benchmark::State& state) {
    SearchSpace space = search_space("litepose-sml");
    EvolutionParams p;
    p.population = 16;
    p.generations = 32;
    for (auto _ : state) {
        auto r = evolve(space, [&](const SubnetChoice& c) {
            double macs = 0;
            for (double v : c.ratios) macs += v;
            return Evaluation{macs, macs};
        }, p);
        benchmark::DoNotOptimize(r.best_eval.fitness);
        ++p.seed;
    }
}
BENCHMARK(BM_Evolve);

BENCHMARK_MAIN();
