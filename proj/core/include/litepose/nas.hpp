// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "litepose/rng.hpp"
#include "litepose/supernet.hpp"

namespace litepose {

/// Fitness to maximize, plus the MACs used for constraint/tie-breaks.
struct Evaluation {
    double fitness = 0.0;
    double macs = 0.0;
};

using FitnessFn = std::function<Evaluation(const SubnetChoice&)>;

struct EvolutionParams {
    int population = 64;
    int tournament = 8;
    double mutate_prob = 0.1;   // per-gene mutation probability
    int generations = 500;      // number of aging steps after the initial fill
    double macs_limit = 0.0;    // 0 = unconstrained
    int retry_cap = 100;        // resamples allowed per constrained draw
    std::uint64_t seed = 0;
};

struct EvolutionRecord {
    int step = 0;               // 0..population-1 are the initial fill
    SubnetChoice choice;
    Evaluation eval;
    bool improved = false;      // strictly better than the previous best
};

struct EvolutionResult {
    SubnetChoice best;
    Evaluation best_eval;
    std::vector<EvolutionRecord> history;
    std::uint64_t evaluations = 0;
};

/// Regularized evolution (tournament parent selection, oldest-dies aging).
/// Deterministic given params.seed. Candidates violating macs_limit are
/// resampled up to retry_cap, then the attempt is skipped. Ties on fitness
/// break toward lower MACs, then lexicographically smaller encoding.
EvolutionResult evolve(const SearchSpace& space, const FitnessFn& fitness,
                       const EvolutionParams& params);

/// Mutates each gene (resolution + per-layer ratios) independently with
/// probability p, redrawing uniformly from the menu.
SubnetChoice mutate(const SearchSpace& space, const SubnetChoice& parent,
                    double p, Rng& rng);

/// Built-in proxy fitness used by the CLI when no measurements are given:
/// rewards capacity under the MAC budget (larger subnets score higher,
/// deterministic, monotone in every gene). Useful for smoke tests only.
Evaluation proxy_fitness(const SearchSpace& space, const SubnetChoice& choice);

std::string evolution_history_csv(const EvolutionResult& result);

}  // namespace litepose
