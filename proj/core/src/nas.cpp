// SPDX-License-Identifier: Apache-2.0
#include "litepose/nas.hpp"

#include <deque>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "litepose/cost.hpp"

namespace litepose {

namespace {

// fitness high first; ties to lower macs, then lexicographically smaller
// encoding so runs are fully deterministic
bool better(const Evaluation& ea, const SubnetChoice& ca, const Evaluation& eb,
            const SubnetChoice& cb) {
    if (ea.fitness != eb.fitness) return ea.fitness > eb.fitness;
    if (ea.macs != eb.macs) return ea.macs < eb.macs;
    if (ca.resolution != cb.resolution) return ca.resolution < cb.resolution;
    return ca.ratios < cb.ratios;
}

}  // namespace

SubnetChoice mutate(const SearchSpace& space, const SubnetChoice& parent, double p,
                    Rng& rng) {
    SubnetChoice child = parent;
    if (rng.uniform() < p)
        child.resolution = space.resolutions[rng.below(space.resolutions.size())];
    for (double& r : child.ratios)
        if (rng.uniform() < p)
            r = space.width_ratios[rng.below(space.width_ratios.size())];
    return child;
}

Evaluation proxy_fitness(const SearchSpace& space, const SubnetChoice& choice) {
    double macs = double(choice_cost(space, choice).total_macs);
    return {macs / 1e9, macs};
}

EvolutionResult evolve(const SearchSpace& space, const FitnessFn& fitness,
                       const EvolutionParams& params) {
    if (params.population < 1 || params.tournament < 1)
        throw std::invalid_argument("population and tournament must be positive");
    Rng rng(params.seed);
    EvolutionResult result;
    struct Member {
        SubnetChoice choice;
        Evaluation eval;
    };
    std::deque<Member> population;
    bool have_best = false;

    // Evaluates under the MAC constraint; `draw` produces the next candidate.
    auto admit = [&](auto&& draw) -> std::optional<Member> {
        for (int attempt = 0; attempt <= params.retry_cap; ++attempt) {
            SubnetChoice c = draw();
            Evaluation e = fitness(c);
            ++result.evaluations;
            if (params.macs_limit > 0 && e.macs > params.macs_limit) continue;
            return Member{std::move(c), e};
        }
        return std::nullopt;
    };
    auto record = [&](int step, const Member& m) {
        bool improved = !have_best || better(m.eval, m.choice, result.best_eval, result.best);
        if (improved) {
            result.best = m.choice;
            result.best_eval = m.eval;
            have_best = true;
        }
        result.history.push_back({step, m.choice, m.eval, improved});
    };

    int step = 0;
    for (int i = 0; i < params.population; ++i) {
        auto m = admit([&] { return sample_choice(space, rng); });
        if (!m)
            throw std::runtime_error(
                "could not seed the population under the MAC limit");
        record(step++, *m);
        population.push_back(std::move(*m));
    }
    for (int g = 0; g < params.generations; ++g, ++step) {
        const Member* parent = nullptr;
        for (int t = 0; t < params.tournament; ++t) {
            const Member& m = population[rng.below(population.size())];
            if (!parent || better(m.eval, m.choice, parent->eval, parent->choice))
                parent = &m;
        }
        auto child = admit(
            [&] { return mutate(space, parent->choice, params.mutate_prob, rng); });
        if (!child) continue;  // budget exhausted for this step; population ages not
        record(step, *child);
        population.push_back(std::move(*child));
        population.pop_front();  // regularized: the oldest dies, not the worst
    }
    return result;
}

std::string evolution_history_csv(const EvolutionResult& result) {
    std::ostringstream os;
    os << "step,fitness,macs,improved,resolution,ratios\n";
    for (const auto& r : result.history) {
        os << r.step << ',' << r.eval.fitness << ',' << r.eval.macs << ','
           << (r.improved ? 1 : 0) << ',' << r.choice.resolution << ',';
        for (size_t i = 0; i < r.choice.ratios.size(); ++i)
            os << (i ? ";" : "") << r.choice.ratios[i];
        os << '\n';
    }
    return os.str();
}

}  // namespace litepose
