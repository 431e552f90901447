// SPDX-License-Identifier: Apache-2.0
#include "litepose/shrink.hpp"

#include <stdexcept>

namespace litepose {

bool ShrinkConfig::valid() const {
    if (stages.size() != 4) return false;
    for (size_t n = 0; n < stages.size(); ++n) {
        if (stages[n].size() != n + 1) return false;
        for (int a : stages[n])
            if (a < 0) return false;
    }
    return true;
}

ShrinkConfig shrink_level(int level) {
    if (level < 0 || level > 3)
        throw std::invalid_argument("shrink level must be in [0, 3]");
    auto cfg = std::get<MultiBranchConfig>(
        preset("multibranch-shrink" + std::to_string(level)));
    return ShrinkConfig{cfg.block_counts};
}

int shrink_level_base_channel(int level) {
    if (level < 0 || level > 3)
        throw std::invalid_argument("shrink level must be in [0, 3]");
    return level < 2 ? 16 : 18;
}

bool is_shrunk_from(const ShrinkConfig& a_prime, const ShrinkConfig& a) {
    if (!a_prime.valid() || !a.valid()) return false;
    for (size_t n = 0; n < a.stages.size(); ++n)
        for (size_t i = 0; i < a.stages[n].size(); ++i)
            if (a_prime.stages[n][i] > a.stages[n][i]) return false;
    return true;
}

std::vector<ShrinkConfig> shrink_sequence(const ShrinkConfig& start,
                                          const std::vector<ShrinkEdit>& steps) {
    if (!start.valid()) throw std::invalid_argument("invalid start configuration");
    std::vector<ShrinkConfig> out{start};
    ShrinkConfig cur = start;
    for (size_t k = 0; k < steps.size(); ++k) {
        const ShrinkEdit& e = steps[k];
        std::string where = "edit " + std::to_string(k);
        if (e.stage < 0 || e.stage >= int(cur.stages.size()))
            throw std::invalid_argument(where + ": stage out of range");
        auto& stage = cur.stages[size_t(e.stage)];
        if (e.branch < 0 || e.branch >= int(stage.size()))
            throw std::invalid_argument(where + ": branch out of range");
        if (e.delta <= 0) throw std::invalid_argument(where + ": delta must be positive");
        if (stage[size_t(e.branch)] < e.delta)
            throw std::invalid_argument(where + ": block count would go negative");
        stage[size_t(e.branch)] -= e.delta;
        out.push_back(cur);
    }
    return out;
}

MultiBranchConfig to_multibranch(const ShrinkConfig& c, int base_channel,
                                 int resolution) {
    if (!c.valid()) throw std::invalid_argument("invalid shrink configuration");
    MultiBranchConfig cfg;
    cfg.name = "multibranch-w" + std::to_string(base_channel);
    cfg.base_channel = base_channel;
    cfg.block_counts = c.stages;
    cfg.input_resolution = resolution;
    return cfg;
}

CostReport shrink_cost(const ShrinkConfig& c, int base_channel, int resolution) {
    return model_cost(to_multibranch(c, base_channel, resolution));
}

}  // namespace litepose
