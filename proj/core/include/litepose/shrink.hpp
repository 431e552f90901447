// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "litepose/arch.hpp"
#include "litepose/cost.hpp"

namespace litepose {

/// Per-branch block counts A = {A_1..A_4}, A_n = [a_1..a_n]. The partial
/// order A' <= A (is_shrunk_from) is entrywise <=.
struct ShrinkConfig {
    std::vector<std::vector<int>> stages;

    bool valid() const;
    bool operator==(const ShrinkConfig&) const = default;
};

/// The four published shrink levels, index 0..3 (baseline..shrink 3).
/// Paired base channels: 16, 16, 18, 18.
ShrinkConfig shrink_level(int level);
int shrink_level_base_channel(int level);

/// One edit of a shrink sequence: decrement stages[stage][branch] by delta.
struct ShrinkEdit {
    int stage = 0;
    int branch = 0;
    int delta = 1;
};

bool is_shrunk_from(const ShrinkConfig& a_prime, const ShrinkConfig& a);

/// Applies edits one at a time; returns [start, after edit 1, ...].
/// Throws std::invalid_argument when an edit is out of range, non-positive,
/// or would drive a count negative.
std::vector<ShrinkConfig> shrink_sequence(const ShrinkConfig& start,
                                          const std::vector<ShrinkEdit>& steps);

MultiBranchConfig to_multibranch(const ShrinkConfig& c, int base_channel,
                                 int resolution);

CostReport shrink_cost(const ShrinkConfig& c, int base_channel, int resolution);

}  // namespace litepose
