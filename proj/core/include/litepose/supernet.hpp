// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "litepose/arch.hpp"
#include "litepose/cost.hpp"
#include "litepose/rng.hpp"

namespace litepose {

/// A point in the one-shot search space: an input resolution plus one width
/// ratio per searchable (weight-bearing, non-head) layer of the supernet.
struct SubnetChoice {
    int resolution = 0;
    std::vector<double> ratios;

    bool operator==(const SubnetChoice&) const = default;
};

/// Search space: the supernet template plus the allowed resolutions and the
/// per-layer ratio menu.
struct SearchSpace {
    ArchConfig supernet;
    std::vector<int> resolutions;
    std::vector<double> width_ratios;

    /// Number of searchable layers (one ratio slot each).
    int num_layers() const;
    /// log10 of the number of distinct choices.
    double log10_size() const;
};

SearchSpace search_space(const std::string& name);
std::vector<std::string> search_space_names();
SearchSpace space_from_json(const std::string& text);
std::string space_to_json(const SearchSpace& space);

SubnetChoice choice_from_json(const std::string& text);
std::string choice_to_json(const SubnetChoice& choice);

/// Rounds c*ratio to the nearest even count, floor 2.
int round_channels(double x);

/// Indices into supernet.all_blocks() of the searchable layers, in order.
std::vector<int> searchable_layers(const ArchConfig& supernet);

bool choice_valid(const SearchSpace& space, const SubnetChoice& choice);

/// Materializes the standalone subnet: slices every searchable layer's
/// output channels to round_channels(base*ratio) and propagates the new
/// widths through downstream inputs, residuals and fusion concats.
ArchConfig extract_subnet(const SearchSpace& space, const SubnetChoice& choice);

CostReport choice_cost(const SearchSpace& space, const SubnetChoice& choice);

SubnetChoice sample_choice(const SearchSpace& space, Rng& rng);

/// Named published choices ("litepose-s", "litepose-xs", ...).
SubnetChoice recorded_choice(const std::string& name);
std::vector<std::string> recorded_choice_names();

}  // namespace litepose
