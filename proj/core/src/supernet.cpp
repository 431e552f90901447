// SPDX-License-Identifier: Apache-2.0
#include "litepose/supernet.hpp"

#include <cmath>
#include <stdexcept>

#include "embedded_data.hpp"
#include "json.hpp"

namespace litepose {

using nlohmann::json;

int round_channels(double x) {
    int even = 2 * int(std::floor(x / 2 + 0.5));
    return even < 2 ? 2 : even;
}

int SearchSpace::num_layers() const {
    int n = 0;
    for (const auto& stage : supernet.stages) n += int(stage.size());
    for (const auto& b : supernet.deconv_head)
        if (b.kind == BlockKind::TransposedConv) ++n;
    return n;
}

double SearchSpace::log10_size() const {
    return std::log10(double(resolutions.size())) +
           num_layers() * std::log10(double(width_ratios.size()));
}

std::vector<int> searchable_layers(const ArchConfig& supernet) {
    std::vector<int> out;
    auto blocks = supernet.all_blocks();
    for (int i = 0; i < int(blocks.size()); ++i) {
        BlockKind k = blocks[size_t(i)]->kind;
        if (k == BlockKind::StemConv || k == BlockKind::InvertedResidual ||
            k == BlockKind::TransposedConv)
            out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization and shipped data

namespace {

ArchConfig arch_by_model_name(const std::string& model) {
    for (const auto& n : preset_names()) {
        PresetConfig p = preset(n);
        if (auto* a = std::get_if<ArchConfig>(&p); a && a->name == model) return *a;
    }
    throw std::invalid_argument("no architecture preset named '" + model + "'");
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok)
            throw std::invalid_argument("unknown field '" + it.key() + "' in " + where);
    }
}

}  // namespace

SearchSpace space_from_json(const std::string& text) {
    json j = json::parse(text);
    reject_unknown(j, {"resolutions", "width_ratios", "arch"}, "search space");
    SearchSpace s;
    s.supernet = arch_by_model_name(j.at("arch").get<std::string>());
    s.resolutions = j.at("resolutions").get<std::vector<int>>();
    s.width_ratios = j.at("width_ratios").get<std::vector<double>>();
    if (s.resolutions.empty() || s.width_ratios.empty())
        throw std::invalid_argument("search space menus must be non-empty");
    return s;
}

std::string space_to_json(const SearchSpace& space) {
    json j{{"resolutions", space.resolutions},
           {"width_ratios", space.width_ratios},
           {"arch", space.supernet.name}};
    return j.dump(1);
}

SearchSpace search_space(const std::string& name) {
    static const std::vector<std::pair<std::string, std::string>> files = {
        {"litepose-sml", "spaces/litepose_sml.json"},
        {"litepose-xs", "spaces/litepose_xs.json"},
    };
    for (const auto& [n, file] : files)
        if (n == name) return space_from_json(detail::embedded_file(file));
    std::string msg = "unknown search space '" + name + "'; have:";
    for (const auto& n : search_space_names()) msg += " " + n;
    throw std::invalid_argument(msg);
}

std::vector<std::string> search_space_names() { return {"litepose-sml", "litepose-xs"}; }

SubnetChoice choice_from_json(const std::string& text) {
    json j = json::parse(text);
    reject_unknown(j, {"resolution", "ratios"}, "choice");
    SubnetChoice c;
    c.resolution = j.at("resolution").get<int>();
    c.ratios = j.at("ratios").get<std::vector<double>>();
    return c;
}

std::string choice_to_json(const SubnetChoice& choice) {
    json j{{"resolution", choice.resolution}, {"ratios", choice.ratios}};
    return j.dump(1);
}

SubnetChoice recorded_choice(const std::string& name) {
    static const std::vector<std::pair<std::string, std::string>> files = {
        {"litepose-s", "choices/litepose_s.json"},
        {"litepose-xs", "choices/litepose_xs.json"},
        {"litepose-m", "choices/litepose_m.json"},
        {"litepose-l", "choices/litepose_l.json"},
    };
    for (const auto& [n, file] : files)
        if (n == name) return choice_from_json(detail::embedded_file(file));
    std::string msg = "unknown recorded choice '" + name + "'; have:";
    for (const auto& n : recorded_choice_names()) msg += " " + n;
    throw std::invalid_argument(msg);
}

std::vector<std::string> recorded_choice_names() {
    return {"litepose-s", "litepose-xs", "litepose-m", "litepose-l"};
}

// ---------------------------------------------------------------------------
// Sampling and extraction

bool choice_valid(const SearchSpace& space, const SubnetChoice& choice) {
    bool res_ok = false;
    for (int r : space.resolutions) res_ok = res_ok || r == choice.resolution;
    if (!res_ok) return false;
    if (int(choice.ratios.size()) != space.num_layers()) return false;
    for (double r : choice.ratios) {
        bool ok = false;
        for (double m : space.width_ratios) ok = ok || std::abs(r - m) < 1e-12;
        if (!ok) return false;
    }
    return true;
}

SubnetChoice sample_choice(const SearchSpace& space, Rng& rng) {
    SubnetChoice c;
    c.resolution = space.resolutions[rng.below(space.resolutions.size())];
    c.ratios.reserve(size_t(space.num_layers()));
    for (int i = 0; i < space.num_layers(); ++i)
        c.ratios.push_back(space.width_ratios[rng.below(space.width_ratios.size())]);
    return c;
}

ArchConfig extract_subnet(const SearchSpace& space, const SubnetChoice& choice) {
    if (!choice_valid(space, choice))
        throw std::invalid_argument("choice does not belong to the search space");
    ArchConfig out = space.supernet;
    out.name = space.supernet.name + "-subnet";
    out.input_resolution = choice.resolution;

    size_t li = 0;
    auto sliced = [&](int base) {
        double r = choice.ratios[li++];
        return r == 1.0 ? base : round_channels(r * base);
    };

    std::vector<int> stage_out;
    int cur = 3;
    for (auto& stage : out.stages) {
        for (auto& b : stage) {
            b.in_channels = cur;
            b.out_channels = sliced(b.out_channels);
            cur = b.out_channels;
        }
        stage_out.push_back(cur);
    }
    for (auto& b : out.deconv_head) {
        b.in_channels = cur;
        switch (b.kind) {
            case BlockKind::Concat:
                b.out_channels = cur + stage_out[size_t(b.fuse_from)];
                cur = b.out_channels;
                break;
            case BlockKind::TransposedConv:
                b.out_channels = sliced(b.out_channels);
                cur = b.out_channels;
                break;
            default:
                break;  // head convs keep their joint widths and tap the stream
        }
    }
    return out;
}

CostReport choice_cost(const SearchSpace& space, const SubnetChoice& choice) {
    return model_cost(extract_subnet(space, choice), choice.resolution);
}

}  // namespace litepose
