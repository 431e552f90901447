// SPDX-License-Identifier: Apache-2.0
//
// Command line front end. Every subcommand that produces artifacts writes a
// manifest first (tool version, arguments, intended outputs) so runs can be
// audited and reproduced.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "litepose/cost.hpp"
#include "litepose/decode.hpp"
#include "litepose/engine.hpp"
#include "litepose/eval.hpp"
#include "litepose/nas.hpp"
#include "litepose/shrink.hpp"
#include "litepose/supernet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace litepose;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(is), {});
}

// Written before any artifact so a crashed run still leaves a record of what
// it was trying to do.
void write_manifest(const fs::path& dir, const std::string& subcommand,
                    const json& args, const std::vector<std::string>& outputs) {
    json m{{"tool", "litepose"},
           {"version", kVersion},
           {"subcommand", subcommand},
           {"args", args},
           {"outputs", outputs}};
    write_file(dir / "manifest.json", m.dump(1) + "\n");
}

// Model argument: a preset name or a path to an architecture JSON file.
ArchConfig load_arch(const std::string& model) {
    if (fs::exists(model)) return arch_from_json(read_file(model));
    return std::get<ArchConfig>(preset(model));
}

json tensor_json(const Tensor& t) {
    return json{{"c", t.c}, {"h", t.h}, {"w", t.w}, {"data", t.data}};
}

Tensor tensor_from_json(const json& j) {
    Tensor t(j.at("c").get<int>(), j.at("h").get<int>(), j.at("w").get<int>());
    t.data = j.at("data").get<std::vector<float>>();
    if (t.data.size() != size_t(t.c) * t.h * t.w)
        throw std::runtime_error("tensor data length mismatch");
    return t;
}

// ---------------------------------------------------------------------------

int cmd_cost(const std::string& model, int resolution, int kernel, bool no_fusion,
             const std::string& out_dir) {
    CostReport report;
    int res = resolution;
    std::string shown = model;
    if (model.rfind("multibranch-", 0) == 0 && !fs::exists(model)) {
        auto cfg = std::get<MultiBranchConfig>(preset(model));
        if (res == 0) res = cfg.input_resolution;
        report = model_cost(cfg, res);
    } else {
        ArchConfig cfg = load_arch(model);
        if (kernel) cfg = with_depthwise_kernel(cfg, kernel);
        if (no_fusion) cfg = without_fusion(cfg);
        if (res == 0) res = cfg.input_resolution;
        report = model_cost(cfg, res);
        shown = cfg.name;
    }
    if (!out_dir.empty()) {
        write_manifest(out_dir, "cost",
                       {{"model", model}, {"resolution", res}, {"kernel", kernel},
                        {"no_fusion", no_fusion}},
                       {"cost.json", "cost.csv"});
        write_file(fs::path(out_dir) / "cost.json",
                   cost_report_json(report, shown, res) + "\n");
        write_file(fs::path(out_dir) / "cost.csv", cost_report_csv(report));
    }
    std::printf("%s @%d: %.4f MParams, %.4f GMACs (%d layers)\n", shown.c_str(), res,
                report.mparams(), report.gmacs(), int(report.per_layer.size()));
    return 0;
}

int cmd_shrink(int base_channel, int resolution, const std::string& out_dir) {
    std::string csv = "level,base_channel,blocks,mparams,gmacs\n";
    if (!out_dir.empty())
        write_manifest(out_dir, "shrink",
                       {{"base_channel", base_channel}, {"resolution", resolution}},
                       {"shrink.csv"});
    for (int level = 0; level < 4; ++level) {
        ShrinkConfig c = shrink_level(level);
        int w = base_channel ? base_channel : shrink_level_base_channel(level);
        CostReport r = shrink_cost(c, w, resolution);
        std::string blocks;
        for (const auto& st : c.stages) {
            blocks += blocks.empty() ? "" : "/";
            for (size_t i = 0; i < st.size(); ++i)
                blocks += (i ? "." : "") + std::to_string(st[i]);
        }
        std::printf("shrink %d  W%-3d [%s]  %.3f MParams  %.3f GMACs\n", level, w,
                    blocks.c_str(), r.mparams(), r.gmacs());
        csv += std::to_string(level) + "," + std::to_string(w) + "," + blocks + "," +
               std::to_string(r.mparams()) + "," + std::to_string(r.gmacs()) + "\n";
    }
    if (!out_dir.empty()) write_file(fs::path(out_dir) / "shrink.csv", csv);
    return 0;
}

int cmd_search(const std::string& space_name, double limit_gmacs, int population,
               int tournament, int generations, double mutate_prob, uint64_t seed,
               const std::string& out_dir) {
    SearchSpace space = search_space(space_name);
    EvolutionParams params;
    params.population = population;
    params.tournament = tournament;
    params.generations = generations;
    params.mutate_prob = mutate_prob;
    params.macs_limit = limit_gmacs * 1e9;
    params.seed = seed;
    write_manifest(out_dir, "search",
                   {{"space", space_name}, {"limit_gmacs", limit_gmacs},
                    {"population", population}, {"tournament", tournament},
                    {"generations", generations}, {"mutate_prob", mutate_prob},
                    {"seed", seed}},
                   {"best.json", "history.csv"});
    auto result = evolve(space, [&](const SubnetChoice& c) {
        return proxy_fitness(space, c);
    }, params);
    write_file(fs::path(out_dir) / "best.json", choice_to_json(result.best) + "\n");
    write_file(fs::path(out_dir) / "history.csv", evolution_history_csv(result));
    std::printf("best: fitness %.4f, %.4f GMACs @%d (%llu evaluations)\n",
                result.best_eval.fitness, result.best_eval.macs / 1e9,
                result.best.resolution, (unsigned long long)result.evaluations);
    return 0;
}

int cmd_infer(const std::string& model, int resolution, uint64_t seed,
              const std::string& out_dir) {
    ArchConfig cfg = load_arch(model);
    int res = resolution ? resolution : cfg.input_resolution;
    write_manifest(out_dir, "infer",
                   {{"model", model}, {"resolution", res}, {"seed", seed}},
                   {"infer.json"});
    ModelWeights weights = random_weights(cfg, seed);
    Tensor input(3, res, res);
    Rng rng = Rng(seed).split(1);
    for (float& v : input.data) v = rng.uniform(-1.f, 1.f);
    ForwardResult fwd = forward(cfg, weights, input);
    CostReport analytic = model_cost(cfg, res);
    json j{{"model", cfg.name},
           {"resolution", res},
           {"macs_executed", fwd.macs},
           {"macs_analytic", analytic.total_macs},
           {"outputs", json::array()}};
    for (const Tensor& t : fwd.outputs)
        j["outputs"].push_back({{"c", t.c}, {"h", t.h}, {"w", t.w}});
    write_file(fs::path(out_dir) / "infer.json", j.dump(1) + "\n");
    std::printf("%s @%d: %llu MACs executed (analytic %lld)\n", cfg.name.c_str(), res,
                (unsigned long long)fwd.macs, analytic.total_macs);
    for (const Tensor& t : fwd.outputs)
        std::printf("  output %dx%dx%d\n", t.c, t.h, t.w);
    if (fwd.macs != uint64_t(analytic.total_macs)) {
        std::fprintf(stderr, "MAC counter disagrees with the analytic model\n");
        return 1;
    }
    return 0;
}

int cmd_synth(int scenes, int joints, int size, uint64_t seed,
              const std::string& out_dir) {
    SyntheticParams params;
    params.num_joints = joints;
    params.height = params.width = size;
    std::vector<std::string> outputs;
    for (int i = 0; i < scenes; ++i)
        outputs.push_back("scene_" + std::to_string(i) + ".json");
    write_manifest(out_dir, "synth",
                   {{"scenes", scenes}, {"joints", joints}, {"size", size},
                    {"seed", seed}},
                   outputs);
    Rng root(seed);
    for (int i = 0; i < scenes; ++i) {
        Rng rng = root.split(uint64_t(i));
        SyntheticScene scene = synthesize_scene(params, rng);
        json j{{"num_joints", joints},
               {"heatmaps", tensor_json(scene.heatmaps)},
               {"tags", tensor_json(scene.tags)},
               {"people", json::parse(poses_to_json(scene.people))},
               {"scale_sq", std::vector<double>(scene.people.size(), 100.0)}};
        write_file(fs::path(out_dir) / outputs[size_t(i)], j.dump() + "\n");
    }
    std::printf("wrote %d scenes to %s\n", scenes, out_dir.c_str());
    return 0;
}

int cmd_decode(const std::string& scene_dir, const std::string& out_dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(scene_dir))
        if (e.path().filename().string().rfind("scene_", 0) == 0) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no scene_*.json in " + scene_dir);
    std::vector<std::string> outputs;
    for (const auto& f : files) outputs.push_back("det_" + f.filename().string().substr(6));
    write_manifest(out_dir, "decode", {{"scenes", scene_dir}}, outputs);
    for (size_t i = 0; i < files.size(); ++i) {
        json j = json::parse(read_file(files[i]));
        DecodeParams params;
        params.num_joints = j.at("num_joints").get<int>();
        auto poses = decode(tensor_from_json(j.at("heatmaps")),
                            tensor_from_json(j.at("tags")), params);
        write_file(fs::path(out_dir) / outputs[i], poses_to_json(poses) + "\n");
    }
    std::printf("decoded %zu scenes into %s\n", files.size(), out_dir.c_str());
    return 0;
}

int cmd_eval(const std::string& det_dir, const std::string& gt_dir,
             const std::string& table_name, const std::string& out_dir) {
    OksTable table = oks_table(table_name);
    std::vector<fs::path> gt_files;
    for (const auto& e : fs::directory_iterator(gt_dir))
        if (e.path().filename().string().rfind("scene_", 0) == 0)
            gt_files.push_back(e.path());
    std::sort(gt_files.begin(), gt_files.end());
    if (gt_files.empty()) throw std::runtime_error("no scene_*.json in " + gt_dir);

    std::vector<DetImage> dets;
    std::vector<GtImage> gts;
    for (const auto& f : gt_files) {
        json j = json::parse(read_file(f));
        GtImage gt;
        gt.people = poses_from_json(j.at("people").dump());
        gt.scale_sq = j.at("scale_sq").get<std::vector<double>>();
        gts.push_back(std::move(gt));
        fs::path det = fs::path(det_dir) / ("det_" + f.filename().string().substr(6));
        dets.push_back({poses_from_json(read_file(det))});
    }
    write_manifest(out_dir, "eval",
                   {{"detections", det_dir}, {"ground_truth", gt_dir},
                    {"oks", table_name}},
                   {"ap.json"});
    ApResult r = average_precision(dets, gts, table);
    write_file(fs::path(out_dir) / "ap.json", ap_result_json(r) + "\n");
    std::printf("AP %.4f  AP50 %.4f  AP75 %.4f over %zu images\n", r.ap, r.ap50,
                r.ap75, gts.size());
    return 0;
}

int cmd_report(const std::string& out_dir) {
    write_manifest(out_dir, "report", json::object(), {"report.json"});
    json j;
    for (const std::string& name :
         {"litepose-s", "litepose-xs", "litepose-m", "litepose-l"}) {
        auto cfg = std::get<ArchConfig>(preset(name));
        CostReport r = model_cost(cfg, cfg.input_resolution);
        j["models"].push_back({{"name", cfg.name},
                               {"resolution", cfg.input_resolution},
                               {"mparams", r.mparams()},
                               {"gmacs", r.gmacs()}});
        std::printf("%-12s @%d  %6.3f MParams  %7.3f GMACs\n", cfg.name.c_str(),
                    cfg.input_resolution, r.mparams(), r.gmacs());
    }
    auto half = std::get<ArchConfig>(preset("litepose-half"));
    for (auto& [k, r] : kernel_sweep(half, {3, 5, 7})) {
        j["kernel_sweep"].push_back({{"kernel", k}, {"gmacs", r.gmacs()}});
        std::printf("%s depthwise k=%d  %7.3f GMACs\n", half.name.c_str(), k, r.gmacs());
    }
    double nofuse =
        model_cost(without_fusion(half), half.input_resolution).gmacs();
    j["kernel_sweep_no_fusion_k7"] = nofuse;
    std::printf("%s k=7 without fusion  %7.3f GMACs\n", half.name.c_str(), nofuse);
    for (int level = 0; level < 4; ++level) {
        int w = shrink_level_base_channel(level);
        CostReport r = shrink_cost(shrink_level(level), w, 512);
        j["shrink"].push_back(
            {{"level", level}, {"base_channel", w}, {"gmacs", r.gmacs()}});
        std::printf("shrink %d (W%d)  %7.3f GMACs\n", level, w, r.gmacs());
    }
    write_file(fs::path(out_dir) / "report.json", j.dump(1) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LitePose toolkit: cost models, shrinking, search, inference, "
                 "keypoint decoding and evaluation"};
    app.require_subcommand(1);

    std::string model = "litepose-s", out_dir;
    int resolution = 0, kernel = 0;
    bool no_fusion = false;
    auto* cost = app.add_subcommand("cost", "Analytic parameter/MAC cost of a model");
    cost->add_option("--model", model, "preset name or architecture JSON path");
    cost->add_option("--resolution", resolution, "input resolution (0 = preset)");
    cost->add_option("--kernel", kernel, "override depthwise kernels");
    cost->add_flag("--no-fusion", no_fusion, "strip the fusion concats");
    cost->add_option("--out-dir", out_dir, "write cost.json/cost.csv here");

    int base_channel = 0, sh_res = 512;
    std::string sh_out;
    auto* shrink = app.add_subcommand("shrink", "Cost of the published shrink levels");
    shrink->add_option("--base-channel", base_channel, "override the base width");
    shrink->add_option("--resolution", sh_res, "input resolution");
    shrink->add_option("--out-dir", sh_out, "write shrink.csv here");

    std::string space_name = "litepose-sml", se_out = "runs/search";
    double limit_gmacs = 0, mutate_prob = 0.1;
    int population = 64, tournament = 8, generations = 500;
    uint64_t seed = 0;
    auto* search = app.add_subcommand("search", "Evolutionary subnet search");
    search->add_option("--space", space_name, "search space name");
    search->add_option("--limit-gmacs", limit_gmacs, "MAC budget (0 = none)");
    search->add_option("--population", population);
    search->add_option("--tournament", tournament);
    search->add_option("--generations", generations);
    search->add_option("--mutate", mutate_prob, "per-gene mutation probability");
    search->add_option("--seed", seed);
    search->add_option("--out-dir", se_out);

    std::string in_model = "litepose-xs", in_out = "runs/infer";
    int in_res = 0;
    uint64_t in_seed = 0;
    auto* infer = app.add_subcommand("infer", "Forward pass with random weights");
    infer->add_option("--model", in_model, "preset name or architecture JSON path");
    infer->add_option("--resolution", in_res, "input resolution (0 = preset)");
    infer->add_option("--seed", in_seed);
    infer->add_option("--out-dir", in_out);

    int scenes = 4, joints = 14, size = 128;
    uint64_t sy_seed = 0;
    std::string sy_out = "runs/synth";
    auto* synth = app.add_subcommand("synth", "Generate synthetic keypoint scenes");
    synth->add_option("--scenes", scenes);
    synth->add_option("--joints", joints);
    synth->add_option("--size", size, "heatmap height/width");
    synth->add_option("--seed", sy_seed);
    synth->add_option("--out-dir", sy_out);

    std::string de_scenes = "runs/synth", de_out = "runs/decode";
    auto* dec = app.add_subcommand("decode", "Group heatmap peaks into poses");
    dec->add_option("--scenes", de_scenes, "directory with scene_*.json");
    dec->add_option("--out-dir", de_out);

    std::string ev_det = "runs/decode", ev_gt = "runs/synth", ev_out = "runs/eval";
    std::string table_name = "crowdpose14";
    auto* ev = app.add_subcommand("eval", "Keypoint AP of detections against truth");
    ev->add_option("--detections", ev_det, "directory with det_*.json");
    ev->add_option("--ground-truth", ev_gt, "directory with scene_*.json");
    ev->add_option("--oks", table_name, "OKS falloff table");
    ev->add_option("--out-dir", ev_out);

    std::string rp_out = "runs/report";
    auto* report = app.add_subcommand("report", "Cost summary across the family");
    report->add_option("--out-dir", rp_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cost->parsed()) return cmd_cost(model, resolution, kernel, no_fusion, out_dir);
        if (shrink->parsed()) return cmd_shrink(base_channel, sh_res, sh_out);
        if (search->parsed())
            return cmd_search(space_name, limit_gmacs, population, tournament,
                              generations, mutate_prob, seed, se_out);
        if (infer->parsed()) return cmd_infer(in_model, in_res, in_seed, in_out);
        if (synth->parsed()) return cmd_synth(scenes, joints, size, sy_seed, sy_out);
        if (dec->parsed()) return cmd_decode(de_scenes, de_out);
        if (ev->parsed()) return cmd_eval(ev_det, ev_gt, table_name, ev_out);
        if (report->parsed()) return cmd_report(rp_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
