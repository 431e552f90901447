// SPDX-License-Identifier: Apache-2.0
#include "litepose/decode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace litepose {

using nlohmann::json;

Tensor nms3x3(const Tensor& heatmaps) {
    Tensor out(heatmaps.c, heatmaps.h, heatmaps.w);
    for (int c = 0; c < heatmaps.c; ++c) {
        for (int y = 0; y < heatmaps.h; ++y) {
            for (int x = 0; x < heatmaps.w; ++x) {
                const float v = heatmaps.at(c, y, x);
                bool keep = true;
                for (int dy = -1; dy <= 1 && keep; ++dy) {
                    for (int dx = -1; dx <= 1 && keep; ++dx) {
                        if (dy == 0 && dx == 0) continue;
                        const int ny = y + dy, nx = x + dx;
                        if (ny < 0 || ny >= heatmaps.h || nx < 0 || nx >= heatmaps.w)
                            continue;
                        const float nb = heatmaps.at(c, ny, nx);
                        const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                        // ties go to the earlier scan position
                        if (earlier ? nb >= v : nb > v) keep = false;
                    }
                }
                if (keep) out.at(c, y, x) = v;
            }
        }
    }
    return out;
}

namespace {

struct Peak {
    float score = 0;
    int x = 0, y = 0;
    float tag = 0;
};

// offset of the vertex of the parabola through (−1,a), (0,b), (1,c)
double quad_offset(double a, double b, double c) {
    const double denom = 2 * (2 * b - a - c);
    if (denom <= 0) return 0;
    const double off = (c - a) / denom;
    return std::clamp(off, -0.5, 0.5);
}

}  // namespace

std::vector<PersonPose> decode(const Tensor& heatmaps, const Tensor& tags,
                               const DecodeParams& params) {
    const int J = params.num_joints;
    if (heatmaps.c != J || tags.c != J || heatmaps.h != tags.h || heatmaps.w != tags.w)
        throw std::invalid_argument("heatmap/tag shape mismatch");
    Tensor peaks = nms3x3(heatmaps);

    struct Group {
        std::vector<Keypoint> joints;
        double tag_sum = 0;
        int tag_n = 0;
        double mean() const { return tag_sum / tag_n; }
    };
    std::vector<Group> groups;

    for (int j = 0; j < J; ++j) {
        std::vector<Peak> cands;
        for (int y = 0; y < peaks.h; ++y)
            for (int x = 0; x < peaks.w; ++x)
                if (peaks.at(j, y, x) > params.detection_threshold)
                    cands.push_back({peaks.at(j, y, x), x, y, tags.at(j, y, x)});
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Peak& a, const Peak& b) { return a.score > b.score; });
        if (int(cands.size()) > params.max_people) cands.resize(size_t(params.max_people));

        for (const Peak& p : cands) {
            Keypoint kp;
            kp.x = p.x;
            kp.y = p.y;
            kp.score = p.score;
            kp.visible = true;
            if (params.refine && p.x > 0 && p.x < heatmaps.w - 1 && p.y > 0 &&
                p.y < heatmaps.h - 1) {
                kp.x += quad_offset(heatmaps.at(j, p.y, p.x - 1), p.score,
                                    heatmaps.at(j, p.y, p.x + 1));
                kp.y += quad_offset(heatmaps.at(j, p.y - 1, p.x), p.score,
                                    heatmaps.at(j, p.y + 1, p.x));
            }
            Group* best = nullptr;
            double best_d = params.tag_threshold;
            for (Group& g : groups) {
                if (g.joints[size_t(j)].visible) continue;
                const double d = std::abs(p.tag - g.mean());
                if (d <= best_d) {
                    best_d = d;
                    best = &g;
                }
            }
            if (!best) {
                groups.push_back({std::vector<Keypoint>(size_t(J)), 0, 0});
                best = &groups.back();
            }
            best->joints[size_t(j)] = kp;
            best->tag_sum += p.tag;
            best->tag_n += 1;
        }
    }

    std::vector<PersonPose> out;
    for (const Group& g : groups) {
        PersonPose person;
        person.joints = g.joints;
        person.tag = g.mean();
        double sum = 0;
        int n = 0;
        for (const Keypoint& kp : g.joints)
            if (kp.visible) sum += kp.score, ++n;
        person.score = n ? sum / n : 0;
        out.push_back(std::move(person));
    }
    std::stable_sort(out.begin(), out.end(), [](const PersonPose& a, const PersonPose& b) {
        return a.score > b.score;
    });
    if (int(out.size()) > params.max_people) out.resize(size_t(params.max_people));
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic scenes

SyntheticScene synthesize_scene(const SyntheticParams& params, Rng& rng) {
    const int J = params.num_joints, H = params.height, W = params.width;
    const int margin = 2;
    SyntheticScene scene;
    scene.heatmaps = Tensor(J, H, W);
    scene.tags = Tensor(J, H, W);

    const int n =
        params.min_people + int(rng.below(uint64_t(params.max_people - params.min_people + 1)));
    for (int p = 0; p < n; ++p) {
        PersonPose person;
        person.tag = p * params.tag_gap;
        person.score = 1.0;
        person.joints.resize(size_t(J));
        for (int j = 0; j < J; ++j) {
            Keypoint kp;
            kp.visible = rng.uniform() < 0.9 || j == 0;  // at least one joint
            if (!kp.visible) {
                person.joints[size_t(j)] = kp;
                continue;
            }
            // keep same-joint peaks of different people apart
            for (int attempt = 0; attempt < 1000; ++attempt) {
                kp.x = double(margin + int(rng.below(uint64_t(W - 2 * margin))));
                kp.y = double(margin + int(rng.below(uint64_t(H - 2 * margin))));
                bool ok = true;
                for (const PersonPose& other : scene.people) {
                    const Keypoint& o = other.joints[size_t(j)];
                    if (!o.visible) continue;
                    const double d =
                        std::hypot(kp.x - o.x, kp.y - o.y);
                    if (d < params.min_separation) ok = false;
                }
                if (ok) break;
                if (attempt == 999)
                    throw std::runtime_error("could not place a separated scene");
            }
            kp.score = 1.0;
            person.joints[size_t(j)] = kp;

            // max-composited Gaussian bump of unit height; the max keeps each
            // peak symmetric so the sub-pixel refinement lands exactly on it
            const int cx = int(kp.x), cy = int(kp.y);
            const int rad = int(std::ceil(4 * params.peak_sigma));
            for (int y = std::max(0, cy - rad); y <= std::min(H - 1, cy + rad); ++y) {
                for (int x = std::max(0, cx - rad); x <= std::min(W - 1, cx + rad); ++x) {
                    const double d2 = double(x - cx) * (x - cx) + double(y - cy) * (y - cy);
                    const float v =
                        float(std::exp(-d2 / (2 * params.peak_sigma * params.peak_sigma)));
                    float& cell = scene.heatmaps.at(j, y, x);
                    if (v > cell) cell = v;
                }
            }
            scene.tags.at(j, cy, cx) = float(person.tag);
        }
        scene.people.push_back(std::move(person));
    }
    return scene;
}

// ---------------------------------------------------------------------------
// Serialization

std::string poses_to_json(const std::vector<PersonPose>& poses) {
    json arr = json::array();
    for (const PersonPose& p : poses) {
        json joints = json::array();
        for (const Keypoint& kp : p.joints)
            joints.push_back({{"x", kp.x}, {"y", kp.y}, {"score", kp.score},
                              {"visible", kp.visible}});
        arr.push_back({{"score", p.score}, {"tag", p.tag}, {"joints", joints}});
    }
    return arr.dump(1);
}

std::vector<PersonPose> poses_from_json(const std::string& text) {
    std::vector<PersonPose> out;
    for (const json& p : json::parse(text)) {
        PersonPose person;
        person.score = p.at("score").get<double>();
        person.tag = p.at("tag").get<double>();
        for (const json& jk : p.at("joints")) {
            Keypoint kp;
            kp.x = jk.at("x").get<double>();
            kp.y = jk.at("y").get<double>();
            kp.score = jk.at("score").get<double>();
            kp.visible = jk.at("visible").get<bool>();
            person.joints.push_back(kp);
        }
        out.push_back(std::move(person));
    }
    return out;
}

}  // namespace litepose
