// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "litepose/engine.hpp"
#include "litepose/rng.hpp"

namespace litepose {

struct Keypoint {
    double x = 0, y = 0;
    double score = 0;
    bool visible = false;
};

struct PersonPose {
    std::vector<Keypoint> joints;
    double score = 0;   // mean joint score
    double tag = 0;     // mean embedding of grouped joints
};

struct DecodeParams {
    int num_joints = 14;
    int max_people = 30;
    double detection_threshold = 0.1;
    double tag_threshold = 1.0;   // max |tag - group mean| to join a group
    bool refine = true;           // quadratic sub-pixel refinement
};

/// Multi-person decode from a heatmap tensor (J channels) and a tag tensor
/// (J channels, same spatial size). Peaks are local maxima (3x3, ties to the
/// earlier scan position) above detection_threshold; joints are grouped
/// greedily by tag distance, joint by joint, best score first.
std::vector<PersonPose> decode(const Tensor& heatmaps, const Tensor& tags,
                               const DecodeParams& params);

/// 3x3 NMS: keeps values that are >= all neighbors and strictly greater than
/// any neighbor earlier in scan order; everything else becomes 0.
Tensor nms3x3(const Tensor& heatmaps);

struct SyntheticScene {
    std::vector<PersonPose> people;   // ground truth, heatmap coordinates
    Tensor heatmaps;
    Tensor tags;
};

struct SyntheticParams {
    int num_joints = 14;
    int height = 128, width = 128;
    int min_people = 1, max_people = 6;
    double peak_sigma = 1.5;
    double min_separation = 6.0;  // between same-joint peaks
    double tag_gap = 2.5;         // between neighboring group tags
};

/// Renders a random scene whose decode is exact: well-separated Gaussian
/// peaks with unit height and well-separated per-person tags.
SyntheticScene synthesize_scene(const SyntheticParams& params, Rng& rng);

std::string poses_to_json(const std::vector<PersonPose>& poses);
std::vector<PersonPose> poses_from_json(const std::string& text);

}  // namespace litepose
