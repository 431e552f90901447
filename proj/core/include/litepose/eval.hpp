// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "litepose/decode.hpp"

namespace litepose {

/// Per-joint falloff constants k_i for object keypoint similarity. The
/// shipped tables use k_i = 2*sigma_i with the standard per-dataset sigmas.
struct OksTable {
    std::string name;
    std::vector<double> k;

    int num_joints() const { return int(k.size()); }
};

OksTable oks_table(const std::string& name);  // "coco17" | "crowdpose14"
std::vector<std::string> oks_table_names();
OksTable oks_table_from_json(const std::string& text);

/// OKS(d, g) = mean over gt-visible joints i of exp(-d_i^2 / (2 s^2 k_i^2)),
/// where s^2 = `scale_sq` (object segment area). Returns 0 when the gt has
/// no visible joints.
double oks(const PersonPose& detection, const PersonPose& ground_truth,
           double scale_sq, const OksTable& table);

struct GtImage {
    std::vector<PersonPose> people;
    std::vector<double> scale_sq;   // one per person
};

struct DetImage {
    std::vector<PersonPose> people;
};

struct ApResult {
    double ap = 0;          // mean over thresholds .50:.05:.95
    double ap50 = 0;
    double ap75 = 0;
    std::vector<double> per_threshold;
};

/// COCO-style keypoint AP: detections matched to ground truth greedily in
/// score order at each OKS threshold, one match per gt; precision envelope
/// integrated at 101 recall points.
ApResult average_precision(const std::vector<DetImage>& detections,
                           const std::vector<GtImage>& ground_truth,
                           const OksTable& table);

std::string ap_result_json(const ApResult& r);

}  // namespace litepose
