// SPDX-License-Identifier: Apache-2.0
#include "litepose/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "embedded_data.hpp"
#include "json.hpp"

namespace litepose {

using nlohmann::json;

OksTable oks_table_from_json(const std::string& text) {
    json j = json::parse(text);
    OksTable t;
    t.name = j.at("name").get<std::string>();
    t.k = j.at("k").get<std::vector<double>>();
    if (int(t.k.size()) != j.at("num_joints").get<int>())
        throw std::invalid_argument("k table length disagrees with num_joints");
    return t;
}

OksTable oks_table(const std::string& name) {
    static const std::vector<std::pair<std::string, std::string>> files = {
        {"coco17", "oks/coco17.json"},
        {"crowdpose14", "oks/crowdpose14.json"},
    };
    for (const auto& [n, file] : files)
        if (n == name) return oks_table_from_json(detail::embedded_file(file));
    std::string msg = "unknown OKS table '" + name + "'; have:";
    for (const auto& n : oks_table_names()) msg += " " + n;
    throw std::invalid_argument(msg);
}

std::vector<std::string> oks_table_names() { return {"coco17", "crowdpose14"}; }

double oks(const PersonPose& detection, const PersonPose& ground_truth,
           double scale_sq, const OksTable& table) {
    const size_t J = table.k.size();
    if (detection.joints.size() != J || ground_truth.joints.size() != J)
        throw std::invalid_argument("pose joint count disagrees with the k table");
    if (scale_sq <= 0) throw std::invalid_argument("scale_sq must be positive");
    double sum = 0;
    int n = 0;
    for (size_t i = 0; i < J; ++i) {
        const Keypoint& g = ground_truth.joints[i];
        if (!g.visible) continue;  // invisible gt joints never contribute
        const Keypoint& d = detection.joints[i];
        const double dx = d.x - g.x, dy = d.y - g.y;
        const double d2 = dx * dx + dy * dy;
        sum += std::exp(-d2 / (2 * scale_sq * table.k[i] * table.k[i]));
        ++n;
    }
    return n ? sum / n : 0.0;
}

ApResult average_precision(const std::vector<DetImage>& detections,
                           const std::vector<GtImage>& ground_truth,
                           const OksTable& table) {
    if (detections.size() != ground_truth.size())
        throw std::invalid_argument("detection/gt image counts differ");

    struct Det {
        double score;
        size_t image, index;
    };
    std::vector<Det> all;
    size_t npos = 0;
    for (size_t i = 0; i < detections.size(); ++i) {
        const GtImage& gt = ground_truth[i];
        if (gt.people.size() != gt.scale_sq.size())
            throw std::invalid_argument("each gt person needs a scale");
        for (const PersonPose& p : gt.people)
            for (const Keypoint& kp : p.joints)
                if (kp.visible) {
                    ++npos;
                    break;
                }
        for (size_t d = 0; d < detections[i].people.size(); ++d)
            all.push_back({detections[i].people[d].score, i, d});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Det& a, const Det& b) { return a.score > b.score; });

    ApResult result;
    for (int t = 0; t < 10; ++t) {
        const double thr = 0.50 + 0.05 * t;
        std::vector<std::vector<bool>> used(ground_truth.size());
        for (size_t i = 0; i < ground_truth.size(); ++i)
            used[i].assign(ground_truth[i].people.size(), false);

        std::vector<bool> tp(all.size(), false);
        for (size_t d = 0; d < all.size(); ++d) {
            const Det& det = all[d];
            const GtImage& gt = ground_truth[det.image];
            double best = thr;
            int match = -1;
            for (size_t g = 0; g < gt.people.size(); ++g) {
                if (used[det.image][g]) continue;
                const double o = oks(detections[det.image].people[det.index],
                                     gt.people[g], gt.scale_sq[g], table);
                if (o >= best) {
                    best = o;
                    match = int(g);
                }
            }
            if (match >= 0) {
                used[det.image][size_t(match)] = true;
                tp[d] = true;
            }
        }
        // precision envelope integrated at 101 recall points
        std::vector<double> precision, recall;
        size_t ntp = 0;
        for (size_t d = 0; d < all.size(); ++d) {
            if (tp[d]) ++ntp;
            precision.push_back(double(ntp) / double(d + 1));
            recall.push_back(npos ? double(ntp) / double(npos) : 0.0);
        }
        for (size_t d = precision.size(); d-- > 1;)
            precision[d - 1] = std::max(precision[d - 1], precision[d]);
        double ap = 0;
        for (int r = 0; r <= 100; ++r) {
            const double want = r / 100.0;
            auto it = std::lower_bound(recall.begin(), recall.end(), want);
            if (it != recall.end()) ap += precision[size_t(it - recall.begin())];
        }
        ap /= 101.0;
        result.per_threshold.push_back(ap);
        if (t == 0) result.ap50 = ap;
        if (t == 5) result.ap75 = ap;
    }
    double sum = 0;
    for (double v : result.per_threshold) sum += v;
    result.ap = sum / double(result.per_threshold.size());
    return result;
}

std::string ap_result_json(const ApResult& r) {
    json j{{"ap", r.ap}, {"ap50", r.ap50}, {"ap75", r.ap75},
           {"per_threshold", r.per_threshold}};
    return j.dump(1);
}

}  // namespace litepose
