// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "litepose/decode.hpp"

using namespace litepose;

TEST_CASE("nms keeps strict local maxima and breaks ties to the first") {
    Tensor h(1, 4, 4);
    h.at(0, 1, 1) = 1.0f;
    h.at(0, 1, 2) = 1.0f;  // tied neighbor, later in scan order
    h.at(0, 3, 3) = 0.5f;
    Tensor p = nms3x3(h);
    CHECK(p.at(0, 1, 1) == 1.0f);
    CHECK(p.at(0, 1, 2) == 0.0f);
    CHECK(p.at(0, 3, 3) == 0.5f);
    int nonzero = 0;
    for (float v : p.data) nonzero += v != 0.f;
    CHECK(nonzero == 2);
}

TEST_CASE("grouping splits joints by tag distance") {
    const int J = 2;
    Tensor heat(J, 16, 16), tags(J, 16, 16);
    // two people, joints well separated, tags 0 and 4
    heat.at(0, 4, 4) = 1.f;
    tags.at(0, 4, 4) = 0.f;
    heat.at(1, 5, 10) = 0.9f;
    tags.at(1, 5, 10) = 0.f;
    heat.at(0, 12, 4) = 0.8f;
    tags.at(0, 12, 4) = 4.f;
    DecodeParams params;
    params.num_joints = J;
    auto poses = decode(heat, tags, params);
    REQUIRE(poses.size() == 2);
    CHECK(poses[0].joints[0].visible);
    CHECK(poses[0].joints[1].visible);
    CHECK(poses[0].tag == doctest::Approx(0.0));
    CHECK(poses[1].joints[0].visible);
    CHECK(!poses[1].joints[1].visible);
    CHECK(poses[1].tag == doctest::Approx(4.0));
}

TEST_CASE("sub-pixel refinement recovers an off-center parabola vertex") {
    Tensor heat(1, 8, 8), tags(1, 8, 8);
    // values of 1 - (x - 3.25)^2 / 8 around x = 3
    auto f = [](double x) { return float(1.0 - (x - 3.25) * (x - 3.25) / 8.0); };
    for (int x = 2; x <= 5; ++x) heat.at(0, 3, x) = f(x);
    DecodeParams params;
    params.num_joints = 1;
    auto poses = decode(heat, tags, params);
    REQUIRE(poses.size() == 1);
    CHECK(poses[0].joints[0].x == doctest::Approx(3.25).epsilon(1e-5));
    CHECK(poses[0].joints[0].y == doctest::Approx(3.0));
}

TEST_CASE("synthetic scenes decode back exactly") {
    SyntheticParams params;
    Rng rng(2718);
    for (int trial = 0; trial < 25; ++trial) {
        Rng scene_rng = rng.split(uint64_t(trial));
        SyntheticScene scene = synthesize_scene(params, scene_rng);
        DecodeParams dp;
        dp.num_joints = params.num_joints;
        auto poses = decode(scene.heatmaps, scene.tags, dp);
        REQUIRE(poses.size() == scene.people.size());
        // match decoded people to truth by their (unique) tags
        for (const PersonPose& gt : scene.people) {
            auto it = std::find_if(poses.begin(), poses.end(), [&](const PersonPose& p) {
                return std::abs(p.tag - gt.tag) < 1e-9;
            });
            REQUIRE(it != poses.end());
            for (size_t j = 0; j < gt.joints.size(); ++j) {
                CAPTURE(trial);
                CAPTURE(j);
                REQUIRE(it->joints[j].visible == gt.joints[j].visible);
                if (!gt.joints[j].visible) continue;
                CHECK(it->joints[j].x == gt.joints[j].x);
                CHECK(it->joints[j].y == gt.joints[j].y);
            }
        }
    }
}

TEST_CASE("poses JSON round-trips") {
    SyntheticParams params;
    Rng rng(31);
    SyntheticScene scene = synthesize_scene(params, rng);
    auto back = poses_from_json(poses_to_json(scene.people));
    REQUIRE(back.size() == scene.people.size());
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].tag == scene.people[i].tag);
        for (size_t j = 0; j < back[i].joints.size(); ++j) {
            CHECK(back[i].joints[j].x == scene.people[i].joints[j].x);
            CHECK(back[i].joints[j].visible == scene.people[i].joints[j].visible);
        }
    }
}
