// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include "doctest.h"
#include "litepose/rng.hpp"

using litepose::Rng;

TEST_CASE("same seed, same stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("split streams are independent of parent advancement") {
    Rng a(7), b(7);
    Rng sa = a.split(3);
    a.next();
    a.next();
    Rng sb = b.split(3);
    CHECK(sa.next() == sb.next());  // split does not consume parent state
    CHECK(Rng(7).split(1).next() != Rng(7).split(2).next());
}

TEST_CASE("below stays in range and is roughly uniform") {
    Rng rng(99);
    const uint64_t bound = 7;
    const int n = 70000;
    std::vector<int> counts(bound, 0);
    for (int i = 0; i < n; ++i) {
        uint64_t v = rng.below(bound);
        REQUIRE(v < bound);
        ++counts[v];
    }
    // chi-squared against uniform; 6 dof, 99.9% quantile is 22.46
    const double expected = double(n) / double(bound);
    double chi2 = 0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 22.46);
}

TEST_CASE("uniform() lies in [0,1) with a sane mean") {
    Rng rng(5);
    double sum = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        double v = rng.uniform();
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
        sum += v;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}
