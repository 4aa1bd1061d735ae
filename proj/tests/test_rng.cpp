// Copyright 2026 The qpg Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "qpg/rng.hpp"

using qpg::CounterRng;

TEST_CASE("counter rng is deterministic per seed and counter") {
    CounterRng a{42};
    CounterRng b{42};
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a() == b());
    }
    CounterRng c{43};
    CounterRng d{42};
    REQUIRE(c() != d());
}

TEST_CASE("split streams are distinct and reproducible") {
    const CounterRng root{7};
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        auto s = root.split(i);
        firsts.insert(s());
        REQUIRE(root.split(i)() == root.split(i)());
    }
    REQUIRE(firsts.size() == 1000);
    REQUIRE(root.derive_seed(3) == root.derive_seed(3));
    REQUIRE(root.derive_seed(3) != root.derive_seed(4));
}

TEST_CASE("uniform moments match U(0,1)") {
    CounterRng rng{1};
    const int n = 200000;
    double m1 = 0.0;
    double m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        m1 += u;
        m2 += u * u;
    }
    m1 /= n;
    m2 /= n;
    // sd of the mean is sqrt(1/12/n) ~ 6.5e-4
    REQUIRE(std::abs(m1 - 0.5) < 5 * 6.5e-4);
    REQUIRE(std::abs(m2 - 1.0 / 3.0) < 5e-3);
}

TEST_CASE("below is unbiased across buckets") {
    CounterRng rng{9};
    const std::uint64_t bound = 7;
    std::vector<int> counts(bound, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto x = rng.below(bound);
        REQUIRE(x < bound);
        ++counts[x];
    }
    // chi-square with 6 dof; 99.9% quantile is 22.46
    double chi2 = 0.0;
    for (int c : counts) {
        chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
    }
    REQUIRE(chi2 < 22.46);
}

TEST_CASE("angle stays within (-pi, pi)") {
    CounterRng rng{5};
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.angle();
        REQUIRE(a >= -std::numbers::pi);
        REQUIRE(a < std::numbers::pi);
    }
}
