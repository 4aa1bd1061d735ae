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
#include <vector>

#include "qpg/policy.hpp"
#include "qpg/qsim.hpp"
#include "qpg/rng.hpp"

using namespace qpg;
using policy::ActionPartition;
using policy::PartitionScheme;
using qsim::Complex;
using Catch::Approx;

namespace {

unsigned bit(std::size_t b, std::size_t n, std::size_t i) { return (b >> (n - 1 - i)) & 1U; }

// Literal set-membership form of the recursive parity rule. Level j classes
// carry j+1 label bits; level 0 is the parity of the whole string.
bool in_parity_class(std::size_t b, std::size_t n, std::size_t level, std::size_t label) {
    unsigned tail = 0;
    for (std::size_t i = level; i < n; ++i) tail ^= bit(b, n, i);
    const unsigned a0 = label & 1U;
    if (tail != a0) return false;
    if (level == 0) return true;
    const std::size_t a1 = (label >> 1) & 1U;
    const std::size_t inner = ((label >> 2) << 1) | (a1 ^ a0);
    return in_parity_class(b, n, level - 1, inner);
}

qsim::StateVector random_state(std::size_t n, CounterRng &rng) {
    const auto c = qsim::build_ansatz({qsim::AnsatzKind::RandomPauliCZ, n, 3, rng()});
    std::vector<double> s(n);
    std::vector<double> th(c.n_params());
    for (auto &x : s) x = rng.angle();
    for (auto &x : th) x = rng.angle();
    return qsim::run(c, s, th);
}

} // namespace

TEST_CASE("assign_action examples") {
    REQUIRE(policy::assign_action(0b011, ActionPartition::contiguous(3, 4)) == 1);
    REQUIRE(policy::assign_action(0b010, ActionPartition::contiguous(3, 4)) == 1);
    REQUIRE(policy::assign_action(0b101, ActionPartition::parity(3, 2)) == 0);
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto p = ActionPartition::contiguous(n, 2);
        for (std::size_t b = 0; b < (std::size_t{1} << (n - 1)); ++b) REQUIRE(policy::assign_action(b, p) == 0);
    }
    REQUIRE_THROWS_AS(policy::assign_action(0, ActionPartition::projector_default(3, 2)), ConfigError);
}

TEST_CASE("partition construction rejects invalid sizes") {
    REQUIRE_THROWS_AS(ActionPartition::contiguous(3, 3), ConfigError);
    REQUIRE_THROWS_AS(ActionPartition::parity(3, 16), ConfigError);
    REQUIRE_THROWS_AS(ActionPartition::contiguous(3, 1), ConfigError);
    REQUIRE_THROWS_AS(ActionPartition::projector(2, {0, 0}), ConfigError);
    REQUIRE_THROWS_AS(ActionPartition::projector(2, {0, 4}), ConfigError);
}

TEST_CASE("full partitions are disjoint, exhaustive and equal-size (n <= 8)") {
    for (std::size_t n = 1; n <= 8; ++n) {
        const std::size_t dim = std::size_t{1} << n;
        for (std::size_t a = 2; a <= dim; a <<= 1) {
            for (auto scheme : {PartitionScheme::Contiguous, PartitionScheme::ParityRecursive}) {
                const auto p = ActionPartition::make(scheme, n, a);
                std::vector<std::size_t> sizes(a, 0);
                for (std::size_t b = 0; b < dim; ++b) {
                    const auto act = policy::assign_action(b, p);
                    REQUIRE(act < a);
                    ++sizes[act];
                }
                for (auto s : sizes) REQUIRE(s == dim / a);
            }
        }
    }
}

TEST_CASE("parity partition matches the literal recursive set rule") {
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t m = 1; m <= n; ++m) {
            const auto p = ActionPartition::parity(n, std::size_t{1} << m);
            for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) {
                std::size_t hits = 0;
                std::size_t label = 0;
                for (std::size_t a = 0; a < (std::size_t{1} << m); ++a) {
                    if (in_parity_class(b, n, m - 1, a)) {
                        ++hits;
                        label = a;
                    }
                }
                REQUIRE(hits == 1);
                REQUIRE(policy::assign_action(b, p) == label);
            }
        }
    }
}

TEST_CASE("parity with two actions is the XOR of all bits (n <= 10)") {
    for (std::size_t n = 1; n <= 10; ++n) {
        const auto p = ActionPartition::parity(n, 2);
        for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) {
            REQUIRE(policy::assign_action(b, p) == static_cast<std::size_t>(std::popcount(b) & 1));
        }
    }
}

TEST_CASE("contiguous prefix property (n <= 8)") {
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t m = 1; m <= n; ++m) {
            const auto p = ActionPartition::contiguous(n, std::size_t{1} << m);
            for (std::size_t b = 0; b < (std::size_t{1} << n); ++b) {
                // flip any suffix bit: same action
                for (std::size_t i = m; i < n; ++i) {
                    const std::size_t c = b ^ (std::size_t{1} << (n - 1 - i));
                    REQUIRE(policy::assign_action(b, p) == policy::assign_action(c, p));
                }
            }
        }
    }
}

TEST_CASE("default projector states") {
    REQUIRE(ActionPartition::projector_default(4, 2).projector_states() == std::vector<std::size_t>{0, 15});
    const auto full = ActionPartition::projector_default(3, 8);
    for (std::size_t a = 0; a < 8; ++a) REQUIRE(full.projector_states()[a] == a);
}

TEST_CASE("born_policy examples") {
    const qsim::StateVector zero{3};
    REQUIRE(policy::born_policy(zero, ActionPartition::contiguous(3, 2)).probs == std::vector<double>{1.0, 0.0});

    for (std::size_t n = 1; n <= 5; ++n) {
        qsim::StateVector u{n};
        for (std::size_t q = 0; q < n; ++q) u.apply_rotation(qsim::GateKind::RY, q, std::numbers::pi / 2);
        for (std::size_t a = 2; a <= (std::size_t{1} << n); a <<= 1) {
            for (double p : policy::born_policy(u, ActionPartition::contiguous(n, a)).probs) {
                REQUIRE(p == Approx(1.0 / static_cast<double>(a)).margin(1e-12));
            }
        }
    }

    const double r = 1.0 / std::sqrt(2.0);
    const qsim::StateVector bell{2, {Complex{r, 0}, 0, 0, Complex{r, 0}}};
    const auto pb = policy::born_policy(bell, ActionPartition::projector(2, {0, 3}));
    REQUIRE(pb.probs[0] == Approx(0.5).margin(1e-12));
    REQUIRE(pb.probs[1] == Approx(0.5).margin(1e-12));

    const qsim::StateVector one{2, {0, Complex{1, 0}, 0, 0}};
    REQUIRE_THROWS_AS(policy::born_policy(one, ActionPartition::projector(2, {0, 3})), NumericalError);
    REQUIRE_THROWS_AS(policy::born_policy(zero, ActionPartition::contiguous(2, 2)), ConfigError);
}

TEST_CASE("probability conservation on 1000 random states") {
    CounterRng rng{55};
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        const auto psi = random_state(n, rng);
        const std::size_t a = std::size_t{1} << (1 + rng.below(n));
        const auto scheme = trial % 2 == 0 ? PartitionScheme::Contiguous : PartitionScheme::ParityRecursive;
        double total = 0.0;
        for (double p : policy::born_policy(psi, ActionPartition::make(scheme, n, a)).probs) {
            REQUIRE(p >= 0.0);
            total += p;
        }
        REQUIRE(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("born_policy_from_shots examples") {
    const qsim::Histogram h1{{0b000, 60}, {0b111, 40}};
    const auto p1 = policy::born_policy_from_shots(h1, ActionPartition::contiguous(3, 2));
    REQUIRE(p1.probs == std::vector<double>{0.6, 0.4});
    REQUIRE(std::get<policy::ShotSource>(p1.source).count == 100);

    const qsim::Histogram h2{{0b101, 10}, {0b011, 10}};
    REQUIRE(policy::born_policy_from_shots(h2, ActionPartition::parity(3, 2)).probs == std::vector<double>{1.0, 0.0});

    const qsim::Histogram h3{{0b110, 1}};
    REQUIRE(policy::born_policy_from_shots(h3, ActionPartition::contiguous(3, 4)).probs ==
            std::vector<double>{0.0, 0.0, 0.0, 1.0});

    REQUIRE_THROWS_AS(policy::born_policy_from_shots(h3, ActionPartition::projector(3, {0, 7})), NumericalError);
}

TEST_CASE("shot policy converges to the exact policy") {
    CounterRng rng{12};
    const auto psi = random_state(4, rng);
    const auto part = ActionPartition::parity(4, 4);
    const auto exact = policy::born_policy(psi, part).probs;
    const std::uint64_t shots = 2000;
    std::vector<double> tvs;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto est = policy::born_policy_from_shots(qsim::sample_shots(psi, shots, seed), part).probs;
        double tv = 0.0;
        for (std::size_t a = 0; a < exact.size(); ++a) tv += std::abs(est[a] - exact[a]);
        tvs.push_back(0.5 * tv);
    }
    std::nth_element(tvs.begin(), tvs.begin() + 25, tvs.end());
    REQUIRE(tvs[25] <= 3.0 / std::sqrt(static_cast<double>(shots)));
}

TEST_CASE("clip attaches a floor without touching probabilities") {
    const policy::PolicyDistribution d{{0.999, 0.001}, policy::ExactSource{}, std::nullopt};
    const auto c = policy::clip(d, 1.0 / 16.0);
    REQUIRE(c.probs == d.probs);
    REQUIRE(*c.clip_floor == 0.0625);
    const std::size_t n = 4;
    REQUIRE(*policy::clip(d, 1.0 / static_cast<double>(n * n)).clip_floor == 0.0625);
    REQUIRE_THROWS_AS(policy::clip(d, 0.5), ConfigError);
    REQUIRE_THROWS_AS(policy::clip(d, 0.0), ConfigError);
}

TEST_CASE("locality") {
    REQUIRE(policy::locality(ActionPartition::contiguous(5, 4)) == 2);
    REQUIRE(policy::locality(ActionPartition::contiguous(5, 2)) == 1);
    for (std::size_t a = 2; a <= 32; a <<= 1) REQUIRE(policy::locality(ActionPartition::parity(5, a)) == 5);
}

TEST_CASE("softmax policy") {
    const std::vector<double> zero{0.0, 0.0};
    const auto p0 = policy::softmax_policy(zero, 1.0).probs;
    REQUIRE(p0[0] == Approx(0.5));
    const std::vector<double> e{1.0, 0.0};
    REQUIRE(policy::softmax_policy(e, 200.0).probs[0] > 1.0 - 1e-12);
    const std::vector<double> e3{2.0, 1.0, 0.0};
    const double z = std::exp(2.0) + std::exp(1.0) + 1.0;
    const auto p3 = policy::softmax_policy(e3, 1.0).probs;
    REQUIRE(p3[0] == Approx(std::exp(2.0) / z).margin(1e-14));
    REQUIRE(p3[1] == Approx(std::exp(1.0) / z).margin(1e-14));
    REQUIRE(p3[2] == Approx(1.0 / z).margin(1e-14));
    // no overflow at large beta
    const std::vector<double> big{1000.0, 999.0};
    const auto pb = policy::softmax_policy(big, 10.0).probs;
    REQUIRE(std::isfinite(pb[0]));
    REQUIRE(pb[0] + pb[1] == Approx(1.0));
}

TEST_CASE("Z observables") {
    const qsim::StateVector zero{3};
    REQUIRE(policy::expectation(zero, policy::ZObservable::local_sum(3)) == Approx(3.0));
    qsim::StateVector flipped{3};
    flipped.apply_rotation(qsim::GateKind::RX, 1, std::numbers::pi);
    REQUIRE(policy::expectation(flipped, policy::ZObservable::global(3)) == Approx(-1.0).margin(1e-12));
    policy::SoftmaxPolicySpec spec{1.0, {policy::ZObservable::local_sum(3), policy::ZObservable::global(3)}};
    const auto p = policy::softmax_policy(flipped, spec).probs;
    // expectations (1, -1)
    REQUIRE(p[0] == Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0))));
}

TEST_CASE("sample_action follows the distribution") {
    CounterRng rng{4};
    const std::vector<double> p{0.1, 0.0, 0.6, 0.3};
    std::vector<int> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[policy::sample_action(p, rng)];
    REQUIRE(counts[1] == 0);
    for (std::size_t a = 0; a < 4; ++a) {
        const double sd = std::sqrt(n * p[a] * (1 - p[a]));
        REQUIRE(std::abs(counts[a] - n * p[a]) <= 4 * sd + 1e-9);
    }
}
