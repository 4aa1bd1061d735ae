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
/**
 * @file
 * Quick invariant checks run by `qpg selftest`. The full suites live in the
 * test tree; these are the cheap ones worth running on a deployed binary.
 */
#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "agent.hpp"
#include "analysis.hpp"
#include "grad.hpp"
#include "policy.hpp"
#include "qsim.hpp"
#include "rng.hpp"

namespace qpg::selftest {

struct CheckResult {
    std::string name;
    bool passed{false};
    std::string detail;
};

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

inline CheckResult norm_preservation() {
    CounterRng rng{101};
    double worst = 0.0;
    for (std::size_t trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        const auto c = qsim::build_ansatz({qsim::AnsatzKind::RandomPauliCZ, n, 1 + rng.below(3), rng()});
        std::vector<double> s(n);
        std::vector<double> th(c.n_params());
        for (auto &x : s) x = rng.angle();
        for (auto &x : th) x = rng.angle();
        worst = std::max(worst, std::abs(qsim::run(c, s, th).norm() - 1.0));
    }
    return {"norm preservation", worst < 1e-12, "max |norm-1| = " + fmt(worst)};
}

inline CheckResult shift_vs_finite_difference() {
    CounterRng rng{202};
    double worst = 0.0;
    const qsim::AnsatzKind kinds[] = {qsim::AnsatzKind::SimplifiedTwoDesign, qsim::AnsatzKind::StronglyEntanglingLayers,
                                      qsim::AnsatzKind::RandomPauliCZ, qsim::AnsatzKind::ProductStateShared};
    for (std::size_t trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(3);
        const auto c = qsim::build_ansatz({kinds[trial % 4], n, 1 + rng.below(2), rng()});
        const auto p = policy::ActionPartition::make(policy::PartitionScheme::ParityRecursive, n, 2);
        std::vector<double> s(n);
        std::vector<double> th(c.n_params());
        for (auto &x : s) x = rng.angle();
        for (auto &x : th) x = rng.angle();
        const auto ps = grad::shift_grad_action_prob(c, s, th, p, 1);
        const auto fd = grad::finite_difference_grad(c, s, th, p, 1);
        for (std::size_t l = 0; l < ps.values.size(); ++l) {
            worst = std::max(worst, std::abs(ps.values[l] - fd.values[l]));
        }
    }
    return {"parameter shift vs finite differences", worst < 1e-6, "max abs diff = " + fmt(worst)};
}

inline CheckResult partition_completeness() {
    bool ok = true;
    for (std::size_t n = 1; n <= 6 && ok; ++n) {
        for (std::size_t a = 2; a <= (std::size_t{1} << n) && ok; a <<= 1) {
            for (auto scheme : {policy::PartitionScheme::Contiguous, policy::PartitionScheme::ParityRecursive}) {
                const auto p = policy::ActionPartition::make(scheme, n, a);
                std::vector<std::size_t> sizes(a, 0);
                for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
                    const auto act = p.action_of(v);
                    if (act < 0 || static_cast<std::size_t>(act) >= a) {
                        ok = false;
                    } else {
                        ++sizes[static_cast<std::size_t>(act)];
                    }
                }
                for (auto sz : sizes) {
                    ok = ok && sz == (std::size_t{1} << n) / a;
                }
            }
        }
    }
    return {"partition completeness", ok, "n <= 6, all power-of-two |A|"};
}

inline CheckResult jacobi_reconstruction() {
    CounterRng rng{303};
    double worst = 0.0;
    for (std::size_t trial = 0; trial < 20; ++trial) {
        const std::size_t k = 1 + rng.below(12);
        analysis::Matrix m{k};
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = i; j < k; ++j) {
                m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
            }
        }
        const auto e = analysis::jacobi_eigen(m);
        double err = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                double r = 0.0;
                for (std::size_t q = 0; q < k; ++q) {
                    r += e.vectors(i, q) * e.values[q] * e.vectors(j, q);
                }
                err += (r - m(i, j)) * (r - m(i, j));
            }
        }
        worst = std::max(worst, std::sqrt(err));
    }
    return {"Jacobi reconstruction", worst < 1e-8, "max Frobenius error = " + fmt(worst)};
}

inline CheckResult return_bound() {
    CounterRng rng{404};
    bool ok = true;
    for (std::size_t trial = 0; trial < 200; ++trial) {
        agent::Trajectory t;
        t.gamma = rng.uniform(0.0, 0.99);
        const std::size_t horizon = 1 + rng.below(20);
        const double r_max = rng.uniform(0.0, 5.0);
        for (std::size_t i = 0; i < horizon; ++i) {
            t.steps.push_back({{}, 0, rng.uniform(0.0, r_max)});
        }
        double total = 0.0;
        for (double g : agent::discounted_returns(t)) {
            total += g;
        }
        ok = ok && total <= agent::return_upper_bound(r_max, horizon, t.gamma) + 1e-12;
    }
    return {"return upper bound", ok, "200 random trajectories"};
}

} // namespace detail

inline std::vector<CheckResult> run_all() {
    std::vector<std::function<CheckResult()>> checks = {detail::norm_preservation, detail::shift_vs_finite_difference,
                                                        detail::partition_completeness, detail::jacobi_reconstruction,
                                                        detail::return_bound};
    std::vector<CheckResult> out;
    for (auto &c : checks) {
        try {
            out.push_back(c());
        } catch (const std::exception &e) {
            out.push_back({"(exception)", false, e.what()});
        }
    }
    return out;
}

} // namespace qpg::selftest
