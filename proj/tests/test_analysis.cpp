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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qpg/analysis.hpp"
#include "qpg/grad.hpp"
#include "qpg/policy.hpp"
#include "qpg/qsim.hpp"
#include "qpg/rng.hpp"

using namespace qpg;
using analysis::Matrix;
using policy::ActionPartition;
using Catch::Approx;

namespace {

qsim::ParameterizedCircuit one_rotation(qsim::GateKind kind) {
    return qsim::ParameterizedCircuit{1, qsim::detail::ry_encoding(1), {qsim::Gate::rotation(kind, 0, 0)}, {0}};
}

Matrix random_symmetric(std::size_t k, std::mt19937_64 &gen) {
    std::normal_distribution<double> nd;
    Matrix m{k};
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) m(i, j) = m(j, i) = nd(gen);
    return m;
}

// Σ_a (∂π_a)^2 / π_a by central differences of exact probabilities.
double fd_fisher_diag(const qsim::ParameterizedCircuit &c, const std::vector<double> &s, std::vector<double> theta,
                      const ActionPartition &part, std::size_t l) {
    const double h = 1e-5;
    const auto probs = [&](const std::vector<double> &th) { return policy::born_policy(qsim::run(c, s, th), part).probs; };
    const auto p = probs(theta);
    theta[l] += h;
    const auto up = probs(theta);
    theta[l] -= 2 * h;
    const auto dn = probs(theta);
    double acc = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        const double d = (up[a] - dn[a]) / (2 * h);
        if (p[a] > 1e-12) acc += d * d / p[a];
    }
    return acc;
}

} // namespace

TEST_CASE("sample statistics") {
    const std::vector<double> xs{1, 2, 3, 4};
    const auto st = analysis::sample_stats(xs);
    REQUIRE(st.mean == Approx(2.5));
    REQUIRE(st.variance == Approx(5.0 / 3.0));
    const std::vector<double> flat(50, 0.7);
    REQUIRE(analysis::sample_stats(flat).variance == Approx(0.0).margin(1e-15));
}

TEST_CASE("scan rules") {
    analysis::DepthRule d;
    REQUIRE(d.depth_for(3) == 9);
    REQUIRE(d.depth_for(10) == 20);
    d.kind = analysis::DepthRule::Kind::Log2N;
    REQUIRE(d.depth_for(8) == 3);
    REQUIRE(d.depth_for(1) == 1);
    analysis::ActionRule a;
    REQUIRE(a.actions_for(3) == std::vector<std::size_t>{2, 4, 8});
    analysis::ShotRule s{analysis::ShotRule::Kind::PerNSquared, 10.0};
    REQUIRE(s.shots_for(4) == 160);
    analysis::ClipRule c{analysis::ClipRule::Kind::InvNSquared};
    REQUIRE(*c.floor_for(4) == Approx(1.0 / 16));
}

TEST_CASE("log-gradient variance agrees with an independent finite-difference estimate") {
    analysis::VarianceScanConfig cfg;
    cfg.ansatz = qsim::AnsatzKind::SimplifiedTwoDesign;
    cfg.depth = {analysis::DepthRule::Kind::Fixed, 2};
    cfg.ansatz_seed = 3;
    cfg.n_list = {3};
    cfg.scheme = policy::PartitionScheme::ParityRecursive;
    cfg.clip = {analysis::ClipRule::Kind::Fixed, 0.05};
    cfg.ensemble = 6000;
    cfg.seed = 17;
    const std::size_t n = 3;
    const std::size_t n_actions = 4;
    const auto est = analysis::log_grad_variance(cfg, n, n_actions);

    const auto c = qsim::build_ansatz({cfg.ansatz, n, 2, cfg.ansatz_seed});
    const auto part = ActionPartition::parity(n, n_actions);
    const std::size_t slot = analysis::probe_slot_for(c, std::nullopt);
    std::mt19937_64 gen{4242};
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<double> xs;
    for (std::size_t i = 0; i < cfg.ensemble; ++i) {
        std::vector<double> s(n);
        std::vector<double> theta(c.n_params());
        for (auto &x : s) x = ang(gen);
        for (auto &x : theta) x = ang(gen);
        const auto p = policy::born_policy(qsim::run(c, s, theta), part).probs;
        double r = u01(gen);
        std::size_t a = 0;
        while (a + 1 < p.size() && r >= p[a]) r -= p[a++];
        const auto fd = grad::finite_difference_grad(c, s, theta, part, a);
        xs.push_back(fd.values[slot] / std::max(p[a], 0.05));
    }
    const auto ref = analysis::sample_stats(xs);
    REQUIRE(std::abs(est.variance - ref.variance) <= 4.0 * std::hypot(est.stderr_, ref.variance_stderr));
}

TEST_CASE("clipped log-gradient variance respects the 1/floor^2 bound") {
    analysis::VarianceScanConfig cfg;
    cfg.depth = {analysis::DepthRule::Kind::Fixed, 3};
    cfg.n_list = {4};
    cfg.clip = {analysis::ClipRule::Kind::Fixed, 0.1};
    cfg.ensemble = 300;
    cfg.seed = 5;
    for (std::size_t a : {2, 4, 16}) {
        const auto est = analysis::log_grad_variance(cfg, 4, a);
        // |∂π| <= 1/2 per gate occurrence, one occurrence per slot here
        REQUIRE(est.variance <= 0.25 / (0.1 * 0.1));
    }
}

TEST_CASE("variance estimate is stable under doubling the ensemble") {
    analysis::VarianceScanConfig cfg;
    cfg.depth = {analysis::DepthRule::Kind::Fixed, 2};
    cfg.n_list = {4};
    cfg.clip = {analysis::ClipRule::Kind::InvNSquared};
    cfg.seed = 77;
    cfg.ensemble = 2000;
    const auto a = analysis::log_grad_variance(cfg, 4, 4);
    cfg.ensemble = 4000;
    const auto b = analysis::log_grad_variance(cfg, 4, 4);
    REQUIRE(std::abs(a.variance - b.variance) <= 4.0 * std::hypot(a.stderr_, b.stderr_));
}

TEST_CASE("variance estimate is deterministic and thread-count independent") {
    analysis::VarianceScanConfig cfg;
    cfg.depth = {analysis::DepthRule::Kind::Fixed, 2};
    cfg.n_list = {3};
    cfg.shots = {analysis::ShotRule::Kind::Fixed, 64};
    cfg.clip = {analysis::ClipRule::Kind::InvNSquared};
    cfg.ensemble = 200;
    cfg.seed = 9;
    const auto a = analysis::log_grad_variance(cfg, 3, 4, 1);
    const auto b = analysis::log_grad_variance(cfg, 3, 4, 3);
    REQUIRE(a.variance == b.variance);
    REQUIRE(a.mean == b.mean);
}

TEST_CASE("variance scan config validation") {
    analysis::VarianceScanConfig cfg;
    cfg.n_list = {4, 3};
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
    cfg.n_list = {3};
    cfg.ensemble = 1;
    REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("Jacobi eigen-solver") {
    SECTION("worked examples") {
        Matrix m{2};
        m(0, 0) = 2; m(0, 1) = 1; m(1, 0) = 1; m(1, 1) = 2;
        const auto e = analysis::jacobi_eigen(m);
        REQUIRE(e.values[0] == Approx(3.0));
        REQUIRE(e.values[1] == Approx(1.0));
        Matrix d{3};
        d(0, 0) = -1; d(1, 1) = 5; d(2, 2) = 2;
        REQUIRE(analysis::eigen_spectrum(d) == std::vector<double>{5, 2, -1});
        REQUIRE(analysis::eigen_spectrum(Matrix{4}) == std::vector<double>(4, 0.0));
    }
    SECTION("non-symmetric input is rejected") {
        Matrix m{2};
        m(0, 1) = 1.0;
        REQUIRE_THROWS_AS(analysis::jacobi_eigen(m), ConfigError);
    }
    SECTION("random symmetric matrices are reconstructed") {
        std::mt19937_64 gen{31};
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t k = 1 + gen() % 20;
            const auto m = random_symmetric(k, gen);
            const auto e = analysis::jacobi_eigen(m);
            REQUIRE(std::is_sorted(e.values.rbegin(), e.values.rend()));
            double tr = 0.0;
            for (double l : e.values) tr += l;
            REQUIRE(tr == Approx(m.trace()).margin(1e-9));
            double err = 0.0;
            double orth = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < k; ++j) {
                    double r = 0.0;
                    double o = 0.0;
                    for (std::size_t q = 0; q < k; ++q) {
                        r += e.vectors(i, q) * e.values[q] * e.vectors(j, q);
                        o += e.vectors(q, i) * e.vectors(q, j);
                    }
                    err = std::max(err, std::abs(r - m(i, j)));
                    orth = std::max(orth, std::abs(o - (i == j ? 1.0 : 0.0)));
                }
            }
            REQUIRE(err <= 1e-8 * std::max(1.0, m.frobenius()));
            REQUIRE(orth <= 1e-10);
        }
    }
}

TEST_CASE("concentration fraction") {
    const std::vector<double> e{1.0, 0.5, 1e-4, -1e-5};
    REQUIRE(analysis::concentration_fraction(e) == 0.5);
    REQUIRE(analysis::concentration_fraction(e, 1e-6) == 0.0);
    REQUIRE(analysis::concentration_fraction(std::vector<double>{}) == 0.0);
}

TEST_CASE("scaling fits") {
    const std::vector<double> ns{2, 4, 6, 8};
    std::vector<double> exp_v;
    std::vector<double> pow_v;
    for (double n : ns) {
        exp_v.push_back(3.0 * std::exp(-0.7 * n));
        pow_v.push_back(0.5 * std::pow(n, -2.0));
    }
    const auto fe = analysis::fit_scaling(ns, exp_v, analysis::ScalingModel::ExpDecay);
    REQUIRE(fe.slope == Approx(-0.7));
    REQUIRE(fe.intercept == Approx(std::log(3.0)));
    REQUIRE(fe.r_squared == Approx(1.0));
    const auto fp = analysis::fit_scaling(ns, pow_v, analysis::ScalingModel::PowerLaw);
    REQUIRE(fp.slope == Approx(-2.0));
    REQUIRE(fp.intercept == Approx(std::log(0.5)));
    const std::vector<double> two{1, 2};
    REQUIRE_THROWS_AS(analysis::fit_scaling(two, two, analysis::ScalingModel::ExpDecay), ConfigError);
    const std::vector<double> bad{1.0, 0.0, 1.0, 1.0};
    REQUIRE_THROWS_AS(analysis::fit_scaling(ns, bad, analysis::ScalingModel::ExpDecay), ConfigError);
}

TEST_CASE("Fisher information") {
    SECTION("single RY after RY encoding has unit information") {
        // π_0 = cos^2((s+θ)/2) so Σ_a (∂π_a)^2/π_a = 1 for every s
        const auto c = one_rotation(qsim::GateKind::RY);
        const std::vector<double> theta{0.3};
        const auto f = analysis::fim(c, ActionPartition::contiguous(1, 2), theta, 20, {}, 1);
        REQUIRE(f.matrix(0, 0) == Approx(1.0).epsilon(1e-9));
        REQUIRE(f.eigenvalues[0] == Approx(1.0).epsilon(1e-9));
    }
    SECTION("a parameter that cannot move the policy has zero information") {
        const auto c = one_rotation(qsim::GateKind::RZ);
        const std::vector<double> theta{1.1};
        const auto f = analysis::fim(c, ActionPartition::contiguous(1, 2), theta, 10, {}, 2);
        REQUIRE(f.matrix(0, 0) == Approx(0.0).margin(1e-15));
    }
    SECTION("random circuits: PSD, Cauchy-Schwarz, diagonal matches finite differences") {
        CounterRng rng{55};
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 2 + rng.below(3);
            const auto c = qsim::build_ansatz({qsim::AnsatzKind::SimplifiedTwoDesign, n, 2, std::nullopt});
            std::vector<double> theta(c.n_params());
            for (auto &t : theta) t = rng.angle();
            const auto part = ActionPartition::parity(n, 2);
            const std::uint64_t seed = rng();
            const auto f = analysis::fim(c, part, theta, 6, {}, seed);
            const double scale = std::max(1.0, f.matrix.trace());
            REQUIRE(f.eigenvalues.back() >= -1e-10 * scale);
            for (std::size_t p = 0; p < c.n_params(); ++p) {
                for (std::size_t q = 0; q < c.n_params(); ++q) {
                    REQUIRE(f.matrix(p, q) * f.matrix(p, q) <= f.matrix(p, p) * f.matrix(q, q) + 1e-12);
                }
            }
            for (std::size_t l = 0; l < c.n_params(); ++l) {
                double ref = 0.0;
                for (std::size_t j = 0; j < 6; ++j) {
                    CounterRng srng = CounterRng{seed}.split(j);
                    std::vector<double> s(n);
                    for (auto &x : s) x = srng.angle();
                    ref += fd_fisher_diag(c, s, theta, part, l) / 6.0;
                }
                REQUIRE(f.matrix(l, l) == Approx(ref).epsilon(1e-5).margin(1e-7));
            }
        }
    }
    SECTION("sampled actions converge on the exact expectation") {
        const auto c = qsim::build_ansatz({qsim::AnsatzKind::SimplifiedTwoDesign, 2, 1, std::nullopt});
        std::vector<double> theta(c.n_params(), 0.4);
        const auto part = ActionPartition::contiguous(2, 4);
        const auto exact = analysis::fim(c, part, theta, 4, {}, 8, 1.0 / 16);
        const auto sampled =
            analysis::fim(c, part, theta, 4, {analysis::ActionSampling::Kind::Sampled, 20000}, 8, 1.0 / 16);
        REQUIRE(sampled.matrix.trace() == Approx(exact.matrix.trace()).epsilon(0.05));
    }
}

TEST_CASE("product-state cells") {
    SECTION("single qubit, single layer matches closed forms") {
        // gate ∈ {I, RX, RY, RZ} on |0>: half the draws give ∂p_0 = -sin(θ)/2 and unit score
        // variance, the other half give zeros.
        const auto cell = analysis::product_state_cell(1, 1, 20000, 3);
        REQUIRE(cell.var_prob_grad == Approx(1.0 / 16).margin(0.003));
        REQUIRE(cell.var_log_grad == Approx(0.5).margin(0.1));
        REQUIRE(cell.mean_abs_prob_grad == Approx(0.5 * 1.0 / std::numbers::pi).margin(0.01));
    }
    SECTION("deterministic and finite") {
        const auto a = analysis::product_state_cell(4, 3, 300, 11, 1);
        const auto b = analysis::product_state_cell(4, 3, 300, 11, 1, 2);
        REQUIRE(a.var_log_grad == b.var_log_grad);
        REQUIRE(std::isfinite(a.var_log_grad));
        REQUIRE(a.ensemble == 300);
        REQUIRE_THROWS_AS(analysis::product_state_cell(4, 3, 300, 11, 3), ConfigError);
    }
}
