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
 * REINFORCE with a baseline over PQC-based Born policies, the linear-reward
 * multi-armed bandit, and the return / gradient-variance bounds.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "grad.hpp"
#include "parallel.hpp"
#include "policy.hpp"
#include "qsim.hpp"
#include "rng.hpp"

namespace qpg::agent {

struct Step {
    std::vector<double> state;
    std::size_t action{0};
    double reward{0.0};
};

struct Trajectory {
    std::vector<Step> steps;
    double gamma{0.0};

    void validate() const {
        qpg::detail::require(!steps.empty(), "trajectory: horizon must be >= 1");
        qpg::detail::require(gamma >= 0.0 && gamma < 1.0, "trajectory: gamma must lie in [0, 1)");
    }
};

/// G_t = Σ_{k >= t} γ^{k-t} r_k, where r_k is the reward collected at step k.
inline std::vector<double> discounted_returns(const Trajectory &traj) {
    traj.validate();
    std::vector<double> g(traj.steps.size());
    double running = 0.0;
    for (std::size_t k = traj.steps.size(); k-- > 0;) {
        running = traj.steps[k].reward + traj.gamma * running;
        g[k] = running;
    }
    return g;
}

/// Mean of G_t over the trajectories that reach step t.
inline double baseline(std::span<const std::vector<double>> returns, std::size_t t) {
    qpg::detail::require(!returns.empty(), "baseline: need at least one trajectory");
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto &g : returns) {
        if (t < g.size()) {
            acc += g[t];
            ++count;
        }
    }
    qpg::detail::require(count > 0, "baseline: no trajectory reaches step " + std::to_string(t));
    return acc / static_cast<double>(count);
}

/// Everything needed to evaluate ∇ log π for a step.
struct PolicyContext {
    const qsim::ParameterizedCircuit *circuit{nullptr};
    policy::ActionPartition partition;
    std::vector<double> theta;
    grad::ShiftRule rule{};
    /// Zero means exact probabilities.
    std::uint64_t shots{0};
    std::uint64_t seed{0};
    std::optional<double> clip_floor{};

    /// Estimator for step t of trajectory i. Sampling the action with the same
    /// estimator reproduces the policy used in the log-gradient denominator.
    [[nodiscard]] grad::Estimator step_estimator(std::size_t i, std::size_t t) const {
        if (shots == 0) {
            return grad::ExactEstimator{};
        }
        return grad::ShotEstimator{shots, CounterRng{seed}.derive_seed((static_cast<std::uint64_t>(i) << 32U) + t)};
    }
};

namespace detail {

struct ReinforceTerms {
    grad::GradientVector gradient;
    /// Batch mean of ∇ log π over every visited step.
    std::vector<double> mean_log_grad;
};

inline ReinforceTerms reinforce_terms(std::span<const Trajectory> batch, const PolicyContext &ctx,
                                      std::optional<std::span<const double>> baseline_override) {
    qpg::detail::require(ctx.circuit != nullptr, "reinforce: policy context has no circuit");
    qpg::detail::require(!batch.empty(), "reinforce: empty batch");
    const std::size_t k = ctx.circuit->n_params();
    std::vector<std::vector<double>> returns;
    returns.reserve(batch.size());
    std::size_t horizon = 0;
    for (const auto &traj : batch) {
        returns.push_back(discounted_returns(traj));
        horizon = std::max(horizon, traj.steps.size());
    }
    std::vector<double> b(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        if (baseline_override) {
            qpg::detail::require(t < baseline_override->size(), "reinforce: baseline override too short");
            b[t] = (*baseline_override)[t];
        } else {
            b[t] = baseline(returns, t);
        }
    }

    ReinforceTerms out;
    out.gradient.values.assign(k, 0.0);
    out.mean_log_grad.assign(k, 0.0);
    std::size_t visited = 0;
    std::vector<std::size_t> slots(k);
    for (std::size_t l = 0; l < k; ++l) {
        slots[l] = l;
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (std::size_t t = 0; t < batch[i].steps.size(); ++t) {
            const Step &step = batch[i].steps[t];
            const auto sens = grad::policy_sensitivity(*ctx.circuit, step.state, ctx.theta, ctx.partition, slots,
                                                       ctx.rule, ctx.step_estimator(i, t));
            out.gradient.evals_used += sens.evals_used;
            const double advantage = returns[i][t] - b[t];
            for (std::size_t l = 0; l < k; ++l) {
                const double lg = grad::log_derivative(sens.rows[l][step.action], sens.policy[step.action],
                                                       ctx.clip_floor);
                out.gradient.values[l] += advantage * lg;
                out.mean_log_grad[l] += lg;
            }
            ++visited;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (auto &v : out.gradient.values) {
        v *= inv_n;
    }
    for (auto &v : out.mean_log_grad) {
        v /= static_cast<double>(visited);
    }
    return out;
}

} // namespace detail

/**
 * (1/N) Σ_i Σ_t (G_t(τ_i) - b(s_t)) ∇ log π(a_t | s_t), with b the batch mean
 * return at step t unless a per-step baseline is supplied.
 */
inline grad::GradientVector reinforce_gradient(std::span<const Trajectory> batch, const PolicyContext &ctx,
                                               std::optional<std::span<const double>> baseline_override = {}) {
    return detail::reinforce_terms(batch, ctx, baseline_override).gradient;
}

struct BanditEnv {
    std::size_t n_arms{2};

    [[nodiscard]] double reward(std::size_t arm) const {
        qpg::detail::require(arm < n_arms, "bandit: arm out of range");
        return 2.0 * static_cast<double>(arm);
    }
    [[nodiscard]] std::size_t best_arm() const noexcept { return n_arms - 1; }
    [[nodiscard]] double max_reward() const noexcept { return 2.0 * static_cast<double>(n_arms - 1); }
};

struct BanditConfig {
    std::size_t n_qubits{4};
    std::size_t n_arms{4};
    policy::PartitionScheme scheme{policy::PartitionScheme::Contiguous};
    std::size_t depth{1};
    std::size_t episodes{100};
    std::size_t trials{10};
    /// Zero means exact probabilities.
    std::uint64_t shots{0};
    double learning_rate{0.1};
    std::uint64_t seed{0};
    std::size_t batch_size{1};
    std::size_t baseline_window{10};
    std::optional<double> clip_floor{};
    double shift_alpha{std::numbers::pi / 2.0};

    void validate() const {
        qpg::detail::require(n_qubits >= 1 && n_qubits <= qsim::kMaxQubits, "bandit: bad n_qubits");
        qpg::detail::require(policy::is_power_of_two(n_arms) && n_arms >= 2 && n_arms <= (std::size_t{1} << n_qubits),
                             "bandit: n_arms must be a power of two in [2, 2^n]");
        qpg::detail::require(depth >= 1, "bandit: depth must be >= 1");
        qpg::detail::require(episodes >= 1, "bandit: episodes must be >= 1");
        qpg::detail::require(trials >= 1, "bandit: trials must be >= 1");
        qpg::detail::require(std::isfinite(learning_rate) && learning_rate >= 0.0,
                             "bandit: learning_rate must be finite and >= 0");
        qpg::detail::require(batch_size >= 1, "bandit: batch_size must be >= 1");
        qpg::detail::require(!clip_floor || (*clip_floor > 0.0 && *clip_floor < 1.0),
                             "bandit: clip_floor must lie in (0, 1)");
    }
};

struct TrainRecord {
    std::vector<double> p_best;
    std::vector<double> grad_norm;
    /// Variance across components of the episode's mean log-policy gradient.
    std::vector<double> grad_var;
    std::vector<double> episode_return;
};

namespace detail {

inline double component_variance(std::span<const double> v) {
    if (v.empty()) {
        return 0.0;
    }
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) {
        acc += (x - mean) * (x - mean);
    }
    return acc / static_cast<double>(v.size());
}

inline TrainRecord train_trial(const BanditConfig &cfg, const qsim::ParameterizedCircuit &circuit,
                               const policy::ActionPartition &partition, std::size_t trial) {
    const BanditEnv env{cfg.n_arms};
    CounterRng rng = CounterRng{cfg.seed}.split(trial);
    CounterRng init_rng = rng.split(0);
    CounterRng action_rng = rng.split(1);

    PolicyContext ctx{&circuit, partition, std::vector<double>(circuit.n_params()), grad::ShiftRule{cfg.shift_alpha},
                      cfg.shots, 0, cfg.clip_floor};
    for (auto &t : ctx.theta) {
        t = init_rng.angle();
    }
    const std::vector<double> state(cfg.n_qubits, 0.0);
    std::deque<double> history;

    TrainRecord rec;
    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        ctx.seed = rng.split(2).derive_seed(ep);
        std::vector<Trajectory> batch(cfg.batch_size);
        double batch_return = 0.0;
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            const auto masses = grad::detail::masses_at(circuit, state, ctx.theta, partition, ctx.step_estimator(i, 0),
                                                        grad::detail::kCenterStream);
            const auto probs = policy::masses_to_policy(masses, partition);
            const std::size_t a = policy::sample_action(probs, action_rng);
            const double r = env.reward(a);
            batch[i].steps.push_back(Step{state, a, r});
            batch[i].gamma = 0.0;
            batch_return += r;
        }
        batch_return /= static_cast<double>(cfg.batch_size);

        std::optional<std::vector<double>> b;
        if (!history.empty()) {
            double mean = 0.0;
            for (double h : history) {
                mean += h;
            }
            b = std::vector<double>{mean / static_cast<double>(history.size())};
        }
        const auto terms = b ? reinforce_terms(batch, ctx, std::span<const double>{*b})
                             : reinforce_terms(batch, ctx, std::nullopt);
        double norm2 = 0.0;
        for (std::size_t l = 0; l < ctx.theta.size(); ++l) {
            ctx.theta[l] += cfg.learning_rate * terms.gradient.values[l];
            norm2 += terms.gradient.values[l] * terms.gradient.values[l];
        }
        for (const auto &traj : batch) {
            history.push_back(traj.steps.front().reward);
            while (history.size() > cfg.baseline_window) {
                history.pop_front();
            }
        }

        const auto psi = qsim::run(circuit, state, ctx.theta);
        rec.p_best.push_back(policy::born_policy(psi, partition).probs[env.best_arm()]);
        rec.grad_norm.push_back(std::sqrt(norm2));
        rec.grad_var.push_back(component_variance(terms.mean_log_grad));
        rec.episode_return.push_back(batch_return);
    }
    return rec;
}

} // namespace detail

/**
 * Trains a BanditLayer policy with REINFORCE for every trial. The agent state
 * is the all-zeros feature vector; θ starts from U(-π, π) per trial. The
 * logged best-arm probability is exact even when learning uses shots.
 */
inline std::vector<TrainRecord> train_bandit(const BanditConfig &cfg, std::size_t threads = 1) {
    cfg.validate();
    const auto circuit = qsim::build_ansatz({qsim::AnsatzKind::BanditLayer, cfg.n_qubits, cfg.depth, std::nullopt});
    const auto partition = policy::ActionPartition::make(cfg.scheme, cfg.n_qubits, cfg.n_arms);
    std::vector<TrainRecord> records(cfg.trials);
    parallel_for(cfg.trials, threads,
                 [&](std::size_t trial) { records[trial] = detail::train_trial(cfg, circuit, partition, trial); });
    return records;
}

/// Σ_t G_t(τ) <= R_max T / (γ - 1)^2.
inline double return_upper_bound(double r_max, std::size_t horizon, double gamma) {
    qpg::detail::require(gamma >= 0.0 && gamma < 1.0, "return_upper_bound: gamma must lie in [0, 1)");
    qpg::detail::require(horizon >= 1, "return_upper_bound: horizon must be >= 1");
    qpg::detail::require(r_max >= 0.0, "return_upper_bound: R_max must be >= 0");
    return r_max * static_cast<double>(horizon) / ((gamma - 1.0) * (gamma - 1.0));
}

/// R_max^2 T^4 / (1 - γ)^4 · V[∂ log π].
inline double variance_bound_rhs(double r_max, std::size_t horizon, double gamma, double log_grad_variance) {
    qpg::detail::require(gamma >= 0.0 && gamma < 1.0, "variance_bound_rhs: gamma must lie in [0, 1)");
    qpg::detail::require(horizon >= 1, "variance_bound_rhs: horizon must be >= 1");
    qpg::detail::require(r_max >= 0.0, "variance_bound_rhs: R_max must be >= 0");
    const double t2 = static_cast<double>(horizon) * static_cast<double>(horizon);
    const double g = 1.0 - gamma;
    return r_max * r_max * t2 * t2 / (g * g * g * g) * log_grad_variance;
}

} // namespace qpg::agent
