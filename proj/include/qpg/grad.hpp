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
 * Parameter-shift differentiation of Born-policy probabilities and the
 * log-policy gradient, plus a central finite-difference oracle.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "policy.hpp"
#include "qsim.hpp"
#include "rng.hpp"

namespace qpg::grad {

/// Two-term shift rule d<O>/dθ = [<O>(θ+α) - <O>(θ-α)] / (2 sin α).
class ShiftRule {
  public:
    constexpr ShiftRule() = default;
    explicit ShiftRule(double alpha) : alpha_{alpha} {
        qpg::detail::require(alpha > 0.0 && alpha < std::numbers::pi, "ShiftRule: alpha must lie in (0, pi)");
        qpg::detail::require(std::isfinite(scale()), "ShiftRule: 1/(2 sin alpha) is not finite");
    }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double scale() const noexcept { return 1.0 / (2.0 * std::sin(alpha_)); }

  private:
    double alpha_{std::numbers::pi / 2.0};
};

struct ExactEstimator {};
/// Each circuit execution draws `shots` samples from its own stream derived from `seed`.
struct ShotEstimator {
    std::uint64_t shots{1};
    std::uint64_t seed{0};
};
using Estimator = std::variant<ExactEstimator, ShotEstimator>;

struct GradientVector {
    std::vector<double> values;
    /// Shifted circuit executions consumed (2 per gate bound to a differentiated slot).
    std::size_t evals_used{0};
};

/// Policy at θ together with dπ_a/dθ_l for a set of slots.
struct PolicySensitivity {
    std::vector<double> policy;
    std::vector<std::size_t> slots;
    /// rows[i][a] = dπ_a / dθ_{slots[i]}
    std::vector<std::vector<double>> rows;
    std::size_t evals_used{0};
};

namespace detail {

/// Stream id of the unshifted evaluation; shifted evaluations of body gate g use 1+2g and 2+2g.
inline constexpr std::uint64_t kCenterStream = 0;

inline std::vector<double> masses_at(const qsim::ParameterizedCircuit &circuit, std::span<const double> s,
                                     std::span<const double> theta, const policy::ActionPartition &partition,
                                     const Estimator &est, std::uint64_t stream,
                                     std::optional<qsim::GateShift> shift = std::nullopt) {
    const auto psi = qsim::run(circuit, s, theta, shift);
    if (const auto *shots = std::get_if<ShotEstimator>(&est)) {
        const std::uint64_t seed = CounterRng{shots->seed}.derive_seed(stream);
        const auto probs = qsim::basis_probabilities(psi);
        const auto hist = qsim::sample_from_probabilities(probs, shots->shots, seed);
        return policy::action_masses(policy::histogram_frequencies(hist, circuit.n_qubits()), partition);
    }
    return policy::action_masses(qsim::basis_probabilities(psi), partition);
}

inline double sum(std::span<const double> v) {
    double t = 0.0;
    for (double x : v) {
        t += x;
    }
    return t;
}

inline void check_partition(const qsim::ParameterizedCircuit &circuit, const policy::ActionPartition &partition) {
    qpg::detail::require(circuit.n_qubits() == partition.n_qubits(),
                         "gradient: circuit and partition qubit counts differ");
}

} // namespace detail

/**
 * Evaluates π(·|s,θ) and the derivatives of every action probability with
 * respect to the requested slots.
 *
 * A slot bound to several gates is differentiated gate by gate (two shifted
 * executions per gate) and the per-gate terms are summed, which is the exact
 * total derivative. Action-projector policies are normalized ratios of
 * projector expectations, so the shift rule is applied to the raw
 * expectations and the quotient rule is applied afterwards.
 */
inline PolicySensitivity policy_sensitivity(const qsim::ParameterizedCircuit &circuit, std::span<const double> s,
                                            std::span<const double> theta, const policy::ActionPartition &partition,
                                            std::span<const std::size_t> slots, const ShiftRule &rule = {},
                                            const Estimator &est = ExactEstimator{}) {
    detail::check_partition(circuit, partition);
    qsim::detail::check_inputs(circuit, s, theta);
    const std::size_t n_actions = partition.n_actions();

    PolicySensitivity out;
    const auto center = detail::masses_at(circuit, s, theta, partition, est, detail::kCenterStream);
    out.policy = policy::masses_to_policy(center, partition);
    out.slots.assign(slots.begin(), slots.end());
    out.rows.reserve(slots.size());

    const double alpha = rule.alpha();
    const double scale = rule.scale();
    for (const std::size_t slot : slots) {
        qpg::detail::require(slot < circuit.n_params(), "gradient: slot " + std::to_string(slot) + " out of range");
        std::vector<double> dmass(n_actions, 0.0);
        for (const std::size_t g : circuit.sharing_map()[slot]) {
            const auto plus = detail::masses_at(circuit, s, theta, partition, est, 1 + 2 * g,
                                                qsim::GateShift{g, alpha});
            const auto minus = detail::masses_at(circuit, s, theta, partition, est, 2 + 2 * g,
                                                 qsim::GateShift{g, -alpha});
            out.evals_used += 2;
            for (std::size_t a = 0; a < n_actions; ++a) {
                dmass[a] += scale * (plus[a] - minus[a]);
            }
        }
        if (!partition.is_full()) {
            const double total = detail::sum(center);
            const double dtotal = detail::sum(dmass);
            for (std::size_t a = 0; a < n_actions; ++a) {
                dmass[a] = (dmass[a] * total - center[a] * dtotal) / (total * total);
            }
        }
        out.rows.push_back(std::move(dmass));
    }
    return out;
}

namespace detail {
inline std::vector<std::size_t> all_slots(const qsim::ParameterizedCircuit &circuit) {
    std::vector<std::size_t> slots(circuit.n_params());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        slots[i] = i;
    }
    return slots;
}
} // namespace detail

/// Parameter-shift gradient of π(action | s, θ).
inline GradientVector shift_grad_action_prob(const qsim::ParameterizedCircuit &circuit, std::span<const double> s,
                                             std::span<const double> theta, const policy::ActionPartition &partition,
                                             std::size_t action, const ShiftRule &rule = {},
                                             const Estimator &est = ExactEstimator{}) {
    qpg::detail::require(action < partition.n_actions(), "gradient: action out of range");
    const auto slots = detail::all_slots(circuit);
    const auto sens = policy_sensitivity(circuit, s, theta, partition, slots, rule, est);
    GradientVector g;
    g.values.reserve(slots.size());
    for (const auto &row : sens.rows) {
        g.values.push_back(row[action]);
    }
    g.evals_used = sens.evals_used;
    return g;
}

/// ∂ log π(a) = ∂π(a) / max(π(a), floor).
inline double log_derivative(double dprob, double prob, std::optional<double> clip_floor) {
    const double denom = clip_floor ? std::max(prob, *clip_floor) : prob;
    if (!(denom > 0.0)) {
        throw NumericalError("log_policy_grad: action has zero probability and no clip floor is set");
    }
    return dprob / denom;
}

inline GradientVector log_policy_grad(const qsim::ParameterizedCircuit &circuit, std::span<const double> s,
                                      std::span<const double> theta, const policy::ActionPartition &partition,
                                      std::size_t action, const ShiftRule &rule = {},
                                      const Estimator &est = ExactEstimator{},
                                      std::optional<double> clip_floor = std::nullopt) {
    qpg::detail::require(action < partition.n_actions(), "gradient: action out of range");
    const auto slots = detail::all_slots(circuit);
    const auto sens = policy_sensitivity(circuit, s, theta, partition, slots, rule, est);
    GradientVector g;
    g.values.reserve(slots.size());
    for (const auto &row : sens.rows) {
        g.values.push_back(log_derivative(row[action], sens.policy[action], clip_floor));
    }
    g.evals_used = sens.evals_used;
    return g;
}

/// Central differences of exact action probabilities; shifting a slot moves every gate bound to it.
inline GradientVector finite_difference_grad(const qsim::ParameterizedCircuit &circuit, std::span<const double> s,
                                             std::span<const double> theta, const policy::ActionPartition &partition,
                                             std::size_t action, double h = 1e-5) {
    qpg::detail::require(h > 0.0, "finite_difference_grad: h must be positive");
    qpg::detail::require(action < partition.n_actions(), "gradient: action out of range");
    detail::check_partition(circuit, partition);
    qsim::detail::check_inputs(circuit, s, theta);
    std::vector<double> shifted(theta.begin(), theta.end());
    GradientVector g;
    g.values.resize(circuit.n_params());
    auto prob = [&](std::span<const double> th) {
        const auto psi = qsim::run(circuit, s, th);
        return policy::born_policy(psi, partition).probs[action];
    };
    for (std::size_t l = 0; l < circuit.n_params(); ++l) {
        const double orig = shifted[l];
        shifted[l] = orig + h;
        const double up = prob(shifted);
        shifted[l] = orig - h;
        const double down = prob(shifted);
        shifted[l] = orig;
        g.values[l] = (up - down) / (2.0 * h);
        g.evals_used += 2;
    }
    return g;
}

/// Single-qubit marginals P(qubit q = 1).
inline std::vector<double> qubit_marginals_one(std::span<const double> probs, std::size_t n) {
    std::vector<double> m(n, 0.0);
    for (std::size_t v = 0; v < probs.size(); ++v) {
        for (std::size_t q = 0; q < n; ++q) {
            if (qsim::bit_of(v, n, q) != 0) {
                m[q] += probs[v];
            }
        }
    }
    return m;
}

/**
 * For a product state, log π(a) = Σ_i log p_i(a_i). Returns the per-qubit
 * terms log p_i(a_i); throws if the distribution does not factorize (1e-8).
 */
inline std::vector<double> product_log_decomposition(const qsim::StateVector &psi, std::size_t basis_index) {
    const std::size_t n = psi.n_qubits();
    qpg::detail::require(basis_index < psi.dim(), "product_log_decomposition: basis index out of range");
    const auto p = qsim::basis_probabilities(psi);
    const auto one = qubit_marginals_one(p, n);
    for (std::size_t v = 0; v < p.size(); ++v) {
        double prod = 1.0;
        for (std::size_t q = 0; q < n; ++q) {
            prod *= qsim::bit_of(v, n, q) != 0 ? one[q] : 1.0 - one[q];
        }
        if (std::abs(prod - p[v]) > 1e-8) {
            throw ConfigError("product_log_decomposition: state is not a product state");
        }
    }
    std::vector<double> terms(n);
    for (std::size_t q = 0; q < n; ++q) {
        const double pq = qsim::bit_of(basis_index, n, q) != 0 ? one[q] : 1.0 - one[q];
        terms[q] = std::log(pq);
    }
    return terms;
}

} // namespace qpg::grad
