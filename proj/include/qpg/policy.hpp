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
 * Born policies: partitions of the computational basis into action sets,
 * exact and shot-estimated action distributions, probability clipping
 * metadata and the softmax construction.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "qsim.hpp"

namespace qpg::policy {

enum class PartitionScheme { Contiguous, ParityRecursive, ActionProjector };

[[nodiscard]] inline std::string to_string(PartitionScheme s) {
    switch (s) {
    case PartitionScheme::Contiguous: return "contiguous";
    case PartitionScheme::ParityRecursive: return "parity";
    case PartitionScheme::ActionProjector: return "projector";
    }
    return "?";
}

[[nodiscard]] inline PartitionScheme scheme_from_string(const std::string &name) {
    if (name == "contiguous") return PartitionScheme::Contiguous;
    if (name == "parity") return PartitionScheme::ParityRecursive;
    if (name == "projector") return PartitionScheme::ActionProjector;
    throw ConfigError("unknown partition scheme '" + name + "' (expected contiguous, parity or projector)");
}

[[nodiscard]] constexpr bool is_power_of_two(std::size_t x) noexcept { return x != 0 && (x & (x - 1)) == 0; }

[[nodiscard]] constexpr std::size_t log2_exact(std::size_t x) noexcept {
    return static_cast<std::size_t>(std::countr_zero(x));
}

namespace detail {

/// XOR of bits b_first .. b_{n-1} (qubit order, big-endian index).
[[nodiscard]] inline unsigned tail_parity(std::size_t b, std::size_t n, std::size_t first) {
    unsigned x = 0;
    for (std::size_t i = first; i < n; ++i) {
        x ^= qsim::bit_of(b, n, i);
    }
    return x;
}

/**
 * Recursive parity assignment for |A| = 2^m. At recursion level j (j = m-1 down
 * to 0) the lowest index bit equals the XOR of b_j..b_{n-1}, and the level-(j-1)
 * class index is a_{j}..a_2 (a_1 xor a_0). Unrolling from level 0 upwards:
 * A(0) = XOR of all bits, A(j) = (A(j-1) >> 1) << 2 | (A(j-1)_0 xor c_j) << 1 | c_j.
 */
[[nodiscard]] inline std::size_t parity_recursive_action(std::size_t b, std::size_t n, std::size_t m) {
    std::size_t a = tail_parity(b, n, 0);
    for (std::size_t level = 1; level < m; ++level) {
        const std::size_t c = tail_parity(b, n, level);
        a = ((a >> 1U) << 2U) | (((a & 1U) ^ c) << 1U) | c;
    }
    return a;
}

} // namespace detail

/**
 * Maps basis states to actions. Contiguous and ParityRecursive partitions
 * cover every basis state; ActionProjector keeps one basis state per action
 * and discards the rest.
 */
class ActionPartition {
  public:
    static constexpr std::int32_t kDiscarded = -1;

    static ActionPartition contiguous(std::size_t n_qubits, std::size_t n_actions) {
        return ActionPartition{PartitionScheme::Contiguous, n_qubits, n_actions, {}};
    }
    static ActionPartition parity(std::size_t n_qubits, std::size_t n_actions) {
        return ActionPartition{PartitionScheme::ParityRecursive, n_qubits, n_actions, {}};
    }
    static ActionPartition projector(std::size_t n_qubits, std::vector<std::size_t> states) {
        const std::size_t k = states.size();
        return ActionPartition{PartitionScheme::ActionProjector, n_qubits, k, std::move(states)};
    }
    /// Evenly spaced projector states v_a = a (2^n - 1) / (|A| - 1): {0, 2^n-1} for |A| = 2,
    /// every basis state for |A| = 2^n.
    static ActionPartition projector_default(std::size_t n_qubits, std::size_t n_actions) {
        qpg::detail::require(n_qubits >= 1 && n_qubits <= qsim::kMaxQubits, "partition: bad qubit count");
        const std::size_t dim = std::size_t{1} << n_qubits;
        qpg::detail::require(n_actions >= 2 && n_actions <= dim, "partition: projector |A| must be in [2, 2^n]");
        std::vector<std::size_t> states(n_actions);
        for (std::size_t a = 0; a < n_actions; ++a) {
            states[a] = a * (dim - 1) / (n_actions - 1);
        }
        return projector(n_qubits, std::move(states));
    }
    static ActionPartition make(PartitionScheme scheme, std::size_t n_qubits, std::size_t n_actions,
                                std::optional<std::vector<std::size_t>> states = std::nullopt) {
        switch (scheme) {
        case PartitionScheme::Contiguous: return contiguous(n_qubits, n_actions);
        case PartitionScheme::ParityRecursive: return parity(n_qubits, n_actions);
        case PartitionScheme::ActionProjector:
            if (states) {
                qpg::detail::require(states->size() == n_actions, "partition: projector list length must equal |A|");
                return projector(n_qubits, std::move(*states));
            }
            return projector_default(n_qubits, n_actions);
        }
        throw ConfigError("partition: unknown scheme");
    }

    [[nodiscard]] PartitionScheme scheme() const noexcept { return scheme_; }
    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t n_actions() const noexcept { return n_actions_; }
    [[nodiscard]] const std::vector<std::size_t> &projector_states() const noexcept { return projector_states_; }
    [[nodiscard]] bool is_full() const noexcept { return scheme_ != PartitionScheme::ActionProjector; }

    /// Action of basis state v, or kDiscarded.
    [[nodiscard]] std::int32_t action_of(std::size_t v) const { return (*table_)[v]; }
    [[nodiscard]] std::span<const std::int32_t> table() const noexcept { return *table_; }

  private:
    ActionPartition(PartitionScheme scheme, std::size_t n_qubits, std::size_t n_actions,
                    std::vector<std::size_t> states)
        : scheme_{scheme}, n_qubits_{n_qubits}, n_actions_{n_actions}, projector_states_{std::move(states)} {
        qpg::detail::require(n_qubits_ >= 1 && n_qubits_ <= qsim::kMaxQubits, "partition: bad qubit count");
        const std::size_t dim = std::size_t{1} << n_qubits_;
        auto table = std::make_shared<std::vector<std::int32_t>>(dim, kDiscarded);
        if (scheme_ == PartitionScheme::ActionProjector) {
            qpg::detail::require(n_actions_ >= 1, "partition: projector partition needs at least one state");
            for (std::size_t a = 0; a < projector_states_.size(); ++a) {
                const std::size_t v = projector_states_[a];
                qpg::detail::require(v < dim, "partition: projector state out of range");
                qpg::detail::require((*table)[v] == kDiscarded, "partition: projector states must be distinct");
                (*table)[v] = static_cast<std::int32_t>(a);
            }
        } else {
            qpg::detail::require(is_power_of_two(n_actions_) && n_actions_ >= 2 && n_actions_ <= dim,
                                 "partition: |A| = " + std::to_string(n_actions_) +
                                     " must be a power of two in [2, 2^n]");
            const std::size_t m = log2_exact(n_actions_);
            for (std::size_t v = 0; v < dim; ++v) {
                const std::size_t a = scheme_ == PartitionScheme::Contiguous
                                          ? v >> (n_qubits_ - m)
                                          : detail::parity_recursive_action(v, n_qubits_, m);
                (*table)[v] = static_cast<std::int32_t>(a);
            }
        }
        table_ = std::move(table);
    }

    PartitionScheme scheme_;
    std::size_t n_qubits_;
    std::size_t n_actions_;
    std::vector<std::size_t> projector_states_;
    std::shared_ptr<const std::vector<std::int32_t>> table_;
};

/// Action owning basis state `bitstring`; only defined for full partitions.
inline std::size_t assign_action(std::size_t bitstring, const ActionPartition &partition) {
    if (partition.scheme() == PartitionScheme::ActionProjector) {
        throw ConfigError("assign_action: action-projector partitions have no total assignment");
    }
    qpg::detail::require(bitstring < (std::size_t{1} << partition.n_qubits()), "assign_action: bitstring out of range");
    const std::size_t m = log2_exact(partition.n_actions());
    if (partition.scheme() == PartitionScheme::Contiguous) {
        return bitstring >> (partition.n_qubits() - m);
    }
    return detail::parity_recursive_action(bitstring, partition.n_qubits(), m);
}

/// Number of qubits the action observables act on non-trivially.
inline std::size_t locality(const ActionPartition &partition) {
    if (partition.scheme() == PartitionScheme::Contiguous) {
        return log2_exact(partition.n_actions());
    }
    return partition.n_qubits();
}

struct ExactSource {
    bool operator==(const ExactSource &) const = default;
};
struct ShotSource {
    std::uint64_t count{0};
    bool operator==(const ShotSource &) const = default;
};
using PolicySource = std::variant<ExactSource, ShotSource>;

struct PolicyDistribution {
    std::vector<double> probs;
    PolicySource source{ExactSource{}};
    /// Minimum probability enforced in gradient denominators.
    std::optional<double> clip_floor{};

    [[nodiscard]] std::size_t n_actions() const noexcept { return probs.size(); }
};

/**
 * Unnormalized per-action projector expectations <P_a> from basis
 * probabilities (or empirical frequencies).
 */
inline std::vector<double> action_masses(std::span<const double> basis_probs, const ActionPartition &partition) {
    qpg::detail::require(basis_probs.size() == (std::size_t{1} << partition.n_qubits()),
                         "born_policy: state and partition qubit counts differ");
    std::vector<double> masses(partition.n_actions(), 0.0);
    const auto table = partition.table();
    for (std::size_t v = 0; v < basis_probs.size(); ++v) {
        const auto a = table[v];
        if (a != ActionPartition::kDiscarded) {
            masses[static_cast<std::size_t>(a)] += basis_probs[v];
        }
    }
    return masses;
}

/// Normalizes action-projector masses; full partitions pass through unchanged.
inline std::vector<double> masses_to_policy(std::vector<double> masses, const ActionPartition &partition) {
    if (partition.is_full()) {
        return masses;
    }
    double total = 0.0;
    for (double m : masses) {
        total += m;
    }
    if (!(total > 0.0)) {
        throw NumericalError("born_policy: all projector states have zero probability; normalization undefined");
    }
    for (double &m : masses) {
        m /= total;
    }
    return masses;
}

inline PolicyDistribution born_policy(const qsim::StateVector &psi, const ActionPartition &partition) {
    qpg::detail::require(psi.n_qubits() == partition.n_qubits(), "born_policy: state and partition qubit counts differ");
    const auto p = qsim::basis_probabilities(psi);
    return PolicyDistribution{masses_to_policy(action_masses(p, partition), partition), ExactSource{}, std::nullopt};
}

/// Empirical basis frequencies of a histogram, as a dense 2^n vector.
inline std::vector<double> histogram_frequencies(const qsim::Histogram &histogram, std::size_t n_qubits) {
    const std::uint64_t total = qsim::total_shots(histogram);
    qpg::detail::require(total >= 1, "born_policy_from_shots: empty histogram");
    std::vector<double> f(std::size_t{1} << n_qubits, 0.0);
    for (const auto &[v, c] : histogram) {
        qpg::detail::require(v < f.size(), "born_policy_from_shots: basis index out of range");
        f[v] = static_cast<double>(c) / static_cast<double>(total);
    }
    return f;
}

inline PolicyDistribution born_policy_from_shots(const qsim::Histogram &histogram, const ActionPartition &partition) {
    const auto freq = histogram_frequencies(histogram, partition.n_qubits());
    auto masses = action_masses(freq, partition);
    if (!partition.is_full()) {
        double total = 0.0;
        for (double m : masses) {
            total += m;
        }
        if (total == 0.0) {
            throw NumericalError("born_policy_from_shots: no shot landed on a projector state");
        }
    }
    return PolicyDistribution{masses_to_policy(std::move(masses), partition), ShotSource{qsim::total_shots(histogram)},
                              std::nullopt};
}

/// Attaches a clipping floor. Probabilities are left untouched.
inline PolicyDistribution clip(PolicyDistribution dist, double floor) {
    qpg::detail::require(!dist.probs.empty(), "clip: empty distribution");
    const double uniform = 1.0 / static_cast<double>(dist.n_actions());
    qpg::detail::require(floor > 0.0, "clip: floor must be positive");
    qpg::detail::require(floor < uniform, "clip: floor must be below 1/|A| = " + std::to_string(uniform));
    dist.clip_floor = floor;
    return dist;
}

/// Numerically stable softmax of beta * expectations.
inline PolicyDistribution softmax_policy(std::span<const double> expectations, double beta) {
    qpg::detail::require(!expectations.empty(), "softmax_policy: no actions");
    qpg::detail::require(std::isfinite(beta), "softmax_policy: beta must be finite");
    double top = -std::numeric_limits<double>::infinity();
    for (double e : expectations) {
        qpg::detail::require(std::isfinite(e), "softmax_policy: expectations must be finite");
        top = std::max(top, beta * e);
    }
    std::vector<double> p(expectations.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(beta * expectations[i] - top);
        total += p[i];
    }
    for (double &x : p) {
        x /= total;
    }
    return PolicyDistribution{std::move(p), ExactSource{}, std::nullopt};
}

/// Weighted sum of Pauli-Z strings; each term lists the qubits carrying a Z.
struct ZObservable {
    struct Term {
        double coeff{1.0};
        std::vector<std::size_t> qubits;
    };
    std::vector<Term> terms;

    /// sum_i Z_i
    static ZObservable local_sum(std::size_t n, double sign = 1.0) {
        ZObservable o;
        for (std::size_t q = 0; q < n; ++q) {
            o.terms.push_back({sign, {q}});
        }
        return o;
    }
    /// Z tensor ... tensor Z on the whole register
    static ZObservable global(std::size_t n, double sign = 1.0) {
        ZObservable o;
        std::vector<std::size_t> all(n);
        for (std::size_t q = 0; q < n; ++q) {
            all[q] = q;
        }
        o.terms.push_back({sign, std::move(all)});
        return o;
    }
};

inline double expectation(const qsim::StateVector &psi, const ZObservable &obs) {
    const auto p = qsim::basis_probabilities(psi);
    const std::size_t n = psi.n_qubits();
    double total = 0.0;
    for (const auto &term : obs.terms) {
        std::size_t mask = 0;
        for (auto q : term.qubits) {
            qpg::detail::require(q < n, "expectation: qubit out of range");
            mask |= qsim::qubit_mask(n, q);
        }
        double acc = 0.0;
        for (std::size_t v = 0; v < p.size(); ++v) {
            acc += (std::popcount(v & mask) % 2 == 0) ? p[v] : -p[v];
        }
        total += term.coeff * acc;
    }
    return total;
}

struct SoftmaxPolicySpec {
    double beta{1.0};
    std::vector<ZObservable> observables;

    void validate() const {
        qpg::detail::require(std::isfinite(beta) && beta > 0.0, "softmax: beta must be finite and positive");
        qpg::detail::require(!observables.empty(), "softmax: at least one observable is required");
    }
};

inline PolicyDistribution softmax_policy(const qsim::StateVector &psi, const SoftmaxPolicySpec &spec) {
    spec.validate();
    std::vector<double> e;
    e.reserve(spec.observables.size());
    for (const auto &o : spec.observables) {
        e.push_back(expectation(psi, o));
    }
    return softmax_policy(e, spec.beta);
}

/// Inverse-CDF draw of an action from a distribution.
inline std::size_t sample_action(std::span<const double> probs, CounterRng &rng) {
    double total = 0.0;
    for (double p : probs) {
        total += p;
    }
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t a = 0; a < probs.size(); ++a) {
        if (probs[a] > 0.0) {
            last_positive = a;
            acc += probs[a];
            if (u < acc) {
                return a;
            }
        }
    }
    return last_positive;
}

} // namespace qpg::policy
