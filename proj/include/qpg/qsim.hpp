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
 * Dense statevector simulation of parameterized circuits.
 *
 * Basis index convention: big-endian, qubit 0 is the most significant bit of
 * the basis index. Rotations follow R_P(t) = exp(-i t P / 2).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace qpg::qsim {

using Complex = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 24;

enum class GateKind { I, RX, RY, RZ, CZ, CNOT };

[[nodiscard]] constexpr bool is_rotation(GateKind k) noexcept {
    return k == GateKind::I || k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

[[nodiscard]] inline std::string to_string(GateKind k) {
    switch (k) {
    case GateKind::I: return "I";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
    }
    return "?";
}

/// Bit mask of qubit `q` in an n-qubit basis index.
[[nodiscard]] constexpr std::size_t qubit_mask(std::size_t n_qubits, std::size_t q) noexcept {
    return std::size_t{1} << (n_qubits - 1 - q);
}

/// Value of qubit `q` in basis index `v`.
[[nodiscard]] constexpr unsigned bit_of(std::size_t v, std::size_t n_qubits, std::size_t q) noexcept {
    return (v & qubit_mask(n_qubits, q)) != 0 ? 1U : 0U;
}

class StateVector {
  public:
    /// |0...0>
    explicit StateVector(std::size_t n_qubits) : n_qubits_{n_qubits} {
        detail::require(n_qubits >= 1 && n_qubits <= kMaxQubits,
                        "StateVector: n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
        amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        amps_[0] = 1.0;
    }

    /// Wraps explicit amplitudes; they must have length 2^n and unit norm (1e-12).
    StateVector(std::size_t n_qubits, std::vector<Complex> amplitudes)
        : n_qubits_{n_qubits}, amps_{std::move(amplitudes)} {
        detail::require(n_qubits >= 1 && n_qubits <= kMaxQubits, "StateVector: bad qubit count");
        detail::require(amps_.size() == (std::size_t{1} << n_qubits),
                        "StateVector: amplitude count must be 2^n");
        detail::require(std::abs(norm() - 1.0) < 1e-12, "StateVector: amplitudes must have unit norm");
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amps_; }
    [[nodiscard]] const Complex &operator[](std::size_t i) const { return amps_[i]; }

    [[nodiscard]] double norm() const noexcept {
        double acc = 0.0;
        for (const auto &a : amps_) {
            acc += std::norm(a);
        }
        return std::sqrt(acc);
    }

    void apply_rotation(GateKind kind, std::size_t q, double angle) {
        const std::size_t mask = qubit_mask(n_qubits_, q);
        const double c = std::cos(0.5 * angle);
        const double s = std::sin(0.5 * angle);
        const std::size_t d = amps_.size();
        switch (kind) {
        case GateKind::I:
            return;
        case GateKind::RY:
            for (std::size_t base = 0; base < d; base += 2 * mask) {
                for (std::size_t j = base; j < base + mask; ++j) {
                    const Complex a0 = amps_[j];
                    const Complex a1 = amps_[j + mask];
                    amps_[j] = c * a0 - s * a1;
                    amps_[j + mask] = s * a0 + c * a1;
                }
            }
            return;
        case GateKind::RX: {
            const Complex mis{0.0, -s};
            for (std::size_t base = 0; base < d; base += 2 * mask) {
                for (std::size_t j = base; j < base + mask; ++j) {
                    const Complex a0 = amps_[j];
                    const Complex a1 = amps_[j + mask];
                    amps_[j] = c * a0 + mis * a1;
                    amps_[j + mask] = mis * a0 + c * a1;
                }
            }
            return;
        }
        case GateKind::RZ: {
            const Complex p0{c, -s};
            const Complex p1{c, s};
            for (std::size_t base = 0; base < d; base += 2 * mask) {
                for (std::size_t j = base; j < base + mask; ++j) {
                    amps_[j] *= p0;
                    amps_[j + mask] *= p1;
                }
            }
            return;
        }
        default:
            throw ConfigError("apply_rotation: not a rotation gate");
        }
    }

    void apply_cz(std::size_t control, std::size_t target) {
        const std::size_t both = qubit_mask(n_qubits_, control) | qubit_mask(n_qubits_, target);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & both) == both) {
                amps_[i] = -amps_[i];
            }
        }
    }

    void apply_cnot(std::size_t control, std::size_t target) {
        const std::size_t cm = qubit_mask(n_qubits_, control);
        const std::size_t tm = qubit_mask(n_qubits_, target);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cm) != 0 && (i & tm) == 0) {
                std::swap(amps_[i], amps_[i | tm]);
            }
        }
    }

  private:
    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

/**
 * One gate of a circuit body. Rotations (including I, which carries a global
 * phase generator) hold exactly one of `param_slot` or `fixed_angle`;
 * two-qubit gates hold `control` and neither angle field.
 */
struct Gate {
    GateKind kind{GateKind::I};
    std::size_t target{0};
    std::optional<std::size_t> control{};
    std::optional<std::size_t> param_slot{};
    std::optional<double> fixed_angle{};

    static Gate rotation(GateKind k, std::size_t q, std::size_t slot) {
        return Gate{k, q, std::nullopt, slot, std::nullopt};
    }
    static Gate fixed(GateKind k, std::size_t q, double angle) {
        return Gate{k, q, std::nullopt, std::nullopt, angle};
    }
    static Gate cz(std::size_t a, std::size_t b) { return Gate{GateKind::CZ, b, a, {}, {}}; }
    static Gate cnot(std::size_t c, std::size_t t) { return Gate{GateKind::CNOT, t, c, {}, {}}; }
};

/// Angle-encoding rotation on `qubit`, fed by feature s[qubit].
struct EncodingGate {
    GateKind kind{GateKind::RY};
    std::size_t qubit{0};
};

class ParameterizedCircuit {
  public:
    ParameterizedCircuit(std::size_t n_qubits, std::vector<EncodingGate> encoding, std::vector<Gate> body,
                         std::vector<std::size_t> layer_first_slot = {})
        : n_qubits_{n_qubits}, encoding_{std::move(encoding)}, body_{std::move(body)},
          layer_first_slot_{std::move(layer_first_slot)} {
        detail::require(n_qubits_ >= 1 && n_qubits_ <= kMaxQubits, "circuit: bad qubit count");
        for (const auto &e : encoding_) {
            detail::require(e.kind == GateKind::RX || e.kind == GateKind::RY || e.kind == GateKind::RZ,
                            "circuit: encoding gates must be RX/RY/RZ");
            detail::require(e.qubit < n_qubits_, "circuit: encoding qubit out of range");
        }
        std::size_t max_slot = 0;
        bool any_slot = false;
        for (const auto &g : body_) {
            detail::require(g.target < n_qubits_, "circuit: gate target out of range");
            if (is_rotation(g.kind)) {
                detail::require(g.param_slot.has_value() != g.fixed_angle.has_value(),
                                "circuit: rotation needs exactly one of param_slot or fixed_angle");
                detail::require(!g.control.has_value(), "circuit: rotation cannot have a control");
                if (g.param_slot) {
                    any_slot = true;
                    max_slot = std::max(max_slot, *g.param_slot);
                }
            } else {
                detail::require(g.control.has_value(), "circuit: two-qubit gate needs a control");
                detail::require(*g.control < n_qubits_, "circuit: control out of range");
                detail::require(*g.control != g.target, "circuit: control equals target");
                detail::require(!g.param_slot && !g.fixed_angle, "circuit: two-qubit gates are not parameterized");
            }
        }
        n_params_ = any_slot ? max_slot + 1 : 0;
        sharing_.assign(n_params_, {});
        for (std::size_t i = 0; i < body_.size(); ++i) {
            if (body_[i].param_slot) {
                sharing_[*body_[i].param_slot].push_back(i);
            }
        }
        for (std::size_t slot = 0; slot < n_params_; ++slot) {
            detail::require(!sharing_[slot].empty(),
                            "circuit: param slot " + std::to_string(slot) + " is not used by any gate");
        }
        for (auto f : layer_first_slot_) {
            detail::require(f < std::max<std::size_t>(n_params_, 1), "circuit: layer slot offset out of range");
        }
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t n_params() const noexcept { return n_params_; }
    [[nodiscard]] const std::vector<EncodingGate> &encoding() const noexcept { return encoding_; }
    [[nodiscard]] const std::vector<Gate> &body() const noexcept { return body_; }
    /// Body gate indices bound to each slot.
    [[nodiscard]] const std::vector<std::vector<std::size_t>> &sharing_map() const noexcept { return sharing_; }
    /// First parameter slot of each body layer, when the builder recorded layers.
    [[nodiscard]] const std::vector<std::size_t> &layer_first_slot() const noexcept { return layer_first_slot_; }

  private:
    std::size_t n_qubits_;
    std::vector<EncodingGate> encoding_;
    std::vector<Gate> body_;
    std::vector<std::size_t> layer_first_slot_;
    std::size_t n_params_{0};
    std::vector<std::vector<std::size_t>> sharing_;
};

enum class AnsatzKind { SimplifiedTwoDesign, StronglyEntanglingLayers, RandomPauliCZ, ProductStateShared, BanditLayer };

[[nodiscard]] inline std::string to_string(AnsatzKind k) {
    switch (k) {
    case AnsatzKind::SimplifiedTwoDesign: return "simplified_two_design";
    case AnsatzKind::StronglyEntanglingLayers: return "strongly_entangling";
    case AnsatzKind::RandomPauliCZ: return "random_pauli_cz";
    case AnsatzKind::ProductStateShared: return "product_state_shared";
    case AnsatzKind::BanditLayer: return "bandit_layer";
    }
    return "?";
}

[[nodiscard]] inline AnsatzKind ansatz_from_string(const std::string &name) {
    for (auto k : {AnsatzKind::SimplifiedTwoDesign, AnsatzKind::StronglyEntanglingLayers, AnsatzKind::RandomPauliCZ,
                   AnsatzKind::ProductStateShared, AnsatzKind::BanditLayer}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown ansatz '" + name + "'");
}

struct AnsatzSpec {
    AnsatzKind kind{AnsatzKind::SimplifiedTwoDesign};
    std::size_t n_qubits{1};
    std::size_t depth{1};
    std::optional<std::uint64_t> seed{};
};

/// Shifts one body gate's angle by `delta` on top of its bound value.
struct GateShift {
    std::size_t gate_index;
    double delta;
};

namespace detail {

inline std::vector<EncodingGate> ry_encoding(std::size_t n) {
    std::vector<EncodingGate> enc;
    enc.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
        enc.push_back({GateKind::RY, q});
    }
    return enc;
}

} // namespace detail

/**
 * Builds one of the benchmark ansatz families. Every family starts with an RY
 * angle-encoding layer (one feature per qubit).
 *
 * - SimplifiedTwoDesign: per layer, CZ + RY,RY on pairs (0,1),(2,3),... then on
 *   pairs (1,2),(3,4),...
 * - StronglyEntanglingLayers: per layer RZ RY RZ on each qubit, then CNOT(i, i+r mod n)
 *   with r = (layer mod (n-1)) + 1.
 * - RandomPauliCZ: per layer one of {RX,RY,RZ} per qubit, then each adjacent CZ
 *   with probability 1/2.
 * - ProductStateShared: per layer one of {I,RX,RY,RZ} per qubit, all bound to the
 *   layer's single slot.
 * - BanditLayer: per layer RZ then RY on each qubit, then CZ on all pairs.
 */
inline ParameterizedCircuit build_ansatz(const AnsatzSpec &spec) {
    const std::size_t n = spec.n_qubits;
    qpg::detail::require(n >= 1 && n <= kMaxQubits, "build_ansatz: bad qubit count");
    qpg::detail::require(spec.depth >= 1, "build_ansatz: depth must be >= 1");
    const bool random_kind =
        spec.kind == AnsatzKind::RandomPauliCZ || spec.kind == AnsatzKind::ProductStateShared;
    qpg::detail::require(!random_kind || spec.seed.has_value(), "build_ansatz: random ansatz kinds require a seed");

    std::vector<Gate> body;
    std::vector<std::size_t> layer_first;
    std::size_t slot = 0;
    switch (spec.kind) {
    case AnsatzKind::SimplifiedTwoDesign:
        for (std::size_t layer = 0; layer < spec.depth; ++layer) {
            layer_first.push_back(slot);
            for (std::size_t offset : {std::size_t{0}, std::size_t{1}}) {
                for (std::size_t q = offset; q + 1 < n; q += 2) {
                    body.push_back(Gate::cz(q, q + 1));
                    body.push_back(Gate::rotation(GateKind::RY, q, slot++));
                    body.push_back(Gate::rotation(GateKind::RY, q + 1, slot++));
                }
            }
        }
        if (n == 1) {
            // No pairs: the family degenerates to an encoding-only circuit.
            layer_first.clear();
        }
        break;
    case AnsatzKind::StronglyEntanglingLayers:
        for (std::size_t layer = 0; layer < spec.depth; ++layer) {
            layer_first.push_back(slot);
            for (std::size_t q = 0; q < n; ++q) {
                body.push_back(Gate::rotation(GateKind::RZ, q, slot++));
                body.push_back(Gate::rotation(GateKind::RY, q, slot++));
                body.push_back(Gate::rotation(GateKind::RZ, q, slot++));
            }
            if (n > 1) {
                const std::size_t r = (layer % (n - 1)) + 1;
                for (std::size_t q = 0; q < n; ++q) {
                    body.push_back(Gate::cnot(q, (q + r) % n));
                }
            }
        }
        break;
    case AnsatzKind::RandomPauliCZ: {
        CounterRng rng{*spec.seed};
        constexpr GateKind kinds[] = {GateKind::RX, GateKind::RY, GateKind::RZ};
        for (std::size_t layer = 0; layer < spec.depth; ++layer) {
            layer_first.push_back(slot);
            for (std::size_t q = 0; q < n; ++q) {
                body.push_back(Gate::rotation(kinds[rng.below(3)], q, slot++));
            }
            for (std::size_t q = 0; q + 1 < n; ++q) {
                if (rng.bernoulli(0.5)) {
                    body.push_back(Gate::cz(q, q + 1));
                }
            }
        }
        break;
    }
    case AnsatzKind::ProductStateShared: {
        CounterRng rng{*spec.seed};
        constexpr GateKind kinds[] = {GateKind::I, GateKind::RX, GateKind::RY, GateKind::RZ};
        for (std::size_t layer = 0; layer < spec.depth; ++layer) {
            layer_first.push_back(layer);
            for (std::size_t q = 0; q < n; ++q) {
                body.push_back(Gate::rotation(kinds[rng.below(4)], q, layer));
            }
        }
        break;
    }
    case AnsatzKind::BanditLayer:
        for (std::size_t layer = 0; layer < spec.depth; ++layer) {
            layer_first.push_back(slot);
            for (std::size_t q = 0; q < n; ++q) {
                body.push_back(Gate::rotation(GateKind::RZ, q, slot++));
                body.push_back(Gate::rotation(GateKind::RY, q, slot++));
            }
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = a + 1; b < n; ++b) {
                    body.push_back(Gate::cz(a, b));
                }
            }
        }
        break;
    default:
        throw ConfigError("build_ansatz: unsupported ansatz kind");
    }
    return ParameterizedCircuit{n, detail::ry_encoding(n), std::move(body), std::move(layer_first)};
}

namespace detail {

inline void check_inputs(const ParameterizedCircuit &circuit, std::span<const double> s,
                         std::span<const double> theta) {
    qpg::detail::require(s.size() == circuit.n_qubits(),
                         "run: state vector s has " + std::to_string(s.size()) + " features, expected " +
                             std::to_string(circuit.n_qubits()));
    qpg::detail::require(theta.size() == circuit.n_params(),
                         "run: theta has " + std::to_string(theta.size()) + " entries, expected " +
                             std::to_string(circuit.n_params()));
}

inline void apply_gate(StateVector &psi, const Gate &g, double angle) {
    switch (g.kind) {
    case GateKind::CZ:
        psi.apply_cz(*g.control, g.target);
        break;
    case GateKind::CNOT:
        psi.apply_cnot(*g.control, g.target);
        break;
    default:
        psi.apply_rotation(g.kind, g.target, angle);
        break;
    }
}

} // namespace detail

/// Prepares |psi(s, theta)>, optionally with a single gate's angle shifted.
inline StateVector run(const ParameterizedCircuit &circuit, std::span<const double> s,
                       std::span<const double> theta, std::optional<GateShift> shift = std::nullopt) {
    detail::check_inputs(circuit, s, theta);
    StateVector psi{circuit.n_qubits()};
    for (const auto &e : circuit.encoding()) {
        psi.apply_rotation(e.kind, e.qubit, s[e.qubit]);
    }
    const auto &body = circuit.body();
    for (std::size_t i = 0; i < body.size(); ++i) {
        const Gate &g = body[i];
        double angle = 0.0;
        if (g.param_slot) {
            angle = theta[*g.param_slot];
        } else if (g.fixed_angle) {
            angle = *g.fixed_angle;
        }
        if (shift && shift->gate_index == i) {
            angle += shift->delta;
        }
        detail::apply_gate(psi, g, angle);
    }
    return psi;
}

/// Born-rule probabilities |amplitude_v|^2.
inline std::vector<double> basis_probabilities(const StateVector &psi) {
    std::vector<double> p(psi.dim());
    const auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::norm(amps[i]);
    }
    return p;
}

using Histogram = std::map<std::size_t, std::uint64_t>;

/// Total number of shots in a histogram.
inline std::uint64_t total_shots(const Histogram &h) {
    std::uint64_t t = 0;
    for (const auto &[_, c] : h) {
        t += c;
    }
    return t;
}

/// Multinomial draw of `shots` measurements from explicit basis probabilities.
inline Histogram sample_from_probabilities(std::span<const double> probs, std::uint64_t shots, std::uint64_t seed) {
    qpg::detail::require(shots >= 1, "sample_shots: shots must be >= 1");
    std::vector<double> cdf(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        cdf[i] = acc;
    }
    CounterRng rng{seed};
    Histogram h;
    for (std::uint64_t k = 0; k < shots; ++k) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        auto idx = static_cast<std::size_t>(it - cdf.begin());
        if (idx >= cdf.size()) {
            idx = cdf.size() - 1;
        }
        ++h[idx];
    }
    return h;
}

inline Histogram sample_shots(const StateVector &psi, std::uint64_t shots, std::uint64_t seed) {
    const auto p = basis_probabilities(psi);
    return sample_from_probabilities(p, shots, seed);
}

} // namespace qpg::qsim
