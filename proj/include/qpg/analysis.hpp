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
 * Trainability diagnostics: ensemble variance of log-policy partial
 * derivatives, Fisher information spectra (cyclic Jacobi) and log-space
 * scaling fits.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
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

namespace qpg::analysis {

// ---------------------------------------------------------------------------
// Sample statistics
// ---------------------------------------------------------------------------

struct SampleStats {
    double mean{0.0};
    /// Unbiased sample variance.
    double variance{0.0};
    /// Standard error of the sample variance.
    double variance_stderr{0.0};
    /// Standard error of the mean.
    double mean_stderr{0.0};
    std::size_t count{0};
};

inline SampleStats sample_stats(std::span<const double> xs) {
    SampleStats st;
    st.count = xs.size();
    if (xs.empty()) {
        return st;
    }
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    st.mean = mean;
    if (xs.size() < 2) {
        return st;
    }
    double m2 = 0.0;
    double m4 = 0.0;
    for (double x : xs) {
        const double d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    const auto n = static_cast<double>(xs.size());
    st.variance = m2 / (n - 1.0);
    st.mean_stderr = std::sqrt(st.variance / n);
    const double mu2 = m2 / n;
    const double mu4 = m4 / n;
    st.variance_stderr = std::sqrt(std::max(0.0, (mu4 - (n - 3.0) / (n - 1.0) * mu2 * mu2) / n));
    return st;
}

// ---------------------------------------------------------------------------
// Variance scans
// ---------------------------------------------------------------------------

struct DepthRule {
    enum class Kind { Fixed, NSquared, Log2N } kind{Kind::NSquared};
    std::size_t value{1};
    /// Upper bound applied to NSquared and Log2N; 0 means uncapped.
    std::size_t cap{20};

    [[nodiscard]] std::size_t depth_for(std::size_t n) const {
        std::size_t d = value;
        if (kind == Kind::NSquared) {
            d = n * n;
        } else if (kind == Kind::Log2N) {
            d = 0;
            while ((std::size_t{1} << d) < n) {
                ++d;
            }
        }
        if (kind != Kind::Fixed && cap > 0) {
            d = std::min(d, cap);
        }
        return std::max<std::size_t>(d, 1);
    }
};

struct ActionRule {
    /// Powers: {2^i : 1 <= i <= n}; EqualsN: {n}; TwoToN: {2^n}; List: explicit.
    enum class Kind { Powers, EqualsN, TwoToN, List } kind{Kind::Powers};
    std::vector<std::size_t> list{};

    [[nodiscard]] std::vector<std::size_t> actions_for(std::size_t n) const {
        switch (kind) {
        case Kind::Powers: {
            std::vector<std::size_t> a;
            for (std::size_t i = 1; i <= n; ++i) {
                a.push_back(std::size_t{1} << i);
            }
            return a;
        }
        case Kind::EqualsN: return {n};
        case Kind::TwoToN: return {std::size_t{1} << n};
        case Kind::List: return list;
        }
        return {};
    }
};

struct ClipRule {
    enum class Kind { None, InvNSquared, Fixed } kind{Kind::None};
    double value{0.0};

    [[nodiscard]] std::optional<double> floor_for(std::size_t n) const {
        switch (kind) {
        case Kind::None: return std::nullopt;
        case Kind::InvNSquared: return 1.0 / static_cast<double>(n * n);
        case Kind::Fixed: return value;
        }
        return std::nullopt;
    }
};

struct ShotRule {
    /// Exact probabilities, a fixed count, or ceil(coeff * n^2).
    enum class Kind { Exact, Fixed, PerNSquared } kind{Kind::Exact};
    double value{0.0};

    [[nodiscard]] std::uint64_t shots_for(std::size_t n) const {
        switch (kind) {
        case Kind::Exact: return 0;
        case Kind::Fixed: return static_cast<std::uint64_t>(value);
        case Kind::PerNSquared: return static_cast<std::uint64_t>(std::ceil(value * static_cast<double>(n * n)));
        }
        return 0;
    }
};

struct VarianceScanConfig {
    qsim::AnsatzKind ansatz{qsim::AnsatzKind::SimplifiedTwoDesign};
    DepthRule depth{};
    std::uint64_t ansatz_seed{0};
    std::vector<std::size_t> n_list{};
    ActionRule actions{};
    policy::PartitionScheme scheme{policy::PartitionScheme::ParityRecursive};
    ShotRule shots{};
    ClipRule clip{};
    std::size_t ensemble{2000};
    /// Defaults to the first slot of the middle body layer.
    std::optional<std::size_t> probe_slot{};
    std::uint64_t seed{0};
    double shift_alpha{std::numbers::pi / 2.0};

    void validate() const {
        qpg::detail::require(ensemble >= 2, "variance scan: ensemble_size must be >= 2");
        qpg::detail::require(!n_list.empty(), "variance scan: n_list is empty");
        for (std::size_t i = 0; i < n_list.size(); ++i) {
            qpg::detail::require(n_list[i] >= 1 && n_list[i] <= qsim::kMaxQubits, "variance scan: qubit count out of range");
            qpg::detail::require(i == 0 || n_list[i] > n_list[i - 1], "variance scan: n_list must be ascending");
        }
        if (actions.kind == ActionRule::Kind::List) {
            qpg::detail::require(!actions.list.empty(), "variance scan: explicit action list is empty");
        }
        if (clip.kind == ClipRule::Kind::Fixed) {
            qpg::detail::require(clip.value > 0.0 && clip.value < 1.0, "variance scan: clip floor must lie in (0, 1)");
        }
        if (shots.kind != ShotRule::Kind::Exact) {
            qpg::detail::require(shots.value >= 1.0, "variance scan: shot count must be >= 1");
        }
    }
};

/// The probed slot: explicit, or the first slot of the middle body layer.
inline std::size_t probe_slot_for(const qsim::ParameterizedCircuit &circuit, std::optional<std::size_t> requested) {
    qpg::detail::require(circuit.n_params() > 0, "variance scan: circuit has no trainable parameters");
    if (requested) {
        qpg::detail::require(*requested < circuit.n_params(), "variance scan: probe slot out of range");
        return *requested;
    }
    const auto &layers = circuit.layer_first_slot();
    if (layers.empty()) {
        return 0;
    }
    return layers[layers.size() / 2];
}

struct VarianceEstimate {
    double variance{0.0};
    double stderr_{0.0};
    double mean{0.0};
    std::size_t ensemble{0};
};

/**
 * Sample variance of ∂_{θ_l} log π(a|s,θ) over an ensemble of draws with
 * s, θ ~ U(-π, π) and a sampled from the (exact or shot-estimated) policy.
 * Draw i of a given n uses the same (s, θ, action stream) for every |A| and
 * scheme, so cells at equal n are directly comparable.
 */
inline VarianceEstimate log_grad_variance(const VarianceScanConfig &config, std::size_t n, std::size_t n_actions,
                                          std::size_t threads = 1) {
    config.validate();
    const auto circuit = qsim::build_ansatz({config.ansatz, n, config.depth.depth_for(n), config.ansatz_seed});
    const auto partition = policy::ActionPartition::make(config.scheme, n, n_actions);
    const std::size_t slot = probe_slot_for(circuit, config.probe_slot);
    const std::uint64_t shots = config.shots.shots_for(n);
    const auto floor = config.clip.floor_for(n);
    const grad::ShiftRule rule{config.shift_alpha};
    const CounterRng cell_rng = CounterRng{config.seed}.split(n);
    const std::size_t slots[] = {slot};

    std::vector<double> samples(config.ensemble);
    parallel_for(config.ensemble, threads, [&](std::size_t i) {
        CounterRng rng = cell_rng.split(i);
        std::vector<double> s(n);
        std::vector<double> theta(circuit.n_params());
        for (auto &x : s) {
            x = rng.angle();
        }
        for (auto &x : theta) {
            x = rng.angle();
        }
        grad::Estimator est = grad::ExactEstimator{};
        if (shots > 0) {
            est = grad::ShotEstimator{shots, rng.derive_seed(0)};
        }
        const auto sens = grad::policy_sensitivity(circuit, s, theta, partition, slots, rule, est);
        CounterRng action_rng = rng.split(1);
        const std::size_t a = policy::sample_action(sens.policy, action_rng);
        samples[i] = grad::log_derivative(sens.rows[0][a], sens.policy[a], floor);
    });
    for (double x : samples) {
        if (!std::isfinite(x)) {
            throw NumericalError("log_grad_variance: non-finite log-policy derivative");
        }
    }
    const auto st = sample_stats(samples);
    return VarianceEstimate{st.variance, st.variance_stderr, st.mean, st.count};
}

// ---------------------------------------------------------------------------
// Symmetric matrices and the cyclic Jacobi eigen-solver
// ---------------------------------------------------------------------------

/// Dense row-major square matrix.
class Matrix {
  public:
    Matrix() = default;
    explicit Matrix(std::size_t k, double fill = 0.0) : k_{k}, data_(k * k, fill) {}

    static Matrix identity(std::size_t k) {
        Matrix m{k};
        for (std::size_t i = 0; i < k; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    [[nodiscard]] std::size_t size() const noexcept { return k_; }
    double &operator()(std::size_t i, std::size_t j) { return data_[i * k_ + j]; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return data_[i * k_ + j]; }

    [[nodiscard]] double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < k_; ++i) {
            t += (*this)(i, i);
        }
        return t;
    }

    [[nodiscard]] double frobenius() const {
        double acc = 0.0;
        for (double x : data_) {
            acc += x * x;
        }
        return std::sqrt(acc);
    }

    [[nodiscard]] double off_diagonal_norm() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < k_; ++i) {
            for (std::size_t j = 0; j < k_; ++j) {
                if (i != j) {
                    acc += (*this)(i, j) * (*this)(i, j);
                }
            }
        }
        return std::sqrt(acc);
    }

    [[nodiscard]] bool is_symmetric(double tol) const {
        for (std::size_t i = 0; i < k_; ++i) {
            for (std::size_t j = i + 1; j < k_; ++j) {
                const double a = (*this)(i, j);
                const double b = (*this)(j, i);
                if (std::abs(a - b) > tol * std::max({1.0, std::abs(a), std::abs(b)})) {
                    return false;
                }
            }
        }
        return true;
    }

  private:
    std::size_t k_{0};
    std::vector<double> data_;
};

struct EigenDecomposition {
    /// Descending.
    std::vector<double> values;
    /// Column j is the eigenvector of values[j].
    Matrix vectors;
    std::size_t sweeps{0};
    double final_off_diagonal{0.0};
};

struct JacobiOptions {
    /// Convergence: off-diagonal Frobenius norm below tol * max(1, ||A||_F).
    double tolerance{1e-10};
    std::size_t max_sweeps{100};
};

/**
 * Cyclic Jacobi diagonalization of a symmetric matrix. Each sweep visits
 * every (p, q) pair above the diagonal once and zeroes it with a plane
 * rotation.
 */
inline EigenDecomposition jacobi_eigen(const Matrix &input, const JacobiOptions &opts = {}) {
    qpg::detail::require(input.is_symmetric(1e-10), "eigen_spectrum: matrix is not symmetric");
    const std::size_t k = input.size();
    Matrix a = input;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double avg = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = avg;
            a(j, i) = avg;
        }
    }
    Matrix v = Matrix::identity(k);
    const double target = opts.tolerance * std::max(1.0, input.frobenius());

    EigenDecomposition out;
    double off = a.off_diagonal_norm();
    while (off >= target && out.sweeps < opts.max_sweeps) {
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t r = 0; r < k; ++r) {
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < k; ++r) {
                    const double apr = a(p, r);
                    const double aqr = a(q, r);
                    a(p, r) = c * apr - s * aqr;
                    a(q, r) = s * apr + c * aqr;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < k; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
        ++out.sweeps;
        off = a.off_diagonal_norm();
    }
    if (off >= target) {
        throw NumericalError("eigen_spectrum: Jacobi did not converge within max_sweeps");
    }
    out.final_off_diagonal = off;

    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    out.values.resize(k);
    out.vectors = Matrix{k};
    for (std::size_t j = 0; j < k; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t r = 0; r < k; ++r) {
            out.vectors(r, j) = v(r, order[j]);
        }
    }
    return out;
}

/// Descending eigenvalues of a symmetric matrix.
inline std::vector<double> eigen_spectrum(const Matrix &m) { return jacobi_eigen(m).values; }

/// Fraction of eigenvalues with |λ| < threshold.
inline double concentration_fraction(std::span<const double> eigenvalues, double threshold = 1e-3) {
    qpg::detail::require(threshold > 0.0, "concentration_fraction: threshold must be positive");
    if (eigenvalues.empty()) {
        return 0.0;
    }
    std::size_t below = 0;
    for (double l : eigenvalues) {
        if (std::abs(l) < threshold) {
            ++below;
        }
    }
    return static_cast<double>(below) / static_cast<double>(eigenvalues.size());
}

// ---------------------------------------------------------------------------
// Fisher information
// ---------------------------------------------------------------------------

struct ActionSampling {
    /// Exact: E_a computed by summing over actions weighted by π(a|s,θ).
    /// Sampled: `per_state` actions drawn from π(·|s,θ) per state sample.
    enum class Kind { Exact, Sampled } kind{Kind::Exact};
    std::size_t per_state{1};
};

struct FIMResult {
    Matrix matrix;
    std::vector<double> eigenvalues;
    std::size_t samples_used{0};
};

/**
 * Monte-Carlo Fisher information E_s E_a[∇log π ∇log π^T] at fixed θ, with
 * states drawn from U(-π, π)^n.
 */
inline FIMResult fim(const qsim::ParameterizedCircuit &circuit, const policy::ActionPartition &partition,
                     std::span<const double> theta, std::size_t state_samples, const ActionSampling &sampling,
                     std::uint64_t seed, std::optional<double> clip_floor = std::nullopt,
                     const grad::ShiftRule &rule = {}, std::size_t threads = 1) {
    qpg::detail::require(state_samples >= 1, "fim: need at least one state sample");
    qpg::detail::require(sampling.kind == ActionSampling::Kind::Exact || sampling.per_state >= 1,
                         "fim: per_state action samples must be >= 1");
    const std::size_t k = circuit.n_params();
    const std::size_t n = circuit.n_qubits();
    std::vector<std::size_t> slots(k);
    for (std::size_t l = 0; l < k; ++l) {
        slots[l] = l;
    }
    const CounterRng root{seed};
    std::vector<Matrix> partial(state_samples);
    parallel_for(state_samples, threads, [&](std::size_t j) {
        CounterRng rng = root.split(j);
        std::vector<double> s(n);
        for (auto &x : s) {
            x = rng.angle();
        }
        const auto sens = grad::policy_sensitivity(circuit, s, theta, partition, slots, rule);
        std::vector<std::pair<std::size_t, double>> weighted;
        if (sampling.kind == ActionSampling::Kind::Exact) {
            for (std::size_t a = 0; a < partition.n_actions(); ++a) {
                if (sens.policy[a] > 0.0) {
                    weighted.emplace_back(a, sens.policy[a]);
                }
            }
        } else {
            CounterRng action_rng = rng.split(1);
            for (std::size_t m = 0; m < sampling.per_state; ++m) {
                weighted.emplace_back(policy::sample_action(sens.policy, action_rng),
                                      1.0 / static_cast<double>(sampling.per_state));
            }
        }
        Matrix acc{k};
        std::vector<double> g(k);
        for (const auto &[a, w] : weighted) {
            for (std::size_t l = 0; l < k; ++l) {
                g[l] = grad::log_derivative(sens.rows[l][a], sens.policy[a], clip_floor);
            }
            for (std::size_t p = 0; p < k; ++p) {
                const double wp = w * g[p];
                for (std::size_t q = p; q < k; ++q) {
                    acc(p, q) += wp * g[q];
                }
            }
        }
        partial[j] = std::move(acc);
    });

    FIMResult out;
    out.matrix = Matrix{k};
    for (const auto &m : partial) {
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p; q < k; ++q) {
                out.matrix(p, q) += m(p, q);
            }
        }
    }
    const double inv = 1.0 / static_cast<double>(state_samples);
    for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t q = p; q < k; ++q) {
            out.matrix(p, q) *= inv;
            out.matrix(q, p) = out.matrix(p, q);
        }
    }
    out.samples_used = state_samples;
    out.eigenvalues = k > 0 ? eigen_spectrum(out.matrix) : std::vector<double>{};
    return out;
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

enum class ScalingModel {
    ExpDecay, ///< ln V = a + b n
    PowerLaw  ///< ln V = a + b ln n
};

struct ScalingFit {
    ScalingModel model{ScalingModel::ExpDecay};
    double slope{0.0};
    double intercept{0.0};
    double r_squared{0.0};
};

inline ScalingFit fit_scaling(std::span<const double> n_list, std::span<const double> variances, ScalingModel model) {
    qpg::detail::require(n_list.size() == variances.size(), "fit_scaling: length mismatch");
    qpg::detail::require(n_list.size() >= 3, "fit_scaling: need at least 3 points");
    const std::size_t m = n_list.size();
    std::vector<double> x(m);
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) {
        qpg::detail::require(variances[i] > 0.0, "fit_scaling: variances must be strictly positive");
        qpg::detail::require(model == ScalingModel::ExpDecay || n_list[i] > 0.0, "fit_scaling: n must be positive");
        x[i] = model == ScalingModel::ExpDecay ? n_list[i] : std::log(n_list[i]);
        y[i] = std::log(variances[i]);
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    qpg::detail::require(sxx > 0.0, "fit_scaling: need at least two distinct n values");
    ScalingFit fit;
    fit.model = model;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Random product states with layer-shared parameters
// ---------------------------------------------------------------------------

struct ProductStateCell {
    std::size_t n{0};
    std::size_t layers{0};
    double mean_abs_log_grad{0.0};
    double var_log_grad{0.0};
    /// Plain probability of the fixed all-zeros outcome.
    double mean_abs_prob_grad{0.0};
    double var_prob_grad{0.0};
    /// Plain probability of the sampled action.
    double mean_abs_prob_grad_sampled{0.0};
    double var_prob_grad_sampled{0.0};
    std::size_t ensemble{0};
};

/**
 * Draws `ensemble` random ProductStateShared circuits with θ ~ U(-π, π) and
 * differentiates with respect to the shared slot of `probe_layer`. The score
 * ∂ log π(a) uses a basis-state action a ~ |<a|ψ>|^2; the plain-probability
 * gradient is taken for the global all-zeros projector, and additionally for
 * the sampled action.
 */
inline ProductStateCell product_state_cell(std::size_t n, std::size_t layers, std::size_t ensemble, std::uint64_t seed,
                                           std::size_t probe_layer = 0, std::size_t threads = 1) {
    qpg::detail::require(ensemble >= 2, "product_state: ensemble must be >= 2");
    qpg::detail::require(layers >= 1, "product_state: layers must be >= 1");
    qpg::detail::require(probe_layer < layers, "product_state: probe layer out of range");
    const auto partition = policy::ActionPartition::contiguous(n, std::size_t{1} << n);
    const CounterRng cell_rng = CounterRng{seed}.split(n).split(layers);
    const std::size_t slots[] = {probe_layer};
    std::vector<double> log_grads(ensemble);
    std::vector<double> prob_grads(ensemble);
    std::vector<double> sampled_prob_grads(ensemble);
    parallel_for(ensemble, threads, [&](std::size_t i) {
        CounterRng rng = cell_rng.split(i);
        const auto circuit =
            qsim::build_ansatz({qsim::AnsatzKind::ProductStateShared, n, layers, rng.derive_seed(0)});
        const std::vector<double> s(n, 0.0);
        std::vector<double> theta(layers);
        for (auto &t : theta) {
            t = rng.angle();
        }
        const auto sens = grad::policy_sensitivity(circuit, s, theta, partition, slots);
        CounterRng action_rng = rng.split(1);
        const std::size_t a = policy::sample_action(sens.policy, action_rng);
        prob_grads[i] = sens.rows[0][0];
        sampled_prob_grads[i] = sens.rows[0][a];
        log_grads[i] = grad::log_derivative(sens.rows[0][a], sens.policy[a], std::nullopt);
    });
    const auto ls = sample_stats(log_grads);
    const auto ps = sample_stats(prob_grads);
    const auto ss = sample_stats(sampled_prob_grads);
    ProductStateCell cell{n, layers, 0.0, ls.variance, 0.0, ps.variance, 0.0, ss.variance, ensemble};
    for (std::size_t i = 0; i < ensemble; ++i) {
        cell.mean_abs_log_grad += std::abs(log_grads[i]);
        cell.mean_abs_prob_grad += std::abs(prob_grads[i]);
        cell.mean_abs_prob_grad_sampled += std::abs(sampled_prob_grads[i]);
    }
    const auto count = static_cast<double>(ensemble);
    cell.mean_abs_log_grad /= count;
    cell.mean_abs_prob_grad /= count;
    cell.mean_abs_prob_grad_sampled /= count;
    return cell;
}

} // namespace qpg::analysis
