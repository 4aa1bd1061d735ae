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
 * Run configuration: a single JSON document, validated in full before any
 * simulation starts. Every rejected field produces a ConfigError naming its
 * path, e.g. "config: variance_scan.ensemble: must be >= 2".
 */
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "../agent.hpp"
#include "../analysis.hpp"
#include "../error.hpp"
#include "../policy.hpp"
#include "../qsim.hpp"

namespace qpg::cli {

using Json = nlohmann::json;

enum class Experiment { VarianceScan, FimScan, Bandit, ProductState };

[[nodiscard]] inline std::string to_string(Experiment e) {
    switch (e) {
    case Experiment::VarianceScan: return "variance-scan";
    case Experiment::FimScan: return "fim-scan";
    case Experiment::Bandit: return "bandit";
    case Experiment::ProductState: return "product-state";
    }
    return "?";
}

/// JSON section key of an experiment, e.g. "variance_scan".
[[nodiscard]] inline std::string section_key(Experiment e) {
    std::string k = to_string(e);
    for (auto &c : k) {
        if (c == '-') {
            c = '_';
        }
    }
    return k;
}

struct VarianceScanSection {
    /// `scheme` and `clip` of the base are overridden per cell.
    analysis::VarianceScanConfig base{};
    std::vector<policy::PartitionScheme> schemes{policy::PartitionScheme::Contiguous,
                                                 policy::PartitionScheme::ParityRecursive};
    std::vector<analysis::ClipRule> clips{analysis::ClipRule{}};
};

struct FimScanSection {
    qsim::AnsatzKind ansatz{qsim::AnsatzKind::SimplifiedTwoDesign};
    analysis::DepthRule depth{};
    std::uint64_t ansatz_seed{0};
    std::vector<std::size_t> n_list{};
    analysis::ActionRule actions{analysis::ActionRule::Kind::List, {2}};
    std::vector<policy::PartitionScheme> schemes{policy::PartitionScheme::ParityRecursive};
    std::size_t state_samples{10};
    analysis::ActionSampling sampling{};
    double threshold{1e-3};
    analysis::ClipRule clip{};
    double shift_alpha{std::numbers::pi / 2.0};
};

struct BanditSection {
    /// `scheme`, `seed` and `shots` of the base are overridden per run.
    agent::BanditConfig base{};
    std::vector<policy::PartitionScheme> schemes{policy::PartitionScheme::Contiguous,
                                                 policy::PartitionScheme::ParityRecursive};
    analysis::ShotRule shots{};
};

struct ProductStateSection {
    std::vector<std::size_t> n_list{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<std::size_t> layers{1, 2, 3, 4, 5, 6, 7, 8};
    std::size_t ensemble{10000};
    std::size_t probe_layer{0};
};

struct ExperimentConfig {
    Experiment experiment{Experiment::VarianceScan};
    std::uint64_t seed{0};
    std::string output_dir{"out"};
    bool emit_plots{false};
    std::size_t threads{1};
    VarianceScanSection variance_scan{};
    FimScanSection fim_scan{};
    BanditSection bandit{};
    ProductStateSection product_state{};
};

namespace detail {

[[noreturn]] inline void fail(const std::string &path, const std::string &msg) {
    throw ConfigError("config: " + path + ": " + msg);
}

/// Object reader that tracks consumed keys so unknown keys can be rejected.
class Reader {
  public:
    Reader(const Json &obj, std::string path) : obj_{obj}, path_{std::move(path)} {
        if (!obj_.is_object()) {
            fail(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    [[nodiscard]] std::string path(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    const Json *get(const std::string &key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    const Json &need(const std::string &key) {
        const Json *j = get(key);
        if (j == nullptr) {
            fail(path(key), "required field is missing");
        }
        return *j;
    }

    std::uint64_t uint(const std::string &key, std::uint64_t fallback, std::uint64_t min = 0) {
        const Json *j = get(key);
        if (j == nullptr) {
            return fallback;
        }
        return as_uint(*j, path(key), min);
    }

    double real(const std::string &key, double fallback) {
        const Json *j = get(key);
        if (j == nullptr) {
            return fallback;
        }
        if (!j->is_number()) {
            fail(path(key), "expected a number");
        }
        return j->get<double>();
    }

    bool boolean(const std::string &key, bool fallback) {
        const Json *j = get(key);
        if (j == nullptr) {
            return fallback;
        }
        if (!j->is_boolean()) {
            fail(path(key), "expected true or false");
        }
        return j->get<bool>();
    }

    std::string str(const std::string &key, const std::string &fallback) {
        const Json *j = get(key);
        if (j == nullptr) {
            return fallback;
        }
        if (!j->is_string()) {
            fail(path(key), "expected a string");
        }
        return j->get<std::string>();
    }

    void finish() const {
        for (const auto &[key, value] : obj_.items()) {
            if (!seen_.contains(key)) {
                fail(path(key), "unknown field");
            }
        }
    }

    static std::uint64_t as_uint(const Json &j, const std::string &path, std::uint64_t min) {
        if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
            fail(path, "expected a non-negative integer");
        }
        const auto v = j.get<std::uint64_t>();
        if (v < min) {
            fail(path, "must be >= " + std::to_string(min));
        }
        return v;
    }

  private:
    const Json &obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::vector<std::size_t> uint_list(const Json &j, const std::string &path, std::size_t min) {
    if (!j.is_array() || j.empty()) {
        fail(path, "expected a non-empty array of integers");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(static_cast<std::size_t>(Reader::as_uint(j[i], path + "[" + std::to_string(i) + "]", min)));
    }
    return out;
}

inline std::vector<std::size_t> ascending_qubits(const Json &j, const std::string &path) {
    auto out = uint_list(j, path, 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] > qsim::kMaxQubits) {
            fail(path, "qubit count " + std::to_string(out[i]) + " exceeds " + std::to_string(qsim::kMaxQubits));
        }
        if (i > 0 && out[i] <= out[i - 1]) {
            fail(path, "must be strictly ascending");
        }
    }
    return out;
}

template <class F> auto wrap(const std::string &path, F &&f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError &e) {
        const std::string what = e.what();
        if (what.rfind("config: ", 0) == 0) {
            throw;
        }
        fail(path, what);
    }
}

inline qsim::AnsatzKind ansatz(Reader &r, const std::string &key, qsim::AnsatzKind fallback) {
    const Json *j = r.get(key);
    if (j == nullptr) {
        return fallback;
    }
    if (!j->is_string()) {
        fail(r.path(key), "expected an ansatz name");
    }
    return wrap(r.path(key), [&] { return qsim::ansatz_from_string(j->get<std::string>()); });
}

inline std::vector<policy::PartitionScheme> schemes(Reader &r, const std::string &key,
                                                    std::vector<policy::PartitionScheme> fallback) {
    const Json *j = r.get(key);
    if (j == nullptr) {
        return fallback;
    }
    std::vector<policy::PartitionScheme> out;
    auto one = [&](const Json &x, const std::string &p) {
        if (!x.is_string()) {
            fail(p, "expected a scheme name");
        }
        out.push_back(wrap(p, [&] { return policy::scheme_from_string(x.get<std::string>()); }));
    };
    if (j->is_array()) {
        if (j->empty()) {
            fail(r.path(key), "expected at least one scheme");
        }
        for (std::size_t i = 0; i < j->size(); ++i) {
            one((*j)[i], r.path(key) + "[" + std::to_string(i) + "]");
        }
    } else {
        one(*j, r.path(key));
    }
    return out;
}

/// "n^2", "log2n" or a positive integer; `depth_cap` bounds the rules.
inline analysis::DepthRule depth(Reader &r, analysis::DepthRule fallback) {
    analysis::DepthRule d = fallback;
    if (const Json *j = r.get("depth")) {
        if (j->is_string()) {
            const auto s = j->get<std::string>();
            if (s == "n^2") {
                d.kind = analysis::DepthRule::Kind::NSquared;
            } else if (s == "log2n") {
                d.kind = analysis::DepthRule::Kind::Log2N;
            } else {
                fail(r.path("depth"), "expected \"n^2\", \"log2n\" or a positive integer");
            }
        } else {
            d.kind = analysis::DepthRule::Kind::Fixed;
            d.value = static_cast<std::size_t>(Reader::as_uint(*j, r.path("depth"), 1));
        }
    }
    d.cap = static_cast<std::size_t>(r.uint("depth_cap", d.cap));
    return d;
}

/// "powers", "n", "2^n" or an explicit list.
inline analysis::ActionRule actions(Reader &r, analysis::ActionRule fallback) {
    const Json *j = r.get("actions");
    if (j == nullptr) {
        return fallback;
    }
    if (j->is_array()) {
        return {analysis::ActionRule::Kind::List, uint_list(*j, r.path("actions"), 2)};
    }
    if (j->is_string()) {
        const auto s = j->get<std::string>();
        if (s == "powers") return {analysis::ActionRule::Kind::Powers, {}};
        if (s == "n") return {analysis::ActionRule::Kind::EqualsN, {}};
        if (s == "2^n") return {analysis::ActionRule::Kind::TwoToN, {}};
    }
    fail(r.path("actions"), "expected \"powers\", \"n\", \"2^n\" or an array of action counts");
}

inline analysis::ClipRule clip_value(const Json &j, const std::string &path) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "none") return {};
        if (s == "inv_n2") return {analysis::ClipRule::Kind::InvNSquared, 0.0};
    } else if (j.is_number()) {
        const double v = j.get<double>();
        if (!(v > 0.0 && v < 1.0)) {
            fail(path, "clip floor must lie in (0, 1)");
        }
        return {analysis::ClipRule::Kind::Fixed, v};
    }
    fail(path, "expected \"none\", \"inv_n2\" or a floor in (0, 1)");
}

inline std::vector<analysis::ClipRule> clips(Reader &r, const std::string &key) {
    const Json *j = r.get(key);
    if (j == nullptr) {
        return {analysis::ClipRule{}};
    }
    if (j->is_array()) {
        if (j->empty()) {
            fail(r.path(key), "expected at least one clip rule");
        }
        std::vector<analysis::ClipRule> out;
        for (std::size_t i = 0; i < j->size(); ++i) {
            out.push_back(clip_value((*j)[i], r.path(key) + "[" + std::to_string(i) + "]"));
        }
        return out;
    }
    return {clip_value(*j, r.path(key))};
}

/// "exact", a positive integer, or {"per_n2": c} for ceil(c n^2).
inline analysis::ShotRule shots(Reader &r, const std::string &key) {
    const Json *j = r.get(key);
    if (j == nullptr) {
        return {};
    }
    const auto p = r.path(key);
    if (j->is_string() && j->get<std::string>() == "exact") {
        return {};
    }
    if (j->is_number_integer()) {
        return {analysis::ShotRule::Kind::Fixed, static_cast<double>(Reader::as_uint(*j, p, 1))};
    }
    if (j->is_object()) {
        Reader o{*j, p};
        const double c = o.real("per_n2", 0.0);
        o.finish();
        if (!(c > 0.0)) {
            fail(p + ".per_n2", "must be positive");
        }
        return {analysis::ShotRule::Kind::PerNSquared, c};
    }
    fail(p, "expected \"exact\", a positive integer or {\"per_n2\": c}");
}

inline double shift_alpha(Reader &r) {
    const double a = r.real("shift_alpha", std::numbers::pi / 2.0);
    if (!(a > 0.0 && a < std::numbers::pi)) {
        fail(r.path("shift_alpha"), "must lie in (0, pi)");
    }
    return a;
}

inline VarianceScanSection parse_variance_scan(const Json &j) {
    Reader r{j, "variance_scan"};
    VarianceScanSection out;
    auto &b = out.base;
    b.ansatz = ansatz(r, "ansatz", b.ansatz);
    b.depth = depth(r, b.depth);
    b.ansatz_seed = r.uint("ansatz_seed", 0);
    b.n_list = ascending_qubits(r.need("n_list"), r.path("n_list"));
    b.actions = actions(r, b.actions);
    out.schemes = schemes(r, "schemes", out.schemes);
    b.shots = shots(r, "shots");
    out.clips = clips(r, "clip");
    b.ensemble = static_cast<std::size_t>(r.uint("ensemble", 2000, 2));
    if (const Json *p = r.get("probe_slot")) {
        b.probe_slot = static_cast<std::size_t>(Reader::as_uint(*p, r.path("probe_slot"), 0));
    }
    b.shift_alpha = shift_alpha(r);
    r.finish();
    for (std::size_t n : b.n_list) {
        for (std::size_t a : b.actions.actions_for(n)) {
            for (auto s : out.schemes) {
                wrap(r.path("actions"), [&] { (void)policy::ActionPartition::make(s, n, a); });
            }
        }
        const auto d = b.depth.depth_for(n);
        wrap(r.path("ansatz"), [&] {
            const auto c = qsim::build_ansatz({b.ansatz, n, d, b.ansatz_seed});
            (void)analysis::probe_slot_for(c, b.probe_slot);
        });
    }
    return out;
}

inline FimScanSection parse_fim_scan(const Json &j) {
    Reader r{j, "fim_scan"};
    FimScanSection out;
    out.ansatz = ansatz(r, "ansatz", out.ansatz);
    out.depth = depth(r, out.depth);
    out.ansatz_seed = r.uint("ansatz_seed", 0);
    out.n_list = ascending_qubits(r.need("n_list"), r.path("n_list"));
    out.actions = actions(r, out.actions);
    out.schemes = schemes(r, "schemes", out.schemes);
    out.state_samples = static_cast<std::size_t>(r.uint("state_samples", 10, 1));
    if (const Json *s = r.get("action_sampling")) {
        if (s->is_string() && s->get<std::string>() == "exact") {
            out.sampling = {};
        } else if (s->is_object()) {
            Reader o{*s, r.path("action_sampling")};
            out.sampling = {analysis::ActionSampling::Kind::Sampled,
                            static_cast<std::size_t>(Reader::as_uint(o.need("per_state"), o.path("per_state"), 1))};
            o.finish();
        } else {
            fail(r.path("action_sampling"), "expected \"exact\" or {\"per_state\": m}");
        }
    }
    out.threshold = r.real("threshold", 1e-3);
    if (!(out.threshold > 0.0)) {
        fail(r.path("threshold"), "must be positive");
    }
    const auto c = clips(r, "clip");
    if (c.size() != 1) {
        fail(r.path("clip"), "expected a single clip rule");
    }
    out.clip = c.front();
    out.shift_alpha = shift_alpha(r);
    r.finish();
    for (std::size_t n : out.n_list) {
        for (std::size_t a : out.actions.actions_for(n)) {
            for (auto s : out.schemes) {
                wrap(r.path("actions"), [&] { (void)policy::ActionPartition::make(s, n, a); });
            }
        }
        wrap(r.path("ansatz"),
             [&] { (void)qsim::build_ansatz({out.ansatz, n, out.depth.depth_for(n), out.ansatz_seed}); });
    }
    return out;
}

inline BanditSection parse_bandit(const Json &j) {
    Reader r{j, "bandit"};
    BanditSection out;
    auto &b = out.base;
    b.n_qubits = static_cast<std::size_t>(r.uint("n_qubits", b.n_qubits, 1));
    b.n_arms = static_cast<std::size_t>(r.uint("n_arms", b.n_arms, 2));
    out.schemes = schemes(r, "schemes", out.schemes);
    b.depth = static_cast<std::size_t>(r.uint("depth", b.depth, 1));
    b.episodes = static_cast<std::size_t>(r.uint("episodes", b.episodes, 1));
    b.trials = static_cast<std::size_t>(r.uint("trials", b.trials, 1));
    out.shots = shots(r, "shots");
    b.learning_rate = r.real("learning_rate", b.learning_rate);
    b.batch_size = static_cast<std::size_t>(r.uint("batch_size", b.batch_size, 1));
    b.baseline_window = static_cast<std::size_t>(r.uint("baseline_window", b.baseline_window, 1));
    if (const Json *c = r.get("clip")) {
        const auto rule = clip_value(*c, r.path("clip"));
        b.clip_floor = rule.floor_for(b.n_qubits);
    }
    b.shift_alpha = shift_alpha(r);
    r.finish();
    b.shots = out.shots.shots_for(b.n_qubits);
    for (auto s : out.schemes) {
        agent::BanditConfig probe = b;
        probe.scheme = s;
        wrap("bandit", [&] {
            probe.validate();
            (void)policy::ActionPartition::make(s, b.n_qubits, b.n_arms);
        });
    }
    return out;
}

inline ProductStateSection parse_product_state(const Json &j) {
    Reader r{j, "product_state"};
    ProductStateSection out;
    if (const Json *n = r.get("n_list")) {
        out.n_list = ascending_qubits(*n, r.path("n_list"));
    }
    if (const Json *l = r.get("layers")) {
        out.layers = uint_list(*l, r.path("layers"), 1);
    }
    out.ensemble = static_cast<std::size_t>(r.uint("ensemble", out.ensemble, 2));
    out.probe_layer = static_cast<std::size_t>(r.uint("probe_layer", 0));
    r.finish();
    for (std::size_t l : out.layers) {
        if (out.probe_layer >= l) {
            fail(r.path("probe_layer"), "must be below every entry of layers");
        }
    }
    return out;
}

} // namespace detail

[[nodiscard]] inline Experiment experiment_from_string(const std::string &name) {
    for (auto e : {Experiment::VarianceScan, Experiment::FimScan, Experiment::Bandit, Experiment::ProductState}) {
        if (to_string(e) == name) {
            return e;
        }
    }
    detail::fail("experiment", "unknown experiment '" + name + "'");
}

/**
 * Validates a full configuration document. `expected` (from the subcommand)
 * must agree with an "experiment" field when both are present.
 */
inline ExperimentConfig parse_config(const Json &doc, std::optional<Experiment> expected = std::nullopt) {
    detail::Reader r{doc, ""};
    ExperimentConfig cfg;
    if (const Json *e = r.get("experiment")) {
        if (!e->is_string()) {
            detail::fail("experiment", "expected a string");
        }
        cfg.experiment = experiment_from_string(e->get<std::string>());
        if (expected && *expected != cfg.experiment) {
            detail::fail("experiment", "config is for '" + to_string(cfg.experiment) + "' but subcommand is '" +
                                           to_string(*expected) + "'");
        }
    } else if (expected) {
        cfg.experiment = *expected;
    } else {
        detail::fail("experiment", "required field is missing");
    }
    if (r.get("seed") == nullptr) {
        detail::fail("seed", "required field is missing (no wall-clock seeding)");
    }
    cfg.seed = r.uint("seed", 0);
    cfg.output_dir = r.str("output_dir", cfg.output_dir);
    if (cfg.output_dir.empty()) {
        detail::fail("output_dir", "must not be empty");
    }
    cfg.emit_plots = r.boolean("emit_plots", false);
    cfg.threads = static_cast<std::size_t>(r.uint("threads", 1, 1));

    const std::string key = section_key(cfg.experiment);
    for (auto other : {Experiment::VarianceScan, Experiment::FimScan, Experiment::Bandit, Experiment::ProductState}) {
        if (other != cfg.experiment && doc.contains(section_key(other))) {
            r.get(section_key(other)); // tolerated but ignored
        }
    }
    const Json &section = r.need(key);
    r.finish();
    switch (cfg.experiment) {
    case Experiment::VarianceScan: cfg.variance_scan = detail::parse_variance_scan(section); break;
    case Experiment::FimScan: cfg.fim_scan = detail::parse_fim_scan(section); break;
    case Experiment::Bandit: cfg.bandit = detail::parse_bandit(section); break;
    case Experiment::ProductState: cfg.product_state = detail::parse_product_state(section); break;
    }
    return cfg;
}

/// Parses JSON text; syntax errors are reported as ConfigError.
inline Json parse_json_text(const std::string &text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw ConfigError(std::string{"config: <root>: malformed JSON: "} + e.what());
    }
}

} // namespace qpg::cli
