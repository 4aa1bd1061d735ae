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
 * Experiment drivers behind the CLI subcommands. Each returns the rendered
 * output files; nothing touches the filesystem until write_run.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "../agent.hpp"
#include "../analysis.hpp"
#include "../policy.hpp"
#include "../qsim.hpp"
#include "../rng.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "manifest.hpp"
#include "svg.hpp"

namespace qpg::cli {

inline std::string clip_label(const analysis::ClipRule &c) {
    switch (c.kind) {
    case analysis::ClipRule::Kind::None: return "none";
    case analysis::ClipRule::Kind::InvNSquared: return "inv_n2";
    case analysis::ClipRule::Kind::Fixed: return format_double(c.value);
    }
    return "?";
}

namespace detail {

inline std::string file_tag(std::string s) {
    for (auto &c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c))) {
            c = '_';
        }
    }
    return s;
}

} // namespace detail

// ---------------------------------------------------------------------------

inline RunOutputs run_variance_scan(const ExperimentConfig &cfg) {
    const auto &sec = cfg.variance_scan;
    CsvTable table{{"n", "n_actions", "scheme", "clip", "variance", "stderr", "ensemble"}};
    CsvTable fits{{"scheme", "clip", "n_actions", "model", "slope", "intercept", "r_squared"}};
    RunOutputs out;

    for (auto scheme : sec.schemes) {
        for (const auto &clip : sec.clips) {
            analysis::VarianceScanConfig vc = sec.base;
            vc.scheme = scheme;
            vc.clip = clip;
            vc.seed = cfg.seed;
            // variance by (|A|, n)
            std::map<std::size_t, std::map<std::size_t, double>> by_actions;
            for (std::size_t n : vc.n_list) {
                for (std::size_t a : vc.actions.actions_for(n)) {
                    const auto v = analysis::log_grad_variance(vc, n, a, cfg.threads);
                    table.row() << n << a << policy::to_string(scheme) << clip_label(clip) << v.variance << v.stderr_
                                << v.ensemble;
                    by_actions[a][n] = v.variance;
                }
            }
            for (const auto &[a, cells] : by_actions) {
                if (cells.size() < 3) {
                    continue;
                }
                std::vector<double> ns;
                std::vector<double> vs;
                for (const auto &[n, v] : cells) {
                    ns.push_back(static_cast<double>(n));
                    vs.push_back(v);
                }
                if (std::any_of(vs.begin(), vs.end(), [](double v) { return !(v > 0.0); })) {
                    continue;
                }
                for (auto model : {analysis::ScalingModel::ExpDecay, analysis::ScalingModel::PowerLaw}) {
                    const auto f = analysis::fit_scaling(ns, vs, model);
                    fits.row() << policy::to_string(scheme) << clip_label(clip) << a
                               << (model == analysis::ScalingModel::ExpDecay ? "exp_decay" : "power_law") << f.slope
                               << f.intercept << f.r_squared;
                }
            }
            if (cfg.emit_plots) {
                const std::string tag = detail::file_tag(policy::to_string(scheme) + "_" + clip_label(clip));
                std::map<std::size_t, Series> per_n;
                std::vector<Series> per_a;
                for (const auto &[a, cells] : by_actions) {
                    Series s{"|A|=" + std::to_string(a), {}, {}};
                    for (const auto &[n, v] : cells) {
                        per_n[n].label = "n=" + std::to_string(n);
                        per_n[n].x.push_back(static_cast<double>(a));
                        per_n[n].y.push_back(v);
                        s.x.push_back(static_cast<double>(n));
                        s.y.push_back(v);
                    }
                    if (s.x.size() >= 2) {
                        per_a.push_back(std::move(s));
                    }
                }
                std::vector<Series> by_n;
                for (auto &[n, s] : per_n) {
                    by_n.push_back(std::move(s));
                }
                out.files.push_back({"variance_vs_actions_" + tag + ".svg",
                                     line_plot_svg({"log-policy gradient variance (" + tag + ")", "|A|",
                                                    "Var[d log pi]", true, true},
                                                   by_n)});
                out.files.push_back({"variance_vs_qubits_" + tag + ".svg",
                                     line_plot_svg({"log-policy gradient variance (" + tag + ")", "qubits n",
                                                    "Var[d log pi]", false, true},
                                                   per_a)});
            }
        }
    }
    out.files.insert(out.files.begin(), {"variance_fits.csv", fits.str()});
    out.files.insert(out.files.begin(), {"variance_scan.csv", table.str()});
    return out;
}

// ---------------------------------------------------------------------------

inline RunOutputs run_fim_scan(const ExperimentConfig &cfg) {
    const auto &sec = cfg.fim_scan;
    CsvTable spectra{{"n", "n_actions", "scheme", "eigenvalue_index", "eigenvalue"}};
    CsvTable summary{{"n", "n_actions", "scheme", "n_params", "samples_used", "concentration_fraction",
                      "min_eigenvalue", "max_eigenvalue", "trace"}};
    RunOutputs out;
    double global_min = 0.0;
    bool any = false;
    std::map<std::string, std::vector<Series>> hist;

    for (std::size_t n : sec.n_list) {
        const auto circuit = qsim::build_ansatz({sec.ansatz, n, sec.depth.depth_for(n), sec.ansatz_seed});
        CounterRng theta_rng = CounterRng{cfg.seed}.split(n).split(0);
        std::vector<double> theta(circuit.n_params());
        for (auto &t : theta) {
            t = theta_rng.angle();
        }
        const std::uint64_t state_seed = CounterRng{cfg.seed}.split(n).derive_seed(1);
        for (auto scheme : sec.schemes) {
            for (std::size_t a : sec.actions.actions_for(n)) {
                const auto partition = policy::ActionPartition::make(scheme, n, a);
                const auto r = analysis::fim(circuit, partition, theta, sec.state_samples, sec.sampling, state_seed,
                                             sec.clip.floor_for(n), grad::ShiftRule{sec.shift_alpha}, cfg.threads);
                for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
                    spectra.row() << n << a << policy::to_string(scheme) << i << r.eigenvalues[i];
                }
                const double lo = r.eigenvalues.empty() ? 0.0 : r.eigenvalues.back();
                const double hi = r.eigenvalues.empty() ? 0.0 : r.eigenvalues.front();
                summary.row() << n << a << policy::to_string(scheme) << circuit.n_params() << r.samples_used
                              << analysis::concentration_fraction(r.eigenvalues, sec.threshold) << lo << hi
                              << r.matrix.trace();
                global_min = any ? std::min(global_min, lo) : lo;
                any = true;
                if (cfg.emit_plots) {
                    Series s{"n=" + std::to_string(n) + " |A|=" + std::to_string(a), {}, {}};
                    for (double l : r.eigenvalues) {
                        s.x.push_back(std::log10(std::max(std::abs(l), 1e-16)));
                    }
                    hist[policy::to_string(scheme)].push_back(std::move(s));
                }
            }
        }
    }
    out.files.push_back({"fim_spectra.csv", spectra.str()});
    out.files.push_back({"fim_summary.csv", summary.str()});
    for (auto &[scheme, groups] : hist) {
        out.files.push_back({"fim_histogram_" + detail::file_tag(scheme) + ".svg",
                             histogram_svg({"FIM eigenvalues (" + scheme + ")", "log10 |eigenvalue|", "fraction"},
                                           groups)});
    }
    out.diagnostics["min_eigenvalue"] = global_min;
    out.diagnostics["psd_violation"] = global_min < -1e-8;
    return out;
}

// ---------------------------------------------------------------------------

inline RunOutputs run_bandit(const ExperimentConfig &cfg) {
    const auto &sec = cfg.bandit;
    RunOutputs out;
    std::vector<Series> p_best_curves;
    std::vector<Series> var_curves;
    nlohmann::json final_p = nlohmann::json::object();
    for (auto scheme : sec.schemes) {
        agent::BanditConfig b = sec.base;
        b.scheme = scheme;
        b.seed = cfg.seed;
        b.shots = sec.shots.shots_for(b.n_qubits);
        const auto records = agent::train_bandit(b, cfg.threads);
        const std::string name = policy::to_string(scheme);

        CsvTable rows{{"trial", "episode", "p_best", "grad_norm", "grad_var", "return"}};
        for (std::size_t t = 0; t < records.size(); ++t) {
            for (std::size_t e = 0; e < b.episodes; ++e) {
                rows.row() << t << e << records[t].p_best[e] << records[t].grad_norm[e] << records[t].grad_var[e]
                           << records[t].episode_return[e];
            }
        }
        CsvTable mean{{"episode", "mean_p_best", "mean_grad_norm", "mean_grad_var", "mean_return"}};
        Series pc{name, {}, {}};
        Series vc{name, {}, {}};
        const auto trials = static_cast<double>(records.size());
        for (std::size_t e = 0; e < b.episodes; ++e) {
            double p = 0.0;
            double g = 0.0;
            double v = 0.0;
            double r = 0.0;
            for (const auto &rec : records) {
                p += rec.p_best[e];
                g += rec.grad_norm[e];
                v += rec.grad_var[e];
                r += rec.episode_return[e];
            }
            mean.row() << e << p / trials << g / trials << v / trials << r / trials;
            pc.x.push_back(static_cast<double>(e));
            pc.y.push_back(p / trials);
            vc.x.push_back(static_cast<double>(e));
            vc.y.push_back(v / trials);
        }
        const std::size_t window = std::min<std::size_t>(10, b.episodes);
        double tail = 0.0;
        for (std::size_t e = b.episodes - window; e < b.episodes; ++e) {
            tail += pc.y[e];
        }
        final_p[name] = tail / static_cast<double>(window);
        out.files.push_back({"bandit_" + name + ".csv", rows.str()});
        out.files.push_back({"bandit_" + name + "_mean.csv", mean.str()});
        p_best_curves.push_back(std::move(pc));
        var_curves.push_back(std::move(vc));
    }
    out.diagnostics["final_window_mean_p_best"] = final_p;
    if (cfg.emit_plots) {
        out.files.push_back({"bandit_p_best.svg", line_plot_svg({"probability of the best arm", "episode",
                                                                 "mean P(best arm)", false, false},
                                                                p_best_curves)});
        out.files.push_back({"bandit_grad_var.svg", line_plot_svg({"log-policy gradient variance", "episode",
                                                                   "mean grad_var", false, false},
                                                                  var_curves)});
    }
    return out;
}

// ---------------------------------------------------------------------------

inline RunOutputs run_product_state(const ExperimentConfig &cfg) {
    const auto &sec = cfg.product_state;
    CsvTable table{{"n", "layers", "mean_abs_log_grad", "var_log_grad", "mean_abs_prob_grad", "var_prob_grad",
                    "mean_abs_prob_grad_sampled", "var_prob_grad_sampled", "ensemble"}};
    std::vector<Series> log_curves;
    std::vector<Series> prob_curves;
    for (std::size_t layers : sec.layers) {
        Series lc{"layers=" + std::to_string(layers), {}, {}};
        Series pc = lc;
        for (std::size_t n : sec.n_list) {
            const auto c = analysis::product_state_cell(n, layers, sec.ensemble, cfg.seed, sec.probe_layer, cfg.threads);
            table.row() << c.n << c.layers << c.mean_abs_log_grad << c.var_log_grad << c.mean_abs_prob_grad
                        << c.var_prob_grad << c.mean_abs_prob_grad_sampled << c.var_prob_grad_sampled << c.ensemble;
            lc.x.push_back(static_cast<double>(n));
            lc.y.push_back(c.var_log_grad);
            pc.x.push_back(static_cast<double>(n));
            pc.y.push_back(c.var_prob_grad);
        }
        log_curves.push_back(std::move(lc));
        prob_curves.push_back(std::move(pc));
    }
    RunOutputs out;
    out.files.push_back({"product_state.csv", table.str()});
    if (cfg.emit_plots) {
        out.files.push_back({"product_state_log_prob.svg",
                             line_plot_svg({"score-function gradient variance", "qubits n", "Var[d log pi(a)]", false,
                                            false},
                                           log_curves)});
        out.files.push_back({"product_state_prob.svg",
                             line_plot_svg({"probability gradient variance", "qubits n", "Var[d pi(0)]", false, true},
                                           prob_curves)});
    }
    return out;
}

inline RunOutputs run_experiment(const ExperimentConfig &cfg) {
    switch (cfg.experiment) {
    case Experiment::VarianceScan: return run_variance_scan(cfg);
    case Experiment::FimScan: return run_fim_scan(cfg);
    case Experiment::Bandit: return run_bandit(cfg);
    case Experiment::ProductState: return run_product_state(cfg);
    }
    throw ConfigError("unknown experiment");
}

} // namespace qpg::cli
