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
// qpg: command-line front end for the trainability experiments.
//
//   qpg variance-scan --config scan.json [--seed N] [--output-dir DIR]
//                     [--emit-plots] [--threads N]
//   qpg fim-scan | bandit | product-state  (same flags)
//   qpg selftest
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qpg/cli/config.hpp"
#include "qpg/cli/experiments.hpp"
#include "qpg/cli/manifest.hpp"
#include "qpg/error.hpp"
#include "qpg/selftest.hpp"

namespace {

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    bool emit_plots{false};
    std::optional<std::size_t> threads;
};

std::optional<std::string> env(const char *name) {
    const char *v = std::getenv(name);
    if (v == nullptr || *v == '\0') {
        return std::nullopt;
    }
    return std::string{v};
}

// Flags win over environment variables, which win over the config file.
qpg::cli::Json load_document(const Flags &flags) {
    std::ifstream in{flags.config_path};
    if (!in) {
        throw qpg::ConfigError("config: cannot read '" + flags.config_path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    auto doc = qpg::cli::parse_json_text(buf.str());
    if (!doc.is_object()) {
        throw qpg::ConfigError("config: <root>: expected an object");
    }
    if (flags.seed) {
        doc["seed"] = *flags.seed;
    }
    if (flags.output_dir) {
        doc["output_dir"] = *flags.output_dir;
    } else if (auto d = env("QPG_OUTPUT_DIR")) {
        doc["output_dir"] = *d;
    }
    if (flags.emit_plots) {
        doc["emit_plots"] = true;
    }
    if (flags.threads) {
        doc["threads"] = *flags.threads;
    } else if (auto t = env("QPG_THREADS")) {
        try {
            doc["threads"] = std::stoull(*t);
        } catch (const std::exception &) {
            throw qpg::ConfigError("config: QPG_THREADS: expected a positive integer, got '" + *t + "'");
        }
    }
    return doc;
}

int run_experiment(qpg::cli::Experiment which, const Flags &flags) {
    const auto doc = load_document(flags);
    const auto cfg = qpg::cli::parse_config(doc, which);
    qpg::cli::ensure_directory(cfg.output_dir);
    const auto started = qpg::cli::utc_timestamp();
    const auto outputs = qpg::cli::run_experiment(cfg);
    const auto manifest = qpg::cli::write_run(cfg.output_dir, outputs, doc, qpg::cli::to_string(which), started);
    for (const auto &f : manifest.at("files")) {
        std::cout << cfg.output_dir << "/" << f.at("path").get<std::string>() << "\n";
    }
    std::cout << cfg.output_dir << "/manifest.json\n";
    return 0;
}

int run_selftest() {
    bool all = true;
    for (const auto &r : qpg::selftest::run_all()) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all = all && r.passed;
    }
    return all ? 0 : 2;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"qpg: policy-gradient trainability experiments"};
    app.require_subcommand(1);
    Flags flags;

    const std::pair<const char *, qpg::cli::Experiment> commands[] = {
        {"variance-scan", qpg::cli::Experiment::VarianceScan},
        {"fim-scan", qpg::cli::Experiment::FimScan},
        {"bandit", qpg::cli::Experiment::Bandit},
        {"product-state", qpg::cli::Experiment::ProductState},
    };
    std::vector<std::pair<CLI::App *, qpg::cli::Experiment>> subs;
    for (const auto &[name, which] : commands) {
        auto *sub = app.add_subcommand(name, std::string{"run the "} + name + " experiment");
        sub->add_option("--config", flags.config_path, "JSON run configuration")->required();
        sub->add_option("--seed", flags.seed, "override the config seed");
        sub->add_option("--output-dir", flags.output_dir, "override the output directory");
        sub->add_flag("--emit-plots", flags.emit_plots, "write SVG plots next to the CSVs");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
        subs.emplace_back(sub, which);
    }
    auto *self = app.add_subcommand("selftest", "run the built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (self->parsed()) {
            return run_selftest();
        }
        for (const auto &[sub, which] : subs) {
            if (sub->parsed()) {
                return run_experiment(which, flags);
            }
        }
    } catch (const qpg::ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qpg::NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
