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
 * Output files and the run manifest. All files of a run are rendered in
 * memory first and written by a single writer, so their bytes do not depend
 * on worker scheduling.
 */
#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "../error.hpp"

namespace qpg::cli {

inline constexpr const char *kArtifactVersion = "0.1.0";

struct OutputFile {
    std::string name;
    std::string content;
};

struct RunOutputs {
    std::vector<OutputFile> files;
    /// Extra manifest fields (diagnostics).
    nlohmann::json diagnostics = nlohmann::json::object();
};

inline std::string sha256_hex(const std::string &data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("sha256: digest computation failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw ConfigError("output: cannot open '" + path.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw ConfigError("output: write to '" + path.string() + "' failed");
    }
}

inline void ensure_directory(const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw ConfigError("config: output_dir: cannot create directory '" + dir.string() + "'");
    }
}

/**
 * Writes every output file and then manifest.json (once) into `dir`.
 * Returns the manifest document.
 */
inline nlohmann::json write_run(const std::filesystem::path &dir, const RunOutputs &outputs,
                                const nlohmann::json &config_snapshot, const std::string &experiment,
                                const std::string &started_at) {
    ensure_directory(dir);
    nlohmann::json files = nlohmann::json::array();
    for (const auto &f : outputs.files) {
        write_file(dir / f.name, f.content);
        files.push_back({{"path", f.name}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
    }
    nlohmann::json manifest = {
        {"artifact", "qpg"},
        {"version", kArtifactVersion},
        {"experiment", experiment},
        {"config", config_snapshot},
        {"started_at", started_at},
        {"finished_at", utc_timestamp()},
        {"files", files},
        {"diagnostics", outputs.diagnostics},
    };
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

/// Re-hashes every file listed in a manifest; returns the names that differ.
inline std::vector<std::string> verify_manifest(const std::filesystem::path &dir) {
    std::ifstream in{dir / "manifest.json"};
    if (!in) {
        throw ConfigError("manifest: missing manifest.json in '" + dir.string() + "'");
    }
    const auto manifest = nlohmann::json::parse(in);
    std::vector<std::string> bad;
    for (const auto &f : manifest.at("files")) {
        const auto name = f.at("path").get<std::string>();
        std::ifstream file{dir / name, std::ios::binary};
        const std::string content{std::istreambuf_iterator<char>{file}, std::istreambuf_iterator<char>{}};
        if (!file.good() && !file.eof()) {
            bad.push_back(name);
        } else if (sha256_hex(content) != f.at("sha256").get<std::string>()) {
            bad.push_back(name);
        }
    }
    return bad;
}

} // namespace qpg::cli
