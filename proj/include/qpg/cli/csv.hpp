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
 * Minimal CSV writer. Floats are printed with 17 significant digits so
 * values round-trip exactly.
 */
#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace qpg::cli {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header) : header_{std::move(header)} {}

    class Row {
      public:
        Row &operator<<(double x) { return push(format_double(x)); }
        Row &operator<<(std::size_t x) { return push(std::to_string(x)); }
        Row &operator<<(std::string_view x) { return push(std::string{x}); }
        Row &operator<<(const char *x) { return push(std::string{x}); }

      private:
        friend class CsvTable;
        explicit Row(std::vector<std::string> &cells) : cells_{cells} {}
        Row &push(std::string s) {
            cells_.push_back(std::move(s));
            return *this;
        }
        std::vector<std::string> &cells_;
    };

    /// Starts a new row; stream cells into the returned handle.
    Row row() {
        rows_.emplace_back();
        return Row{rows_.back()};
    }

    [[nodiscard]] std::size_t n_rows() const noexcept { return rows_.size(); }

    [[nodiscard]] std::string str() const {
        std::string out;
        append_line(out, header_);
        for (const auto &r : rows_) {
            append_line(out, r);
        }
        return out;
    }

  private:
    static void append_line(std::string &out, const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += cells[i];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace qpg::cli
