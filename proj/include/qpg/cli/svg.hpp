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
 * Self-contained SVG line plots and histograms with optional log axes.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace qpg::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x{false};
    bool log_y{false};
};

namespace detail {

inline const char *palette(std::size_t i) {
    static const char *colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % 10];
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

inline std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo{0.0};
    double hi{1.0};
    bool log{false};

    [[nodiscard]] double map(double v) const {
        const double t = log ? std::log10(v) : v;
        return (t - lo) / (hi - lo);
    }
};

inline Axis make_axis(const std::vector<double> &values, bool log) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (log && !(v > 0.0)) {
            continue;
        }
        const double t = log ? std::log10(v) : v;
        if (std::isfinite(t)) {
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return Axis{lo - pad, hi + pad, log};
}

inline std::string tick_label(double t, bool log) { return log ? "1e" + num(t) : num(t); }

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

inline std::string frame(const PlotSpec &spec, const Axis &ax, const Axis &ay) {
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double f = i / 4.0;
        const double xt = ax.lo + f * (ax.hi - ax.lo);
        const double yt = ay.lo + f * (ay.hi - ay.lo);
        const double px = kLeft + f * pw;
        const double py = kTop + ph - f * ph;
        s += "<line x1=\"" + num(px) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(px) + "\" y2=\"" +
             num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(px) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
             tick_label(xt, ax.log) + "</text>\n";
        s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(py) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py + 4) + "\" text-anchor=\"end\">" +
             tick_label(yt, ay.log) + "</text>\n";
    }
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
         escape(spec.x_label) + "</text>\n";
    s += "<text x=\"18\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";
    return s;
}

} // namespace detail

/// Line plot with markers, one polyline per series. Non-positive values are
/// dropped on log axes.
inline std::string line_plot_svg(const PlotSpec &spec, const std::vector<Series> &series) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto &s : series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const auto ax = detail::make_axis(xs, spec.log_x);
    const auto ay = detail::make_axis(ys, spec.log_y);
    const double pw = detail::kWidth - detail::kLeft - detail::kRight;
    const double ph = detail::kHeight - detail::kTop - detail::kBottom;
    std::string out = detail::frame(spec, ax, ay);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto &s = series[k];
        std::string pts;
        std::string marks;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if ((spec.log_x && !(s.x[i] > 0.0)) || (spec.log_y && !(s.y[i] > 0.0)) || !std::isfinite(s.y[i])) {
                continue;
            }
            const double px = detail::kLeft + ax.map(s.x[i]) * pw;
            const double py = detail::kTop + ph - ay.map(s.y[i]) * ph;
            pts += detail::num(px) + "," + detail::num(py) + " ";
            marks += "<circle cx=\"" + detail::num(px) + "\" cy=\"" + detail::num(py) + "\" r=\"2.5\" fill=\"" +
                     detail::palette(k) + "\"/>\n";
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string{detail::palette(k)} +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n" + marks;
        const double ly = detail::kTop + 10 + 16.0 * static_cast<double>(k);
        const double lx = detail::kWidth - detail::kRight + 10;
        out += "<line x1=\"" + detail::num(lx) + "\" y1=\"" + detail::num(ly) + "\" x2=\"" + detail::num(lx + 20) +
               "\" y2=\"" + detail::num(ly) + "\" stroke=\"" + detail::palette(k) + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + detail::num(lx + 25) + "\" y=\"" + detail::num(ly + 4) + "\">" + detail::escape(s.label) +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

/// Overlaid step histograms of `samples`, one outline per group, sharing
/// `bins` equal-width bins over the pooled range.
inline std::string histogram_svg(const PlotSpec &spec, const std::vector<Series> &groups, std::size_t bins = 30) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto &g : groups) {
        for (double v : g.x) {
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        hi = lo + 1.0;
    }
    bins = std::max<std::size_t>(bins, 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<Series> curves;
    for (const auto &g : groups) {
        std::vector<double> counts(bins, 0.0);
        std::size_t total = 0;
        for (double v : g.x) {
            if (!std::isfinite(v)) {
                continue;
            }
            auto b = static_cast<std::size_t>((v - lo) / width);
            counts[std::min(b, bins - 1)] += 1.0;
            ++total;
        }
        Series c{g.label, {}, {}};
        for (std::size_t b = 0; b < bins; ++b) {
            const double density = total > 0 ? counts[b] / static_cast<double>(total) : 0.0;
            c.x.push_back(lo + width * static_cast<double>(b));
            c.y.push_back(density);
            c.x.push_back(lo + width * static_cast<double>(b + 1));
            c.y.push_back(density);
        }
        curves.push_back(std::move(c));
    }
    PlotSpec lin = spec;
    lin.log_x = false;
    lin.log_y = false;
    return line_plot_svg(lin, curves);
}

} // namespace qpg::cli
