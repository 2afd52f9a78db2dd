#include "svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace wavespeed::cli {

namespace {

constexpr double kWidth = 960, kHeight = 600;
constexpr double kLeft = 80, kRight = 200, kTop = 50, kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
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

}  // namespace

void write_line_chart(std::ostream& os, const std::string& title, const std::string& x_label,
                      const std::vector<double>& x, const std::vector<Series>& series) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (double v : x) {
        x_lo = std::min(x_lo, v);
        x_hi = std::max(x_hi, v);
    }
    for (const auto& s : series) {
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1;
    if (!std::isfinite(y_lo)) y_lo = 0, y_hi = 1;
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;
    y_lo = std::min(y_lo, 0.0);

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double v) { return kTop + (1.0 - (v - y_lo) / (y_hi - y_lo)) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 600\" width=\"960\" height=\"600\" "
          "font-family=\"sans-serif\" font-size=\"13\">\n";
    os << "<rect width=\"960\" height=\"600\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(title) << "</text>\n";
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
       << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    constexpr int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double xv = x_lo + (x_hi - x_lo) * i / ticks;
        const double yv = y_lo + (y_hi - y_lo) * i / ticks;
        os << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(xv))
           << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>"
           << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 20) << "\" text-anchor=\"middle\">"
           << tick_label(xv) << "</text>\n";
        os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft)
           << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\"/>"
           << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
           << tick_label(yv) << "</text>\n";
    }
    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15) << "\" text-anchor=\"middle\">"
       << escape(x_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % std::size(kPalette)];
        std::string pts;
        auto flush = [&]() {
            if (!pts.empty()) {
                os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts
                   << "\"/>\n";
                pts.clear();
            }
        };
        const auto& y = series[s].y;
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
            if (!std::isfinite(y[i]) || y[i] > y_hi) {
                flush();
                continue;
            }
            if (!pts.empty()) pts += ' ';
            pts += num(px(x[i])) + "," + num(py(y[i]));
        }
        flush();
        const double ly = kTop + 10 + 22.0 * static_cast<double>(s);
        os << "<line x1=\"" << num(kWidth - kRight + 15) << "\" y1=\"" << num(ly) << "\" x2=\""
           << num(kWidth - kRight + 40) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/><text x=\"" << num(kWidth - kRight + 46) << "\" y=\"" << num(ly + 4)
           << "\">" << escape(series[s].name) << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace wavespeed::cli
