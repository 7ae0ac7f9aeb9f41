#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfpa/csv.hpp"

namespace mfpa {

// Minimal static SVG charts: line series with optional error bars, and
// histograms. Batch artifacts only, no styling knobs.
class SvgChart {
public:
    SvgChart(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add_series(std::string name, std::vector<double> x, std::vector<double> y,
                    std::vector<double> y_err = {}) {
        if (x.size() != y.size() || (!y_err.empty() && y_err.size() != y.size()))
            throw std::invalid_argument("svg: series length mismatch");
        series_.push_back({std::move(name), std::move(x), std::move(y), std::move(y_err)});
    }

    void write(const std::string& path) const {
        double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
        double y_lo = x_lo, y_hi = -x_lo;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                double e = s.y_err.empty() ? 0.0 : s.y_err[i];
                x_lo = std::min(x_lo, s.x[i]);
                x_hi = std::max(x_hi, s.x[i]);
                y_lo = std::min(y_lo, s.y[i] - e);
                y_hi = std::max(y_hi, s.y[i] + e);
            }
        }
        if (!(x_lo <= x_hi)) { x_lo = 0.0; x_hi = 1.0; y_lo = 0.0; y_hi = 1.0; }
        if (x_hi == x_lo) x_hi = x_lo + 1.0;
        if (y_hi == y_lo) { y_hi = y_lo + 0.5; y_lo -= 0.5; }
        double pad_y = 0.05 * (y_hi - y_lo);
        y_lo -= pad_y;
        y_hi += pad_y;

        auto px = [&](double x) { return margin_ + (x - x_lo) / (x_hi - x_lo) * plot_w_; };
        auto py = [&](double y) { return margin_ + plot_h_ - (y - y_lo) / (y_hi - y_lo) * plot_h_; };

        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
            << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
        svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        svg << "<text x=\"" << width_ / 2 << "\" y=\"18\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"14\">" << title_ << "</text>\n";
        svg << "<rect x=\"" << margin_ << "\" y=\"" << margin_ << "\" width=\"" << plot_w_
            << "\" height=\"" << plot_h_ << "\" fill=\"none\" stroke=\"black\"/>\n";
        // axis labels and end ticks
        svg << "<text x=\"" << width_ / 2 << "\" y=\"" << height_ - 6
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << x_label_ << "</text>\n";
        svg << "<text x=\"12\" y=\"" << height_ / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
            << "transform=\"rotate(-90 12 " << height_ / 2 << ")\">" << y_label_ << "</text>\n";
        for (int k = 0; k <= 4; ++k) {
            double xv = x_lo + (x_hi - x_lo) * k / 4.0;
            double yv = y_lo + (y_hi - y_lo) * k / 4.0;
            svg << "<text x=\"" << px(xv) << "\" y=\"" << margin_ + plot_h_ + 14
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">"
                << short_num(xv) << "</text>\n";
            svg << "<text x=\"" << margin_ - 4 << "\" y=\"" << py(yv) + 3
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\">"
                << short_num(yv) << "</text>\n";
        }
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                       "#ff7f0e", "#8c564b"};
        for (std::size_t s = 0; s < series_.size(); ++s) {
            const auto& ser = series_[s];
            const char* color = colors[s % 6];
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < ser.x.size(); ++i)
                svg << px(ser.x[i]) << ',' << py(ser.y[i]) << ' ';
            svg << "\"/>\n";
            for (std::size_t i = 0; i < ser.y_err.size(); ++i) {
                if (ser.y_err[i] <= 0.0) continue;
                double cx = px(ser.x[i]);
                svg << "<line x1=\"" << cx << "\" y1=\"" << py(ser.y[i] - ser.y_err[i])
                    << "\" x2=\"" << cx << "\" y2=\"" << py(ser.y[i] + ser.y_err[i])
                    << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
            }
            svg << "<text x=\"" << margin_ + 8 << "\" y=\"" << margin_ + 14 + 13 * double(s)
                << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << color << "\">"
                << ser.name << "</text>\n";
        }
        svg << "</svg>\n";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << svg.str();
    }

private:
    struct Series {
        std::string name;
        std::vector<double> x, y, y_err;
    };

    static std::string short_num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
    int width_ = 640, height_ = 420, margin_ = 50;
    int plot_w_ = width_ - 2 * margin_, plot_h_ = height_ - 2 * margin_;
};

// Equal-width bin histogram written as an SVG bar chart.
inline void write_histogram_svg(const std::string& path, const std::string& title,
                                const std::vector<double>& sample, int n_bins = 60) {
    if (sample.empty() || n_bins < 1) throw std::invalid_argument("histogram: empty input");
    double lo = *std::min_element(sample.begin(), sample.end());
    double hi = *std::max_element(sample.begin(), sample.end());
    if (hi == lo) hi = lo + 1.0;
    std::vector<double> counts(std::size_t(n_bins), 0.0);
    for (double v : sample) {
        auto b = std::size_t((v - lo) / (hi - lo) * n_bins);
        if (b >= counts.size()) b = counts.size() - 1;
        counts[b] += 1.0;
    }
    std::vector<double> centers(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b)
        centers[b] = lo + (double(b) + 0.5) * (hi - lo) / n_bins;
    SvgChart chart(title, "value", "count");
    chart.add_series("histogram", centers, counts);
    chart.write(path);
}

}  // namespace mfpa
