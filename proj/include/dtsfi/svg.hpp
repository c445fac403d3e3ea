#pragma once

// Minimal static SVG plots: line charts, horizontal bar charts and scatter
// plots with linear axes and tick labels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dtsfi::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Bar {
    std::string label;
    double value = 0.0;
};

struct Frame {
    double width = 640;
    double height = 400;
    double left = 70;
    double right = 20;
    double top = 40;
    double bottom = 50;
    std::string title;
    std::string x_label;
    std::string y_label;
};

namespace detail {

inline constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

inline Range padded(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        const double pad = std::max(1.0, std::abs(hi)) * 0.5;
        return {lo - pad, hi + pad};
    }
    return {lo, hi};
}

/// Roughly five ticks on 1-2-5 multiples.
inline std::vector<double> ticks(Range r) {
    const double raw = (r.hi - r.lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step)
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

class Canvas {
public:
    Canvas(const Frame& f, Range x, Range y) : f_(f), x_(x), y_(y) {}

    double px(double x) const { return f_.left + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
    double py(double y) const { return f_.top + (y_.hi - y) / (y_.hi - y_.lo) * plot_h(); }
    double plot_w() const { return f_.width - f_.left - f_.right; }
    double plot_h() const { return f_.height - f_.top - f_.bottom; }

    void open(std::ostream& out) const {
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f_.width) << "\" height=\""
            << num(f_.height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (!f_.title.empty())
            out << "<text x=\"" << num(f_.width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
                << escape(f_.title) << "</text>\n";
    }

    void axes(std::ostream& out, bool x_ticks = true) const {
        const double x0 = f_.left, x1 = f_.left + plot_w();
        const double y0 = f_.top, y1 = f_.top + plot_h();
        out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(plot_w()) << "\" height=\""
            << num(plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
        if (x_ticks) {
            for (double t : ticks(x_)) {
                out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(px(t)) << "\" y2=\""
                    << num(y1 + 4) << "\" stroke=\"black\"/>\n";
                out << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y1 + 16) << "\" text-anchor=\"middle\">"
                    << num(t) << "</text>\n";
            }
        }
        for (double t : ticks(y_)) {
            out << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(x0) << "\" y2=\""
                << num(py(t)) << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">" << num(t)
                << "</text>\n";
        }
        if (!f_.x_label.empty())
            out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f_.height - 10)
                << "\" text-anchor=\"middle\">" << escape(f_.x_label) << "</text>\n";
        if (!f_.y_label.empty())
            out << "<text transform=\"translate(16," << num((y0 + y1) / 2)
                << ") rotate(-90)\" text-anchor=\"middle\">" << escape(f_.y_label) << "</text>\n";
    }

    void close(std::ostream& out) const { out << "</svg>\n"; }

private:
    Frame f_;
    Range x_, y_;
};

inline void bounds(const std::vector<double>& v, double& lo, double& hi) {
    for (double x : v)
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
}

} // namespace detail

inline void line_chart(std::ostream& out, const std::vector<Series>& series, const Frame& frame) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& s : series) {
        detail::bounds(s.x, xlo, xhi);
        detail::bounds(s.y, ylo, yhi);
    }
    const detail::Canvas c(frame, detail::padded(xlo, xhi), detail::padded(std::min(ylo, 0.0), yhi));
    c.open(out);
    c.axes(out);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = detail::palette[k % std::size(detail::palette)];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                out << detail::num(c.px(s.x[i])) << ',' << detail::num(c.py(s.y[i])) << ' ';
        out << "\"/>\n";
        if (!s.label.empty()) {
            const double ly = frame.top + 14 + 14 * static_cast<double>(k);
            const double lx = frame.width - frame.right - 120;
            out << "<line x1=\"" << detail::num(lx) << "\" y1=\"" << detail::num(ly - 4) << "\" x2=\""
                << detail::num(lx + 16) << "\" y2=\"" << detail::num(ly - 4) << "\" stroke=\"" << colour
                << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << detail::num(lx + 20) << "\" y=\"" << detail::num(ly) << "\">"
                << detail::escape(s.label) << "</text>\n";
        }
    }
    c.close(out);
}

/// Vertical bars on a symmetric value axis; undefined values are skipped.
inline void bar_chart(std::ostream& out, const std::vector<Bar>& bars, Frame frame, double limit = 1.0) {
    const detail::Canvas c(frame, {0.0, static_cast<double>(std::max<std::size_t>(bars.size(), 1))},
                           {-limit, limit});
    c.open(out);
    c.axes(out, false);
    out << "<line x1=\"" << detail::num(frame.left) << "\" y1=\"" << detail::num(c.py(0)) << "\" x2=\""
        << detail::num(frame.width - frame.right) << "\" y2=\"" << detail::num(c.py(0)) << "\" stroke=\"gray\"/>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double x0 = c.px(static_cast<double>(i) + 0.15);
        const double w = c.px(static_cast<double>(i) + 0.85) - x0;
        const double v = bars[i].value;
        if (std::isfinite(v)) {
            const double top = c.py(std::max(v, 0.0));
            const double h = std::abs(c.py(v) - c.py(0.0));
            out << "<rect x=\"" << detail::num(x0) << "\" y=\"" << detail::num(top) << "\" width=\""
                << detail::num(w) << "\" height=\"" << detail::num(h) << "\" fill=\""
                << (v >= 0 ? detail::palette[0] : detail::palette[1]) << "\"/>\n";
        }
        out << "<text x=\"" << detail::num(x0 + w / 2) << "\" y=\"" << detail::num(frame.height - frame.bottom + 16)
            << "\" text-anchor=\"middle\">" << detail::escape(bars[i].label) << "</text>\n";
    }
    c.close(out);
}

inline void scatter_plot(std::ostream& out, const Series& points, const Frame& frame) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    detail::bounds(points.x, xlo, xhi);
    detail::bounds(points.y, ylo, yhi);
    const detail::Canvas c(frame, detail::padded(xlo, xhi), detail::padded(ylo, yhi));
    c.open(out);
    c.axes(out);
    for (std::size_t i = 0; i < std::min(points.x.size(), points.y.size()); ++i)
        if (std::isfinite(points.x[i]) && std::isfinite(points.y[i]))
            out << "<circle cx=\"" << detail::num(c.px(points.x[i])) << "\" cy=\"" << detail::num(c.py(points.y[i]))
                << "\" r=\"1.6\" fill=\"" << detail::palette[0] << "\" fill-opacity=\"0.6\"/>\n";
    c.close(out);
}

} // namespace dtsfi::svg
