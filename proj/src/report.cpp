#include "spectralflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>

namespace spectralflow {

double Histogram::mass() const {
    double m = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) m += density[k] * (edges[k + 1] - edges[k]);
    return m;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace

Histogram freedman_diaconis(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("histogram needs at least one value");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    const double lo = values.front(), hi = values.back();

    Histogram h;
    if (lo == hi) {
        h.edges = {lo - 0.5, lo + 0.5};
        h.density = {1.0};
        return h;
    }
    const double iqr = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
    double width = 2.0 * iqr / std::cbrt(n);
    if (!(width > 0.0)) width = (hi - lo) / std::ceil(std::sqrt(n));
    int bins = static_cast<int>(std::ceil((hi - lo) / width));
    bins = std::clamp(bins, 1, 2048);

    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int k = 0; k <= bins; ++k)
        h.edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
    h.edges.back() = hi;

    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
        int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        k = std::clamp(k, 0, bins - 1);  // right edge closes the last bin
        counts[static_cast<std::size_t>(k)] += 1.0;
    }
    h.density.resize(counts.size());
    for (int k = 0; k < bins; ++k) {
        const auto u = static_cast<std::size_t>(k);
        h.density[u] = counts[u] / (n * (h.edges[u + 1] - h.edges[u]));
    }
    return h;
}

namespace {

constexpr double kW = 640.0, kH = 420.0;
constexpr double kLeft = 64.0, kRight = 616.0, kTop = 44.0, kBottom = 376.0;
const char* const kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

void appendf(std::string& out, const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    out += buf;
}

struct Frame2D {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kRight - kLeft); }
    double py(double y) const { return kBottom - (y - y0) / (y1 - y0) * (kBottom - kTop); }
};

std::string svg_open(const std::string& title) {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "viewBox=\"0 0 640 420\">\n";
    s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    appendf(s,
            "<text x=\"%.1f\" y=\"24\" font-family=\"monospace\" font-size=\"14\" "
            "text-anchor=\"middle\">%s</text>\n",
            kW / 2, title.c_str());
    return s;
}

void svg_axes(std::string& s, const Frame2D& f, const std::string& xl, const std::string& yl) {
    appendf(s,
            "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
            "stroke=\"black\"/>\n",
            kLeft, kTop, kRight - kLeft, kBottom - kTop);
    appendf(s,
            "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
            "text-anchor=\"start\">%.6g</text>\n",
            kLeft, kBottom + 16.0, f.x0);
    appendf(s,
            "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
            "text-anchor=\"end\">%.6g</text>\n",
            kRight, kBottom + 16.0, f.x1);
    appendf(s,
            "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
            "text-anchor=\"end\">%.6g</text>\n",
            kLeft - 6.0, kBottom, f.y0);
    appendf(s,
            "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
            "text-anchor=\"end\">%.6g</text>\n",
            kLeft - 6.0, kTop + 10.0, f.y1);
    appendf(s,
            "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"12\" "
            "text-anchor=\"middle\">%s</text>\n",
            (kLeft + kRight) / 2, kH - 8.0, xl.c_str());
    appendf(s,
            "<text x=\"14\" y=\"%.1f\" font-family=\"monospace\" font-size=\"12\" "
            "text-anchor=\"middle\" transform=\"rotate(-90 14 %.1f)\">%s</text>\n",
            (kTop + kBottom) / 2, (kTop + kBottom) / 2, yl.c_str());
}

void svg_polyline(std::string& s, const Frame2D& f, const std::vector<double>& xs,
                  const std::vector<double>& ys, const char* color) {
    if (xs.size() < 2) return;
    s += "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        appendf(s, "%s%.2f,%.2f", i ? " " : "", f.px(xs[i]), f.py(ys[i]));
    s += "\"/>\n";
}

}  // namespace

std::string svg_histogram(const Histogram& hist, const XYSeries& overlay,
                          const std::string& title) {
    Frame2D f;
    f.x0 = hist.edges.front();
    f.x1 = hist.edges.back();
    double ymax = 0.0;
    for (double d : hist.density) ymax = std::max(ymax, d);
    for (double y : overlay.y) ymax = std::max(ymax, y);
    f.y1 = ymax > 0.0 ? 1.08 * ymax : 1.0;

    std::string s = svg_open(title);
    for (std::size_t k = 0; k < hist.density.size(); ++k) {
        const double x = f.px(hist.edges[k]);
        const double w = f.px(hist.edges[k + 1]) - x;
        const double y = f.py(hist.density[k]);
        appendf(s,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#9ecae1\" "
                "stroke=\"#3182bd\" stroke-width=\"0.5\"/>\n",
                x, y, w, kBottom - y);
    }
    svg_polyline(s, f, overlay.x, overlay.y, kPalette[1]);
    if (!overlay.label.empty())
        appendf(s,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
                "fill=\"%s\" text-anchor=\"end\">%s</text>\n",
                kRight - 6.0, kTop + 14.0, kPalette[1], overlay.label.c_str());
    svg_axes(s, f, "x", "density");
    s += "</svg>\n";
    return s;
}

std::string svg_lines(const std::vector<XYSeries>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label) {
    Frame2D f;
    bool first = true;
    for (const auto& sr : series)
        for (std::size_t i = 0; i < sr.x.size(); ++i) {
            if (first) {
                f.x0 = f.x1 = sr.x[i];
                f.y0 = f.y1 = sr.y[i];
                first = false;
            }
            f.x0 = std::min(f.x0, sr.x[i]);
            f.x1 = std::max(f.x1, sr.x[i]);
            f.y0 = std::min(f.y0, sr.y[i]);
            f.y1 = std::max(f.y1, sr.y[i]);
        }
    if (first) f = Frame2D{};
    if (f.x1 == f.x0) f.x1 = f.x0 + 1.0;
    if (f.y1 == f.y0) f.y1 = f.y0 + 1.0;
    f.y0 = std::min(0.0, f.y0);
    f.y1 *= 1.08;

    std::string s = svg_open(title);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % 6];
        svg_polyline(s, f, series[i].x, series[i].y, color);
        for (std::size_t k = 0; k < series[i].x.size(); ++k)
            appendf(s, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.2\" fill=\"%s\"/>\n",
                    f.px(series[i].x[k]), f.py(series[i].y[k]), color);
        appendf(s,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
                "fill=\"%s\" text-anchor=\"end\">%s</text>\n",
                kRight - 6.0, kTop + 14.0 + 13.0 * static_cast<double>(i), color,
                series[i].label.c_str());
    }
    svg_axes(s, f, x_label, y_label);
    s += "</svg>\n";
    return s;
}

std::string svg_heatmap(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<double>& values, const std::string& title) {
    if (xs.empty() || ys.empty() || values.size() != xs.size() * ys.size())
        throw std::invalid_argument("heatmap shape mismatch");
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) vmax = 1.0;

    Frame2D f{xs.front(), xs.back(), ys.front(), ys.back()};
    if (f.x1 == f.x0) f.x1 = f.x0 + 1.0;
    if (f.y1 == f.y0) f.y1 = f.y0 + 1.0;
    const double cw = (kRight - kLeft) / static_cast<double>(xs.size());
    const double ch = (kBottom - kTop) / static_cast<double>(ys.size());

    std::string s = svg_open(title);
    for (std::size_t r = 0; r < ys.size(); ++r)
        for (std::size_t c = 0; c < xs.size(); ++c) {
            const double w = std::abs(values[r * xs.size() + c]) / vmax;
            const int red = static_cast<int>(std::lround(255.0 - w * (255.0 - 8.0)));
            const int green = static_cast<int>(std::lround(255.0 - w * (255.0 - 48.0)));
            const int blue = static_cast<int>(std::lround(255.0 - w * (255.0 - 107.0)));
            appendf(s,
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                    "fill=\"rgb(%d,%d,%d)\"/>\n",
                    kLeft + cw * static_cast<double>(c),
                    kBottom - ch * static_cast<double>(r + 1), cw, ch, red, green, blue);
        }
    appendf(s,
            "<text x=\"%.1f\" y=\"%.1f\" font-family=\"monospace\" font-size=\"11\" "
            "text-anchor=\"end\">max %.6g</text>\n",
            kRight - 6.0, kTop - 6.0, vmax);
    svg_axes(s, f, "E", "t");
    s += "</svg>\n";
    return s;
}

}  // namespace spectralflow
