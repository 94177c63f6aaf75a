#pragma once

#include <string>
#include <utility>
#include <vector>

namespace spectralflow {

// Normalized histogram: sum(density * width) == 1 up to rounding.
struct Histogram {
    std::vector<double> edges;    // bins + 1, ascending
    std::vector<double> density;  // bins
    double mass() const;
};

// Freedman-Diaconis binning (bin width 2 IQR / n^{1/3}); degenerate samples
// collapse to a single unit-width bin. values need not be sorted.
Histogram freedman_diaconis(std::vector<double> values);

// Deterministic SVG builders: fixed canvas, no timestamps, printf-formatted
// coordinates, so identical inputs give identical bytes.
struct XYSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_histogram(const Histogram& hist, const XYSeries& overlay,
                          const std::string& title);
std::string svg_lines(const std::vector<XYSeries>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label);
// values laid out row-major over ys (rows) x xs (cols), colored on a linear
// ramp from white (0) to a fixed dark blue at max.
std::string svg_heatmap(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::vector<double>& values, const std::string& title);

}  // namespace spectralflow
