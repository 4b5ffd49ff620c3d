#pragma once

#include <span>
#include <string>
#include <vector>

namespace powerplan::plot {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct Marker {
    double x = 0.0;
    std::string color = "#000000";
    bool dotted = false;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<Series> series;
    std::vector<Marker> markers;  // vertical lines
};

std::string render_svg(const Chart& chart, int width = 720, int height = 440);

// Histogram density of `samples` on `bins` equal bins over [lo, hi], as a
// step series.
Series density_series(std::span<const double> samples, double lo, double hi, int bins, std::string label,
                      std::string color);

}  // namespace powerplan::plot
