#include "powerplan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace powerplan::plot {

namespace {

std::string escape(const std::string& s) {
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

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string render_svg(const Chart& chart, int width, int height) {
    const double left = 70, right = 170, top = 40, bottom = 55;
    const double pw = width - left - right;
    const double ph = height - top - bottom;

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    const auto tx = [&](double x) { return chart.log_x ? std::log10(x) : x; };
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (chart.log_x && s.x[i] <= 0) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    for (const auto& m : chart.markers) {
        x0 = std::min(x0, tx(m.x));
        x1 = std::max(x1, tx(m.x));
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    y0 = std::min(y0, 0.0);
    if (y1 <= y0) y1 = y0 + 1;
    y1 += 0.05 * (y1 - y0);

    const auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
    const auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(chart.title)
        << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = x0 + (x1 - x0) * i / 5.0;
        const double gx = left + pw * i / 5.0;
        const double label = chart.log_x ? std::pow(10.0, fx) : fx;
        svg << "<line x1=\"" << gx << "\" y1=\"" << top + ph << "\" x2=\"" << gx << "\" y2=\"" << top + ph + 5
            << "\" stroke=\"#333\"/>\n";
        svg << "<text x=\"" << gx << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(label)
            << "</text>\n";
        const double fy = y0 + (y1 - y0) * i / 5.0;
        const double gy = py(fy);
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << gy << "\" x2=\"" << left << "\" y2=\"" << gy
            << "\" stroke=\"#333\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
        << escape(chart.x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(chart.y_label) << "</text>\n";

    for (const auto& m : chart.markers) {
        svg << "<line x1=\"" << px(m.x) << "\" y1=\"" << top << "\" x2=\"" << px(m.x) << "\" y2=\"" << top + ph
            << "\" stroke=\"" << m.color << "\" stroke-dasharray=\"" << (m.dotted ? "2,3" : "6,4") << "\"/>\n";
    }

    int legend = 0;
    for (const auto& s : chart.series) {
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"";
        if (s.dashed) svg << " stroke-dasharray=\"6,4\"";
        svg << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (chart.log_x && s.x[i] <= 0) continue;
            svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        svg << "\"/>\n";
        const double ly = top + 12 + 18 * legend++;
        svg << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
            << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
            << "/>\n";
        svg << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

Series density_series(std::span<const double> samples, double lo, double hi, int bins, std::string label,
                      std::string color) {
    Series s;
    s.label = std::move(label);
    s.color = std::move(color);
    if (bins < 1 || !(hi > lo)) return s;
    std::vector<double> counts(bins, 0.0);
    const double width = (hi - lo) / bins;
    for (double v : samples) {
        auto b = static_cast<long>(std::floor((v - lo) / width));
        b = std::clamp<long>(b, 0, bins - 1);
        counts[b] += 1.0;
    }
    const double scale = samples.empty() ? 0.0 : 1.0 / (samples.size() * width);
    for (int b = 0; b < bins; ++b) {
        s.x.push_back(lo + b * width);
        s.y.push_back(counts[b] * scale);
        s.x.push_back(lo + (b + 1) * width);
        s.y.push_back(counts[b] * scale);
    }
    return s;
}

}  // namespace powerplan::plot
