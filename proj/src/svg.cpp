#include "combnet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace combnet {

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<SvgSeries>& series) {
    constexpr double kWidth = 800, kHeight = 480;
    constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
        x_min = 0; x_max = 1; y_min = 0; y_max = 1;
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;

    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
        << kHeight << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16'>"
        << title << "</text>\n";
    out << "<line x1='" << kLeft << "' y1='" << kTop + plot_h << "' x2='" << kLeft + plot_w
        << "' y2='" << kTop + plot_h << "' stroke='black'/>\n";
    out << "<line x1='" << kLeft << "' y1='" << kTop << "' x2='" << kLeft << "' y2='"
        << kTop + plot_h << "' stroke='black'/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 5.0;
        const double fy = y_min + (y_max - y_min) * i / 5.0;
        out << "<text x='" << px(fx) << "' y='" << kTop + plot_h + 18
            << "' text-anchor='middle' font-size='11'>" << fx << "</text>\n";
        out << "<text x='" << kLeft - 8 << "' y='" << py(fy) + 4
            << "' text-anchor='end' font-size='11'>" << fy << "</text>\n";
    }
    out << "<text x='" << kLeft + plot_w / 2 << "' y='" << kHeight - 12
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
    out << "<text x='16' y='" << kTop + plot_h / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 "
        << kTop + plot_h / 2 << ")'>" << y_label << "</text>\n";

    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (s.points.empty()) continue;
        out << "<polyline fill='none' stroke='" << kColors[i % 8]
            << "' stroke-width='1' points='";
        for (const auto& [x, y] : s.points) {
            out << px(x) << "," << py(y) << " ";
        }
        out << "'/>\n";
    }
    out << "</svg>\n";
}

}  // namespace combnet
