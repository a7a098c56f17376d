#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace combnet {

// One polyline of (x, y) points.
struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Static line chart with axes and tick labels; enough for response curves
// and f0 trajectories.
void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<SvgSeries>& series);

}  // namespace combnet
