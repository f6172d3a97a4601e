#pragma once

#include <string>
#include <vector>

namespace flexsat {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal static line chart (polylines, axes, ticks, legend) so runs can be
// inspected without external tooling. Deterministic output.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

}  // namespace flexsat
