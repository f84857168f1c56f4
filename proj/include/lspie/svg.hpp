#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lspie {

/// One curve of a panel; x is the implicit sample index.
struct SvgSeries {
    std::string label;
    std::vector<double> y;
};

/// Render a titled polyline panel with axes, tick labels and a legend.
/// Self-contained SVG, no external dependencies; long series are decimated
/// for display. Output is deterministic for identical inputs.
std::string render_svg_panel(const std::string& title, const std::vector<SvgSeries>& series,
                             int width = 900, int height = 280);

void write_svg_panel(const std::string& title, const std::vector<SvgSeries>& series,
                     const std::filesystem::path& path, int width = 900, int height = 280);

}  // namespace lspie
