#include "lspie/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace lspie {

namespace {

constexpr const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                                    "#66ccee", "#aa3377", "#888888", "#222222"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg_panel(const std::string& title, const std::vector<SvgSeries>& series,
                             int width, int height) {
    if (series.empty()) throw std::invalid_argument("render_svg_panel: no series");

    const double ml = 64, mr = 16, mt = 34, mb = 34;
    const double pw = width - ml - mr;
    const double ph = height - mt - mb;

    std::size_t max_len = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        max_len = std::max(max_len, s.y.size());
        for (double v : s.y) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (max_len < 2) throw std::invalid_argument("render_svg_panel: series too short");
    if (!(hi > lo)) {
        hi += 0.5;
        lo -= 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const auto sx = [&](double i) { return ml + pw * i / static_cast<double>(max_len - 1); };
    const auto sy = [&](double v) { return mt + ph * (hi - v) / (hi - lo); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(ml) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" "
           "font-weight=\"bold\" fill=\"#222\">" + escape(title) + "</text>\n";

    // Frame and ticks.
    svg += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(pw) + "\" height=\"" +
           num(ph) + "\" fill=\"none\" stroke=\"#999\"/>\n";
    for (int t = 0; t <= 2; ++t) {
        const double frac = t / 2.0;
        const double xi = frac * static_cast<double>(max_len - 1);
        svg += "<text x=\"" + num(sx(xi)) + "\" y=\"" + num(height - 12.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" text-anchor=\"middle\">" +
               std::to_string(static_cast<long>(xi)) + "</text>\n";
        const double yv = lo + frac * (hi - lo);
        char lab[32];
        std::snprintf(lab, sizeof(lab), "%.3g", yv);
        svg += "<text x=\"" + num(ml - 6.0) + "\" y=\"" + num(sy(yv) + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\" text-anchor=\"end\">" +
               lab + "</text>\n";
    }
    if (lo < 0.0 && hi > 0.0)
        svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(sy(0.0)) + "\" x2=\"" + num(ml + pw) +
               "\" y2=\"" + num(sy(0.0)) + "\" stroke=\"#ddd\"/>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& y = series[s].y;
        if (y.size() < 2) continue;
        const std::size_t step = std::max<std::size_t>(1, y.size() / 1200);
        std::string points;
        for (std::size_t i = 0; i < y.size(); i += step)
            points += num(sx(static_cast<double>(i))) + "," + num(sy(y[i])) + " ";
        if ((y.size() - 1) % step != 0)
            points += num(sx(static_cast<double>(y.size() - 1))) + "," + num(sy(y.back()));
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[s % kPaletteSize]) +
               "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
    }

    // Legend, top-right inside the frame.
    double ly = mt + 14.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double lx = ml + pw - 150.0;
        svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4.0) + "\" x2=\"" + num(lx + 22.0) +
               "\" y2=\"" + num(ly - 4.0) + "\" stroke=\"" + kPalette[s % kPaletteSize] +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(lx + 28.0) + "\" y=\"" + num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">" +
               escape(series[s].label) + "</text>\n";
        ly += 14.0;
    }

    svg += "</svg>\n";
    return svg;
}

void write_svg_panel(const std::string& title, const std::vector<SvgSeries>& series,
                     const std::filesystem::path& path, int width, int height) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << render_svg_panel(title, series, width, height);
}

}  // namespace lspie
