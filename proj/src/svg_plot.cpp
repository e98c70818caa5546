#include "lcmatch/svg_plot.hpp"

#include "lcmatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace lcmatch {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 24, kTop = 36, kBottom = 52;

struct Range {
    double lo = 0.0, hi = 1.0;
};

Range finite_range(const std::vector<PlotSeries>& series, bool use_x) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        const auto& v = use_x ? s.x : s.y;
        for (double value : v) {
            if (!std::isfinite(value)) continue;
            lo = std::min(lo, value);
            hi = std::max(hi, value);
        }
    }
    if (!(lo <= hi)) return {0.0, 1.0};
    if (lo == hi) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

double nice_step(double range, int target_ticks) {
    const double raw = range / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 5.0, 10.0})
        if (mult * mag >= raw) return mult * mag;
    return 10.0 * mag;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_full(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string escape_xml(const std::string& text) {
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

// five-stop viridis-like ramp
std::string ramp_color(double t) {
    static const double stops[5][3] = {{0.267, 0.005, 0.329},
                                       {0.229, 0.322, 0.545},
                                       {0.127, 0.566, 0.551},
                                       {0.369, 0.789, 0.383},
                                       {0.993, 0.906, 0.144}};
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * 4.0;
    const int k = std::min(static_cast<int>(pos), 3);
    const double u = pos - k;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(255 * (stops[k][0] * (1 - u) + stops[k + 1][0] * u))),
                  static_cast<int>(std::lround(255 * (stops[k][1] * (1 - u) + stops[k + 1][1] * u))),
                  static_cast<int>(std::lround(255 * (stops[k][2] * (1 - u) + stops[k + 1][2] * u))));
    return buf;
}

} // namespace

void write_xy_svg(const std::filesystem::path& path, const PlotLabels& labels,
                  const std::vector<PlotSeries>& series) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path.string());

    const Range xr = finite_range(series, true);
    const Range yr = finite_range(series, false);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto sy = [&](double y) { return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };

    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
       << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << kWidth / 2 << "' y='20' text-anchor='middle' font-size='15' "
          "font-family='sans-serif'>"
       << escape_xml(labels.title) << "</text>\n";

    // frame
    os << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << plot_w << "' height='"
       << plot_h << "' fill='none' stroke='black'/>\n";

    // ticks
    const double xstep = nice_step(xr.hi - xr.lo, 6);
    for (double t = std::ceil(xr.lo / xstep) * xstep; t <= xr.hi + 1e-12 * xstep; t += xstep) {
        os << "<line x1='" << sx(t) << "' y1='" << kTop + plot_h << "' x2='" << sx(t) << "' y2='"
           << kTop + plot_h + 5 << "' stroke='black'/>\n";
        os << "<text x='" << sx(t) << "' y='" << kTop + plot_h + 18
           << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << fmt(t)
           << "</text>\n";
    }
    const double ystep = nice_step(yr.hi - yr.lo, 6);
    for (double t = std::ceil(yr.lo / ystep) * ystep; t <= yr.hi + 1e-12 * ystep; t += ystep) {
        os << "<line x1='" << kLeft - 5 << "' y1='" << sy(t) << "' x2='" << kLeft << "' y2='"
           << sy(t) << "' stroke='black'/>\n";
        os << "<text x='" << kLeft - 8 << "' y='" << sy(t) + 4
           << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << fmt(t)
           << "</text>\n";
    }
    os << "<text x='" << kLeft + plot_w / 2 << "' y='" << kHeight - 12
       << "' text-anchor='middle' font-size='13' font-family='sans-serif'>"
       << escape_xml(labels.x_label) << "</text>\n";
    os << "<text x='16' y='" << kTop + plot_h / 2
       << "' text-anchor='middle' font-size='13' font-family='sans-serif' transform='rotate(-90 16 "
       << kTop + plot_h / 2 << ")'>" << escape_xml(labels.y_label) << "</text>\n";

    // marks
    for (const auto& srs : series) {
        if (srs.mark == PlotSeries::Mark::Line) {
            os << "<polyline fill='none' stroke='" << srs.color << "' stroke-width='1.5' points='";
            for (std::size_t i = 0; i < srs.x.size(); ++i) {
                if (!std::isfinite(srs.x[i]) || !std::isfinite(srs.y[i])) continue;
                os << fmt(sx(srs.x[i])) << "," << fmt(sy(srs.y[i])) << " ";
            }
            os << "'/>\n";
        } else {
            for (std::size_t i = 0; i < srs.x.size(); ++i) {
                if (!std::isfinite(srs.x[i]) || !std::isfinite(srs.y[i])) continue;
                os << "<circle cx='" << fmt(sx(srs.x[i])) << "' cy='" << fmt(sy(srs.y[i]))
                   << "' r='2.5' fill='" << srs.color << "' fill-opacity='0.7'/>\n";
            }
        }
    }

    // legend
    double ly = kTop + 14;
    for (const auto& srs : series) {
        if (srs.label.empty()) continue;
        os << "<line x1='" << kLeft + plot_w - 150 << "' y1='" << ly - 4 << "' x2='"
           << kLeft + plot_w - 130 << "' y2='" << ly - 4 << "' stroke='" << srs.color
           << "' stroke-width='2'/>\n";
        os << "<text x='" << kLeft + plot_w - 124 << "' y='" << ly
           << "' font-size='11' font-family='sans-serif'>" << escape_xml(srs.label)
           << "</text>\n";
        ly += 16;
    }
    os << "</svg>\n";
}

void write_xy_csv(const std::filesystem::path& path, const std::vector<PlotSeries>& series) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path.string());
    os << "# columns: series,label,x,y\n";
    for (std::size_t s = 0; s < series.size(); ++s)
        for (std::size_t i = 0; i < series[s].x.size(); ++i)
            os << s << "," << series[s].label << "," << fmt_full(series[s].x[i]) << ","
               << fmt_full(series[s].y[i]) << "\n";
}

void write_heatmap_svg(const std::filesystem::path& path, const SweepGrid& grid,
                       const std::string& title) {
    validate(grid);
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path.string());

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        if (grid.mask[i] || !std::isfinite(grid.values[i])) continue;
        lo = std::min(lo, grid.values[i]);
        hi = std::max(hi, grid.values[i]);
    }
    if (!(lo <= hi)) { lo = 0.0; hi = 1.0; }
    if (lo == hi) hi = lo + 1.0;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const double cw = plot_w / static_cast<double>(grid.n_gate());
    const double ch = plot_h / static_cast<double>(grid.n_bias());

    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
       << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << kWidth / 2 << "' y='20' text-anchor='middle' font-size='15' "
          "font-family='sans-serif'>"
       << escape_xml(title) << " [" << escape_xml(unit_name(grid.unit)) << ", " << fmt(lo)
       << " to " << fmt(hi) << "]</text>\n";
    char buf[160];
    for (std::size_t g = 0; g < grid.n_gate(); ++g) {
        for (std::size_t b = 0; b < grid.n_bias(); ++b) {
            const double x = kLeft + cw * static_cast<double>(g);
            const double y = kTop + plot_h - ch * static_cast<double>(b + 1); // bias upward
            const std::string color = grid.is_masked(g, b)
                                          ? "#bbbbbb"
                                          : ramp_color((grid.at(g, b) - lo) / (hi - lo));
            std::snprintf(buf, sizeof(buf),
                          "<rect x='%.2f' y='%.2f' width='%.2f' height='%.2f' fill='%s'/>\n", x,
                          y, cw + 0.5, ch + 0.5, color.c_str());
            os << buf;
        }
    }
    os << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << plot_w << "' height='"
       << plot_h << "' fill='none' stroke='black'/>\n";
    os << "<text x='" << kLeft + plot_w / 2 << "' y='" << kHeight - 12
       << "' text-anchor='middle' font-size='13' font-family='sans-serif'>gate voltage (V), "
       << fmt(grid.gate_axis.front()) << " to " << fmt(grid.gate_axis.back()) << "</text>\n";
    os << "<text x='16' y='" << kTop + plot_h / 2
       << "' text-anchor='middle' font-size='13' font-family='sans-serif' transform='rotate(-90 16 "
       << kTop + plot_h / 2 << ")'>bias voltage (V), " << fmt(grid.bias_axis.front()) << " to "
       << fmt(grid.bias_axis.back()) << "</text>\n";
    os << "</svg>\n";
}

} // namespace lcmatch
