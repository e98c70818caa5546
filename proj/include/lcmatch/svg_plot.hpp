#pragma once

#include "lcmatch/maps_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lcmatch {

// Minimal self-contained SVG output: axes, line/scatter marks, labels.
// Plots are a rendering convenience only; the numbers always live in a
// sibling CSV.

struct PlotSeries {
    enum class Mark { Line, Scatter };
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    Mark mark = Mark::Line;
    std::string color = "#1f77b4";
};

struct PlotLabels {
    std::string title;
    std::string x_label;
    std::string y_label;
};

void write_xy_svg(const std::filesystem::path& path, const PlotLabels& labels,
                  const std::vector<PlotSeries>& series);

/// Exact plotted numbers, one row per point: series index, label, x, y.
void write_xy_csv(const std::filesystem::path& path, const std::vector<PlotSeries>& series);

/// Heatmap of a sweep grid (gate on x, bias on y); masked cells are grey.
/// The matching numbers are the grid CSV itself.
void write_heatmap_svg(const std::filesystem::path& path, const SweepGrid& grid,
                       const std::string& title);

} // namespace lcmatch
