#pragma once

#include "lcmatch/circuit_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lcmatch {

enum class Unit { Amperes, Siemens, Dimensionless, Watts, AmpSqPerHz };

std::string unit_name(Unit unit);
Unit unit_from_name(const std::string& name);

/// One measured or derived quantity on a (V_G, V_SD) sweep. Axes are strictly
/// increasing volts; values are row-major with the gate index outermost.
/// Masked cells hold NaN and are flagged in mask; the two views never
/// disagree.
struct SweepGrid {
    std::vector<double> gate_axis; // V
    std::vector<double> bias_axis; // V
    Unit unit = Unit::Dimensionless;
    std::vector<double> values;
    std::vector<std::uint8_t> mask; // 1 = masked

    static SweepGrid make(std::vector<double> gate, std::vector<double> bias, Unit unit,
                          double fill = 0.0);

    std::size_t n_gate() const { return gate_axis.size(); }
    std::size_t n_bias() const { return bias_axis.size(); }
    std::size_t index(std::size_t g, std::size_t b) const { return g * bias_axis.size() + b; }
    double at(std::size_t g, std::size_t b) const { return values[index(g, b)]; }
    double& at(std::size_t g, std::size_t b) { return values[index(g, b)]; }
    bool is_masked(std::size_t g, std::size_t b) const { return mask[index(g, b)] != 0; }
    /// Mask a cell: flag it and clear the value slot to NaN.
    void mask_cell(std::size_t g, std::size_t b);
    std::size_t masked_count() const;
    bool same_axes(const SweepGrid& other) const;
};

/// Throw DomainError unless axes are strictly increasing and sizes agree.
void validate(const SweepGrid& grid);

/// CSV schema (lossless, diff-friendly):
///   # unit: <unit>
///   # gate_axis: v1,v2,...
///   # bias_axis: v1,v2,...
///   one comma-separated row per gate value, 17 significant digits,
///   masked cells written as NaN.
void save_grid(const SweepGrid& grid, const std::filesystem::path& path);
SweepGrid load_grid(const std::filesystem::path& path);
SweepGrid load_grid(const std::filesystem::path& path, Unit expected_unit);

/// Sidecar path for grid metadata: "<grid path>.meta.json".
std::filesystem::path metadata_path_for(const std::filesystem::path& grid_path);
void save_grid_metadata(const std::filesystem::path& grid_path, const std::string& json_text);

/// dI/dV_SD by central differences along the bias axis (second-order
/// one-sided stencils at the edges, exact for linear maps). Requires a
/// current map in amperes with at least 3 bias points.
SweepGrid differential_conductance(const SweepGrid& current_map);

enum class Branch { Low, High };

struct InversionOptions {
    Branch branch = Branch::Low;
    double out_of_model_epsilon = 0.02;    // tolerated fractional excess above baseline
    double conductance_tolerance = 1e-12;  // S, bisection bracket width
    int max_iterations = 200;
    double g_max = 0.0;                    // high-branch ceiling; 0 = auto
};

struct InversionResult {
    SweepGrid conductance;
    double branch_boundary = 0.0; // S, argmin of the reflectance curve at f_m
    double curve_minimum = 0.0;   // reflectance value at the boundary
    // cells assigned the boundary conductance because they fell below the
    // curve minimum, and cells rejected as inconsistent with the model
    std::vector<std::pair<std::size_t, std::size_t>> below_minimum_cells;
    std::vector<std::pair<std::size_t, std::size_t>> out_of_model_cells;
};

/// Invert baseline * |Gamma(G, f)|^2 = measured reflectance cell-wise by
/// bisection on the selected monotone branch. Below-minimum cells get the
/// boundary conductance and a flag; out-of-model cells (reflectance above
/// baseline * (1 + eps)) are masked and flagged, never fatal.
InversionResult conductance_from_reflectance(const SweepGrid& reflectance_map,
                                             const CircuitParams& params, double baseline,
                                             double frequency,
                                             const InversionOptions& options = {});

enum class CutAxis { Gate, Bias };

struct Cut {
    double axis_value_used = 0.0; // coordinate of the gridline actually taken
    std::size_t index = 0;
    std::vector<double> coordinates; // the other axis
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
};

/// Nearest-gridline cut at the given axis value (ties toward the lower
/// index). CutAxis::Gate fixes a gate voltage and returns a series over bias.
Cut extract_cut(const SweepGrid& grid, CutAxis axis, double value);

} // namespace lcmatch
