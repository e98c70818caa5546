#include "lcmatch/maps_io.hpp"

#include "lcmatch/errors.hpp"
#include "lcmatch/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace lcmatch {

std::string unit_name(Unit unit) {
    switch (unit) {
    case Unit::Amperes: return "amperes";
    case Unit::Siemens: return "siemens";
    case Unit::Dimensionless: return "dimensionless";
    case Unit::Watts: return "watts";
    case Unit::AmpSqPerHz: return "A^2/Hz";
    }
    throw DomainError("unit_name: unknown unit");
}

Unit unit_from_name(const std::string& name) {
    if (name == "amperes") return Unit::Amperes;
    if (name == "siemens") return Unit::Siemens;
    if (name == "dimensionless") return Unit::Dimensionless;
    if (name == "watts") return Unit::Watts;
    if (name == "A^2/Hz") return Unit::AmpSqPerHz;
    throw ParseError("unknown unit name: " + name);
}

SweepGrid SweepGrid::make(std::vector<double> gate, std::vector<double> bias, Unit unit,
                          double fill) {
    SweepGrid grid;
    grid.gate_axis = std::move(gate);
    grid.bias_axis = std::move(bias);
    grid.unit = unit;
    grid.values.assign(grid.gate_axis.size() * grid.bias_axis.size(), fill);
    grid.mask.assign(grid.values.size(), 0);
    validate(grid);
    return grid;
}

void SweepGrid::mask_cell(std::size_t g, std::size_t b) {
    mask[index(g, b)] = 1;
    values[index(g, b)] = std::numeric_limits<double>::quiet_NaN();
}

std::size_t SweepGrid::masked_count() const {
    std::size_t n = 0;
    for (auto m : mask) n += m != 0;
    return n;
}

bool SweepGrid::same_axes(const SweepGrid& other) const {
    return gate_axis == other.gate_axis && bias_axis == other.bias_axis;
}

void validate(const SweepGrid& grid) {
    if (grid.gate_axis.empty() || grid.bias_axis.empty())
        throw DomainError("grid: axes must be non-empty");
    for (std::size_t i = 1; i < grid.gate_axis.size(); ++i)
        if (!(grid.gate_axis[i] > grid.gate_axis[i - 1]))
            throw DomainError("grid: gate axis not strictly increasing at entry " +
                              std::to_string(i));
    for (std::size_t i = 1; i < grid.bias_axis.size(); ++i)
        if (!(grid.bias_axis[i] > grid.bias_axis[i - 1]))
            throw DomainError("grid: bias axis not strictly increasing at entry " +
                              std::to_string(i));
    if (grid.values.size() != grid.gate_axis.size() * grid.bias_axis.size())
        throw DomainError("grid: value count does not match axes");
    if (grid.mask.size() != grid.values.size())
        throw DomainError("grid: mask count does not match values");
}

namespace {

// 17 significant digits: lossless for IEEE-754 doubles.
std::string format_value(double v, bool masked) {
    if (masked || std::isnan(v)) return "NaN";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_axis(std::ostream& os, const char* name, const std::vector<double>& axis) {
    os << "# " << name << ":";
    for (std::size_t i = 0; i < axis.size(); ++i)
        os << (i == 0 ? " " : ",") << format_value(axis[i], false);
    os << "\n";
}

std::vector<double> parse_number_list(const std::string& text, std::size_t line_no) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string token = text.substr(pos, comma - pos);
        if (token.empty()) throw ParseError("empty numeric field", line_no);
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        while (end && *end == ' ') ++end;
        if (!end || *end != '\0') throw ParseError("bad numeric field '" + token + "'", line_no);
        out.push_back(v);
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    return out;
}

std::string expect_header(std::istream& is, const std::string& prefix, std::size_t line_no) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("unexpected end of file", line_no);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(prefix, 0) != 0)
        throw ParseError("expected header '" + prefix + "...'", line_no);
    std::string rest = line.substr(prefix.size());
    const std::size_t start = rest.find_first_not_of(' ');
    return start == std::string::npos ? std::string{} : rest.substr(start);
}

} // namespace

void save_grid(const SweepGrid& grid, const std::filesystem::path& path) {
    validate(grid);
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path.string());
    os << "# unit: " << unit_name(grid.unit) << "\n";
    write_axis(os, "gate_axis", grid.gate_axis);
    write_axis(os, "bias_axis", grid.bias_axis);
    for (std::size_t g = 0; g < grid.n_gate(); ++g) {
        for (std::size_t b = 0; b < grid.n_bias(); ++b) {
            if (b) os << ',';
            os << format_value(grid.at(g, b), grid.is_masked(g, b));
        }
        os << "\n";
    }
    if (!os) throw ParseError("write failed: " + path.string());
}

SweepGrid load_grid(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open: " + path.string());
    SweepGrid grid;
    grid.unit = unit_from_name(expect_header(is, "# unit:", 1));
    grid.gate_axis = parse_number_list(expect_header(is, "# gate_axis:", 2), 2);
    grid.bias_axis = parse_number_list(expect_header(is, "# bias_axis:", 3), 3);
    grid.values.reserve(grid.gate_axis.size() * grid.bias_axis.size());
    std::string line;
    std::size_t line_no = 3;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto row = parse_number_list(line, line_no);
        if (row.size() != grid.bias_axis.size())
            throw ParseError("row has " + std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(grid.bias_axis.size()),
                             line_no);
        grid.values.insert(grid.values.end(), row.begin(), row.end());
    }
    if (grid.values.size() != grid.gate_axis.size() * grid.bias_axis.size())
        throw ParseError("expected " + std::to_string(grid.gate_axis.size()) +
                             " data rows, got " +
                             std::to_string(grid.values.size() /
                                            std::max<std::size_t>(grid.bias_axis.size(), 1)),
                         line_no);
    grid.mask.assign(grid.values.size(), 0);
    for (std::size_t i = 0; i < grid.values.size(); ++i)
        if (std::isnan(grid.values[i])) grid.mask[i] = 1;
    try {
        validate(grid);
    } catch (const DomainError& e) {
        throw ParseError(std::string(e.what()) + " in " + path.string());
    }
    return grid;
}

SweepGrid load_grid(const std::filesystem::path& path, Unit expected_unit) {
    SweepGrid grid = load_grid(path);
    if (grid.unit != expected_unit)
        throw ParseError("unit mismatch in " + path.string() + ": file has '" +
                         unit_name(grid.unit) + "', expected '" + unit_name(expected_unit) + "'");
    return grid;
}

std::filesystem::path metadata_path_for(const std::filesystem::path& grid_path) {
    return std::filesystem::path(grid_path.string() + ".meta.json");
}

void save_grid_metadata(const std::filesystem::path& grid_path, const std::string& json_text) {
    std::ofstream os(metadata_path_for(grid_path));
    if (!os) throw ParseError("cannot open for writing: " + metadata_path_for(grid_path).string());
    os << json_text << "\n";
}

SweepGrid differential_conductance(const SweepGrid& current_map) {
    validate(current_map);
    if (current_map.unit != Unit::Amperes)
        throw DomainError("differential_conductance: input must be in amperes");
    const std::size_t nb = current_map.n_bias();
    if (nb < 3) throw DomainError("differential_conductance: need at least 3 bias points");
    SweepGrid out =
        SweepGrid::make(current_map.gate_axis, current_map.bias_axis, Unit::Siemens);
    const auto& v = current_map.bias_axis;
    for (std::size_t g = 0; g < current_map.n_gate(); ++g) {
        for (std::size_t b = 0; b < nb; ++b) {
            std::size_t i0, i1, i2; // stencil nodes
            if (b == 0) {
                i0 = 0; i1 = 1; i2 = 2;
            } else if (b == nb - 1) {
                i0 = nb - 3; i1 = nb - 2; i2 = nb - 1;
            } else {
                i0 = b - 1; i1 = b; i2 = b + 1;
            }
            if (current_map.is_masked(g, i0) || current_map.is_masked(g, i1) ||
                current_map.is_masked(g, i2)) {
                out.mask_cell(g, b);
                continue;
            }
            // three-point Lagrange derivative at v[b]: exact for quadratics
            const double x0 = v[i0], x1 = v[i1], x2 = v[i2], x = v[b];
            const double f0 = current_map.at(g, i0);
            const double f1 = current_map.at(g, i1);
            const double f2 = current_map.at(g, i2);
            const double d0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
            const double d1 = (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
            const double d2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
            out.at(g, b) = f0 * d0 + f1 * d1 + f2 * d2;
        }
    }
    return out;
}

InversionResult conductance_from_reflectance(const SweepGrid& reflectance_map,
                                             const CircuitParams& params, double baseline,
                                             double frequency,
                                             const InversionOptions& options) {
    validate(reflectance_map);
    validate(params);
    if (reflectance_map.unit != Unit::Dimensionless)
        throw DomainError("conductance_from_reflectance: reflectance map must be dimensionless");
    if (!(baseline > 0.0)) throw DomainError("conductance_from_reflectance: baseline must be > 0");
    if (!(frequency > 0.0))
        throw DomainError("conductance_from_reflectance: frequency must be > 0");

    const auto model = [&](double g) {
        return vna_reflectance(params, Load{g}, frequency, baseline);
    };
    // branch boundary: minimum of the modeled curve at the inversion frequency
    const double zc = characteristic_impedance(params);
    const double g_scale = params.line_impedance / (zc * zc);
    const double boundary =
        golden_section_min(model, 0.0, 100.0 * g_scale, 1e-9 * g_scale, 400);
    const double curve_min = model(boundary);
    const double value_at_zero = model(0.0);

    InversionResult result;
    result.branch_boundary = boundary;
    result.curve_minimum = curve_min;
    result.conductance =
        SweepGrid::make(reflectance_map.gate_axis, reflectance_map.bias_axis, Unit::Siemens);

    const double g_cap = options.g_max > 0.0 ? options.g_max : 1e6 * boundary;
    const std::size_t n_cells = reflectance_map.values.size();
    const std::size_t nb = reflectance_map.n_bias();
    std::vector<std::uint8_t> below_min(n_cells, 0), out_of_model(n_cells, 0);

    parallel_for(n_cells, [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const std::size_t g = idx / nb, b = idx % nb;
            if (reflectance_map.is_masked(g, b)) {
                result.conductance.mask_cell(g, b);
                continue;
            }
            const double y = reflectance_map.at(g, b);
            if (!std::isfinite(y) || y > baseline * (1.0 + options.out_of_model_epsilon) ||
                y < 0.0) {
                result.conductance.mask_cell(g, b);
                out_of_model[idx] = 1;
                continue;
            }
            if (y < curve_min) {
                result.conductance.at(g, b) = boundary;
                below_min[idx] = 1;
                continue;
            }
            double lo, hi; // bracket with model(lo) <= y <= model(hi) on a monotone branch
            if (options.branch == Branch::Low) {
                if (y >= value_at_zero) {
                    result.conductance.at(g, b) = 0.0;
                    continue;
                }
                lo = boundary; // model(boundary) = min <= y
                hi = 0.0;      // model(0) >= y: decreasing branch, swapped orientation
            } else {
                lo = boundary;
                hi = 2.0 * std::max(boundary, 1e-12);
                while (model(hi) < y && hi < g_cap) hi *= 2.0;
                if (model(hi) < y) {
                    result.conductance.mask_cell(g, b);
                    out_of_model[idx] = 1;
                    continue;
                }
            }
            // bisection on G; orientation handled via the values at the ends
            double a = std::min(lo, hi), c = std::max(lo, hi);
            const bool decreasing = options.branch == Branch::Low;
            for (int it = 0;
                 it < options.max_iterations && (c - a) > options.conductance_tolerance; ++it) {
                const double mid = 0.5 * (a + c);
                const double val = model(mid);
                const bool go_left = decreasing ? (val < y) : (val > y);
                if (go_left)
                    c = mid;
                else
                    a = mid;
            }
            result.conductance.at(g, b) = 0.5 * (a + c);
        }
    });

    for (std::size_t idx = 0; idx < n_cells; ++idx) {
        if (below_min[idx]) result.below_minimum_cells.emplace_back(idx / nb, idx % nb);
        if (out_of_model[idx]) result.out_of_model_cells.emplace_back(idx / nb, idx % nb);
    }
    return result;
}

Cut extract_cut(const SweepGrid& grid, CutAxis axis, double value) {
    validate(grid);
    const std::vector<double>& along = axis == CutAxis::Gate ? grid.gate_axis : grid.bias_axis;
    if (value < along.front() || value > along.back())
        throw DomainError("extract_cut: value outside axis range");
    std::size_t best = 0;
    double best_dist = std::abs(along[0] - value);
    for (std::size_t i = 1; i < along.size(); ++i) {
        const double d = std::abs(along[i] - value);
        if (d < best_dist) { // strict: ties stay at the lower index
            best = i;
            best_dist = d;
        }
    }
    Cut cut;
    cut.axis_value_used = along[best];
    cut.index = best;
    if (axis == CutAxis::Gate) {
        cut.coordinates = grid.bias_axis;
        for (std::size_t b = 0; b < grid.n_bias(); ++b) {
            cut.values.push_back(grid.at(best, b));
            cut.mask.push_back(grid.mask[grid.index(best, b)]);
        }
    } else {
        cut.coordinates = grid.gate_axis;
        for (std::size_t g = 0; g < grid.n_gate(); ++g) {
            cut.values.push_back(grid.at(g, best));
            cut.mask.push_back(grid.mask[grid.index(g, best)]);
        }
    }
    return cut;
}

} // namespace lcmatch
