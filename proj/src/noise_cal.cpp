#include "lcmatch/noise_cal.hpp"

#include "lcmatch/errors.hpp"
#include "lcmatch/numerics.hpp"
#include "lcmatch/si.hpp"

#include <algorithm>
#include <cmath>

namespace lcmatch {

double NoiseChain::linear_gain() const { return db_to_linear(gain_db); }

void validate(const NoiseChain& chain) {
    if (!(chain.bandwidth > 0.0)) throw DomainError("noise chain: bandwidth must be > 0");
    if (!(chain.band_center - 0.5 * chain.bandwidth > 0.0))
        throw DomainError("noise chain: band must lie at positive frequencies");
    if (!(chain.line_impedance > 0.0))
        throw DomainError("noise chain: line impedance must be > 0");
    if (!(chain.averaging_count >= 1.0))
        throw DomainError("noise chain: averaging count must be >= 1");
}

void validate(const FanoMask& mask) {
    if (!(mask.current_floor > 0.0)) throw DomainError("fano mask: current floor must be > 0");
    if (!(mask.fano_ceiling > 0.0)) throw DomainError("fano mask: ceiling must be > 0");
}

double excess_current_noise(const NoisePoint& point, const NoiseChain& chain,
                            const CircuitParams& params) {
    validate(chain);
    validate(params);
    if (!(point.conductance > 0.0))
        throw DomainError("excess_current_noise: conductance must be > 0 (R finite)");
    const double resistance = 1.0 / point.conductance;
    const double band_integral = integrated_transfer(params, Load{point.conductance},
                                                     chain.band_center, chain.bandwidth);
    if (!(band_integral > 0.0))
        throw NumericError("excess_current_noise: integrated transfer is zero", 0.0);
    const double denom =
        resistance * resistance * chain.linear_gain() * band_integral / chain.line_impedance;
    return (point.measured_power - point.background_power) / denom;
}

double voltage_noise_from_current(double s_i, double resistance) {
    if (!(resistance > 0.0))
        throw DomainError("voltage_noise_from_current: resistance must be > 0");
    return resistance * resistance * s_i;
}

double schottky_noise(double current) { return 2.0 * kElementaryCharge * std::abs(current); }

std::optional<double> fano_factor(double s_i, double current, const FanoMask& mask) {
    validate(mask);
    if (std::abs(current) < mask.current_floor) return std::nullopt;
    const double fano = s_i / schottky_noise(current);
    if (fano > mask.fano_ceiling) return std::nullopt;
    return fano;
}

namespace {

std::vector<std::size_t> region_cells(const SweepGrid& grid, const RegionBounds& region) {
    std::vector<std::size_t> cells;
    for (std::size_t g = 0; g < grid.n_gate(); ++g) {
        if (grid.gate_axis[g] < region.gate_min || grid.gate_axis[g] > region.gate_max) continue;
        for (std::size_t b = 0; b < grid.n_bias(); ++b) {
            if (grid.bias_axis[b] < region.bias_min || grid.bias_axis[b] > region.bias_max)
                continue;
            if (!grid.is_masked(g, b)) cells.push_back(grid.index(g, b));
        }
    }
    return cells;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

double estimate_background(const SweepGrid& power_map, const RegionBounds& region) {
    validate(power_map);
    const auto cells = region_cells(power_map, region);
    if (cells.empty())
        throw DomainError("estimate_background: blockade region selects no cells");
    std::vector<double> values;
    values.reserve(cells.size());
    for (auto idx : cells) values.push_back(power_map.values[idx]);
    return median_of(std::move(values));
}

std::vector<double> estimate_background_per_gate(const SweepGrid& power_map,
                                                 const RegionBounds& region) {
    validate(power_map);
    std::vector<double> out(power_map.n_gate());
    bool any = false;
    std::vector<double> column;
    for (std::size_t g = 0; g < power_map.n_gate(); ++g) {
        column.clear();
        if (power_map.gate_axis[g] >= region.gate_min &&
            power_map.gate_axis[g] <= region.gate_max) {
            for (std::size_t b = 0; b < power_map.n_bias(); ++b) {
                if (power_map.bias_axis[b] < region.bias_min ||
                    power_map.bias_axis[b] > region.bias_max)
                    continue;
                if (!power_map.is_masked(g, b)) column.push_back(power_map.at(g, b));
            }
        }
        if (column.empty())
            throw DomainError("estimate_background_per_gate: gate column " + std::to_string(g) +
                              " selects no cells");
        out[g] = median_of(column);
        any = true;
    }
    if (!any) throw DomainError("estimate_background_per_gate: region selects no cells");
    return out;
}

Background Background::scalar(double value) {
    Background bg;
    bg.is_scalar = true;
    bg.value = value;
    return bg;
}

Background Background::per_gate(std::vector<double> values) {
    Background bg;
    bg.is_scalar = false;
    bg.per_gate_values = std::move(values);
    return bg;
}

double Background::at(std::size_t gate_index) const {
    if (is_scalar) return value;
    if (gate_index >= per_gate_values.size())
        throw DomainError("background: gate index out of range");
    return per_gate_values[gate_index];
}

CalibratedMaps calibrate_map(const SweepGrid& power_map, const SweepGrid& current_map,
                             const SweepGrid& conductance_map, const NoiseChain& chain,
                             const CircuitParams& params, const FanoMask& mask,
                             const Background& background) {
    validate(power_map);
    validate(current_map);
    validate(conductance_map);
    validate(chain);
    validate(params);
    validate(mask);
    if (!power_map.same_axes(current_map) || !power_map.same_axes(conductance_map))
        throw ShapeError("calibrate_map: power, current and conductance maps must share axes");
    if (!background.is_scalar && background.per_gate_values.size() != power_map.n_gate())
        throw ShapeError("calibrate_map: per-gate background length does not match gate axis");

    CalibratedMaps out{
        SweepGrid::make(power_map.gate_axis, power_map.bias_axis, Unit::AmpSqPerHz),
        SweepGrid::make(power_map.gate_axis, power_map.bias_axis, Unit::AmpSqPerHz),
        SweepGrid::make(power_map.gate_axis, power_map.bias_axis, Unit::Dimensionless),
    };

    const std::size_t nb = power_map.n_bias();
    parallel_for(power_map.values.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const std::size_t g = idx / nb, b = idx % nb;
            const bool input_masked = power_map.is_masked(g, b) ||
                                      current_map.is_masked(g, b) ||
                                      conductance_map.is_masked(g, b);
            if (input_masked) {
                out.s_i.mask_cell(g, b);
                out.schottky.mask_cell(g, b);
                out.fano.mask_cell(g, b);
                continue;
            }
            const double current = current_map.at(g, b);
            out.schottky.at(g, b) = schottky_noise(current);

            const double conductance = conductance_map.at(g, b);
            if (!(conductance > 0.0)) {
                out.s_i.mask_cell(g, b);
                out.fano.mask_cell(g, b);
                continue;
            }
            NoisePoint point;
            point.measured_power = power_map.at(g, b);
            point.background_power = background.at(g);
            point.dc_current = current;
            point.conductance = conductance;
            const double s_i = excess_current_noise(point, chain, params);
            out.s_i.at(g, b) = s_i;

            const auto fano = fano_factor(s_i, current, mask);
            if (fano)
                out.fano.at(g, b) = *fano;
            else
                out.fano.mask_cell(g, b);
        }
    });
    return out;
}

} // namespace lcmatch
