#pragma once

#include "lcmatch/circuit_model.hpp"
#include "lcmatch/maps_io.hpp"

#include <optional>
#include <vector>

namespace lcmatch {

/// Amplification chain and detection band for noise-power measurements.
/// Gain is in power dB (10 log10).
struct NoiseChain {
    double gain_db = 0.0;
    double line_impedance = 50.0; // ohm
    double band_center = 0.0;     // Hz
    double bandwidth = 0.0;       // Hz
    double averaging_count = 1.0;

    double linear_gain() const;
};

void validate(const NoiseChain& chain);

/// One noise-map cell: measured and background power plus the simultaneously
/// recorded DC current and conductance.
struct NoisePoint {
    double measured_power = 0.0;   // W
    double background_power = 0.0; // W
    double dc_current = 0.0;       // A
    double conductance = 0.0;      // S
};

/// Masking rule for Fano maps: cells with |I| below the floor or F above the
/// ceiling are reported as masked, never as numbers.
struct FanoMask {
    double current_floor = 5e-12; // A
    double fano_ceiling = 10.0;
};

void validate(const FanoMask& mask);

/// Rectangular region in sweep coordinates (inclusive bounds, volts).
struct RegionBounds {
    double gate_min = 0.0;
    double gate_max = 0.0;
    double bias_min = 0.0;
    double bias_max = 0.0;
};

/// Excess current noise from a measured power pair:
///   S_I = (dP - dP0) Z0 / (R^2 g \int_BW |t_V|^2 df).
/// Negative results (sub-background) are returned as-is, keeping background
/// mis-estimation visible. Requires G > 0.
double excess_current_noise(const NoisePoint& point, const NoiseChain& chain,
                            const CircuitParams& params);

/// S_V = R^2 S_I.
double voltage_noise_from_current(double s_i, double resistance);

/// Schottky (full shot) noise 2 e |I|.
double schottky_noise(double current);

/// Fano factor S_I / (2e|I|), or nullopt when the mask applies.
std::optional<double> fano_factor(double s_i, double current, const FanoMask& mask);

/// Median measured power over a deep-blockade region (scalar background).
double estimate_background(const SweepGrid& power_map, const RegionBounds& region);

/// Per-gate-column medians over the same region (config-flag alternative).
std::vector<double> estimate_background_per_gate(const SweepGrid& power_map,
                                                 const RegionBounds& region);

/// Background term fed to calibrate_map: one scalar by default, optionally
/// one value per gate column.
struct Background {
    static Background scalar(double value);
    static Background per_gate(std::vector<double> values);
    double at(std::size_t gate_index) const;

    bool is_scalar = true;
    double value = 0.0;
    std::vector<double> per_gate_values;
};

struct CalibratedMaps {
    SweepGrid s_i;       // A^2/Hz; masked where G = 0
    SweepGrid schottky;  // A^2/Hz
    SweepGrid fano;      // dimensionless; masked per FanoMask and where G = 0
};

/// Point-wise calibration of a power map into current-noise, Schottky and
/// Fano maps. All inputs must share axes exactly. Cell order independent and
/// parallel over cells.
CalibratedMaps calibrate_map(const SweepGrid& power_map, const SweepGrid& current_map,
                             const SweepGrid& conductance_map, const NoiseChain& chain,
                             const CircuitParams& params, const FanoMask& mask,
                             const Background& background);

} // namespace lcmatch
