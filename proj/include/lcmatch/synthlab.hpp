#pragma once

#include "lcmatch/circuit_model.hpp"
#include "lcmatch/fitting.hpp"
#include "lcmatch/maps_io.hpp"
#include "lcmatch/noise_cal.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lcmatch {

/// Phenomenological Coulomb-diamond conductance model: sech^2 ridges along
/// the diamond edge lines plus a smooth cotunneling step beyond the inelastic
/// onset. Ground truth by construction, not device physics.
struct DiamondModel {
    double charging_energy = 2e-3;          // eV per diamond
    double lever_arm_gate = 0.2;            // dV_dot/dV_G
    double lever_arm_bias = 0.5;            // dV_dot/dV_SD
    double peak_conductance = 25e-6;        // S at the degeneracy points
    double level_broadening = 0.3e-3;       // V
    double inelastic_onset = 5e-3;          // V of bias
    double cotunneling_fano_amplitude = 8.0;
    double cotunneling_conductance = 0.5e-6; // S, in-blockade step beyond the onset
};

void validate(const DiamondModel& model);

/// G(V_G, V_SD) >= 0, smooth, near-zero deep inside diamonds and equal to
/// peak_conductance at the zero-bias degeneracy points.
double diamond_conductance(const DiamondModel& model, double v_g, double v_sd);

/// Instrument baseline b(f): base level plus sinusoidal ripple components.
struct BaselineModel {
    struct Ripple {
        double amplitude = 0.0;
        double period = 1e9; // Hz
        double phase = 0.0;  // rad
    };
    double base_level = 1.0;
    std::vector<Ripple> ripples;

    double eval(double f) const;
};

void validate(const BaselineModel& model);

/// Fano-factor field for noise scenarios. OnsetBump peaks at |V_SD| = onset
/// (value = amplitude) and relaxes to 1 away from it.
struct FanoProfile {
    enum class Kind { Constant, OnsetBump };
    Kind kind = Kind::Constant;
    double constant_value = 1.0;
    double onset = 5e-3;   // V
    double width = 1e-3;   // V
    double amplitude = 8.0;

    double eval(double v_sd) const;
};

void validate(const FanoProfile& profile);

struct GridSpec {
    double gate_min = 0.0, gate_max = 0.0;
    std::size_t gate_points = 0;
    double bias_min = 0.0, bias_max = 0.0;
    std::size_t bias_points = 0;

    std::vector<double> gate_axis() const;
    std::vector<double> bias_axis() const;
};

void validate(const GridSpec& grid);

/// DC current by trapezoidal integration of G over bias, anchored at
/// I(V_SD = 0) = 0. The bias axis must span zero.
SweepGrid current_from_conductance(const SweepGrid& conductance_map);

struct ReflectanceMaps {
    SweepGrid reflectance; // dimensionless, multiplicative noise applied
    SweepGrid current;     // A
    SweepGrid conductance; // S, noise-free ground truth
};

/// Forward-model a reflectance sweep: diamond conductance, integrated
/// current, and baseline * |Gamma|^2 at f_m with multiplicative Gaussian
/// noise (fixed seed => identical maps).
ReflectanceMaps synth_reflectance_map(const DiamondModel& model, const CircuitParams& params,
                                      double baseline_value, double f_m, double noise_fraction,
                                      std::uint64_t seed, const GridSpec& grid);

/// Everything needed to generate one synthetic noise dataset.
struct NoiseScenario {
    DiamondModel diamond;
    CircuitParams circuit;
    NoiseChain chain;
    double background_power = 0.0;     // W
    FanoProfile fano;
    double power_noise_fraction = 0.0; // per-shot; scaled by 1/sqrt(averaging_count)
    std::uint64_t seed = 0;
    GridSpec grid;
};

void validate(const NoiseScenario& scenario);

struct NoiseMaps {
    SweepGrid power;       // W
    SweepGrid current;     // A
    SweepGrid conductance; // S
};

/// Forward noise-power maps: per cell S_I = F 2e|I|, transmitted through the
/// matching circuit and amplified, plus background and seeded fluctuations
/// scaled by 1/sqrt(averaging_count).
NoiseMaps synth_noise_map(const NoiseScenario& scenario);

/// Scatter dataset at fixed frequency: a G = 0 anchor plus uniformly drawn
/// conductances up to g_max, reflectances with multiplicative noise.
ScatterDataset synth_scatter_dataset(const CircuitParams& params, double baseline_value,
                                     double f_m, double g_max, std::size_t n_points,
                                     double noise_fraction, std::uint64_t seed);

struct HangerSweep {
    std::vector<double> frequencies; // Hz
    std::vector<double> s21_mag;
};

/// |S21| sweep of a hanger-coupled resonator with multiplicative noise.
HangerSweep synth_hanger_sweep(const CircuitParams& params, double phi, double amplitude,
                               double f_lo, double f_hi, std::size_t n_points,
                               double noise_fraction, std::uint64_t seed);

struct MinReflectanceResult {
    double g_match = 0.0;         // S
    double min_reflectance = 0.0; // |Gamma|^2 at the minimum
};

/// Brute-force argmin of |Gamma(G, f)|^2: 1e5-point log-spaced scan followed
/// by local ternary refinement. Independent of the fitting module. Throws
/// DomainError when the minimum touches the range edge.
MinReflectanceResult oracle_min_reflectance(const CircuitParams& params, double f, double g_lo,
                                            double g_hi);

/// Uniform midpoint Riemann sum of |t_V(f)|^2 over the band (n >= 1e4).
double oracle_riemann_integral(const CircuitParams& params, const Load& load, double f_center,
                               double bandwidth, std::size_t n_points);

// ---------------------------------------------------------------------------
// Scenario documents (JSON)
// ---------------------------------------------------------------------------

struct ScenarioSpec {
    enum class Kind { ReflectanceMap, NoiseMap, HangerSweep };
    Kind kind = Kind::ReflectanceMap;
    std::uint64_t seed = 0;

    // map kinds
    GridSpec grid;
    DiamondModel diamond;
    CircuitParams circuit;

    // reflectance map
    BaselineModel baseline;
    double measurement_frequency = 0.0;
    double reflectance_noise_fraction = 0.0;

    // noise map
    NoiseChain chain;
    double background_power = 0.0;
    FanoProfile fano;
    double power_noise_fraction = 0.0;

    // hanger sweep
    double hanger_phi = 0.0;
    double hanger_amplitude = 1.0;
    double sweep_min = 0.0, sweep_max = 0.0;
    std::size_t sweep_points = 0;
    double s21_noise_fraction = 0.0;
};

/// Parse and validate a scenario document (schema_version 1). Errors carry
/// the offending field path.
ScenarioSpec scenario_from_json(const std::string& json_text);

} // namespace lcmatch
