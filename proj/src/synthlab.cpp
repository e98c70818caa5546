#include "lcmatch/synthlab.hpp"

#include "lcmatch/errors.hpp"
#include "lcmatch/numerics.hpp"
#include "lcmatch/rng.hpp"
#include "lcmatch/si.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace lcmatch {

void validate(const DiamondModel& model) {
    if (!(model.charging_energy > 0.0)) throw DomainError("diamond: charging energy must be > 0");
    if (!(model.lever_arm_gate > 0.0) || !(model.lever_arm_bias > 0.0))
        throw DomainError("diamond: lever arms must be > 0");
    if (!(model.peak_conductance > 0.0))
        throw DomainError("diamond: peak conductance must be > 0");
    if (!(model.level_broadening > 0.0))
        throw DomainError("diamond: level broadening must be > 0");
    if (!(model.inelastic_onset > 0.0)) throw DomainError("diamond: inelastic onset must be > 0");
    if (!(model.cotunneling_fano_amplitude > 0.0))
        throw DomainError("diamond: cotunneling Fano amplitude must be > 0");
    if (!(model.cotunneling_conductance > 0.0))
        throw DomainError("diamond: cotunneling conductance must be > 0");
    // the onset must sit inside the diamond (below the blockade bias scale)
    const double diamond_height = model.charging_energy / (2.0 * model.lever_arm_bias);
    if (!(model.inelastic_onset < diamond_height))
        throw DomainError("diamond: inelastic onset must be below the charging-energy bias");
}

double diamond_conductance(const DiamondModel& model, double v_g, double v_sd) {
    const double period = model.charging_energy / model.lever_arm_gate;
    const double slope = model.lever_arm_gate / model.lever_arm_bias;
    // gate offset from the nearest degeneracy point, in [-period/2, period/2]
    const double x = std::remainder(v_g, period);
    auto sech2 = [](double t) {
        const double c = std::cosh(t);
        return 1.0 / (c * c); // underflows cleanly to 0 for large |t|
    };
    const double p_plus = sech2((v_sd - slope * x) / model.level_broadening);
    const double p_minus = sech2((v_sd + slope * x) / model.level_broadening);
    const double sequential =
        model.peak_conductance * (1.0 - (1.0 - p_plus) * (1.0 - p_minus));
    const double cot =
        model.cotunneling_conductance /
        (1.0 + std::exp(-(std::abs(v_sd) - model.inelastic_onset) / model.level_broadening));
    return sequential + cot;
}

double BaselineModel::eval(double f) const {
    double b = base_level;
    for (const auto& ripple : ripples)
        b += ripple.amplitude * std::sin(2.0 * kPi * f / ripple.period + ripple.phase);
    return b;
}

void validate(const BaselineModel& model) {
    if (!(model.base_level > 0.0)) throw DomainError("baseline: base level must be > 0");
    double total = 0.0;
    for (const auto& ripple : model.ripples) {
        if (!(ripple.period > 0.0)) throw DomainError("baseline: ripple period must be > 0");
        total += std::abs(ripple.amplitude);
    }
    if (!(total < model.base_level))
        throw DomainError("baseline: ripple amplitudes must sum below the base level");
}

double FanoProfile::eval(double v_sd) const {
    if (kind == Kind::Constant) return constant_value;
    const double t = (std::abs(v_sd) - onset) / width;
    return 1.0 + (amplitude - 1.0) * std::exp(-t * t);
}

void validate(const FanoProfile& profile) {
    if (profile.kind == FanoProfile::Kind::Constant) {
        if (!(profile.constant_value > 0.0))
            throw DomainError("fano profile: constant value must be > 0");
        return;
    }
    if (!(profile.onset > 0.0)) throw DomainError("fano profile: onset must be > 0");
    if (!(profile.width > 0.0)) throw DomainError("fano profile: width must be > 0");
    if (!(profile.amplitude > 0.0)) throw DomainError("fano profile: amplitude must be > 0");
}

std::vector<double> GridSpec::gate_axis() const {
    std::vector<double> axis(gate_points);
    for (std::size_t i = 0; i < gate_points; ++i)
        axis[i] = gate_min + (gate_max - gate_min) * static_cast<double>(i) /
                                 static_cast<double>(gate_points - 1);
    return axis;
}

std::vector<double> GridSpec::bias_axis() const {
    std::vector<double> axis(bias_points);
    for (std::size_t i = 0; i < bias_points; ++i)
        axis[i] = bias_min + (bias_max - bias_min) * static_cast<double>(i) /
                                 static_cast<double>(bias_points - 1);
    return axis;
}

void validate(const GridSpec& grid) {
    if (grid.gate_points < 2 || grid.bias_points < 2)
        throw DomainError("grid spec: need at least 2 points per axis");
    if (!(grid.gate_max > grid.gate_min) || !(grid.bias_max > grid.bias_min))
        throw DomainError("grid spec: axis bounds must be increasing");
}

SweepGrid current_from_conductance(const SweepGrid& conductance_map) {
    validate(conductance_map);
    if (conductance_map.unit != Unit::Siemens)
        throw DomainError("current_from_conductance: input must be in siemens");
    const auto& bias = conductance_map.bias_axis;
    if (!(bias.front() <= 0.0 && bias.back() >= 0.0))
        throw DomainError("current_from_conductance: bias axis must span zero");
    if (conductance_map.masked_count() != 0)
        throw DomainError("current_from_conductance: masked cells are not integrable");

    SweepGrid out =
        SweepGrid::make(conductance_map.gate_axis, conductance_map.bias_axis, Unit::Amperes);
    const std::size_t nb = bias.size();
    std::vector<double> cumulative(nb);
    for (std::size_t g = 0; g < conductance_map.n_gate(); ++g) {
        cumulative[0] = 0.0;
        for (std::size_t b = 1; b < nb; ++b) {
            cumulative[b] =
                cumulative[b - 1] + 0.5 *
                                        (conductance_map.at(g, b - 1) + conductance_map.at(g, b)) *
                                        (bias[b] - bias[b - 1]);
        }
        // integral from the axis start down to V_SD = 0
        double at_zero = 0.0;
        const auto it = std::lower_bound(bias.begin(), bias.end(), 0.0);
        const std::size_t j = static_cast<std::size_t>(it - bias.begin());
        if (j < nb && bias[j] == 0.0) {
            at_zero = cumulative[j];
        } else {
            // zero lies strictly inside (bias[j-1], bias[j])
            const double v0 = bias[j - 1], v1 = bias[j];
            const double g0 = conductance_map.at(g, j - 1), g1 = conductance_map.at(g, j);
            const double gz = g0 + (g1 - g0) * (0.0 - v0) / (v1 - v0);
            at_zero = cumulative[j - 1] + 0.5 * (g0 + gz) * (0.0 - v0);
        }
        for (std::size_t b = 0; b < nb; ++b) out.at(g, b) = cumulative[b] - at_zero;
    }
    return out;
}

ReflectanceMaps synth_reflectance_map(const DiamondModel& model, const CircuitParams& params,
                                      double baseline_value, double f_m, double noise_fraction,
                                      std::uint64_t seed, const GridSpec& grid) {
    validate(model);
    validate(params);
    validate(grid);
    if (!(baseline_value > 0.0))
        throw DomainError("synth_reflectance_map: baseline must be > 0");
    if (!(f_m > 0.0)) throw DomainError("synth_reflectance_map: frequency must be > 0");
    if (!(noise_fraction >= 0.0))
        throw DomainError("synth_reflectance_map: noise fraction must be >= 0");

    const auto gate = grid.gate_axis();
    const auto bias = grid.bias_axis();
    ReflectanceMaps maps{SweepGrid::make(gate, bias, Unit::Dimensionless),
                         SweepGrid::make(gate, bias, Unit::Amperes),
                         SweepGrid::make(gate, bias, Unit::Siemens)};
    for (std::size_t g = 0; g < gate.size(); ++g)
        for (std::size_t b = 0; b < bias.size(); ++b)
            maps.conductance.at(g, b) = diamond_conductance(model, gate[g], bias[b]);
    maps.current = current_from_conductance(maps.conductance);

    Rng rng(seed);
    for (std::size_t g = 0; g < gate.size(); ++g) {
        for (std::size_t b = 0; b < bias.size(); ++b) {
            const double clean = vna_reflectance(params, Load{maps.conductance.at(g, b)}, f_m,
                                                 baseline_value);
            maps.reflectance.at(g, b) = clean * (1.0 + noise_fraction * rng.gaussian());
        }
    }
    return maps;
}

void validate(const NoiseScenario& scenario) {
    validate(scenario.diamond);
    validate(scenario.circuit);
    validate(scenario.chain);
    validate(scenario.fano);
    validate(scenario.grid);
    if (!(scenario.background_power >= 0.0))
        throw DomainError("noise scenario: background power must be >= 0");
    if (!(scenario.power_noise_fraction >= 0.0))
        throw DomainError("noise scenario: noise fraction must be >= 0");
}

NoiseMaps synth_noise_map(const NoiseScenario& scenario) {
    validate(scenario);
    const auto gate = scenario.grid.gate_axis();
    const auto bias = scenario.grid.bias_axis();
    NoiseMaps maps{SweepGrid::make(gate, bias, Unit::Watts),
                   SweepGrid::make(gate, bias, Unit::Amperes),
                   SweepGrid::make(gate, bias, Unit::Siemens)};
    for (std::size_t g = 0; g < gate.size(); ++g)
        for (std::size_t b = 0; b < bias.size(); ++b)
            maps.conductance.at(g, b) = diamond_conductance(scenario.diamond, gate[g], bias[b]);
    maps.current = current_from_conductance(maps.conductance);

    // draw fluctuations serially so the dataset is seed-deterministic, then
    // fill cells in parallel
    const std::size_t n_cells = maps.power.values.size();
    std::vector<double> noise(n_cells);
    Rng rng(scenario.seed);
    for (auto& v : noise) v = rng.gaussian();

    const double g_lin = scenario.chain.linear_gain();
    const double z0 = scenario.chain.line_impedance;
    const double sigma_scale =
        scenario.power_noise_fraction / std::sqrt(scenario.chain.averaging_count);
    const std::size_t nb = bias.size();
    parallel_for(n_cells, [&](std::size_t begin, std::size_t end) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const std::size_t g = idx / nb, b = idx % nb;
            const double conductance = maps.conductance.at(g, b);
            const double current = maps.current.at(g, b);
            double excess = 0.0;
            if (conductance > 0.0 && current != 0.0) {
                const double s_i =
                    scenario.fano.eval(bias[b]) * 2.0 * kElementaryCharge * std::abs(current);
                const double resistance = 1.0 / conductance;
                const double integral =
                    integrated_transfer(scenario.circuit, Load{conductance},
                                        scenario.chain.band_center, scenario.chain.bandwidth);
                excess = s_i * resistance * resistance / z0 * g_lin * integral;
            }
            const double total = scenario.background_power + excess;
            maps.power.at(g, b) = total + sigma_scale * total * noise[idx];
        }
    });
    return maps;
}

ScatterDataset synth_scatter_dataset(const CircuitParams& params, double baseline_value,
                                     double f_m, double g_max, std::size_t n_points,
                                     double noise_fraction, std::uint64_t seed) {
    validate(params);
    if (!(baseline_value > 0.0)) throw DomainError("synth_scatter_dataset: baseline must be > 0");
    if (!(f_m > 0.0)) throw DomainError("synth_scatter_dataset: frequency must be > 0");
    if (!(g_max > 0.0)) throw DomainError("synth_scatter_dataset: g_max must be > 0");
    if (n_points < 2) throw DomainError("synth_scatter_dataset: need at least 2 points");

    Rng rng(seed);
    ScatterDataset dataset;
    dataset.frequency = f_m;
    dataset.points.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double g = i == 0 ? 0.0 : rng.uniform(0.0, g_max); // keep a blockade anchor
        const double clean = vna_reflectance(params, Load{g}, f_m, baseline_value);
        dataset.points.push_back({g, clean * (1.0 + noise_fraction * rng.gaussian())});
    }
    return dataset;
}

HangerSweep synth_hanger_sweep(const CircuitParams& params, double phi, double amplitude,
                               double f_lo, double f_hi, std::size_t n_points,
                               double noise_fraction, std::uint64_t seed) {
    validate(params);
    if (!(f_lo > 0.0) || !(f_hi > f_lo))
        throw DomainError("synth_hanger_sweep: need 0 < f_lo < f_hi");
    if (n_points < 5) throw DomainError("synth_hanger_sweep: need at least 5 points");
    if (!(amplitude > 0.0)) throw DomainError("synth_hanger_sweep: amplitude must be > 0");

    Rng rng(seed);
    HangerSweep sweep;
    sweep.frequencies.resize(n_points);
    sweep.s21_mag.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double f = f_lo + (f_hi - f_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_points - 1);
        sweep.frequencies[i] = f;
        const double clean = amplitude * std::abs(hanger_s21(params, Load{0.0}, f, phi));
        sweep.s21_mag[i] = clean * (1.0 + noise_fraction * rng.gaussian());
    }
    return sweep;
}

MinReflectanceResult oracle_min_reflectance(const CircuitParams& params, double f, double g_lo,
                                            double g_hi) {
    validate(params);
    if (!(f > 0.0)) throw DomainError("oracle_min_reflectance: frequency must be > 0");
    if (!(g_lo > 0.0) || !(g_hi > g_lo))
        throw DomainError("oracle_min_reflectance: need 0 < g_lo < g_hi");

    const auto reflectance = [&](double g) {
        return std::norm(reflection_coefficient(params, Load{g}, f));
    };
    constexpr std::size_t n = 100000;
    const double log_lo = std::log(g_lo);
    const double step = (std::log(g_hi) - log_lo) / static_cast<double>(n - 1);
    std::size_t best = 0;
    double best_value = reflectance(g_lo);
    for (std::size_t i = 1; i < n; ++i) {
        const double value = reflectance(std::exp(log_lo + step * static_cast<double>(i)));
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }
    if (best == 0 || best == n - 1)
        throw DomainError("oracle_min_reflectance: minimum at range edge; widen g_range");

    // local ternary refinement, independent of any fitting machinery
    double a = std::exp(log_lo + step * static_cast<double>(best - 1));
    double b = std::exp(log_lo + step * static_cast<double>(best + 1));
    for (int it = 0; it < 300 && (b - a) > 1e-10 * b; ++it) {
        const double m1 = a + (b - a) / 3.0;
        const double m2 = b - (b - a) / 3.0;
        if (reflectance(m1) < reflectance(m2))
            b = m2;
        else
            a = m1;
    }
    const double g_match = 0.5 * (a + b);
    return {g_match, reflectance(g_match)};
}

double oracle_riemann_integral(const CircuitParams& params, const Load& load, double f_center,
                               double bandwidth, std::size_t n_points) {
    validate(params);
    validate(load);
    if (n_points < 10000)
        throw DomainError("oracle_riemann_integral: need at least 1e4 points");
    if (!(bandwidth > 0.0) || !(f_center - 0.5 * bandwidth > 0.0))
        throw DomainError("oracle_riemann_integral: invalid band");
    const double lo = f_center - 0.5 * bandwidth;
    const double h = bandwidth / static_cast<double>(n_points);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double f = lo + (static_cast<double>(i) + 0.5) * h;
        sum += std::norm(transfer_function_approx(params, load, f));
    }
    return sum * h;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

const json& need(const json& j, const char* key, const std::string& path) {
    if (!j.is_object())
        throw ConfigError(path + ": expected an object");
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
    return j.at(key);
}

double need_number(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

double opt_number(const json& j, const char* key, const std::string& path, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return j.at(key).get<double>();
}

std::size_t need_count(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError(path + "." + key + ": expected an integer");
    const auto n = v.get<long long>();
    if (n < 0) throw ConfigError(path + "." + key + ": expected a non-negative integer");
    return static_cast<std::size_t>(n);
}

std::string need_string(const json& j, const char* key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

CircuitParams parse_circuit(const json& j, const std::string& path) {
    CircuitParams params;
    params.inductance = need_number(j, "inductance_h", path);
    params.capacitance = need_number(j, "capacitance_f", path);
    params.loss_resistance = opt_number(j, "loss_resistance_ohm", path, 0.0);
    params.line_impedance = opt_number(j, "line_impedance_ohm", path, 50.0);
    return params;
}

GridSpec parse_grid(const json& j, const std::string& path) {
    GridSpec grid;
    grid.gate_min = need_number(j, "gate_min_v", path);
    grid.gate_max = need_number(j, "gate_max_v", path);
    grid.gate_points = need_count(j, "gate_points", path);
    grid.bias_min = need_number(j, "bias_min_v", path);
    grid.bias_max = need_number(j, "bias_max_v", path);
    grid.bias_points = need_count(j, "bias_points", path);
    return grid;
}

DiamondModel parse_diamond(const json& j, const std::string& path) {
    DiamondModel model;
    model.charging_energy = need_number(j, "charging_energy_ev", path);
    model.lever_arm_gate = need_number(j, "lever_arm_gate", path);
    model.lever_arm_bias = need_number(j, "lever_arm_bias", path);
    model.peak_conductance = need_number(j, "peak_conductance_s", path);
    model.level_broadening = need_number(j, "level_broadening_v", path);
    model.inelastic_onset = opt_number(j, "inelastic_onset_v", path, model.inelastic_onset);
    model.cotunneling_fano_amplitude =
        opt_number(j, "cotunneling_fano_amplitude", path, model.cotunneling_fano_amplitude);
    model.cotunneling_conductance =
        opt_number(j, "cotunneling_conductance_s", path, model.cotunneling_conductance);
    return model;
}

NoiseChain parse_chain(const json& j, const std::string& path) {
    NoiseChain chain;
    chain.gain_db = need_number(j, "gain_db", path);
    chain.line_impedance = opt_number(j, "line_impedance_ohm", path, 50.0);
    chain.band_center = need_number(j, "band_center_hz", path);
    chain.bandwidth = need_number(j, "bandwidth_hz", path);
    chain.averaging_count = opt_number(j, "averaging_count", path, 1.0);
    return chain;
}

FanoProfile parse_fano(const json& j, const std::string& path) {
    FanoProfile profile;
    const std::string kind = need_string(j, "kind", path);
    if (kind == "constant") {
        profile.kind = FanoProfile::Kind::Constant;
        profile.constant_value = opt_number(j, "value", path, 1.0);
    } else if (kind == "onset_bump") {
        profile.kind = FanoProfile::Kind::OnsetBump;
        profile.onset = need_number(j, "onset_v", path);
        profile.width = need_number(j, "width_v", path);
        profile.amplitude = need_number(j, "amplitude", path);
    } else {
        throw ConfigError(path + ".kind: unknown fano profile '" + kind + "'");
    }
    return profile;
}

BaselineModel parse_baseline(const json& j, const std::string& path) {
    BaselineModel model;
    model.base_level = need_number(j, "base_level", path);
    if (j.contains("ripples")) {
        const json& arr = j.at("ripples");
        if (!arr.is_array()) throw ConfigError(path + ".ripples: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string rpath = path + ".ripples[" + std::to_string(i) + "]";
            BaselineModel::Ripple ripple;
            ripple.amplitude = need_number(arr[i], "amplitude", rpath);
            ripple.period = need_number(arr[i], "period_hz", rpath);
            ripple.phase = opt_number(arr[i], "phase_rad", rpath, 0.0);
            model.ripples.push_back(ripple);
        }
    }
    return model;
}

} // namespace

ScenarioSpec scenario_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
    }
    const std::string path = "scenario";
    if (!doc.is_object()) throw ConfigError(path + ": expected an object");
    const auto version = need_count(doc, "schema_version", path);
    if (version != 1) throw ConfigError(path + ".schema_version: unsupported version");

    ScenarioSpec spec;
    spec.seed = need_count(doc, "seed", path);
    const std::string kind = need_string(doc, "kind", path);
    try {
        if (kind == "reflectance_map") {
            spec.kind = ScenarioSpec::Kind::ReflectanceMap;
            spec.grid = parse_grid(need(doc, "grid", path), path + ".grid");
            spec.diamond = parse_diamond(need(doc, "diamond", path), path + ".diamond");
            spec.circuit = parse_circuit(need(doc, "circuit", path), path + ".circuit");
            spec.baseline = parse_baseline(need(doc, "baseline", path), path + ".baseline");
            spec.measurement_frequency = need_number(doc, "measurement_frequency_hz", path);
            spec.reflectance_noise_fraction =
                opt_number(doc, "reflectance_noise_fraction", path, 0.0);
            validate(spec.grid);
            validate(spec.diamond);
            validate(spec.circuit);
            validate(spec.baseline);
        } else if (kind == "noise_map") {
            spec.kind = ScenarioSpec::Kind::NoiseMap;
            spec.grid = parse_grid(need(doc, "grid", path), path + ".grid");
            spec.diamond = parse_diamond(need(doc, "diamond", path), path + ".diamond");
            spec.circuit = parse_circuit(need(doc, "circuit", path), path + ".circuit");
            spec.chain = parse_chain(need(doc, "chain", path), path + ".chain");
            spec.background_power = need_number(doc, "background_power_w", path);
            spec.fano = doc.contains("fano_profile")
                            ? parse_fano(doc.at("fano_profile"), path + ".fano_profile")
                            : FanoProfile{};
            spec.power_noise_fraction = opt_number(doc, "power_noise_fraction", path, 0.0);
            validate(spec.grid);
            validate(spec.diamond);
            validate(spec.circuit);
            validate(spec.chain);
            validate(spec.fano);
        } else if (kind == "hanger_sweep") {
            spec.kind = ScenarioSpec::Kind::HangerSweep;
            spec.circuit = parse_circuit(need(doc, "circuit", path), path + ".circuit");
            const json& hj = need(doc, "hanger", path);
            const std::string hpath = path + ".hanger";
            spec.hanger_phi = opt_number(hj, "phi_rad", hpath, 0.0);
            spec.hanger_amplitude = opt_number(hj, "amplitude", hpath, 1.0);
            spec.sweep_min = need_number(hj, "sweep_min_hz", hpath);
            spec.sweep_max = need_number(hj, "sweep_max_hz", hpath);
            spec.sweep_points = need_count(hj, "sweep_points", hpath);
            spec.s21_noise_fraction = opt_number(hj, "noise_fraction", hpath, 0.0);
            validate(spec.circuit);
            if (!(spec.sweep_min > 0.0) || !(spec.sweep_max > spec.sweep_min))
                throw ConfigError(hpath + ".sweep_min_hz: need 0 < min < max");
            if (spec.sweep_points < 5)
                throw ConfigError(hpath + ".sweep_points: need at least 5 points");
        } else {
            throw ConfigError(path + ".kind: unknown scenario kind '" + kind + "'");
        }
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return spec;
}

} // namespace lcmatch
