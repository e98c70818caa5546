#pragma once

#include "lcmatch/circuit_model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lcmatch {

// ---------------------------------------------------------------------------
// Generic damped least-squares engine
// ---------------------------------------------------------------------------

enum class ParamScale {
    Linear,
    Log // optimized as log(p): enforces positivity without constraint machinery
};

struct LsqOptions {
    double parameter_tolerance = 1e-8; // relative parameter change
    double residual_tolerance = 1e-10; // relative residual change
    int max_iterations = 200;
    double initial_damping = 0.0;      // 0 = start with plain Gauss-Newton
    double damping_increase = 10.0;    // on rejected steps
    double damping_decrease = 10.0;    // on accepted steps
    double jacobian_step = 1e-6;       // forward-difference step, relative per parameter
    double rank_tolerance = 1e-10;     // eigenvalue ratio below which the fit is deficient
};

struct LsqParameter {
    std::string name;
    double initial = 0.0;
    ParamScale scale = ParamScale::Linear;
};

struct LsqResult {
    std::vector<double> parameters;      // physical scale
    std::vector<double> standard_errors; // physical scale; NaN when dof = 0
    double residual_sum_squares = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> rss_trace; // initial + accepted-step residuals, non-increasing
};

/// model maps a physical parameter vector to predictions for every observed
/// point. weights may be empty (unit weights) or one entry per observation.
using ModelFn = std::function<std::vector<double>(std::span<const double>)>;

/// Deterministic Levenberg-Marquardt: multiplicative damping on the scaled
/// normal equations, increased on rejected steps and relaxed on accepted
/// ones, forward-difference Jacobian. Throws RankDeficiencyError (naming the
/// unidentifiable combination) when the data cannot constrain the free
/// parameters; exhausting max_iterations yields converged = false, never a
/// silent success.
LsqResult least_squares_solve(const ModelFn& model, std::span<const double> observed,
                              std::span<const double> weights,
                              const std::vector<LsqParameter>& parameters,
                              const LsqOptions& options = {});

// ---------------------------------------------------------------------------
// Domain fits
// ---------------------------------------------------------------------------

struct ScatterPoint {
    double conductance = 0.0; // S
    double reflectance = 0.0; // instrument units (baseline included)
};

/// Paired (conductance, reflectance) samples collected at one fixed
/// measurement frequency.
struct ScatterDataset {
    std::vector<ScatterPoint> points;
    double frequency = 0.0; // Hz
};

void validate(const ScatterDataset& dataset);

struct FitConfig {
    double line_impedance = 50.0;

    // free-parameter set; defaults cover the scatter fit {L, C, b}
    bool free_inductance = true;
    bool free_capacitance = true;
    bool free_baseline = true;
    bool free_loss_resistance = false;
    bool free_phi = true;       // hanger fits only
    bool free_amplitude = true; // hanger fits only

    // values used when the corresponding parameter is fixed
    double loss_resistance = 0.0;
    double baseline = 1.0;
    double phi = 0.0;
    double amplitude = 1.0;

    // explicit initial guesses; unset means derive from the data
    std::optional<double> initial_inductance;
    std::optional<double> initial_capacitance;
    std::optional<double> initial_baseline;
    std::optional<double> initial_loss_resistance;
    std::optional<double> initial_phi;
    std::optional<double> initial_amplitude;

    // baseline and loss resistance are degenerate without a G -> infinity
    // point; freeing both is refused unless explicitly overridden
    bool allow_simultaneous_baseline_loss = false;

    LsqOptions solver;
};

struct FitParameter {
    std::string name;
    double value = 0.0;
    std::string unit;
    double standard_error = 0.0;
    bool fixed = false;
};

struct FitDerived {
    double resonance_frequency = 0.0;      // Hz
    double characteristic_impedance = 0.0; // ohm
    double match_conductance = 0.0;        // S, argmin of reflectance at f0
};

struct FitResult {
    std::string kind; // "scatter", "hanger" or "generic"
    double frequency = 0.0; // measurement frequency for scatter fits
    double line_impedance = 50.0;
    std::vector<FitParameter> parameters;
    double residual_sum_squares = 0.0;
    std::size_t point_count = 0;
    int iterations = 0;
    bool converged = false;
    std::optional<FitDerived> derived;
    std::vector<double> rss_trace;

    /// Value of a named parameter; throws DomainError when absent.
    double parameter(const std::string& name) const;
    bool has_parameter(const std::string& name) const;
    /// Reassemble circuit parameters from the fitted/fixed values.
    CircuitParams circuit() const;
};

/// Versioned JSON document (schema_version 1).
std::string fit_result_to_json(const FitResult& result);
FitResult fit_result_from_json(const std::string& json_text);

/// Append a separately measured close-to-match point. Only enrichment toward
/// the match region is meaningful: the point must exceed every conductance
/// already present.
ScatterDataset augment_near_match(const ScatterDataset& dataset, ScatterPoint point);

struct ScatterInitialGuess {
    double inductance = 0.0;
    double capacitance = 0.0;
    double baseline = 0.0;
};

struct HangerInitialGuess {
    double inductance = 0.0;
    double capacitance = 0.0;
    double loss_resistance = 0.0;
    double phi = 0.0;
    double amplitude = 0.0;
};

/// Heuristic starting point for the scatter fit: f0 taken at the measurement
/// frequency, baseline from the lowest-conductance point, Zc from the match
/// condition at the minimum-reflectance point.
ScatterInitialGuess initial_guess_scatter(const ScatterDataset& dataset,
                                          const FitConfig& config);

/// Heuristic starting point for the hanger fit: f0 at the transmission
/// minimum, loss resistance from the dip depth, inductance from the
/// half-depth width. Throws InitFailureError when the sweep has no interior
/// dip.
HangerInitialGuess initial_guess_hanger(std::span<const double> frequencies,
                                        std::span<const double> s21_mag,
                                        const FitConfig& config);

/// Fixed-frequency scatter-fit of baseline * |Gamma(G, f_m)|^2 to the
/// dataset. Frees {L, C, b} by default with the loss resistance held at the
/// configured value.
FitResult fit_scatter_fixed_frequency(const ScatterDataset& dataset, const FitConfig& config);

/// Hanger-sweep fit of amplitude * |S21(f)| with free {L, C, R_loss, phi,
/// amplitude}. Needs at least 5 points spanning the resonance dip.
FitResult fit_hanger_sweep(std::span<const double> frequencies,
                           std::span<const double> s21_mag, const FitConfig& config);

/// Conductance minimizing |Gamma|^2 at the given frequency (golden-section
/// argmin over G).
double match_conductance(const CircuitParams& params, double frequency);

} // namespace lcmatch
