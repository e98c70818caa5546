#include "lcmatch/fitting.hpp"

#include "lcmatch/errors.hpp"
#include "lcmatch/numerics.hpp"
#include "lcmatch/si.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcmatch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> to_physical(const std::vector<double>& theta,
                                const std::vector<LsqParameter>& params) {
    std::vector<double> phys(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        phys[i] = params[i].scale == ParamScale::Log ? std::exp(theta[i]) : theta[i];
    return phys;
}

// weighted residual vector; returns +inf on any non-finite entry
double weighted_residuals(const ModelFn& model, const std::vector<double>& phys,
                          std::span<const double> observed, const std::vector<double>& sw,
                          std::vector<double>& r) {
    std::vector<double> pred;
    try {
        pred = model(phys);
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
    if (pred.size() != observed.size())
        throw DomainError("least_squares_solve: model returned " + std::to_string(pred.size()) +
                          " predictions for " + std::to_string(observed.size()) + " observations");
    double rss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        r[i] = (pred[i] - observed[i]) * sw[i];
        rss += r[i] * r[i];
    }
    return std::isfinite(rss) ? rss : std::numeric_limits<double>::infinity();
}

void check_rank(const std::vector<double>& jac, std::size_t n, std::size_t p,
                const std::vector<LsqParameter>& params, double rank_tolerance) {
    std::vector<double> normal(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b)
                normal[a * p + b] += jac[i * p + a] * jac[i * p + b];
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) normal[a * p + b] = normal[b * p + a];
    for (std::size_t a = 0; a < p; ++a) {
        if (!(normal[a * p + a] > 0.0))
            throw RankDeficiencyError("least_squares_solve: parameter '" + params[a].name +
                                      "' has no effect on the model near the initial guess");
    }
    // scale to unit diagonal so the eigenvalue ratio measures conditioning
    std::vector<double> scaled(p * p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b)
            scaled[a * p + b] = normal[a * p + b] /
                                std::sqrt(normal[a * p + a] * normal[b * p + b]);
    std::vector<double> eig, vec;
    jacobi_eigen_sym(scaled, p, eig, vec);
    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 1; i < p; ++i) {
        if (eig[i] < eig[imin]) imin = i;
        if (eig[i] > eig[imax]) imax = i;
    }
    if (eig[imin] < rank_tolerance * eig[imax]) {
        std::string combo;
        for (std::size_t a = 0; a < p; ++a) {
            if (std::abs(vec[a * p + imin]) >= 0.3) {
                if (!combo.empty()) combo += ", ";
                combo += params[a].name;
            }
        }
        if (combo.empty()) combo = "(mixed)";
        throw RankDeficiencyError(
            "least_squares_solve: data cannot identify the parameter combination {" + combo +
            "} (eigenvalue ratio " + std::to_string(eig[imin] / eig[imax]) + ")");
    }
}

} // namespace

LsqResult least_squares_solve(const ModelFn& model, std::span<const double> observed,
                              std::span<const double> weights,
                              const std::vector<LsqParameter>& parameters,
                              const LsqOptions& options) {
    const std::size_t n = observed.size();
    const std::size_t p = parameters.size();
    if (p == 0) throw DomainError("least_squares_solve: no free parameters");
    if (n < p)
        throw RankDeficiencyError("least_squares_solve: fewer data points (" +
                                  std::to_string(n) + ") than free parameters (" +
                                  std::to_string(p) + ")");
    if (!weights.empty() && weights.size() != n)
        throw DomainError("least_squares_solve: weight count does not match observations");

    std::vector<double> sw(n, 1.0);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) throw DomainError("least_squares_solve: negative weight");
        sw[i] = std::sqrt(weights[i]);
    }

    std::vector<double> theta(p);
    for (std::size_t i = 0; i < p; ++i) {
        const double v = parameters[i].initial;
        if (!std::isfinite(v))
            throw DomainError("least_squares_solve: initial guess for '" + parameters[i].name +
                              "' is not finite");
        if (parameters[i].scale == ParamScale::Log) {
            if (!(v > 0.0))
                throw DomainError("least_squares_solve: log-scaled parameter '" +
                                  parameters[i].name + "' needs a positive initial guess");
            theta[i] = std::log(v);
        } else {
            theta[i] = v;
        }
    }

    std::vector<double> r(n), r_trial(n), r_pert(n);
    double rss = weighted_residuals(model, to_physical(theta, parameters), observed, sw, r);
    if (!std::isfinite(rss))
        throw DomainError("least_squares_solve: model is not finite at the initial guess");

    LsqResult result;
    result.rss_trace.push_back(rss);

    auto jacobian = [&](const std::vector<double>& at, const std::vector<double>& r0,
                        std::vector<double>& jac) {
        jac.assign(n * p, 0.0);
        for (std::size_t j = 0; j < p; ++j) {
            const double h = parameters[j].scale == ParamScale::Log
                                 ? options.jacobian_step
                                 : options.jacobian_step * std::max(std::abs(at[j]), 1.0);
            std::vector<double> pert = at;
            pert[j] += h;
            const double rp =
                weighted_residuals(model, to_physical(pert, parameters), observed, sw, r_pert);
            if (!std::isfinite(rp))
                throw DomainError("least_squares_solve: model not finite while differentiating '" +
                                  parameters[j].name + "'");
            for (std::size_t i = 0; i < n; ++i) jac[i * p + j] = (r_pert[i] - r0[i]) / h;
        }
    };

    std::vector<double> jac, grad(p), normal(p * p), damped, step;
    double lambda = options.initial_damping;
    bool rank_checked = false;

    auto escalate = [&](double l) { return l == 0.0 ? 1e-4 : l * options.damping_increase; };

    while (result.iterations < options.max_iterations && !result.converged) {
        ++result.iterations;
        jacobian(theta, r, jac);
        if (!rank_checked) {
            check_rank(jac, n, p, parameters, options.rank_tolerance);
            rank_checked = true;
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        std::fill(normal.begin(), normal.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < p; ++a) {
                grad[a] += jac[i * p + a] * r[i];
                for (std::size_t b = a; b < p; ++b)
                    normal[a * p + b] += jac[i * p + a] * jac[i * p + b];
            }
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) normal[a * p + b] = normal[b * p + a];

        std::vector<double> neg_grad(p);
        for (std::size_t a = 0; a < p; ++a) neg_grad[a] = -grad[a];

        bool accepted = false;
        for (int attempt = 0; attempt < 80; ++attempt) {
            damped = normal;
            for (std::size_t a = 0; a < p; ++a)
                damped[a * p + a] += lambda * std::max(normal[a * p + a], 1e-300);
            if (!cholesky_solve(damped, p, neg_grad, step)) {
                lambda = escalate(lambda);
                if (lambda > 1e18)
                    throw RankDeficiencyError(
                        "least_squares_solve: normal equations stay singular under damping");
                continue;
            }
            double rel_step = 0.0;
            for (std::size_t a = 0; a < p; ++a)
                rel_step = std::max(rel_step, std::abs(step[a]) / std::max(std::abs(theta[a]), 1.0));
            std::vector<double> trial = theta;
            for (std::size_t a = 0; a < p; ++a) trial[a] += step[a];
            const double rss_trial =
                weighted_residuals(model, to_physical(trial, parameters), observed, sw, r_trial);
            if (rss_trial < rss) {
                const double old_rss = rss;
                theta = trial;
                rss = rss_trial;
                std::swap(r, r_trial);
                result.rss_trace.push_back(rss);
                lambda /= options.damping_decrease;
                if (lambda < 1e-12) lambda = 0.0;
                accepted = true;
                if (rel_step < options.parameter_tolerance ||
                    old_rss - rss <= options.residual_tolerance * std::max(old_rss, 1e-300))
                    result.converged = true;
                break;
            }
            // rejected: if the proposal is already below the parameter
            // tolerance, no smaller step can improve the residual
            if (rel_step < options.parameter_tolerance) {
                result.converged = true;
                break;
            }
            lambda = escalate(lambda);
            if (lambda > 1e15) break;
        }
        if (!accepted && !result.converged) break; // damping exhausted away from a minimum
    }

    result.parameters = to_physical(theta, parameters);
    result.residual_sum_squares = rss;

    // standard errors from the Jacobian at the optimum
    result.standard_errors.assign(p, kNaN);
    jacobian(theta, r, jac);
    std::fill(normal.begin(), normal.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b)
                normal[a * p + b] += jac[i * p + a] * jac[i * p + b];
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) normal[a * p + b] = normal[b * p + a];
    std::vector<double> cov;
    if (n > p && cholesky_invert(normal, p, cov)) {
        const double s2 = rss / static_cast<double>(n - p);
        for (std::size_t a = 0; a < p; ++a) {
            const double se_theta = std::sqrt(std::max(cov[a * p + a] * s2, 0.0));
            result.standard_errors[a] = parameters[a].scale == ParamScale::Log
                                            ? se_theta * result.parameters[a]
                                            : se_theta;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

void validate(const ScatterDataset& dataset) {
    if (dataset.points.empty()) throw DomainError("scatter dataset: no points");
    if (!(dataset.frequency > 0.0)) throw DomainError("scatter dataset: frequency must be > 0");
    for (const auto& pt : dataset.points) {
        if (!(pt.conductance >= 0.0))
            throw DomainError("scatter dataset: conductance must be >= 0");
        if (!(pt.reflectance >= 0.0))
            throw DomainError("scatter dataset: reflectance must be >= 0");
    }
}

ScatterDataset augment_near_match(const ScatterDataset& dataset, ScatterPoint point) {
    validate(dataset);
    double g_max = 0.0;
    for (const auto& pt : dataset.points) g_max = std::max(g_max, pt.conductance);
    if (!(point.conductance > g_max))
        throw DomainError("augment_near_match: point must exceed every conductance in the "
                          "dataset (enrichment is only meaningful toward the match region)");
    ScatterDataset out = dataset;
    out.points.push_back(point);
    return out;
}

double match_conductance(const CircuitParams& params, double frequency) {
    validate(params);
    if (!(frequency > 0.0)) throw DomainError("match_conductance: frequency must be > 0");
    const double zc = characteristic_impedance(params);
    const double g_scale = params.line_impedance / (zc * zc);
    return golden_section_min(
        [&](double g) { return std::norm(reflection_coefficient(params, Load{g}, frequency)); },
        0.0, 100.0 * g_scale, 1e-9 * g_scale, 400);
}

ScatterInitialGuess initial_guess_scatter(const ScatterDataset& dataset,
                                          const FitConfig& config) {
    validate(dataset);
    ScatterInitialGuess guess;

    // baseline from the lowest-conductance point (|Gamma| ~ 1 there)
    const auto lowest_g = std::min_element(
        dataset.points.begin(), dataset.points.end(),
        [](const ScatterPoint& a, const ScatterPoint& b) { return a.conductance < b.conductance; });
    guess.baseline = lowest_g->reflectance > 0.0 ? lowest_g->reflectance : 1.0;

    // Zc from the match condition at the minimum-reflectance point
    const auto min_refl = std::min_element(
        dataset.points.begin(), dataset.points.end(),
        [](const ScatterPoint& a, const ScatterPoint& b) { return a.reflectance < b.reflectance; });
    double zc = 20.0 * config.line_impedance; // fallback in the typical-kOhm range
    if (min_refl->conductance > 0.0) {
        const double r = 1.0 / min_refl->conductance;
        if (r > config.loss_resistance && config.line_impedance > config.loss_resistance)
            zc = match_condition_zc(r, config.line_impedance, config.loss_resistance);
    }
    const double w0 = 2.0 * kPi * dataset.frequency; // resonance assumed near f_m
    guess.inductance = zc / w0;
    guess.capacitance = 1.0 / (zc * w0);
    return guess;
}

HangerInitialGuess initial_guess_hanger(std::span<const double> frequencies,
                                        std::span<const double> s21_mag,
                                        const FitConfig& config) {
    const std::size_t n = frequencies.size();
    if (n == 0) throw DomainError("initial_guess_hanger: empty sweep");
    if (s21_mag.size() != n)
        throw DomainError("initial_guess_hanger: frequency and magnitude counts differ");
    if (n < 5) throw DomainError("initial_guess_hanger: need at least 5 sweep points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(frequencies[i] > frequencies[i - 1]))
            throw DomainError("initial_guess_hanger: frequencies must be strictly increasing");

    std::size_t imin = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (s21_mag[i] < s21_mag[imin]) imin = i;
    if (imin == 0 || imin == n - 1)
        throw InitFailureError("initial_guess_hanger: no interior transmission dip "
                               "(|S21| is monotone over the sweep)");

    HangerInitialGuess guess;
    const double f0 = frequencies[imin];

    // shoulder amplitude: median of the outer tenth on each side
    std::vector<double> shoulder;
    const std::size_t edge = std::max<std::size_t>(n / 10, 1);
    for (std::size_t i = 0; i < edge; ++i) {
        shoulder.push_back(s21_mag[i]);
        shoulder.push_back(s21_mag[n - 1 - i]);
    }
    std::sort(shoulder.begin(), shoulder.end());
    double amplitude = shoulder[shoulder.size() / 2];
    if (!(amplitude > 0.0)) throw InitFailureError("initial_guess_hanger: flat sweep");

    const double z0 = config.line_impedance;
    const double dip = std::clamp(s21_mag[imin] / amplitude, 1e-6, 0.999);
    const double rloss = z0 * dip / (2.0 * (1.0 - dip)); // from S21_min = 2R/(2R + Z0)

    // inductance from the half-depth width: |X| at the half level for a
    // series R-L-C tapped onto the line
    const double half = 0.5 * (s21_mag[imin] + amplitude);
    double f_lo = 0.0, f_hi = 0.0;
    for (std::size_t i = imin; i + 1 < n; ++i) {
        if (s21_mag[i + 1] >= half) {
            const double t = (half - s21_mag[i]) / (s21_mag[i + 1] - s21_mag[i]);
            f_hi = frequencies[i] + t * (frequencies[i + 1] - frequencies[i]);
            break;
        }
    }
    for (std::size_t i = imin; i > 0; --i) {
        if (s21_mag[i - 1] >= half) {
            const double t = (half - s21_mag[i]) / (s21_mag[i - 1] - s21_mag[i]);
            f_lo = frequencies[i] - t * (frequencies[i] - frequencies[i - 1]);
            break;
        }
    }
    double half_width;
    if (f_lo > 0.0 && f_hi > 0.0)
        half_width = 0.5 * (f_hi - f_lo);
    else if (f_hi > 0.0)
        half_width = f_hi - f0;
    else if (f_lo > 0.0)
        half_width = f0 - f_lo;
    else
        half_width = (frequencies[n - 1] - frequencies[0]) / 10.0;

    const double h = half / amplitude;
    const double x_half_sq =
        (h * h * (2.0 * rloss + z0) * (2.0 * rloss + z0) - 4.0 * rloss * rloss) /
        (4.0 * (1.0 - h * h));
    const double x_half = std::sqrt(std::max(x_half_sq, 1e-6 * z0 * z0));
    const double inductance = x_half / (4.0 * kPi * half_width);

    guess.inductance = inductance;
    guess.capacitance = 1.0 / ((2.0 * kPi * f0) * (2.0 * kPi * f0) * inductance);
    guess.loss_resistance = std::max(rloss, 1e-3);
    guess.phi = config.initial_phi.value_or(0.0);
    guess.amplitude = amplitude;
    return guess;
}

namespace {

// canonical parameter table shared by both fits
struct ParamSlot {
    std::string name;
    std::string unit;
    bool free = false;
    double value = 0.0; // initial when free, fixed value otherwise
    ParamScale scale = ParamScale::Log;
};

FitResult run_fit(const std::string& kind, double frequency,
                  const std::vector<ParamSlot>& slots, const FitConfig& config,
                  std::span<const double> observed,
                  const std::function<std::vector<double>(const std::vector<double>&)>& eval) {
    // eval receives the full slot-ordered value vector (fixed values included)
    std::vector<LsqParameter> lsq_params;
    std::vector<std::size_t> free_index;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].free) continue;
        lsq_params.push_back({slots[i].name, slots[i].value, slots[i].scale});
        free_index.push_back(i);
    }
    std::vector<double> full(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) full[i] = slots[i].value;

    const ModelFn model = [&](std::span<const double> p) {
        std::vector<double> values = full;
        for (std::size_t k = 0; k < free_index.size(); ++k) values[free_index[k]] = p[k];
        return eval(values);
    };

    const LsqResult lsq =
        least_squares_solve(model, observed, {}, lsq_params, config.solver);

    FitResult result;
    result.kind = kind;
    result.frequency = frequency;
    result.line_impedance = config.line_impedance;
    result.residual_sum_squares = lsq.residual_sum_squares;
    result.point_count = observed.size();
    result.iterations = lsq.iterations;
    result.converged = lsq.converged;
    result.rss_trace = lsq.rss_trace;

    std::vector<double> final_values = full;
    for (std::size_t k = 0; k < free_index.size(); ++k)
        final_values[free_index[k]] = lsq.parameters[k];
    for (std::size_t i = 0; i < slots.size(); ++i) {
        FitParameter fp;
        fp.name = slots[i].name;
        fp.unit = slots[i].unit;
        fp.value = final_values[i];
        fp.fixed = !slots[i].free;
        fp.standard_error = 0.0;
        result.parameters.push_back(fp);
    }
    for (std::size_t k = 0; k < free_index.size(); ++k)
        result.parameters[free_index[k]].standard_error = lsq.standard_errors[k];
    return result;
}

void attach_derived(FitResult& result) {
    const CircuitParams circuit = result.circuit();
    FitDerived derived;
    derived.resonance_frequency = resonance_frequency(circuit);
    derived.characteristic_impedance = characteristic_impedance(circuit);
    derived.match_conductance = match_conductance(circuit, derived.resonance_frequency);
    result.derived = derived;
}

} // namespace

FitResult fit_scatter_fixed_frequency(const ScatterDataset& dataset_in, const FitConfig& config) {
    validate(dataset_in);
    if (config.free_baseline && config.free_loss_resistance &&
        !config.allow_simultaneous_baseline_loss)
        throw RankDeficiencyError(
            "fit_scatter_fixed_frequency: baseline and loss resistance cannot be determined "
            "simultaneously without a G -> infinity point; fix one of them (or set "
            "allow_simultaneous_baseline_loss to override)");

    // canonical point order: the fit consumes a set, so shuffled datasets
    // produce identical results
    ScatterDataset dataset = dataset_in;
    std::sort(dataset.points.begin(), dataset.points.end(),
              [](const ScatterPoint& a, const ScatterPoint& b) {
                  return a.conductance != b.conductance ? a.conductance < b.conductance
                                                        : a.reflectance < b.reflectance;
              });

    const ScatterInitialGuess guess = initial_guess_scatter(dataset, config);
    std::vector<ParamSlot> slots = {
        {"inductance", "H", config.free_inductance,
         config.initial_inductance.value_or(guess.inductance), ParamScale::Log},
        {"capacitance", "F", config.free_capacitance,
         config.initial_capacitance.value_or(guess.capacitance), ParamScale::Log},
        {"baseline", "dimensionless", config.free_baseline,
         config.free_baseline ? config.initial_baseline.value_or(guess.baseline)
                              : config.baseline,
         ParamScale::Log},
        {"loss_resistance", "ohm", config.free_loss_resistance,
         config.free_loss_resistance
             ? config.initial_loss_resistance.value_or(std::max(config.loss_resistance, 0.1))
             : config.loss_resistance,
         ParamScale::Log},
    };

    std::vector<double> observed;
    observed.reserve(dataset.points.size());
    for (const auto& pt : dataset.points) observed.push_back(pt.reflectance);

    const double f_m = dataset.frequency;
    const double z0 = config.line_impedance;
    FitResult result = run_fit(
        "scatter", f_m, slots, config, observed, [&](const std::vector<double>& v) {
            const CircuitParams params{v[0], v[1], v[3], z0};
            std::vector<double> pred;
            pred.reserve(dataset.points.size());
            for (const auto& pt : dataset.points)
                pred.push_back(vna_reflectance(params, Load{pt.conductance}, f_m, v[2]));
            return pred;
        });
    attach_derived(result);
    return result;
}

FitResult fit_hanger_sweep(std::span<const double> frequencies,
                           std::span<const double> s21_mag, const FitConfig& config) {
    const HangerInitialGuess guess = initial_guess_hanger(frequencies, s21_mag, config);
    std::vector<ParamSlot> slots = {
        {"inductance", "H", config.free_inductance,
         config.initial_inductance.value_or(guess.inductance), ParamScale::Log},
        {"capacitance", "F", config.free_capacitance,
         config.initial_capacitance.value_or(guess.capacitance), ParamScale::Log},
        {"loss_resistance", "ohm", config.free_loss_resistance,
         config.free_loss_resistance
             ? config.initial_loss_resistance.value_or(guess.loss_resistance)
             : config.loss_resistance,
         ParamScale::Log},
        {"phi", "rad", config.free_phi, config.initial_phi.value_or(guess.phi),
         ParamScale::Linear},
        {"amplitude", "dimensionless", config.free_amplitude,
         config.initial_amplitude.value_or(guess.amplitude), ParamScale::Log},
    };

    const double z0 = config.line_impedance;
    const std::vector<double> freqs(frequencies.begin(), frequencies.end());
    FitResult result = run_fit(
        "hanger", 0.0, slots, config, s21_mag, [&](const std::vector<double>& v) {
            const CircuitParams params{v[0], v[1], v[2], z0};
            std::vector<double> pred;
            pred.reserve(freqs.size());
            for (double f : freqs)
                pred.push_back(v[4] * std::abs(hanger_s21(params, Load{0.0}, f, v[3])));
            return pred;
        });
    attach_derived(result);
    return result;
}

// ---------------------------------------------------------------------------

double FitResult::parameter(const std::string& name) const {
    for (const auto& p : parameters)
        if (p.name == name) return p.value;
    throw DomainError("FitResult: no parameter named '" + name + "'");
}

bool FitResult::has_parameter(const std::string& name) const {
    for (const auto& p : parameters)
        if (p.name == name) return true;
    return false;
}

CircuitParams FitResult::circuit() const {
    CircuitParams params;
    params.inductance = parameter("inductance");
    params.capacitance = parameter("capacitance");
    params.loss_resistance = has_parameter("loss_resistance") ? parameter("loss_resistance") : 0.0;
    params.line_impedance = line_impedance;
    return params;
}

std::string fit_result_to_json(const FitResult& result) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["kind"] = result.kind;
    doc["frequency_hz"] = result.frequency;
    doc["line_impedance_ohm"] = result.line_impedance;
    doc["converged"] = result.converged;
    doc["iterations"] = result.iterations;
    doc["point_count"] = result.point_count;
    doc["residual_sum_squares"] = result.residual_sum_squares;
    doc["parameters"] = nlohmann::json::array();
    for (const auto& p : result.parameters) {
        nlohmann::json jp;
        jp["name"] = p.name;
        jp["value"] = p.value;
        jp["unit"] = p.unit;
        // NaN (undefined error) serializes as null
        jp["standard_error"] = p.standard_error;
        jp["fixed"] = p.fixed;
        doc["parameters"].push_back(jp);
    }
    if (result.derived) {
        doc["derived"] = {
            {"resonance_frequency_hz", result.derived->resonance_frequency},
            {"characteristic_impedance_ohm", result.derived->characteristic_impedance},
            {"match_conductance_s", result.derived->match_conductance},
        };
    }
    return doc.dump(2);
}

FitResult fit_result_from_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("fit result JSON: ") + e.what());
    }
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
        throw ParseError("fit result JSON: missing schema_version");
    if (doc["schema_version"].get<int>() != 1)
        throw ParseError("fit result JSON: unsupported schema_version");
    FitResult result;
    try {
        result.kind = doc.at("kind").get<std::string>();
        result.frequency = doc.at("frequency_hz").get<double>();
        result.line_impedance = doc.at("line_impedance_ohm").get<double>();
        result.converged = doc.at("converged").get<bool>();
        result.iterations = doc.at("iterations").get<int>();
        result.point_count = doc.at("point_count").get<std::size_t>();
        result.residual_sum_squares = doc.at("residual_sum_squares").get<double>();
        for (const auto& jp : doc.at("parameters")) {
            FitParameter p;
            p.name = jp.at("name").get<std::string>();
            p.value = jp.at("value").get<double>();
            p.unit = jp.at("unit").get<std::string>();
            p.standard_error = jp.at("standard_error").is_null()
                                   ? kNaN
                                   : jp.at("standard_error").get<double>();
            p.fixed = jp.at("fixed").get<bool>();
            result.parameters.push_back(p);
        }
        if (doc.contains("derived")) {
            FitDerived derived;
            derived.resonance_frequency = doc["derived"].at("resonance_frequency_hz").get<double>();
            derived.characteristic_impedance =
                doc["derived"].at("characteristic_impedance_ohm").get<double>();
            derived.match_conductance = doc["derived"].at("match_conductance_s").get<double>();
            result.derived = derived;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("fit result JSON: ") + e.what());
    }
    return result;
}

} // namespace lcmatch
