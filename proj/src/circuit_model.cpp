#include "lcmatch/circuit_model.hpp"

#include "lcmatch/errors.hpp"
#include "lcmatch/numerics.hpp"
#include "lcmatch/si.hpp"

#include <cmath>

namespace lcmatch {

void validate(const CircuitParams& params) {
    if (!(params.inductance > 0.0)) throw DomainError("circuit: inductance must be > 0");
    if (!(params.capacitance > 0.0)) throw DomainError("circuit: capacitance must be > 0");
    if (!(params.line_impedance > 0.0)) throw DomainError("circuit: line impedance must be > 0");
    if (!(params.loss_resistance >= 0.0))
        throw DomainError("circuit: loss resistance must be >= 0");
}

void validate(const Load& load) {
    if (!(load.conductance >= 0.0)) throw DomainError("load: conductance must be >= 0");
}

double QFactor::value() const {
    if (unbounded_) throw DomainError("QFactor: unbounded quality factor has no finite value");
    return value_;
}

double resonance_frequency(const CircuitParams& params) {
    validate(params);
    return 1.0 / (2.0 * kPi * std::sqrt(params.inductance * params.capacitance));
}

double characteristic_impedance(const CircuitParams& params) {
    validate(params);
    return std::sqrt(params.inductance / params.capacitance);
}

Complex input_impedance(const CircuitParams& params, const Load& load, double f) {
    validate(params);
    validate(load);
    if (!(f > 0.0)) throw DomainError("input_impedance: frequency must be > 0");
    const double w = 2.0 * kPi * f;
    const Complex parallel = 1.0 / Complex(load.conductance, w * params.capacitance);
    return Complex(params.loss_resistance, w * params.inductance) + parallel;
}

double input_impedance_resonant_approx(const CircuitParams& params, const Load& load) {
    validate(params);
    validate(load);
    const double zc = characteristic_impedance(params);
    // Zc < R/5 gate, written conductance-side so the open load passes trivially
    if (zc * load.conductance >= 0.2) {
        throw ApproxDomainError("input_impedance_resonant_approx: requires Zc < R/5", zc,
                                1.0 / load.conductance);
    }
    return params.loss_resistance + zc * zc * load.conductance;
}

double match_condition_zc(double load_resistance, double line_impedance,
                          double loss_resistance) {
    if (!(loss_resistance >= 0.0))
        throw DomainError("match_condition_zc: loss resistance must be >= 0");
    if (line_impedance <= loss_resistance)
        throw NoMatchError("match_condition_zc: no matching Zc exists for Z0 <= R_loss");
    if (!(load_resistance > loss_resistance))
        throw DomainError("match_condition_zc: load resistance must exceed R_loss");
    return std::sqrt((line_impedance - loss_resistance) * load_resistance);
}

Complex reflection_coefficient(const CircuitParams& params, const Load& load, double f) {
    const Complex zin = input_impedance(params, load, f);
    return (zin - params.line_impedance) / (zin + params.line_impedance);
}

double vna_reflectance(const CircuitParams& params, const Load& load, double f,
                       double baseline) {
    if (!(baseline > 0.0)) throw DomainError("vna_reflectance: baseline must be > 0");
    return baseline * std::norm(reflection_coefficient(params, load, f));
}

DerivedQuantities quality_factors(const CircuitParams& params, const Load& load) {
    validate(params);
    validate(load);
    DerivedQuantities out;
    out.resonance_frequency = resonance_frequency(params);
    const double zc = characteristic_impedance(params);
    out.characteristic_impedance = zc;
    out.q_internal = params.loss_resistance == 0.0
                         ? QFactor::unbounded()
                         : QFactor::finite(zc / params.loss_resistance);
    out.q_external = 1.0 / (params.line_impedance / zc + zc * load.conductance);
    out.q_total = 1.0 / (out.q_internal.reciprocal() + 1.0 / out.q_external);
    out.bandwidth = out.resonance_frequency / out.q_total;
    out.g_match = (params.line_impedance - params.loss_resistance) / (zc * zc);
    return out;
}

double min_external_q(double load_resistance, double line_impedance) {
    if (!(load_resistance > 0.0) || !(line_impedance > 0.0))
        throw DomainError("min_external_q: resistances must be > 0");
    return std::sqrt(load_resistance / line_impedance) / 2.0;
}

Complex transfer_function_approx(const CircuitParams& params, const Load& load, double f) {
    validate(params);
    validate(load);
    if (!(f > 0.0)) throw DomainError("transfer_function_approx: frequency must be > 0");
    if (load.conductance == 0.0) return Complex(0.0, 0.0); // no source current
    const double zc = characteristic_impedance(params);
    const double omega_ratio =
        2.0 * kPi * f * std::sqrt(params.inductance * params.capacitance);
    const double loss_sum = params.line_impedance / zc + params.loss_resistance / zc +
                            zc * load.conductance;
    const Complex denom(1.0 - omega_ratio * omega_ratio, omega_ratio * loss_sum);
    return params.line_impedance * load.conductance / denom;
}

Complex transfer_function_exact(const CircuitParams& params, const Load& load, double f) {
    validate(params);
    validate(load);
    if (!(f > 0.0)) throw DomainError("transfer_function_exact: frequency must be > 0");
    if (load.conductance == 0.0) return Complex(0.0, 0.0);
    const double w = 2.0 * kPi * f;
    const Complex series_leg(params.loss_resistance + params.line_impedance,
                             w * params.inductance);
    const Complex cap_branch(0.0, -1.0 / (w * params.capacitance));
    const Complex z_parallel = series_leg * cap_branch / (series_leg + cap_branch);
    // source divider written conductance-side so it stays stable as G -> 0
    const Complex source_divider =
        load.conductance * z_parallel / (1.0 + load.conductance * z_parallel);
    const Complex line_divider =
        params.line_impedance /
        Complex(params.line_impedance + params.loss_resistance, w * params.inductance);
    return source_divider * line_divider;
}

double integrated_transfer(const CircuitParams& params, const Load& load, double f_center,
                           double bandwidth) {
    validate(params);
    validate(load);
    if (!(bandwidth > 0.0)) throw DomainError("integrated_transfer: bandwidth must be > 0");
    const double lo = f_center - 0.5 * bandwidth;
    const double hi = f_center + 0.5 * bandwidth;
    if (!(lo > 0.0))
        throw DomainError("integrated_transfer: band must lie at positive frequencies");
    if (load.conductance == 0.0) return 0.0;
    return adaptive_simpson(
        [&](double f) { return std::norm(transfer_function_approx(params, load, f)); }, lo, hi,
        1e-9, 40);
}

Complex hanger_s21(const CircuitParams& params, const Load& load, double f, double phi) {
    validate(params);
    if (load.conductance != 0.0)
        throw DomainError("hanger_s21: hanger test structure has no load attached (G must be 0)");
    const Complex z = input_impedance(params, Load{0.0}, f);
    if (std::abs(z) == 0.0) return Complex(0.0, 0.0); // lossless exactly on resonance: full dip
    const Complex z_line = params.line_impedance * std::polar(1.0, phi);
    return 2.0 / (2.0 + z_line / z);
}

} // namespace lcmatch
