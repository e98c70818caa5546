#pragma once

#include <complex>

namespace lcmatch {

using Complex = std::complex<double>;

/// Lumped-element model of the matching circuit: series loss resistance and
/// inductance, shunt capacitance, feed line impedance. Strict SI units.
struct CircuitParams {
    double inductance = 0.0;      // H
    double capacitance = 0.0;     // F
    double loss_resistance = 0.0; // ohm
    double line_impedance = 50.0; // ohm
};

/// The device presented to the tank, described by its conductance.
/// conductance == 0 is an open load (deep Coulomb blockade).
struct Load {
    double conductance = 0.0; // S
};

/// Throw DomainError unless the parameter invariants hold
/// (L > 0, C > 0, Z0 > 0, R_loss >= 0; G >= 0).
void validate(const CircuitParams& params);
void validate(const Load& load);

/// Quality factor that may be unbounded (lossless internal Q). Keeps the
/// infinity out of arithmetic: combine via reciprocal().
class QFactor {
public:
    static QFactor unbounded() { return QFactor(true, 0.0); }
    static QFactor finite(double value) { return QFactor(false, value); }
    bool is_unbounded() const { return unbounded_; }
    /// Finite value; throws DomainError when unbounded.
    double value() const;
    double reciprocal() const { return unbounded_ ? 0.0 : 1.0 / value_; }

private:
    QFactor(bool unbounded, double value) : unbounded_(unbounded), value_(value) {}
    bool unbounded_;
    double value_;
};

struct DerivedQuantities {
    double resonance_frequency = 0.0;       // Hz
    double characteristic_impedance = 0.0;  // ohm
    QFactor q_internal = QFactor::unbounded();
    double q_external = 0.0;
    double q_total = 0.0;
    double bandwidth = 0.0;                 // Hz, f0 / q_total
    double g_match = 0.0;                   // S, matching-condition estimate (Z0 - R_loss)/Zc^2
};

/// f0 = 1 / (2 pi sqrt(LC)).
double resonance_frequency(const CircuitParams& params);

/// Zc = sqrt(L / C).
double characteristic_impedance(const CircuitParams& params);

/// Series-tank input impedance R_loss + i w L + 1/(G + i w C) at frequency f.
/// Finite for every f > 0, including the open load (C > 0 keeps the parallel
/// branch bounded).
Complex input_impedance(const CircuitParams& params, const Load& load, double f);

/// On-resonance approximation R_loss + Zc^2 / R, valid for Zc << R.
/// The gate is enforced as Zc < R/5; outside it an ApproxDomainError carries
/// both values.
double input_impedance_resonant_approx(const CircuitParams& params, const Load& load);

/// Characteristic impedance achieving full matching at resonance:
/// sqrt((Z0 - R_loss) R). Throws NoMatchError when Z0 <= R_loss.
double match_condition_zc(double load_resistance, double line_impedance,
                          double loss_resistance);

/// Gamma = (Z_in - Z0) / (Z_in + Z0). |Gamma| <= 1 for any passive circuit.
Complex reflection_coefficient(const CircuitParams& params, const Load& load, double f);

/// Instrument-referred reflectance baseline * |Gamma|^2.
double vna_reflectance(const CircuitParams& params, const Load& load, double f,
                       double baseline);

/// Q decomposition: 1/q_int = R_loss/Zc, 1/q_ext = Z0/Zc + Zc G,
/// reciprocal combination, and bandwidth f0/q_total. g_match is the
/// closed-form matching estimate and goes negative when Z0 <= R_loss.
DerivedQuantities quality_factors(const CircuitParams& params, const Load& load);

/// Minimal external Q over Zc at fixed load: sqrt(R/Z0)/2, attained at
/// Zc = sqrt(R Z0).
double min_external_q(double load_resistance, double line_impedance);

/// Transmission function of the device noise voltage onto the line,
/// Z0 G / (1 + i W (Z0/Zc + R_loss/Zc + Zc/R) - W^2) with W = 2 pi f sqrt(LC).
/// Returns exactly zero for an open load (no source current), not an error.
Complex transfer_function_approx(const CircuitParams& params, const Load& load, double f);

/// Exact voltage division for the noise network: source in series with R,
/// node shunted by C, series R_loss + L into the Z0 termination.
Complex transfer_function_exact(const CircuitParams& params, const Load& load, double f);

/// Integral of |t_V(f)|^2 over [f_center - bw/2, f_center + bw/2], adaptive
/// Simpson to 1e-9 relative (max depth 40). Result has units of Hz.
double integrated_transfer(const CircuitParams& params, const Load& load, double f_center,
                           double bandwidth);

/// Hanger-geometry transmission 2 / (2 + Z_line/Z) with Z = Z_in(G = 0) and
/// Z_line = Z0 e^{i phi}. The load argument must be open (G == 0); the coil
/// hangs on the line with no device attached in this test structure. A
/// lossless circuit exactly on resonance returns 0 (full dip).
Complex hanger_s21(const CircuitParams& params, const Load& load, double f, double phi);

} // namespace lcmatch
