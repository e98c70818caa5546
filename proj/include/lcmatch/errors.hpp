#pragma once

#include <stdexcept>
#include <string>

namespace lcmatch {

/// Invalid argument or precondition violation in a model operation.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// The on-resonance approximation was requested outside its validity range.
/// Carries the two compared impedances so callers can report the violation.
class ApproxDomainError : public DomainError {
public:
    ApproxDomainError(const std::string& what, double zc, double r)
        : DomainError(what), characteristic_impedance(zc), load_resistance(r) {}
    double characteristic_impedance;
    double load_resistance;
};

/// No characteristic impedance achieves matching (Z0 <= R_loss).
class NoMatchError : public DomainError {
public:
    explicit NoMatchError(const std::string& what) : DomainError(what) {}
};

/// The least-squares problem cannot identify all free parameters.
class RankDeficiencyError : public std::runtime_error {
public:
    explicit RankDeficiencyError(const std::string& what) : std::runtime_error(what) {}
};

/// Automatic initialization from data failed (e.g. no resonance dip present).
class InitFailureError : public std::runtime_error {
public:
    explicit InitFailureError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to reach its requested accuracy.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double achieved_tolerance)
        : std::runtime_error(what), achieved_tolerance(achieved_tolerance) {}
    double achieved_tolerance;
};

/// Malformed input file. Line numbers are 1-based; 0 means not line-specific.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line(line) {}
    std::size_t line;
};

/// Grid axes or dimensions do not match between operands.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration document; message names the offending field path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lcmatch
