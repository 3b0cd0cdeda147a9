#pragma once

#include <stdexcept>
#include <string>

namespace kdvq {

/** Base class for all toolkit errors.  `code()` is a stable machine-readable
 *  tag used by the CLI when emitting structured error records. */
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Some alpha.xi evaluated to exactly zero: the frequency vector is rationally
/// dependent at machine precision.
class RationalDependence : public Error {
public:
    explicit RationalDependence(const std::string& what)
        : Error("rational_dependence", what) {}
};

/// Hermitian symmetry audit failed (field does not represent a real function).
class SymmetryViolation : public Error {
public:
    explicit SymmetryViolation(const std::string& what)
        : Error("symmetry_violation", what) {}
};

/// gcd(p, q) != 1 in a rational-time decomposition.
class NotCoprime : public Error {
public:
    explicit NotCoprime(const std::string& what) : Error("not_coprime", what) {}
};

/// Picard fixed-point iteration failed to contract within the iteration cap.
class PicardDivergence : public Error {
public:
    PicardDivergence(const std::string& what, double failing_time)
        : Error("picard_divergence", what), failing_time_(failing_time) {}
    double failing_time() const noexcept { return failing_time_; }

private:
    double failing_time_;
};

/// kappa^2 < 4*sup|q|: the series expansion is outside its convergence regime.
class HypothesisViolated : public Error {
public:
    explicit HypothesisViolated(const std::string& what)
        : Error("hypothesis_violated", what) {}
};

/// The quadrature window is too small to certify the requested tolerance.
class DomainTooSmall : public Error {
public:
    explicit DomainTooSmall(const std::string& what)
        : Error("domain_too_small", what) {}
};

/// Two sampled fields live on different grids.
class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& what)
        : Error("grid_mismatch", what) {}
};

/// Forced pairs fed to the Gronwall verifier disagree at t = 0.
class InitialDataMismatch : public Error {
public:
    explicit InitialDataMismatch(const std::string& what)
        : Error("initial_data_mismatch", what) {}
};

/// A quadrature grid cannot resolve the requested frequencies.
class UnderResolved : public Error {
public:
    explicit UnderResolved(const std::string& what)
        : Error("under_resolved", what) {}
};

/// Invalid run configuration (bad flag value, unwritable path, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

}  // namespace kdvq
