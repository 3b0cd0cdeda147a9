#pragma once

#include <vector>

#include "kdvq/lattice.hpp"

namespace kdvq {

/// Ordered physical-space sample points inside a window.
struct SpatialSampling {
    std::vector<double> points;
    double x_min = 0.0;
    double x_max = 0.0;

    SpatialSampling() = default;
    SpatialSampling(std::vector<double> pts, double a, double b);

    /// n uniformly spaced points covering [a, b].
    static SpatialSampling uniform(std::size_t n, double a, double b);
};

/// sgn(sin x): the 2pi-periodic square wave.
inline double square_wave(double x) {
    const double s = std::sin(x);
    return (s > 0.0) - (s < 0.0);
}

/** Fourier data of sq(alpha_c x) on the two-frequency lattice: component 1
 *  populates (k, 0), component 2 populates (0, k), k odd, |k| <= N, with
 *  amplitude 2/(pi i k). */
CoefficientField square_wave_coefficients(const FrequencyBasis& basis, int component, int N);

/// Both components summed: the quasiperiodic data sq(alpha1 x) + sq(alpha2 x).
CoefficientField square_wave_both_components(const FrequencyBasis& basis, int N);

/// Airy flow on coefficients: each amplitude multiplied by exp(i t (alpha.xi)^3).
CoefficientField airy_propagate(const CoefficientField& field, double t,
                                const FrequencyBasis& basis);

/** Evaluates sum_xi f_xi exp(i (alpha.xi) x) at the sample points.  The result
 *  is real by Hermitian symmetry; imaginary residues above
 *  1e-9 * sum|f_xi| raise SymmetryViolation. */
std::vector<double> evaluate_field(const CoefficientField& field, const FrequencyBasis& basis,
                                   const SpatialSampling& sampling, unsigned workers = 1);

/** Discrete multiplier transform of exp(2 pi i p xi^3 / q): q complex weights
 *  d_k with sum|d_k|^2 = 1, describing w(t, x) = sum_k d_k sq(alpha x + 2 pi k/q)
 *  at the rational time alpha^3 t = 2 pi p/q. */
struct TalbotDecomposition {
    long long p = 0;
    long long q = 1;
    std::vector<Complex> weights;
    double shift_step = 0.0;  // 2*pi / (q * alpha)
};

struct TalbotResult {
    TalbotDecomposition decomposition;
    std::vector<double> samples;         // Gauss-sum piecewise-constant profile
    std::vector<double> direct_samples;  // symmetric partial sum truncated at N
};

/** Rational-time reconstruction of the Airy-evolved square wave of period
 *  2 pi / alpha_scalar at alpha^3 t = 2 pi p/q.  Throws NotCoprime unless
 *  gcd(p, q) = 1, q >= 1. */
TalbotResult talbot_reconstruct(long long p, long long q, double alpha_scalar, int N,
                                const SpatialSampling& sampling, unsigned workers = 1);

/// Consecutive-sample increments |f(x_{j+1}) - f(x_j)| and their maximum.
struct JumpProfile {
    double max_increment = 0.0;
    std::vector<double> increments;
};

JumpProfile jump_profile(const std::vector<double>& samples, const SpatialSampling& sampling);

}  // namespace kdvq
