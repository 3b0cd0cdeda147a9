#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "kdvq/errors.hpp"

namespace kdvq {

/** Bohr epsilon-almost-period query: candidate shifts are accepted when the
 *  windowed sampled sup of |f(x+l) - f(x)| stays below epsilon.  The sup is
 *  approximated on `samples` window points plus a half-step-shifted second
 *  lattice, which catches mismatched jumps of piecewise-constant inputs. */
struct AlmostPeriodQuery {
    double epsilon = 1.0;
    double x_min = 0.0;
    double x_max = 1.0;
    std::vector<double> shift_grid;
    std::size_t samples = 10000;
    unsigned workers = 1;
};

struct ShiftScanReport {
    std::vector<double> accepted;  // ascending
    double window_step = 0.0;
    double max_gap = 0.0;  // largest gap between consecutive accepted shifts
};

ShiftScanReport almost_period_scan(const std::function<double(double)>& f,
                                   const AlmostPeriodQuery& query);

/// Stepanov S^p norm: (sup over shifts of int_{-1}^{1} |f(x+y)|^p dx)^{1/p}.
double stepanov_norm(const std::function<double(double)>& f, double p,
                     const std::vector<double>& shift_grid, std::size_t nodes = 2049);

/** Gaussian wave packet of the Airy flow: eta is the carrier frequency, t0 the
 *  reference time at which the packet refocuses to a unit Gaussian envelope. */
struct WavePacketSpec {
    double eta = 0.0;
    double t0 = 1e-6;
    int n_max = 6;
    int k_max = 2;

    void validate() const {
        if (!(t0 > 0.0)) throw ConfigError("WavePacketSpec: t0 must be positive");
        if (n_max < 1 || k_max < 0) throw ConfigError("WavePacketSpec: bad cutoffs");
    }
};

/// Closed-form packet at time 0 (principal-branch square root).
std::complex<double> wave_packet_initial(const WavePacketSpec& spec, double x);

/// Closed-form Fourier data of the packet at time t0:
/// exp{ i t0 (xi-eta)^3 - (xi-eta)^2 / 2 }.
std::complex<double> wave_packet_evolved_hat(const WavePacketSpec& spec, double xi);

/** Envelope of the evolved packet: phi(t0, x; eta) = e^{i eta x} Psi(x), with
 *  Psi the inverse transform of e^{i t0 u^3 - u^2/2} over |u| <= 10 (tail
 *  below 1e-20).  x_cap bounds the |x| range the quadrature must resolve. */
class EvolvedEnvelope {
public:
    EvolvedEnvelope(double t0, double x_cap);
    std::complex<double> operator()(double x) const;

private:
    std::vector<double> u_;
    std::vector<std::complex<double>> kernel_;  // Simpson weight * e^{i t0 u^3 - u^2/2}
};

/** Gaussian-weighted inner product of two evolved packets,
 *  <phi(t0, . - y1; eta1), e^{-x^2} phi(t0, . - y2; eta2)>, conjugate-linear in
 *  the first slot.  The x grid spacing is at most pi / (4 max|eta| + 4). */
std::complex<double> packet_inner_product(const WavePacketSpec& spec, double eta1, double y1,
                                          double eta2, double y2);

struct ConcentrationReport {
    std::vector<double> partial_sums;           // quadratic form for n_max = 1..levels
    std::vector<double> diagonal_partial_sums;  // diagonal split, same indexing
    double offdiagonal_total = 0.0;             // full sum minus diagonal at top level
    double envelope_bound = 0.0;  // fitted off-diagonal envelope summed over pairs
    int n_max = 0;
    int k_max = 0;
};

/** Assembles u(t0) from the evolved packets with |eta| = 2^n, n <= n_max,
 *  translates |k| <= k_max, and returns int |u|^2 e^{-x^2} dx as a function of
 *  the level cutoff, plus the diagonal/off-diagonal split. */
ConcentrationReport concentration_diagnostic(const WavePacketSpec& spec);

/// Periodic layer of the initial data: sum_{k, +-} phi(0, x - k 2^n; +-2^n).
std::complex<double> wave_packet_layer(const WavePacketSpec& spec, int n, double x);

/// Sampled sup norm of layer n times 2^{n/2} (bounded in n when the layer decays
/// like 2^{-n/2}).
double limit_periodic_audit(const WavePacketSpec& spec, int n);

}  // namespace kdvq
