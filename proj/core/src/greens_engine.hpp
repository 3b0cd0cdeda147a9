// Internal Neumann-series engine shared by the greens module.  One series term
// is one kernel-weighted pass over the grid; the exponential kernel makes the
// pass O(n) via prefix/suffix recurrences.  Interval contributions use cubic
// product integration (exact exponential moments), with stencils kept on one
// side of the source kink, so columns are uniformly 4th-order accurate in h.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "kdvq/greens.hpp"

namespace kdvq::detail {

/// Exponential moments: integral over [0, delta] of e^{-kappa (delta - s)} s^k
/// (toward == true) or e^{-kappa s} s^k (toward == false), k = 0..3.
inline std::array<double, 4> exp_moments(double kappa, double delta, bool toward) {
    std::array<double, 4> m{};
    if (delta <= 0.0) return m;
    const double z = kappa * delta;
    if (z > 0.5) {
        // Stable recurrences in the moment index.
        const double ez = std::exp(-z);
        double prev = (1.0 - ez) / kappa;  // M_0, same for both orientations
        m[0] = prev;
        for (int k = 1; k < 4; ++k) {
            const double dk = std::pow(delta, double(k));
            prev = toward ? dk / kappa - double(k) / kappa * prev
                          : -dk * ez / kappa + double(k) / kappa * prev;
            m[std::size_t(k)] = prev;
        }
        return m;
    }
    for (int k = 0; k < 4; ++k) {
        double sum = 0.0;
        if (toward) {
            // k! sum_j (-z)^j / (j+k+1)!
            double kfact = 1.0;
            for (int j = 2; j <= k; ++j) kfact *= j;
            double denom = 1.0;
            for (int j = 1; j <= k + 1; ++j) denom *= j;
            double zj = 1.0;
            for (int j = 0; j < 40; ++j) {
                const double t = kfact * zj / denom;
                sum += t;
                if (std::abs(t) < 1e-19 * std::abs(sum) && j > 2) break;
                zj *= -z;
                denom *= double(j + k + 2);
            }
        } else {
            // sum_j (-z)^j / (j! (k+j+1))
            double zj = 1.0, jfact = 1.0;
            for (int j = 0; j < 40; ++j) {
                if (j > 0) {
                    zj *= -z;
                    jfact *= j;
                }
                const double t = zj / (jfact * double(k + j + 1));
                sum += t;
                if (std::abs(t) < 1e-19 * std::abs(sum) && j > 2) break;
            }
        }
        m[std::size_t(k)] = sum * std::pow(delta, double(k + 1));
    }
    return m;
}

/// Weights w[0..3] with sum_m w_m (off_m * h)^k = M_k for k = 0..3, where
/// off are node offsets in units of h from the integration origin.
inline std::array<double, 4> product_weights(const std::array<double, 4>& offsets_h,
                                             const std::array<double, 4>& moments, double h) {
    // Solve the 4x4 Vandermonde system in scaled coordinates o = offset (units
    // of h), rhs_k = M_k / h^k.
    double A[4][5];
    for (int k = 0; k < 4; ++k) {
        for (int m = 0; m < 4; ++m) A[k][m] = std::pow(offsets_h[std::size_t(m)], double(k));
        A[k][4] = moments[std::size_t(k)] / std::pow(h, double(k));
    }
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        for (int c = 0; c < 5; ++c) std::swap(A[col][c], A[pivot][c]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 5; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::array<double, 4> w{};
    for (int m = 0; m < 4; ++m) w[std::size_t(m)] = A[m][4] / A[m][m];
    return w;
}

class GreensEngine {
public:
    GreensEngine(const SampledPotential& pot, double kappa, double tol)
        : pot_(pot), kappa_(kappa), tol_(tol), n_(pot.grid.n), h_(pot.grid.h()) {
        if (!(kappa > 0.0)) throw ConfigError("greens: kappa must be positive");
        if (!(tol > 0.0)) throw ConfigError("greens: tol must be positive");
        if (kappa * kappa < 4.0 * pot.sup_norm)
            throw HypothesisViolated("greens: kappa^2 = " + std::to_string(kappa * kappa) +
                                     " < 4 sup|q| = " + std::to_string(4.0 * pot.sup_norm));
        ratio_ = 2.0 * pot.sup_norm / (kappa * kappa);
        decay_ = std::exp(-kappa * h_);
        terms_after_free_ = 0;
        if (pot.sup_norm > 0.0) {
            while (tail_after(terms_after_free_) >= tol) {
                ++terms_after_free_;
                if (terms_after_free_ > 4000)
                    throw ConfigError("greens: series did not certify; tol too small");
            }
        }
        build_interval_weights();
    }

    double kappa() const { return kappa_; }
    int terms_total() const { return terms_after_free_ + 1; }
    std::size_t nodes() const { return n_; }

    double tail_after(int L) const {
        if (pot_.sup_norm == 0.0) return 0.0;
        return std::pow(ratio_, double(L + 1)) / (1.0 - ratio_) / (4.0 * kappa_);
    }
    double tail_after_prime(int L) const {
        if (pot_.sup_norm == 0.0) return 0.0;
        return 2.0 * std::pow(ratio_, double(L + 1)) / (1.0 - ratio_) / 4.0;
    }

    void require_window(double reach) const {
        const double margin = pot_.half_width() - reach;
        if (std::exp(-kappa_ * margin / 2.0) > tol_)
            throw DomainTooSmall("greens: window half-width " +
                                 std::to_string(pot_.half_width()) +
                                 " cannot certify tol at reach " + std::to_string(reach));
    }

    /** One kernel application: out_i = integral of G0(x_i, w) rho(w) dw and
     *  (optionally) dout_i = integral of dG0/dx(x_i, w) rho(w) dw.  A kink of
     *  rho at `kink` (grid coordinate) keeps interpolation stencils one-sided
     *  around it. */
    void apply_kernel(const std::vector<double>& rho, std::optional<double> kink,
                      std::vector<double>& out, std::vector<double>* dout) const {
        forward_prefix(rho, kink, i1_);
        backward_suffix(rho, kink, i2_);
        out.resize(n_);
        const double half = 1.0 / (2.0 * kappa_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = half * (i1_[i] + i2_[i]);
        if (dout) {
            dout->resize(n_);
            for (std::size_t i = 0; i < n_; ++i) (*dout)[i] = 0.5 * (i2_[i] - i1_[i]);
        }
    }

    /** Summed series correction C = sum_{l>=1} (-1)^l t_l on the grid for a
     *  source at y (any real inside the window); t_0 = G0(., y) handled by the
     *  caller in closed form.  dcol, when requested, receives the same sum for
     *  the first-kernel derivative chain. */
    void correction_column(double y, std::vector<double>& col,
                           std::vector<double>* dcol) const {
        std::vector<double> term(n_), rho(n_), next(n_), dnext(n_);
        for (std::size_t j = 0; j < n_; ++j) term[j] = free_kernel(pot_.grid.x(j), y, kappa_);
        col.assign(n_, 0.0);
        if (dcol) dcol->assign(n_, 0.0);
        double sign = 1.0;
        for (int l = 1; l <= terms_after_free_; ++l) {
            for (std::size_t j = 0; j < n_; ++j) rho[j] = pot_.values[j] * term[j];
            // Only the first application sees the kink of G0(., y).
            const std::optional<double> kink =
                (l == 1) ? std::optional<double>(y) : std::nullopt;
            apply_kernel(rho, kink, next, dcol ? &dnext : nullptr);
            sign = -sign;
            for (std::size_t i = 0; i < n_; ++i) col[i] += sign * next[i];
            if (dcol)
                for (std::size_t i = 0; i < n_; ++i) (*dcol)[i] += sign * dnext[i];
            term.swap(next);
        }
    }

    /// 4-node polynomial interpolation of grid samples at x, stencil kept on
    /// one side of `avoid` when x is within two cells of it.
    double interpolate(const std::vector<double>& f, double x,
                       std::optional<double> avoid) const {
        const double pos = (x - pot_.grid.x_min) / h_;
        long long base = llround(std::floor(pos)) - 1;
        if (avoid) {
            const double apos = (*avoid - pot_.grid.x_min) / h_;
            // Keep all four nodes on the same side of the kink as x.
            if (x <= *avoid) {
                const long long top = llround(std::floor(apos + 1e-12));
                if (base + 3 > top) base = top - 3;
            } else {
                const long long bot = llround(std::ceil(apos - 1e-12));
                if (base < bot) base = bot;
            }
        }
        base = std::max(0ll, std::min<long long>(base, (long long)n_ - 4));
        double value = 0.0;
        for (int m = 0; m < 4; ++m) {
            double lm = 1.0;
            const double xm = pot_.grid.x(std::size_t(base + m));
            for (int j = 0; j < 4; ++j) {
                if (j == m) continue;
                const double xj = pot_.grid.x(std::size_t(base + j));
                lm *= (x - xj) / (xm - xj);
            }
            value += lm * f[std::size_t(base + m)];
        }
        return value;
    }

private:
    void build_interval_weights() {
        // Interior/one-sided stencil offsets, in units of h, measured from the
        // start of the integration interval.
        const std::array<double, 4> interior = {-1.0, 0.0, 1.0, 2.0};
        const std::array<double, 4> left_end = {-2.0, -1.0, 0.0, 1.0};
        const std::array<double, 4> right_end = {0.0, 1.0, 2.0, 3.0};
        const auto mtow = exp_moments(kappa_, h_, true);
        const auto mawy = exp_moments(kappa_, h_, false);
        fw_interior_ = product_weights(interior, mtow, h_);
        fw_left_ = product_weights(left_end, mtow, h_);
        fw_right_ = product_weights(right_end, mtow, h_);
        bw_interior_ = product_weights(interior, mawy, h_);
        bw_left_ = product_weights(left_end, mawy, h_);
        bw_right_ = product_weights(right_end, mawy, h_);
    }

    /// J = integral over [x_{i-1}, x_i] of e^{-kappa (x_i - w)} rho(w) dw with
    /// a stencil anchored at base node b such that nodes b..b+3 are used and
    /// offsets are measured from x_{i-1}.
    double stencil_sum(const std::vector<double>& rho, long long b,
                       const std::array<double, 4>& w) const {
        double acc = 0.0;
        for (int m = 0; m < 4; ++m) acc += w[std::size_t(m)] * rho[std::size_t(b + m)];
        return acc;
    }

    // Split-interval contribution for a kink at y inside (x_lo, x_lo + h):
    // forward orientation (weight e^{-kappa (x_hi - w)}).
    double forward_kink_interval(const std::vector<double>& rho, long long lo,
                                 double y) const {
        const double x_lo = pot_.grid.x(std::size_t(lo));
        const double delta = y - x_lo;
        const double hrem = h_ - delta;
        double acc = 0.0;
        // Piece A: [x_lo, y], weight e^{-kappa (x_hi - w)} = e^{-kappa hrem} *
        // e^{-kappa (y - w)}; stencil from the left of y.
        {
            long long base = std::max(0ll, lo - 3);
            base = std::min<long long>(base, (long long)n_ - 4);
            std::array<double, 4> off{};
            for (int m = 0; m < 4; ++m)
                off[std::size_t(m)] = double(base + m - lo);  // units of h from x_lo
            const auto mom = exp_moments(kappa_, delta, true);
            const auto w = product_weights(off, mom, h_);
            acc += std::exp(-kappa_ * hrem) * stencil_sum(rho, base, w);
        }
        // Piece B: [y, x_hi], weight e^{-kappa (x_hi - w)}; origin at y,
        // stencil from the right of y.
        {
            long long base = std::min<long long>(lo + 1, (long long)n_ - 4);
            base = std::max(0ll, base);
            std::array<double, 4> off{};
            for (int m = 0; m < 4; ++m)
                off[std::size_t(m)] =
                    (pot_.grid.x(std::size_t(base + m)) - y) / h_;  // units of h from y
            const auto mom = exp_moments(kappa_, hrem, true);
            const auto w = product_weights(off, mom, h_);
            acc += stencil_sum(rho, base, w);
        }
        return acc;
    }

    // Same for the backward orientation (weight e^{-kappa (w - x_lo)}).
    double backward_kink_interval(const std::vector<double>& rho, long long lo,
                                  double y) const {
        const double x_lo = pot_.grid.x(std::size_t(lo));
        const double delta = y - x_lo;
        const double hrem = h_ - delta;
        double acc = 0.0;
        // Piece A: [x_lo, y], weight e^{-kappa (w - x_lo)}; stencil left of y.
        {
            long long base = std::max(0ll, lo - 3);
            base = std::min<long long>(base, (long long)n_ - 4);
            std::array<double, 4> off{};
            for (int m = 0; m < 4; ++m) off[std::size_t(m)] = double(base + m - lo);
            const auto mom = exp_moments(kappa_, delta, false);
            const auto w = product_weights(off, mom, h_);
            acc += stencil_sum(rho, base, w);
        }
        // Piece B: [y, x_hi], weight e^{-kappa (w - x_lo)} = e^{-kappa delta} *
        // e^{-kappa (w - y)}; origin at y, stencil right of y.
        {
            long long base = std::min<long long>(lo + 1, (long long)n_ - 4);
            base = std::max(0ll, base);
            std::array<double, 4> off{};
            for (int m = 0; m < 4; ++m)
                off[std::size_t(m)] = (pot_.grid.x(std::size_t(base + m)) - y) / h_;
            const auto mom = exp_moments(kappa_, hrem, false);
            const auto w = product_weights(off, mom, h_);
            acc += std::exp(-kappa_ * delta) * stencil_sum(rho, base, w);
        }
        return acc;
    }

    /// I1(i) = integral over [x_min, x_i] of e^{-kappa (x_i - w)} rho(w) dw.
    void forward_prefix(const std::vector<double>& rho, std::optional<double> kink,
                        std::vector<double>& out) const {
        out.resize(n_);
        out[0] = 0.0;
        // Kink bookkeeping: node index at/above which the kink sits.
        const double eps = 1e-12 * std::max(1.0, std::abs(pot_.grid.x_max));
        for (std::size_t i = 1; i < n_; ++i) {
            const long long lo = (long long)i - 1;
            const double x_lo = pot_.grid.x(i - 1);
            const double x_hi = pot_.grid.x(i);
            double J;
            if (kink && *kink > x_lo + eps && *kink < x_hi - eps) {
                J = forward_kink_interval(rho, lo, *kink);
            } else {
                const std::array<double, 4>* w = &fw_interior_;
                long long base = lo - 1;
                const bool kink_at_hi = kink && std::abs(*kink - x_hi) <= eps;
                const bool kink_at_lo = kink && std::abs(*kink - x_lo) <= eps;
                if (lo == 0 || kink_at_lo) {
                    w = &fw_right_;
                    base = lo;
                } else if (i == n_ - 1 || kink_at_hi) {
                    w = &fw_left_;
                    base = lo - 2;
                }
                base = std::max(0ll, std::min<long long>(base, (long long)n_ - 4));
                J = stencil_sum(rho, base, *w);
            }
            out[i] = out[i - 1] * decay_ + J;
        }
    }

    /// I2(i) = integral over [x_i, x_max] of e^{-kappa (w - x_i)} rho(w) dw.
    void backward_suffix(const std::vector<double>& rho, std::optional<double> kink,
                         std::vector<double>& out) const {
        out.resize(n_);
        out[n_ - 1] = 0.0;
        const double eps = 1e-12 * std::max(1.0, std::abs(pot_.grid.x_max));
        for (std::size_t i = n_ - 1; i-- > 0;) {
            const long long lo = (long long)i;
            const double x_lo = pot_.grid.x(i);
            const double x_hi = pot_.grid.x(i + 1);
            double J;
            if (kink && *kink > x_lo + eps && *kink < x_hi - eps) {
                J = backward_kink_interval(rho, lo, *kink);
            } else {
                const std::array<double, 4>* w = &bw_interior_;
                long long base = lo - 1;
                const bool kink_at_hi = kink && std::abs(*kink - x_hi) <= eps;
                const bool kink_at_lo = kink && std::abs(*kink - x_lo) <= eps;
                if (lo == 0 || kink_at_lo) {
                    w = &bw_right_;
                    base = lo;
                } else if (i + 1 == n_ - 1 || kink_at_hi) {
                    w = &bw_left_;
                    base = lo - 2;
                }
                base = std::max(0ll, std::min<long long>(base, (long long)n_ - 4));
                J = stencil_sum(rho, base, *w);
            }
            out[i] = out[i + 1] * decay_ + J;
        }
    }

    const SampledPotential& pot_;
    double kappa_;
    double tol_;
    std::size_t n_;
    double h_;
    double ratio_;
    double decay_;
    int terms_after_free_;
    std::array<double, 4> fw_interior_{}, fw_left_{}, fw_right_{};
    std::array<double, 4> bw_interior_{}, bw_left_{}, bw_right_{};
    mutable std::vector<double> i1_, i2_;
};

/// Composite 4th-order integral of node samples with an optional split at a
/// node (for integrands with a kink there): Simpson pieces plus a 3/8 patch on
/// odd-interval pieces.
double integrate_node_split(const std::vector<double>& f, double h, std::size_t split);

}  // namespace kdvq::detail
