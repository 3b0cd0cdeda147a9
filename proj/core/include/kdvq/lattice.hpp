#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "kdvq/errors.hpp"

namespace kdvq {

using Complex = std::complex<double>;

/** Two-frequency basis alpha = (alpha1, alpha2) together with its Diophantine
 *  metadata: |alpha.xi| >= c0 |xi|^(-gamma) is expected to hold over the index
 *  range on which it was verified.  c0 is an empirical constant; see
 *  verify_diophantine(). */
struct FrequencyBasis {
    double alpha1;
    double alpha2;
    double gamma = 2.0;  // strictly > 1
    double c0 = 0.0;     // > 0 once verified; 0 marks "unverified"

    FrequencyBasis(double a1, double a2, double g = 2.0, double c = 0.0)
        : alpha1(a1), alpha2(a2), gamma(g), c0(c) {
        if (!(alpha1 > 0.0) || !(alpha2 > 0.0))
            throw ConfigError("FrequencyBasis: alpha components must be positive");
        if (!(gamma > 1.0)) throw ConfigError("FrequencyBasis: gamma must exceed 1");
    }

    /// Default basis used throughout: alpha = (1, sqrt 2), gamma = 2.
    static FrequencyBasis standard();
};

/// Lattice index xi = (xi1, xi2); (0,0) is excluded wherever the index is used
/// as a mode of the field.
struct FrequencyIndex {
    std::int32_t xi1 = 0;
    std::int32_t xi2 = 0;

    friend auto operator<=>(const FrequencyIndex&, const FrequencyIndex&) = default;
    FrequencyIndex operator-() const { return {-xi1, -xi2}; }
    FrequencyIndex operator+(const FrequencyIndex& o) const { return {xi1 + o.xi1, xi2 + o.xi2}; }
    bool is_zero() const { return xi1 == 0 && xi2 == 0; }
    /// Canonical representative of the {xi, -xi} pair: xi1 > 0, or xi1 == 0 and xi2 > 0.
    bool is_canonical() const { return xi1 > 0 || (xi1 == 0 && xi2 > 0); }
};

/// alpha1*xi1 + alpha2*xi2.
inline double dot_frequency(const FrequencyBasis& basis, const FrequencyIndex& xi) {
    return basis.alpha1 * double(xi.xi1) + basis.alpha2 * double(xi.xi2);
}

/** Sparse Hermitian-symmetric coefficient field on {xi : 0 < max(|xi1|,|xi2|) <= N}.
 *
 *  Only canonical representatives are stored; the amplitude at -xi is the
 *  conjugate of the stored value by construction, so the symmetry audit is
 *  exactly zero for every field built through this interface. */
class CoefficientField {
public:
    explicit CoefficientField(int truncation_radius = 0) : radius_(truncation_radius) {
        if (truncation_radius < 0) throw ConfigError("CoefficientField: negative radius");
    }

    int truncation_radius() const { return radius_; }
    bool empty() const { return entries_.empty(); }
    /// Number of stored modes counting both members of each +-xi pair.
    std::size_t size() const { return 2 * entries_.size(); }

    /// Amplitude at xi (conjugated automatically for non-canonical xi);
    /// zero if the mode is absent.
    Complex at(const FrequencyIndex& xi) const;
    bool contains(const FrequencyIndex& xi) const;

    /// Inserts or overwrites the +-xi pair so that entry(xi) == a.
    void set(const FrequencyIndex& xi, Complex a);
    /// set() that adds to any existing amplitude.
    void add(const FrequencyIndex& xi, Complex a);

    /// Applies fn(xi, amplitude) to every mode, both mirrors, in a fixed
    /// deterministic order (canonical map order; mirror right after each).
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [xi, a] : entries_) {
            fn(xi, a);
            fn(-xi, std::conj(a));
        }
    }

    /// Canonical half only, ascending index order.
    const std::map<FrequencyIndex, Complex>& canonical_entries() const { return entries_; }

    /// max |entry(-xi) - conj(entry(xi))| over stored modes; exactly 0 for
    /// every field built through set()/add().
    double symmetry_audit() const;

    /// In-place amplitude scaling by a real factor.
    void scale(double c);

    bool operator==(const CoefficientField&) const = default;

private:
    int radius_;
    std::map<FrequencyIndex, Complex> entries_;
};

/// Report of a range-bounded Diophantine scan (sup-norm box 0 < max|xi_i| <= radius).
struct DiophantineReport {
    double min_product = 0.0;  // min of |alpha.xi| * |xi|^gamma, Euclidean |xi|
    FrequencyIndex witness{};
    int radius = 0;
};

/** Scans 0 < max(|xi1|,|xi2|) <= radius and returns the minimum of
 *  |alpha.xi| |xi|^gamma with its minimizer.  Throws RationalDependence if
 *  some alpha.xi is exactly zero. */
DiophantineReport verify_diophantine(const FrequencyBasis& basis, int radius);

/** G^theta norm: ( sum_xi [ <xi1>^theta <xi2>^theta |f_xi| / |alpha.xi|^(1/2) ]^2 )^(1/2)
 *  with <x> = (1+x^2)^(1/2).  Throws RationalDependence if a stored mode has
 *  alpha.xi == 0. */
double g_theta_norm(const CoefficientField& field, double theta, const FrequencyBasis& basis);

/// (l1, weak-l1) of the amplitudes: sum |f_xi| and sup_k k * (k-th largest |f_xi|).
std::pair<double, double> l1_and_weak_l1(const CoefficientField& field);

}  // namespace kdvq
