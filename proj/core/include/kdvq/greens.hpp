#pragma once

#include <functional>
#include <vector>

#include "kdvq/quadrature.hpp"

namespace kdvq {

/// Real bounded potential sampled on a uniform grid, with a declared sup bound.
struct SampledPotential {
    UniformGrid grid;
    std::vector<double> values;
    double sup_norm = 0.0;

    SampledPotential() = default;
    SampledPotential(UniformGrid g, std::vector<double> v, double declared_sup = 0.0);

    static SampledPotential from_function(const UniformGrid& g,
                                          const std::function<double(double)>& q,
                                          double declared_sup = 0.0);
    static SampledPotential constant(const UniformGrid& g, double c);

    double half_width() const { return std::max(std::abs(grid.x_min), std::abs(grid.x_max)); }
};

/** Diagonal Green's function g, its derivative g', and per-point series tail
 *  bounds at spectral parameter kappa.  Bounds 1/(4k) <= g <= 3/(4k) and
 *  |g'| <= 1/2 hold up to tail_bound plus the quadrature budget. */
struct GreensField {
    double kappa = 1.0;
    UniformGrid grid;
    std::vector<double> g;
    std::vector<double> g_prime;
    std::vector<double> tail_bound;        // series tail for g, per point
    std::vector<double> tail_bound_prime;  // series tail for g'
    int series_terms_used = 0;
};

/// Worst slack of the GreensField bounds; all three must be >= 0.
struct GreensFieldAudit {
    double lower_slack = 0.0;  // min over x of g - 1/(4k) + budget
    double upper_slack = 0.0;  // min over x of 3/(4k) - g + budget
    double prime_slack = 0.0;  // min over x of 1/2 - |g'| + budget
};

GreensFieldAudit audit_greens_field(const GreensField& field, double quadrature_budget = 0.0);

/// Free kernel G0(x, y) = e^{-kappa |x-y|} / (2 kappa).
double free_kernel(double x, double y, double kappa);

struct NeumannValue {
    double value = 0.0;
    double tail_bound = 0.0;
    int terms = 0;
};

/** Off-diagonal Green's function by termwise Neumann summation; each term is
 *  one kernel-weighted Simpson pass over the grid.  Requires
 *  kappa^2 >= 4 sup|q| (HypothesisViolated) and a window wide enough that
 *  e^{-kappa (L - max(|x|,|y|))/2} <= tol (DomainTooSmall). */
NeumannValue neumann_green(const SampledPotential& pot, double kappa, double x, double y,
                           double tol = 1e-8);

/// Diagonal field g, g' on the full grid with per-point tail bounds.
GreensField greens_field(const SampledPotential& pot, double kappa, double tol = 1e-8);

/// Full kernel matrix K(i,j) = G(x_i, x_j), row-major n*n.
std::vector<double> greens_kernel_matrix(const SampledPotential& pot, double kappa,
                                         double tol = 1e-8);

/// Rapidly decaying smooth test function with analytic derivatives.
struct TestFunction {
    std::function<double(double)> f;
    std::function<double(double)> fp;    // f'
    std::function<double(double)> fppp;  // f'''
    static TestFunction gaussian(double amplitude = 1.0, double width = 1.0);
};

enum class StaticIdentity { q_equation, g_second, g_third, G_identity };

/** Max interior residual of one of the static identities relating q, g, g'.
 *  Derivatives of g are 4th-order finite differences of the series values. */
double verify_static_identity(StaticIdentity kind, const SampledPotential& pot, double kappa,
                              double tol = 1e-8, const TestFunction* f = nullptr);

/// F~(x) = int G(x,y) F(y) G(y,x) dy by Simpson quadrature.
double modified_forcing(const SampledPotential& pot, double kappa,
                        const std::vector<double>& F_slice, double x, double tol = 1e-8);

/// Same, evaluated at every grid node via the kernel matrix.
std::vector<double> modified_forcing_all(const SampledPotential& pot, double kappa,
                                         const std::vector<double>& F_slice,
                                         double tol = 1e-8);

/** Spacetime potential/forcing pair on a common grid.  Manufactured pairs are
 *  built from a closed-form q: F = dq/dt + q''' - 6 q q' with 6th-order finite
 *  differences, so the pair solves the forced equation by construction. */
struct ForcedPair {
    UniformGrid grid;
    std::vector<double> times;                 // uniform, >= 3 slices
    std::vector<std::vector<double>> q;        // q[slice][node]
    std::vector<std::vector<double>> forcing;  // F[slice][node]
    bool manufactured = false;
    double sup_norm = 0.0;  // sup over all slices of |q|
};

ForcedPair manufactured_pair(const std::function<double(double, double)>& q_fn,
                             const UniformGrid& grid, const std::vector<double>& times);

enum class DynamicIdentity { g_dt, one_over_g_dt };

/** Max interior residual of the time-evolution identity for g (or 1/2g) at the
 *  slice nearest t; time derivative by central differences across neighboring
 *  slices, spatial derivatives 4th order. */
double verify_dynamic_identity(const ForcedPair& pair, double kappa, double t,
                               DynamicIdentity kind = DynamicIdentity::g_dt,
                               double tol = 1e-8);

/// Weight with analytic derivatives; psi must be strictly positive.
struct Weight {
    std::function<double(double)> psi, dpsi, d2psi, d3psi;
    static Weight sech(double R = 1.0);
    static Weight gaussian(double width = 1.0);
};

/// int (g1-g2)^2 / (2 g1 g2) psi dx on the common grid.
double gronwall_distance(const GreensField& g1, const GreensField& g2,
                         const std::function<double(double)>& psi);

/** |LHS - RHS| of the Gronwall evolution identity: the weighted relative-square
 *  distance at t0 against the time integral of the three bracket integrals
 *  with A0, A1, A2 and the modified forcings. */
double verify_gronwall_identity(const ForcedPair& pair1, const ForcedPair& pair2, double kappa,
                                const Weight& weight, double t0, double tol = 1e-8);

/// |LHS - RHS| of the static reconstruction of int (q1-q2) psi from g1, g2.
double verify_qdiff_identity(const SampledPotential& pot1, const SampledPotential& pot2,
                             double kappa, const Weight& weight, double tol = 1e-8);

}  // namespace kdvq
