#include "kdvq/greens.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "greens_engine.hpp"

namespace kdvq {

using detail::GreensEngine;
using detail::integrate_node_split;

SampledPotential::SampledPotential(UniformGrid g, std::vector<double> v, double declared_sup)
    : grid(g), values(std::move(v)) {
    if (values.size() != grid.n) throw GridMismatch("SampledPotential: sample count != grid");
    double observed = 0.0;
    for (double q : values) observed = std::max(observed, std::abs(q));
    sup_norm = std::max(observed, declared_sup);
}

SampledPotential SampledPotential::from_function(const UniformGrid& g,
                                                 const std::function<double(double)>& q,
                                                 double declared_sup) {
    std::vector<double> v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) v[i] = q(g.x(i));
    return SampledPotential(g, std::move(v), declared_sup);
}

SampledPotential SampledPotential::constant(const UniformGrid& g, double c) {
    return SampledPotential(g, std::vector<double>(g.n, c), std::abs(c));
}

double free_kernel(double x, double y, double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("free_kernel: kappa must be positive");
    return std::exp(-kappa * std::abs(x - y)) / (2.0 * kappa);
}

GreensFieldAudit audit_greens_field(const GreensField& field, double quadrature_budget) {
    GreensFieldAudit audit;
    const double lo = 1.0 / (4.0 * field.kappa);
    const double hi = 3.0 / (4.0 * field.kappa);
    bool first = true;
    for (std::size_t i = 0; i < field.g.size(); ++i) {
        const double budget = field.tail_bound[i] + quadrature_budget;
        const double budget_p = field.tail_bound_prime[i] + quadrature_budget;
        const double ls = field.g[i] - lo + budget;
        const double us = hi - field.g[i] + budget;
        const double ps = 0.5 - std::abs(field.g_prime[i]) + budget_p;
        if (first) {
            audit = {ls, us, ps};
            first = false;
        } else {
            audit.lower_slack = std::min(audit.lower_slack, ls);
            audit.upper_slack = std::min(audit.upper_slack, us);
            audit.prime_slack = std::min(audit.prime_slack, ps);
        }
    }
    return audit;
}

namespace detail {

double integrate_node_split(const std::vector<double>& f, double h, std::size_t split) {
    // 4th-order composite rule on [0, split] and [split, end]; Simpson panels
    // with a 3/8 patch when a piece has an odd interval count.
    auto piece = [&](std::size_t a, std::size_t b) {  // node range [a, b]
        if (b <= a) return 0.0;
        std::size_t m = b - a;  // interval count
        double acc = 0.0;
        if (m == 1) return 0.5 * h * (f[a] + f[a + 1]);  // boundary sliver
        if (m % 2 == 1) {
            // Trailing 3/8 rule over the last three intervals.
            acc += 3.0 * h / 8.0 *
                   (f[b - 3] + 3.0 * f[b - 2] + 3.0 * f[b - 1] + f[b]);
            b -= 3;
            m -= 3;
        }
        for (std::size_t k = a; k + 2 <= b; k += 2)
            acc += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
        return acc;
    };
    return piece(0, split) + piece(split, f.size() - 1);
}

}  // namespace detail

NeumannValue neumann_green(const SampledPotential& pot, double kappa, double x, double y,
                           double tol) {
    GreensEngine engine(pot, kappa, tol);
    engine.require_window(std::max(std::abs(x), std::abs(y)));
    NeumannValue out;
    out.value = free_kernel(x, y, kappa);
    out.terms = 1;
    if (pot.sup_norm > 0.0) {
        std::vector<double> col;
        engine.correction_column(y, col, nullptr);
        out.value += engine.interpolate(col, x, y);
        out.terms = engine.terms_total();
    }
    out.tail_bound = engine.tail_after(engine.terms_total() - 1) *
                     std::exp(-kappa * std::abs(x - y) / 2.0);
    return out;
}

GreensField greens_field(const SampledPotential& pot, double kappa, double tol) {
    GreensEngine engine(pot, kappa, tol);
    GreensField field;
    field.kappa = kappa;
    field.grid = pot.grid;
    field.g.assign(pot.grid.n, 1.0 / (2.0 * kappa));
    field.g_prime.assign(pot.grid.n, 0.0);
    field.series_terms_used = engine.terms_total();
    field.tail_bound.assign(pot.grid.n, engine.tail_after(engine.terms_total() - 1));
    field.tail_bound_prime.assign(pot.grid.n,
                                  engine.tail_after_prime(engine.terms_total() - 1));
    if (pot.sup_norm == 0.0) return field;

    std::vector<double> col, dcol;
    for (std::size_t jy = 0; jy < pot.grid.n; ++jy) {
        engine.correction_column(pot.grid.x(jy), col, &dcol);
        field.g[jy] += col[jy];
        // d/dx G(x,x): the two kernel chains contribute equally by symmetry.
        field.g_prime[jy] = 2.0 * dcol[jy];
    }
    return field;
}

std::vector<double> greens_kernel_matrix(const SampledPotential& pot, double kappa,
                                         double tol) {
    GreensEngine engine(pot, kappa, tol);
    const std::size_t n = pot.grid.n;
    std::vector<double> K(n * n);
    std::vector<double> col;
    for (std::size_t jy = 0; jy < n; ++jy) {
        const double y = pot.grid.x(jy);
        if (pot.sup_norm > 0.0)
            engine.correction_column(y, col, nullptr);
        else
            col.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            K[i * n + jy] = free_kernel(pot.grid.x(i), y, kappa) + col[i];
    }
    return K;
}

TestFunction TestFunction::gaussian(double amplitude, double width) {
    const double a = amplitude, s = width;
    return TestFunction{
        [a, s](double x) { return a * std::exp(-(x * x) / (s * s)); },
        [a, s](double x) { return a * (-2.0 * x / (s * s)) * std::exp(-(x * x) / (s * s)); },
        [a, s](double x) {
            const double u = x / s;
            return a * (12.0 * u / (s * s * s) - 8.0 * u * u * u / (s * s * s)) *
                   std::exp(-u * u);
        }};
}

namespace {

// 4th-order first derivative on a uniform grid, one-sided at the edges.
std::vector<double> d1_o4(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    auto fwd = [&](std::size_t i) {
        return (-25.0 * f[i] + 48.0 * f[i + 1] - 36.0 * f[i + 2] + 16.0 * f[i + 3] -
                3.0 * f[i + 4]) /
               (12.0 * h);
    };
    auto bwd = [&](std::size_t i) {
        return (25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3] +
                3.0 * f[i - 4]) /
               (12.0 * h);
    };
    if (n >= 5) {
        d[0] = fwd(0);
        d[1] = fwd(1);
        d[n - 2] = bwd(n - 2);
        d[n - 1] = bwd(n - 1);
    }
    return d;
}

std::size_t nearest_index(const std::vector<double>& ts, double t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (std::abs(ts[i] - t) < std::abs(ts[best] - t)) best = i;
    return best;
}

double max_interior(const std::vector<double>& r, std::size_t margin) {
    double worst = 0.0;
    for (std::size_t i = margin; i + margin < r.size(); ++i)
        worst = std::max(worst, std::abs(r[i]));
    return worst;
}

/** Stencil margin plus, for potentials that do not decay at the window edge,
 *  a physical margin of 12/kappa: the zero extension of such a potential has
 *  a boundary layer there in which grid values no longer represent the
 *  intended smooth q. */
std::size_t interior_margin(const SampledPotential& pot, double kappa,
                            std::size_t stencil_margin) {
    double edge = 0.0;
    const std::size_t probe = std::min<std::size_t>(8, pot.grid.n);
    for (std::size_t i = 0; i < probe; ++i) {
        edge = std::max(edge, std::abs(pot.values[i]));
        edge = std::max(edge, std::abs(pot.values[pot.grid.n - 1 - i]));
    }
    if (edge <= 1e-8 * std::max(pot.sup_norm, 1e-300)) return stencil_margin;
    const std::size_t layer = std::size_t(std::ceil(12.0 / (kappa * pot.grid.h())));
    return std::max(stencil_margin, layer);
}

SampledPotential slice_potential(const ForcedPair& pair, std::size_t k) {
    return SampledPotential(pair.grid, pair.q[k], pair.sup_norm);
}

}  // namespace

double verify_static_identity(StaticIdentity kind, const SampledPotential& pot, double kappa,
                              double tol, const TestFunction* f) {
    const GreensField field = greens_field(pot, kappa, tol);
    const double h = pot.grid.h();
    const std::size_t n = pot.grid.n;
    std::vector<double> residual(n, 0.0);

    switch (kind) {
        case StaticIdentity::q_equation: {
            std::vector<double> u(n);
            for (std::size_t i = 0; i < n; ++i) u[i] = field.g_prime[i] / (2.0 * field.g[i]);
            const auto du = d1_o4(u, h);
            for (std::size_t i = 0; i < n; ++i) {
                const double rhs = du[i] + u[i] * u[i] +
                                   1.0 / (4.0 * field.g[i] * field.g[i]) - kappa * kappa;
                residual[i] = pot.values[i] - rhs;
            }
            break;
        }
        case StaticIdentity::g_second: {
            const auto gpp = d1_o4(field.g_prime, h);
            for (std::size_t i = 0; i < n; ++i) {
                const double g = field.g[i], gp = field.g_prime[i];
                const double rhs = 2.0 * (pot.values[i] + kappa * kappa) * g +
                                   gp * gp / (2.0 * g) - 1.0 / (2.0 * g);
                residual[i] = gpp[i] - rhs;
            }
            break;
        }
        case StaticIdentity::g_third: {
            const auto gpp = d1_o4(field.g_prime, h);
            const auto gppp = d1_o4(gpp, h);
            std::vector<double> qg(n);
            for (std::size_t i = 0; i < n; ++i) qg[i] = pot.values[i] * field.g[i];
            const auto qg_p = d1_o4(qg, h);
            for (std::size_t i = 0; i < n; ++i) {
                const double rhs = 2.0 * qg_p[i] + 2.0 * pot.values[i] * field.g_prime[i] +
                                   4.0 * kappa * kappa * field.g_prime[i];
                residual[i] = gppp[i] - rhs;
            }
            break;
        }
        case StaticIdentity::G_identity: {
            if (!f) throw ConfigError("verify_static_identity: G_identity needs a test function");
            detail::GreensEngine engine(pot, kappa, tol);
            std::vector<double> fv(n), fpv(n), source(n), qf(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = pot.grid.x(i);
                fv[i] = f->f(x);
                fpv[i] = f->fp(x);
                qf[i] = pot.values[i] * fv[i];
            }
            const auto qf_p = d1_o4(qf, h);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = pot.grid.x(i);
                source[i] = -f->fppp(x) + 2.0 * pot.values[i] * fpv[i] + 2.0 * qf_p[i] +
                            4.0 * kappa * kappa * fpv[i];
            }
            // One kernel column per point keeps memory O(n).
            std::vector<double> col(n, 0.0), integrand(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = pot.grid.x(i);
                if (pot.sup_norm > 0.0) engine.correction_column(x, col, nullptr);
                for (std::size_t j = 0; j < n; ++j) {
                    const double Gij = free_kernel(pot.grid.x(j), x, kappa) + col[j];
                    integrand[j] = Gij * Gij * source[j];
                }
                const double lhs = integrate_node_split(integrand, h, i);
                const double rhs = 2.0 * fpv[i] * field.g[i] - 2.0 * fv[i] * field.g_prime[i];
                residual[i] = lhs - rhs;
            }
            break;
        }
    }
    return max_interior(residual, interior_margin(pot, kappa, 4));
}

namespace {

/// 4th-order integral of node samples whose integrand kinks at x_split (any
/// real inside the window): full-interval composites on both sides plus
/// partial-interval cubic corrections with one-sided stencils.
double integrate_real_split(const std::vector<double>& f, const UniformGrid& grid,
                            double x_split) {
    const double h = grid.h();
    const double pos = (x_split - grid.x_min) / h;
    const long long k = std::clamp<long long>(llround(std::floor(pos)), 0,
                                              (long long)grid.n - 1);
    const double delta = x_split - grid.x(std::size_t(k));
    if (std::abs(delta) < 1e-12 * std::max(1.0, std::abs(x_split)))
        return integrate_node_split(f, h, std::size_t(k));

    double acc = integrate_node_split(
        std::vector<double>(f.begin(), f.begin() + k + 1), h, std::size_t(k));
    acc += integrate_node_split(std::vector<double>(f.begin() + k + 1, f.end()), h, 0);

    auto partial = [&](long long base, double origin, double width) {
        base = std::clamp<long long>(base, 0, (long long)grid.n - 4);
        std::array<double, 4> off{}, mom{};
        for (int m = 0; m < 4; ++m)
            off[std::size_t(m)] = (grid.x(std::size_t(base + m)) - origin) / h;
        for (int j = 0; j < 4; ++j) mom[std::size_t(j)] = std::pow(width, j + 1) / (j + 1);
        const auto w = detail::product_weights(off, mom, h);
        double s = 0.0;
        for (int m = 0; m < 4; ++m) s += w[std::size_t(m)] * f[std::size_t(base + m)];
        return s;
    };
    // [x_k, x_split] with a left-sided stencil, [x_split, x_{k+1}] right-sided.
    acc += partial(k - 3, grid.x(std::size_t(k)), delta);
    acc += partial(k + 1, x_split, h - delta);
    return acc;
}

}  // namespace

double modified_forcing(const SampledPotential& pot, double kappa,
                        const std::vector<double>& F_slice, double x, double tol) {
    if (F_slice.size() != pot.grid.n) throw GridMismatch("modified_forcing: slice size");
    GreensEngine engine(pot, kappa, tol);
    engine.require_window(std::abs(x));
    const std::size_t n = pot.grid.n;
    // G(x, w_j) = G(w_j, x): one chain with source at x.
    std::vector<double> col(n, 0.0);
    if (pot.sup_norm > 0.0) engine.correction_column(x, col, nullptr);
    std::vector<double> integrand(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double Gxj = free_kernel(pot.grid.x(j), x, kappa) + col[j];
        integrand[j] = Gxj * Gxj * F_slice[j];
    }
    return integrate_real_split(integrand, pot.grid, x);
}

std::vector<double> modified_forcing_all(const SampledPotential& pot, double kappa,
                                         const std::vector<double>& F_slice, double tol) {
    if (F_slice.size() != pot.grid.n) throw GridMismatch("modified_forcing_all: slice size");
    const auto K = greens_kernel_matrix(pot, kappa, tol);
    const std::size_t n = pot.grid.n;
    std::vector<double> out(n, 0.0), integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double Gij = K[i * n + j];
            integrand[j] = Gij * Gij * F_slice[j];
        }
        out[i] = integrate_node_split(integrand, pot.grid.h(), i);
    }
    return out;
}

ForcedPair manufactured_pair(const std::function<double(double, double)>& q_fn,
                             const UniformGrid& grid, const std::vector<double>& times) {
    if (times.size() < 3) throw ConfigError("manufactured_pair: need >= 3 time slices");
    ForcedPair pair;
    pair.grid = grid;
    pair.times = times;
    pair.manufactured = true;
    const double h = grid.h();
    const double ht = 1e-2;
    pair.q.resize(times.size());
    pair.forcing.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        pair.q[k].resize(grid.n);
        pair.forcing[k].resize(grid.n);
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double x = grid.x(i);
            const double qv = q_fn(t, x);
            pair.q[k][i] = qv;
            pair.sup_norm = std::max(pair.sup_norm, std::abs(qv));
            auto qx = [&](double xx) { return q_fn(t, xx); };
            auto qt = [&](double tt) { return q_fn(tt, x); };
            const double dqdt = derivative1_o6(qt, t, ht);
            const double qppp = derivative3_o6(qx, x, h);
            const double qp = derivative1_o6(qx, x, h);
            pair.forcing[k][i] = dqdt + qppp - 6.0 * qv * qp;
        }
    }
    return pair;
}

double verify_dynamic_identity(const ForcedPair& pair, double kappa, double t,
                               DynamicIdentity kind, double tol) {
    if (pair.times.size() < 3) throw ConfigError("verify_dynamic_identity: need >= 3 slices");
    std::size_t k = nearest_index(pair.times, t);
    k = std::clamp<std::size_t>(k, 1, pair.times.size() - 2);
    const double dt = pair.times[k + 1] - pair.times[k - 1];

    const GreensField prev = greens_field(slice_potential(pair, k - 1), kappa, tol);
    const GreensField here = greens_field(slice_potential(pair, k), kappa, tol);
    const GreensField next = greens_field(slice_potential(pair, k + 1), kappa, tol);
    const auto Ftilde = modified_forcing_all(slice_potential(pair, k), kappa, pair.forcing[k],
                                             tol);
    const double h = pair.grid.h();
    const std::size_t n = pair.grid.n;
    std::vector<double> residual(n, 0.0);

    if (kind == DynamicIdentity::g_dt) {
        const auto gpp = d1_o4(here.g_prime, h);
        std::vector<double> bracket(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = here.g[i], gp = here.g_prime[i];
            bracket[i] = -gpp[i] + 3.0 * gp * gp / (2.0 * g) - 3.0 / (2.0 * g) -
                         6.0 * kappa * kappa * g + 6.0 * kappa;
        }
        const auto bracket_p = d1_o4(bracket, h);
        for (std::size_t i = 0; i < n; ++i) {
            const double dg_dt = (next.g[i] - prev.g[i]) / dt;
            residual[i] = dg_dt - bracket_p[i] + Ftilde[i];
        }
    } else {
        std::vector<double> up(n);
        for (std::size_t i = 0; i < n; ++i)
            up[i] = -here.g_prime[i] / (2.0 * here.g[i] * here.g[i]);
        const auto upp = d1_o4(up, h);
        std::vector<double> bracket(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = here.g[i], gp = here.g_prime[i];
            bracket[i] = -upp[i] + 3.0 * gp * gp / (4.0 * g * g * g) +
                         1.0 / (4.0 * g * g * g) - 3.0 * kappa * kappa / g +
                         4.0 * kappa * kappa * kappa;
        }
        const auto bracket_p = d1_o4(bracket, h);
        for (std::size_t i = 0; i < n; ++i) {
            const double du_dt =
                (1.0 / (2.0 * next.g[i]) - 1.0 / (2.0 * prev.g[i])) / dt;
            residual[i] = du_dt - bracket_p[i] -
                          Ftilde[i] / (2.0 * here.g[i] * here.g[i]);
        }
    }
    return max_interior(residual, interior_margin(slice_potential(pair, k), kappa, 6));
}

Weight Weight::sech(double R) {
    auto sech = [](double u) { return 1.0 / std::cosh(u); };
    return Weight{
        [R, sech](double x) { return sech(x / R); },
        [R, sech](double x) {
            const double u = x / R;
            return -sech(u) * std::tanh(u) / R;
        },
        [R, sech](double x) {
            const double u = x / R;
            const double s = sech(u), th = std::tanh(u);
            return s * (th * th - s * s) / (R * R);
        },
        [R, sech](double x) {
            const double u = x / R;
            const double s = sech(u), th = std::tanh(u);
            return (5.0 * s * s * s * th - s * th * th * th) / (R * R * R);
        }};
}

Weight Weight::gaussian(double width) {
    const double s2 = width * width;
    auto psi = [s2](double x) { return std::exp(-x * x / s2); };
    return Weight{
        psi,
        [s2, psi](double x) { return -2.0 * x / s2 * psi(x); },
        [s2, psi](double x) { return (4.0 * x * x / (s2 * s2) - 2.0 / s2) * psi(x); },
        [s2, psi](double x) {
            return (12.0 * x / (s2 * s2) - 8.0 * x * x * x / (s2 * s2 * s2)) * psi(x);
        }};
}

double gronwall_distance(const GreensField& g1, const GreensField& g2,
                         const std::function<double(double)>& psi) {
    if (!(g1.grid == g2.grid) || g1.kappa != g2.kappa)
        throw GridMismatch("gronwall_distance: fields on different grids or kappas");
    const auto w = simpson_weights(g1.grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < g1.grid.n; ++i) {
        const double diff = g1.g[i] - g2.g[i];
        acc += w[i] * psi(g1.grid.x(i)) * diff * diff / (2.0 * g1.g[i] * g2.g[i]);
    }
    return acc;
}

double verify_gronwall_identity(const ForcedPair& pair1, const ForcedPair& pair2, double kappa,
                                const Weight& weight, double t0, double tol) {
    if (!(pair1.grid == pair2.grid) || pair1.times != pair2.times)
        throw GridMismatch("verify_gronwall_identity: pairs on different spacetime grids");
    double q0_scale = 1.0, q0_diff = 0.0;
    for (std::size_t i = 0; i < pair1.grid.n; ++i) {
        q0_scale = std::max({q0_scale, std::abs(pair1.q[0][i]), std::abs(pair2.q[0][i])});
        q0_diff = std::max(q0_diff, std::abs(pair1.q[0][i] - pair2.q[0][i]));
    }
    if (q0_diff > 1e-10 * q0_scale)
        throw InitialDataMismatch("verify_gronwall_identity: q1(0) != q2(0)");

    const std::size_t k_end = nearest_index(pair1.times, t0);
    const std::size_t n = pair1.grid.n;
    const auto wx = simpson_weights(pair1.grid);
    const double k2 = kappa * kappa;

    auto slice_integral = [&](std::size_t k) {
        const SampledPotential p1 = slice_potential(pair1, k);
        const SampledPotential p2 = slice_potential(pair2, k);
        const GreensField f1 = greens_field(p1, kappa, tol);
        const GreensField f2 = greens_field(p2, kappa, tol);
        const auto Ft1 = modified_forcing_all(p1, kappa, pair1.forcing[k], tol);
        const auto Ft2 = modified_forcing_all(p2, kappa, pair2.forcing[k], tol);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = pair1.grid.x(i);
            const double g1 = f1.g[i], g2 = f2.g[i];
            const double gp1 = f1.g_prime[i], gp2 = f2.g_prime[i];
            const double q1 = pair1.q[k][i], q2 = pair2.q[k][i];
            const double psi = weight.psi(x), psi1 = weight.dpsi(x);
            const double psi2 = weight.d2psi(x), psi3 = weight.d3psi(x);
            const double D = (g1 - g2) * (g1 - g2) / (2.0 * g1 * g2);

            const double A2 = -(gp1 / g2 + gp2 / g1) + 2.0 * (gp1 / g1 + gp2 / g2);
            const double sum_ratio = gp1 / g1 + gp2 / g2;
            const double A1 = 2.5 * sum_ratio * sum_ratio - 7.0 * gp1 * gp2 / (g1 * g2) -
                              12.0 * k2 +
                              1.5 * (gp1 - gp2) * (gp1 - gp2) / (g1 * g2) +
                              (0.5 - 2.0 * gp1 * gp2) * (1.0 / g1 - 1.0 / g2) *
                                  (1.0 / g1 - 1.0 / g2) +
                              2.0 * q1 * g1 / g2 + 2.0 * q2 * g2 / g1 +
                              2.0 * k2 * (g1 / g2 + g2 / g1) - 2.0 * (q1 + q2);
            const double A0 = -(gp1 / (g1 * g1 * g1) + gp2 / (g2 * g2 * g2)) -
                              (2.0 * k2 - gp1 * gp2 / (2.0 * g1 * g2)) * sum_ratio -
                              2.0 * (q1 * gp2 / g2 + q2 * gp1 / g1) +
                              (gp1 / g2 + gp2 / g1) / (2.0 * g1 * g2);

            const double term1 = D * (-0.5 * psi3 + 1.5 * psi2 * A2 - 1.5 * psi1 * A1 +
                                      1.5 * psi * A0);
            const double term2 = 1.5 * psi1 * (g1 - g2) / (g1 * g2) *
                                 (2.0 * q1 * g1 - 2.0 * q2 * g2 +
                                  gp1 * gp1 / (2.0 * g1) - gp2 * gp2 / (2.0 * g2));
            const double term3 = -psi * (g1 * g1 - g2 * g2) / (2.0 * g1 * g2) *
                                 (Ft1[i] / g1 - Ft2[i] / g2);
            acc += wx[i] * (term1 + term2 + term3);
        }
        return acc;
    };

    const std::size_t m = k_end + 1;
    std::vector<double> wt(m, 0.0);
    if (m >= 2) {
        const double dt = pair1.times[1] - pair1.times[0];
        if (m % 2 == 1 && m >= 3) {
            wt.front() = wt.back() = dt / 3.0;
            for (std::size_t k = 1; k + 1 < m; ++k)
                wt[k] = (k % 2 == 1) ? 4.0 * dt / 3.0 : 2.0 * dt / 3.0;
        } else {
            wt.front() = wt.back() = dt / 2.0;
            for (std::size_t k = 1; k + 1 < m; ++k) wt[k] = dt;
        }
    }

    double rhs = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        if (wt[k] != 0.0) rhs += wt[k] * slice_integral(k);

    const GreensField f1 = greens_field(slice_potential(pair1, k_end), kappa, tol);
    const GreensField f2 = greens_field(slice_potential(pair2, k_end), kappa, tol);
    const double lhs = gronwall_distance(f1, f2, weight.psi);
    return std::abs(lhs - rhs);
}

double verify_qdiff_identity(const SampledPotential& pot1, const SampledPotential& pot2,
                             double kappa, const Weight& weight, double tol) {
    if (!(pot1.grid == pot2.grid)) throw GridMismatch("verify_qdiff_identity: grids differ");
    const GreensField f1 = greens_field(pot1, kappa, tol);
    const GreensField f2 = greens_field(pot2, kappa, tol);
    const auto w = simpson_weights(pot1.grid);
    const double k2 = kappa * kappa;
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < pot1.grid.n; ++i) {
        const double x = pot1.grid.x(i);
        const double psi = weight.psi(x), psi1 = weight.dpsi(x), psi2 = weight.d2psi(x);
        const double g1 = f1.g[i], g2 = f2.g[i];
        const double gp1 = f1.g_prime[i], gp2 = f2.g_prime[i];
        const double q1 = pot1.values[i], q2 = pot2.values[i];
        lhs += w[i] * (q1 - q2) * psi;

        const double inv_sum = 1.0 / g1 + 1.0 / g2;
        const double inv_sum_p = -gp1 / (g1 * g1) - gp2 / (g2 * g2);
        const double brace =
            psi2 * inv_sum +
            0.5 * psi1 * (3.0 * inv_sum_p + (gp1 + gp2) / (g1 * g2)) +
            psi * (-0.5 * inv_sum *
                       (2.0 * (q1 + q2) + 4.0 * k2 - 0.5 * inv_sum * inv_sum +
                        3.0 / (g1 * g2)) +
                   0.75 * (gp1 * gp1 / (g1 * g1 * g1) + gp2 * gp2 / (g2 * g2 * g2)) -
                   (gp1 * gp1 / g1 + gp2 * gp2 / g2) / (4.0 * g1 * g2));
        rhs += w[i] * 0.25 * (g1 - g2) * brace;
    }
    return std::abs(lhs - rhs);
}

}  // namespace kdvq
