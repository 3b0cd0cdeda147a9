#include "kdvq/kdv.hpp"

#include <cmath>
#include <string>

#include "kdvq/parallel.hpp"

namespace kdvq {

namespace {

/** Fixed enumeration of the canonical half of the index box max(|.|) <= N and
 *  scratch space for the pairwise convolution.  The mirror half is implied by
 *  conjugation, which keeps every state Hermitian by construction. */
class LatticeWorkspace {
public:
    LatticeWorkspace(int N, const FrequencyBasis& basis) : N_(N), dim_(2 * N + 1) {
        canonical_.reserve(std::size_t(dim_) * dim_ / 2);
        for (int x1 = 0; x1 <= N; ++x1) {
            const int lo = (x1 == 0) ? 1 : -N;
            for (int x2 = lo; x2 <= N; ++x2) canonical_.push_back({x1, x2});
        }
        omega_.resize(canonical_.size());
        for (std::size_t i = 0; i < canonical_.size(); ++i)
            omega_[i] = dot_frequency(basis, canonical_[i]);
        dense_.assign(std::size_t(dim_) * dim_, Complex(0.0, 0.0));
    }

    int radius() const { return N_; }
    std::size_t slots() const { return canonical_.size(); }
    const std::vector<FrequencyIndex>& canonical() const { return canonical_; }
    double omega(std::size_t i) const { return omega_[i]; }

    std::vector<Complex> load(const CoefficientField& field) const {
        std::vector<Complex> v(slots(), Complex(0.0, 0.0));
        for (const auto& [xi, a] : field.canonical_entries()) v[slot(xi)] = a;
        return v;
    }

    CoefficientField store(const std::vector<Complex>& v) const {
        CoefficientField field(N_);
        for (std::size_t i = 0; i < slots(); ++i)
            if (v[i] != Complex(0.0, 0.0)) field.set(canonical_[i], v[i]);
        return field;
    }

    /** out_xi = sum over decompositions xi = xi' + xi'' of v_xi' v_xi'' for every
     *  canonical xi.  Each output slot is summed in entry-list order regardless
     *  of the worker count. */
    void convolve(const std::vector<Complex>& v, std::vector<Complex>& out, unsigned workers) {
        // Materialize both mirrors once per call.
        entries_.clear();
        for (std::size_t i = 0; i < canonical_.size(); ++i) {
            if (v[i] == Complex(0.0, 0.0)) continue;
            entries_.push_back({canonical_[i], v[i]});
            entries_.push_back({-canonical_[i], std::conj(v[i])});
        }
        std::fill(dense_.begin(), dense_.end(), Complex(0.0, 0.0));
        for (const auto& e : entries_) dense_[box_index(e.xi)] = e.a;

        out.assign(slots(), Complex(0.0, 0.0));
        parallel_for(slots(), workers, [&](std::size_t i) {
            const FrequencyIndex xi = canonical_[i];
            Complex acc(0.0, 0.0);
            for (const auto& e : entries_) {
                const int d1 = xi.xi1 - e.xi.xi1;
                const int d2 = xi.xi2 - e.xi.xi2;
                if (d1 < -N_ || d1 > N_ || d2 < -N_ || d2 > N_) continue;
                acc += e.a * dense_[std::size_t(d1 + N_) * dim_ + std::size_t(d2 + N_)];
            }
            out[i] = acc;
        });
    }

private:
    struct Entry {
        FrequencyIndex xi;
        Complex a;
    };

    std::size_t slot(const FrequencyIndex& xi) const {
        // Inverse of the canonical enumeration above.
        if (xi.xi1 == 0) return std::size_t(xi.xi2 - 1);
        return std::size_t(N_) + std::size_t(xi.xi1 - 1) * dim_ + std::size_t(xi.xi2 + N_);
    }
    std::size_t box_index(const FrequencyIndex& xi) const {
        return std::size_t(xi.xi1 + N_) * dim_ + std::size_t(xi.xi2 + N_);
    }

    int N_;
    int dim_;
    std::vector<FrequencyIndex> canonical_;
    std::vector<double> omega_;
    std::vector<Complex> dense_;
    std::vector<Entry> entries_;
};

/// Integrator shared by step() and solve().  State vectors live on the
/// canonical slots of the workspace.
class Integrator {
public:
    Integrator(const SolverConfig& config, const FrequencyBasis& basis)
        : config_(config), ws_(config.N, basis) {}

    LatticeWorkspace& workspace() { return ws_; }

    /// Right side of the interaction-representation system at stage offset tau:
    /// F_xi = 3 i omega e^{-i tau omega^3} (q * q)_xi with q = e^{i tau omega^3} u.
    void rhs(double tau, const std::vector<Complex>& u, std::vector<Complex>& out) {
        const std::size_t n = ws_.slots();
        scratch_q_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = ws_.omega(i);
            scratch_q_[i] = u[i] * std::polar(1.0, tau * w * w * w);
        }
        ws_.convolve(scratch_q_, out, config_.workers);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = ws_.omega(i);
            out[i] *= Complex(0.0, 3.0 * w) * std::polar(1.0, -tau * w * w * w);
        }
    }

    std::vector<Complex> step_rk4(const std::vector<Complex>& q, double dt) {
        const std::size_t n = ws_.slots();
        if (!config_.nonlinear) {
            std::vector<Complex> out(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double w = ws_.omega(i);
                out[i] = q[i] * std::polar(1.0, dt * w * w * w);
            }
            return out;
        }
        std::vector<Complex> k1(n), k2(n), k3(n), k4(n), tmp(n);
        rhs(0.0, q, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = q[i] + 0.5 * dt * k1[i];
        rhs(0.5 * dt, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = q[i] + 0.5 * dt * k2[i];
        rhs(0.5 * dt, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = q[i] + dt * k3[i];
        rhs(dt, tmp, k4);
        std::vector<Complex> u(n);
        for (std::size_t i = 0; i < n; ++i)
            u[i] = q[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        // Map the interaction representation back: q(t+dt) = e^{i dt w^3} u.
        for (std::size_t i = 0; i < n; ++i) {
            const double w = ws_.omega(i);
            u[i] *= std::polar(1.0, dt * w * w * w);
        }
        return u;
    }

    std::vector<Complex> step_picard(const std::vector<Complex>& q, double dt, double t_now) {
        const std::size_t n = ws_.slots();
        std::vector<Complex> propagated(n), nl0(n), y(n), next(n), nl(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = ws_.omega(i);
            propagated[i] = q[i] * std::polar(1.0, dt * w * w * w);
        }
        if (!config_.nonlinear) return propagated;

        nonlinear_of(q, nl0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = ws_.omega(i);
            nl0[i] *= std::polar(1.0, dt * w * w * w);
        }
        y = propagated;
        for (int iter = 0; iter < config_.picard_max_iter; ++iter) {
            nonlinear_of(y, nl);
            double residual = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < n; ++i) {
                next[i] = propagated[i] + 0.5 * dt * (nl0[i] + nl[i]);
                const double r = std::abs(next[i] - y[i]);
                finite = finite && std::isfinite(r);
                if (r > residual) residual = r;
            }
            if (!finite)
                throw PicardDivergence("picard iterate left the representable range", t_now);
            y.swap(next);
            if (residual < config_.picard_tol) return y;
        }
        throw PicardDivergence(
            "picard iteration failed to reach tol=" + std::to_string(config_.picard_tol) +
                " within " + std::to_string(config_.picard_max_iter) + " iterations",
            t_now);
    }

private:
    void nonlinear_of(const std::vector<Complex>& q, std::vector<Complex>& out) {
        ws_.convolve(q, out, config_.workers);
        for (std::size_t i = 0; i < ws_.slots(); ++i)
            out[i] *= Complex(0.0, 3.0 * ws_.omega(i));
    }

    SolverConfig config_;
    LatticeWorkspace ws_;
    std::vector<Complex> scratch_q_;
};

}  // namespace

CoefficientField nonlinear_term(const CoefficientField& field, const FrequencyBasis& basis,
                                int N, unsigned workers) {
    if (field.truncation_radius() > N)
        throw ConfigError("nonlinear_term: field truncated beyond N");
    LatticeWorkspace ws(N, basis);
    std::vector<Complex> v = ws.load(field);
    std::vector<Complex> out;
    ws.convolve(v, out, workers);
    for (std::size_t i = 0; i < ws.slots(); ++i) out[i] *= Complex(0.0, 3.0 * ws.omega(i));
    return ws.store(out);
}

CoefficientField step(const CoefficientField& state, double t, const SolverConfig& config,
                      const FrequencyBasis& basis) {
    config.validate();
    if (state.truncation_radius() > config.N)
        throw ConfigError("step: state truncated beyond config.N");
    Integrator integ(config, basis);
    const auto q = integ.workspace().load(state);
    const auto out = (config.scheme == Scheme::exponential_rk4)
                         ? integ.step_rk4(q, config.dt)
                         : integ.step_picard(q, config.dt, t);
    return integ.workspace().store(out);
}

Trajectory solve(const CoefficientField& initial, const SolverConfig& config,
                 const FrequencyBasis& basis) {
    config.validate();
    if (initial.truncation_radius() > config.N)
        throw ConfigError("solve: initial data truncated beyond config.N");

    const double dt = (config.T < 0.0) ? -config.dt : config.dt;
    const long long steps = std::llround(std::abs(config.T) / config.dt);
    if (std::abs(double(steps) * config.dt - std::abs(config.T)) > 1e-9 * std::abs(config.T))
        throw ConfigError("solve: T must be an integer multiple of dt");

    Trajectory traj{.times = {0.0}, .states = {}, .config = config, .basis = basis};
    Integrator integ(config, basis);
    auto& ws = integ.workspace();

    // Re-key the initial data onto radius N (it may carry a smaller radius).
    CoefficientField state0(config.N);
    for (const auto& [xi, a] : initial.canonical_entries()) state0.set(xi, a);
    traj.states.push_back(state0);

    auto q = ws.load(state0);
    double t = 0.0;
    for (long long s = 0; s < steps; ++s) {
        q = (config.scheme == Scheme::exponential_rk4) ? integ.step_rk4(q, dt)
                                                       : integ.step_picard(q, dt, t);
        t += dt;
        traj.times.push_back(t);
        CoefficientField st = ws.store(q);
        if (st.symmetry_audit() != 0.0)
            throw SymmetryViolation("solve: symmetry audit failed at t=" + std::to_string(t));
        traj.states.push_back(std::move(st));
    }
    return traj;
}

}  // namespace kdvq
