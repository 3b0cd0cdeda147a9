#include "kdvq/smoothing.hpp"

#include <cmath>

namespace kdvq {

SmoothingReport smoothing_difference(const Trajectory& traj, const FrequencyBasis& basis) {
    if (traj.states.empty()) throw ConfigError("smoothing_difference: empty trajectory");
    SmoothingReport report;
    report.truncation = traj.config.N;
    report.times = traj.times;
    const CoefficientField& q0 = traj.states.front();
    const double l1_initial = l1_and_weak_l1(q0).first;

    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double t = traj.times[k];
        double l1 = 0.0;
        // Union of supports: the evolved state plus the propagated initial data.
        const CoefficientField& state = traj.states[k];
        for (const auto& [xi, a] : state.canonical_entries()) {
            const double w = dot_frequency(basis, xi);
            const Complex lin = q0.at(xi) * std::polar(1.0, t * w * w * w);
            l1 += 2.0 * std::abs(a - lin);
        }
        for (const auto& [xi, a] : q0.canonical_entries()) {
            if (state.contains(xi)) continue;
            l1 += 2.0 * std::abs(a);
        }
        report.l1_difference.push_back(l1);
        report.l1_linear.push_back(l1_initial);
    }
    return report;
}

double resonance_phase(const std::array<FrequencyIndex, 3>& xi, const FrequencyBasis& basis) {
    const double a = dot_frequency(basis, xi[0] + xi[1]);
    const double b = dot_frequency(basis, xi[0] + xi[2]);
    const double c = dot_frequency(basis, xi[1] + xi[2]);
    return 3.0 * a * b * c;
}

RegionClassification region_classifier(const FrequencyIndex& xi1, const FrequencyIndex& xi2,
                                       const FrequencyBasis& basis, double margin) {
    if (!(margin > 1.0)) throw ConfigError("region_classifier: margin must exceed 1");
    RegionClassification out;
    FrequencyIndex a = xi1, b = xi2;
    if (std::abs(dot_frequency(basis, a)) < std::abs(dot_frequency(basis, b))) {
        std::swap(a, b);
        out.swapped = true;
    }
    const double others = std::abs(double(a.xi2)) + std::abs(double(b.xi1)) +
                          std::abs(double(b.xi2));
    out.region = (std::abs(double(a.xi1)) > margin * others) ? RegionCase::case2
                                                             : RegionCase::case1;
    return out;
}

namespace {

enum class PairCoef { boundary, integrand, remainder };

/** Sum over case2 ordered decompositions xi = xi1 + xi2 (both halves in the
 *  truncation box) of e^{-3 i s w w1 w2} coef(w, w1, w2) a_xi1 b_xi2. */
CoefficientField case2_pair_sum(const CoefficientField& a, const CoefficientField& b, double s,
                                const FrequencyBasis& basis, double margin, PairCoef mode,
                                int N) {
    struct Mode {
        FrequencyIndex xi;
        double w;
        Complex v;
    };
    auto flatten = [&](const CoefficientField& f) {
        std::vector<Mode> modes;
        modes.reserve(f.size());
        f.for_each([&](const FrequencyIndex& xi, Complex v) {
            modes.push_back({xi, dot_frequency(basis, xi), v});
        });
        return modes;
    };
    const auto ma = flatten(a);
    const auto mb = flatten(b);

    CoefficientField out(N);
    for (const auto& e1 : ma) {
        for (const auto& e2 : mb) {
            const FrequencyIndex xi = e1.xi + e2.xi;
            if (xi.is_zero()) continue;
            if (std::max(std::abs(xi.xi1), std::abs(xi.xi2)) > N) continue;
            if (region_classifier(e1.xi, e2.xi, basis, margin).region != RegionCase::case2)
                continue;
            if (!xi.is_canonical()) continue;  // mirror implied by symmetry
            const double w = dot_frequency(basis, xi);
            const Complex phase = std::polar(1.0, -3.0 * s * w * e1.w * e2.w);
            Complex coef;
            switch (mode) {
                case PairCoef::boundary: coef = Complex(-1.0 / (e1.w * e2.w), 0.0); break;
                case PairCoef::integrand: coef = Complex(0.0, 3.0 * w); break;
                case PairCoef::remainder: coef = Complex(1.0 / (e1.w * e2.w), 0.0); break;
            }
            out.add(xi, phase * coef * e1.v * e2.v);
        }
    }
    return out;
}

CoefficientField to_interaction(const CoefficientField& q, double t,
                                const FrequencyBasis& basis) {
    CoefficientField u(q.truncation_radius());
    for (const auto& [xi, a] : q.canonical_entries()) {
        const double w = dot_frequency(basis, xi);
        u.set(xi, a * std::polar(1.0, -t * w * w * w));
    }
    return u;
}

double l1_of(const CoefficientField& f) {
    double s = 0.0;
    for (const auto& [xi, a] : f.canonical_entries()) s += 2.0 * std::abs(a);
    return s;
}

}  // namespace

CoefficientField boundary_term(const CoefficientField& u_state, double s,
                               const FrequencyBasis& basis, double margin) {
    return case2_pair_sum(u_state, u_state, s, basis, margin, PairCoef::boundary,
                          u_state.truncation_radius());
}

double normal_form_audit(const Trajectory& traj, const FrequencyBasis& basis, double margin) {
    const std::size_t m = traj.states.size();
    if (m < 3) throw ConfigError("normal_form_audit: need at least 3 states");
    const int N = traj.config.N;

    // Time-quadrature weights over the trajectory samples: Simpson when the
    // sample count is odd, trapezoid otherwise.
    const double dt = traj.times[1] - traj.times[0];
    std::vector<double> wq(m);
    if (m % 2 == 1) {
        wq.front() = wq.back() = dt / 3.0;
        for (std::size_t k = 1; k + 1 < m; ++k) wq[k] = (k % 2 == 1) ? 4.0 * dt / 3.0 : 2.0 * dt / 3.0;
    } else {
        wq.front() = wq.back() = dt / 2.0;
        for (std::size_t k = 1; k + 1 < m; ++k) wq[k] = dt;
    }

    CoefficientField direct(N), remainder(N);
    CoefficientField b_first(N), b_last(N);
    for (std::size_t k = 0; k < m; ++k) {
        const double s = traj.times[k];
        const CoefficientField u = to_interaction(traj.states[k], s, basis);
        // u'(s) in the interaction representation.
        const CoefficientField nl = nonlinear_term(traj.states[k], basis, N);
        const CoefficientField du = to_interaction(nl, s, basis);

        const CoefficientField integ =
            case2_pair_sum(u, u, s, basis, margin, PairCoef::integrand, N);
        const CoefficientField rem1 =
            case2_pair_sum(du, u, s, basis, margin, PairCoef::remainder, N);
        const CoefficientField rem2 =
            case2_pair_sum(u, du, s, basis, margin, PairCoef::remainder, N);
        for (const auto& [xi, v] : integ.canonical_entries()) direct.add(xi, wq[k] * v);
        for (const auto& [xi, v] : rem1.canonical_entries()) remainder.add(xi, wq[k] * v);
        for (const auto& [xi, v] : rem2.canonical_entries()) remainder.add(xi, wq[k] * v);

        if (k == 0) b_first = case2_pair_sum(u, u, s, basis, margin, PairCoef::boundary, N);
        if (k + 1 == m) b_last = case2_pair_sum(u, u, s, basis, margin, PairCoef::boundary, N);
    }

    CoefficientField mismatch(N);
    for (const auto& [xi, v] : direct.canonical_entries()) mismatch.add(xi, v);
    for (const auto& [xi, v] : b_last.canonical_entries()) mismatch.add(xi, -v);
    for (const auto& [xi, v] : b_first.canonical_entries()) mismatch.add(xi, v);
    for (const auto& [xi, v] : remainder.canonical_entries()) mismatch.add(xi, -v);
    return l1_of(mismatch);
}

}  // namespace kdvq
