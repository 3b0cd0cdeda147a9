/// Time integration of the coefficient system: hand-convolution oracles for
/// the quadratic term, a forward-Euler oracle for one small step, reduction to
/// the Airy flow with the nonlinearity disabled, Richardson order measurement,
/// and the scheme cross-check.

#include <cmath>
#include <doctest.h>

#include "kdvq/kdv.hpp"
#include "kdvq/random.hpp"
#include "kdvq/waves.hpp"

using namespace kdvq;

namespace {

CoefficientField single_pair_field(int N) {
    CoefficientField field(N);
    field.set({1, 0}, Complex(1.0, 0.0));
    return field;
}

CoefficientField smooth_ten_mode_field() {
    CoefficientField field(4);
    const FrequencyIndex idx[5] = {{1, 0}, {0, 1}, {1, 1}, {2, 1}, {1, -2}};
    const Complex amp[5] = {{0.31, 0.11}, {-0.17, 0.23}, {0.09, -0.19}, {0.05, 0.02},
                            {-0.04, 0.07}};
    for (int k = 0; k < 5; ++k) field.set(idx[k], amp[k]);
    return field;
}

double max_abs_difference(const CoefficientField& a, const CoefficientField& b) {
    double worst = 0.0;
    a.for_each([&](const FrequencyIndex& xi, Complex v) {
        worst = std::max(worst, std::abs(v - b.at(xi)));
    });
    b.for_each([&](const FrequencyIndex& xi, Complex v) {
        worst = std::max(worst, std::abs(v - a.at(xi)));
    });
    return worst;
}

double l1_difference(const CoefficientField& a, const CoefficientField& b) {
    double acc = 0.0;
    a.for_each([&](const FrequencyIndex& xi, Complex v) { acc += std::abs(v - b.at(xi)); });
    b.for_each([&](const FrequencyIndex& xi, Complex v) {
        if (!a.contains(xi)) acc += std::abs(v);
    });
    return acc;
}

}  // namespace

TEST_CASE("nonlinear_term of the zero field is zero") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    const CoefficientField out = nonlinear_term(CoefficientField(8), basis, 8);
    CHECK(out.empty());
}

TEST_CASE("nonlinear_term single-pair hand convolution") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    const CoefficientField out = nonlinear_term(single_pair_field(4), basis, 4);
    // Only decomposition of (2,0) is (1,0)+(1,0): 3i * (alpha.(2,0)) * 1 = 6i.
    CHECK(out.at({2, 0}).real() == doctest::Approx(0.0));
    CHECK(out.at({2, 0}).imag() == doctest::Approx(6.0).epsilon(1e-15));
    // (1,0) has no admissible decomposition: (0,0) is not a lattice index.
    CHECK(out.at({1, 0}) == Complex(0.0, 0.0));
    CHECK(out.at({1, 1}) == Complex(0.0, 0.0));
}

TEST_CASE("nonlinear_term matches a brute-force convolution oracle") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    Rng rng(31);
    CoefficientField field(6);
    for (int k = 0; k < 12; ++k) {
        const FrequencyIndex xi{int(rng.next() % 13) - 6, int(rng.next() % 13) - 6};
        if (xi.is_zero()) continue;
        field.set(xi, Complex(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    }
    const CoefficientField out = nonlinear_term(field, basis, 6);
    CHECK(out.symmetry_audit() == 0.0);
    CHECK(out.truncation_radius() == 6);

    for (const auto& [xi, v] : out.canonical_entries()) {
        Complex acc(0.0, 0.0);
        for (int i = -6; i <= 6; ++i)
            for (int j = -6; j <= 6; ++j) {
                const FrequencyIndex x1{i, j};
                const FrequencyIndex x2{xi.xi1 - i, xi.xi2 - j};
                if (x1.is_zero() || x2.is_zero()) continue;
                if (std::abs(x2.xi1) > 6 || std::abs(x2.xi2) > 6) continue;
                acc += field.at(x1) * field.at(x2);
            }
        acc *= Complex(0.0, 3.0 * dot_frequency(basis, xi));
        CHECK(std::abs(v - acc) <= 1e-12 * (1.0 + std::abs(acc)));
    }
}

TEST_CASE("step: zero state stays zero") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 8;
    const CoefficientField out = step(CoefficientField(8), 0.0, config, basis);
    CHECK(out.empty());
}

TEST_CASE("step: one tiny step matches the forward-Euler oracle") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 4;
    config.dt = 1e-4;
    const CoefficientField next = step(single_pair_field(4), 0.0, config, basis);
    // |q_{(2,0)}(dt)| = 6 dt + O(dt^2).
    CHECK(std::abs(std::abs(next.at({2, 0})) - 6.0e-4) < 1e-6);
}

TEST_CASE("step with the nonlinearity disabled reduces to the Airy flow") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 4;
    config.dt = 5e-3;
    config.nonlinear = false;
    const CoefficientField state = smooth_ten_mode_field();
    const CoefficientField stepped = step(state, 0.0, config, basis);
    const CoefficientField airy = airy_propagate(state, config.dt, basis);
    CHECK(max_abs_difference(stepped, airy) < 1e-15);
}

TEST_CASE("solve: zero data gives the identically zero trajectory") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 4;
    config.dt = 1e-3;
    config.T = 5e-3;
    const Trajectory traj = solve(CoefficientField(4), config, basis);
    CHECK(traj.times.size() == 6);
    CHECK(traj.times.front() == 0.0);
    for (const auto& state : traj.states) CHECK(state.empty());
}

TEST_CASE("solve: linear-disabled run equals airy_propagate at the horizon") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 32;
    config.dt = 1e-4;
    config.T = 0.01;
    config.nonlinear = false;
    const CoefficientField data = square_wave_both_components(basis, 32);
    const Trajectory traj = solve(data, config, basis);
    const CoefficientField airy = airy_propagate(data, config.T, basis);
    CHECK(max_abs_difference(traj.states.back(), airy) < 1e-11);
}

TEST_CASE("solve: square-wave defaults keep the G^theta norm finite and close") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;  // dt 1e-4, T 0.01, N 32
    config.workers = 2;
    const CoefficientField data = square_wave_both_components(basis, config.N);
    const Trajectory traj = solve(data, config, basis);
    const double before = g_theta_norm(traj.states.front(), 0.9, basis);
    const double after = g_theta_norm(traj.states.back(), 0.9, basis);
    CHECK(std::isfinite(after));
    CHECK(std::abs(after - before) <= 0.10 * before);

    // Convergence oracle: halving dt moves the final state by far less than
    // the nonlinear displacement itself.
    SolverConfig half = config;
    half.dt = 5e-5;
    const Trajectory traj_half = solve(data, half, basis);
    const double scheme_shift = l1_difference(traj.states.back(), traj_half.states.back());
    const CoefficientField airy = airy_propagate(data, config.T, basis);
    const double displacement = l1_difference(traj.states.back(), airy);
    CHECK(scheme_shift < 0.02 * displacement);

    for (const auto& state : traj.states) CHECK(state.symmetry_audit() == 0.0);
}

TEST_CASE("solve accepts negative horizons and is time-reversible") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 4;
    config.dt = 2e-4;
    config.T = 4e-3;
    const CoefficientField data = smooth_ten_mode_field();
    const Trajectory forward = solve(data, config, basis);
    SolverConfig back = config;
    back.T = -config.T;
    const Trajectory round_trip = solve(forward.states.back(), back, basis);
    CHECK(round_trip.times.back() == doctest::Approx(-config.T));
    CHECK(max_abs_difference(round_trip.states.back(), data) < 1e-10);
}

TEST_CASE("exponential-RK4 order measured by Richardson is at least 3.5") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    const CoefficientField data = smooth_ten_mode_field();
    SolverConfig coarse;
    coarse.N = 4;
    coarse.T = 0.1;
    coarse.dt = coarse.T / 25.0;
    SolverConfig mid = coarse;
    mid.dt = coarse.dt / 2.0;
    SolverConfig fine = coarse;
    fine.dt = coarse.dt / 4.0;
    const CoefficientField u_c = solve(data, coarse, basis).states.back();
    const CoefficientField u_m = solve(data, mid, basis).states.back();
    const CoefficientField u_f = solve(data, fine, basis).states.back();
    const double e1 = l1_difference(u_c, u_m);
    const double e2 = l1_difference(u_m, u_f);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 3.5);
    CHECK(e2 > 1e-14);  // above roundoff, so the ratio is meaningful
}

TEST_CASE("linear limit: epsilon-scaled data stays O(eps^2) from the Airy flow") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 8;
    config.dt = 1e-4;
    config.T = 0.01;
    const CoefficientField base = square_wave_both_components(basis, config.N);
    double previous = -1.0;
    for (double eps : {0.2, 0.1, 0.05}) {
        CoefficientField data = base;
        data.scale(eps);
        const Trajectory traj = solve(data, config, basis);
        const double dist =
            l1_difference(traj.states.back(), airy_propagate(data, config.T, basis));
        const double normalized = dist / (eps * eps);
        if (previous > 0.0)
            CHECK(normalized == doctest::Approx(previous).epsilon(0.15));
        previous = normalized;
    }
}

TEST_CASE("truncation consistency: low modes move less as N doubles") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    auto low_mode_shift = [&](int n_small, int n_big) {
        SolverConfig small;
        small.N = n_small;
        small.dt = 5e-4;
        small.T = 5e-3;
        SolverConfig big = small;
        big.N = n_big;
        const CoefficientField data_small = square_wave_both_components(basis, n_small);
        const CoefficientField data_big = square_wave_both_components(basis, n_big);
        const CoefficientField end_small = solve(data_small, small, basis).states.back();
        const CoefficientField end_big = solve(data_big, big, basis).states.back();
        double acc = 0.0;
        end_small.for_each([&](const FrequencyIndex& xi, Complex v) {
            if (std::max(std::abs(xi.xi1), std::abs(xi.xi2)) <= n_small / 2)
                acc += std::abs(v - end_big.at(xi));
        });
        return acc;
    };
    const double shift_8 = low_mode_shift(8, 16);
    const double shift_16 = low_mode_shift(16, 32);
    CHECK(shift_16 < shift_8);
}

TEST_CASE("picard scheme agrees with exponential-RK4 on small data") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    CoefficientField data = smooth_ten_mode_field();
    data.scale(0.25);
    SolverConfig rk4;
    rk4.N = 4;
    rk4.dt = 1e-4;
    rk4.T = 2e-3;
    SolverConfig picard = rk4;
    picard.scheme = Scheme::picard_fixed_point;
    const CoefficientField u_rk4 = solve(data, rk4, basis).states.back();
    const CoefficientField u_pic = solve(data, picard, basis).states.back();
    // Trapezoid Duhamel is second order; at this dt both land within O(dt^2).
    CHECK(l1_difference(u_rk4, u_pic) < 5e-7);
}

TEST_CASE("picard iteration reports divergence with the failing time") {
    const FrequencyBasis basis = FrequencyBasis::standard();
    CoefficientField data = single_pair_field(4);
    data.scale(50.0);  // large data with a large step defeats the contraction
    SolverConfig config;
    config.N = 4;
    config.dt = 0.5;
    config.T = 1.0;
    config.scheme = Scheme::picard_fixed_point;
    config.picard_max_iter = 8;
    CHECK_THROWS_AS(solve(data, config, basis), PicardDivergence);
}
