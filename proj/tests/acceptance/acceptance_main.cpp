// Acceptance suite: one pass/fail line per criterion, each with its stated
// tolerance and runtime budget enforced.  Nonzero exit when any criterion
// fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kdvq/almostper.hpp"
#include "kdvq/driver.hpp"
#include "kdvq/greens.hpp"
#include "kdvq/io.hpp"
#include "kdvq/kdv.hpp"
#include "kdvq/random.hpp"
#include "kdvq/smoothing.hpp"
#include "kdvq/waves.hpp"

using namespace kdvq;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

constexpr unsigned kWorkers = 2;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) {
        detail += (detail.empty() ? "" : "; ") + what;
    }
};

UniformGrid grid_Lh(double L, double h) {
    std::size_t n = std::size_t(std::llround(2.0 * L / h)) + 1;
    if (n % 2 == 0) ++n;
    return UniformGrid(-L, L, n);
}

double l1_difference(const CoefficientField& a, const CoefficientField& b) {
    double acc = 0.0;
    a.for_each([&](const FrequencyIndex& xi, Complex v) { acc += std::abs(v - b.at(xi)); });
    b.for_each([&](const FrequencyIndex& xi, Complex v) {
        if (!a.contains(xi)) acc += std::abs(v);
    });
    return acc;
}

// ---------------------------------------------------------------------------
// 1. Green's bounds on randomized bounded potentials.
Outcome criterion1() {
    Outcome out;
    const UniformGrid grid = grid_Lh(8.0, 1.0 / 64.0);
    const double kappa = 1.0;
    Rng pair_rng(1234);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const SampledPotential pot = random_bump_potential(grid, 0.25, seed);
        const GreensField field = greens_field(pot, kappa, 1e-8);
        const GreensFieldAudit audit = audit_greens_field(field);
        out.require(audit.lower_slack >= 0.0, "g lower bound violated, seed " +
                                                   std::to_string(seed));
        out.require(audit.upper_slack >= 0.0, "g upper bound violated, seed " +
                                                   std::to_string(seed));
        out.require(audit.prime_slack >= 0.0, "g' bound violated, seed " +
                                                   std::to_string(seed));

        // Off-diagonal envelope |G| <= (3/4k) e^{-k|x-y|/2} on sampled pairs.
        const auto K = greens_kernel_matrix(pot, kappa, 1e-8);
        for (int s = 0; s < 500; ++s) {
            const std::size_t i = std::size_t(pair_rng.next() % grid.n);
            const std::size_t j = std::size_t(pair_rng.next() % grid.n);
            const double bound =
                3.0 / (4.0 * kappa) *
                    std::exp(-kappa * std::abs(grid.x(i) - grid.x(j)) / 2.0) +
                field.tail_bound[i];
            if (std::abs(K[i * grid.n + j]) > bound) {
                out.require(false, "off-diagonal envelope violated, seed " +
                                       std::to_string(seed));
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 2. Static identities at h = 1/64 with order >= 3.5 under h-halving.
Outcome criterion2() {
    Outcome out;
    const double kappa = 2.0;
    const TestFunction f = TestFunction::gaussian();
    const struct {
        StaticIdentity kind;
        const char* name;
    } kinds[] = {{StaticIdentity::q_equation, "q-equation"},
                 {StaticIdentity::g_second, "g-double-prime"},
                 {StaticIdentity::g_third, "elliptic"},
                 {StaticIdentity::G_identity, "G-identity"}};
    double worst_res = 0.0, worst_order = 99.0;
    for (std::uint64_t seed = 11; seed <= 15; ++seed) {
        for (const auto& [kind, name] : kinds) {
            auto run = [&](double h) {
                const SampledPotential pot =
                    random_bump_potential(grid_Lh(12.0, h), 0.25, seed);
                return verify_static_identity(kind, pot, kappa, 1e-12, &f);
            };
            const double r = run(1.0 / 64.0);
            const double r_half = run(1.0 / 128.0);
            const double order = std::log2(r / r_half);
            worst_res = std::max(worst_res, r);
            worst_order = std::min(worst_order, order);
            out.require(r < 1e-4, std::string(name) + " residual " + fmt17(r) + " seed " +
                                      std::to_string(seed));
            out.require(order >= 3.5, std::string(name) + " order " + fmt17(order) +
                                          " seed " + std::to_string(seed));
        }
    }
    out.note("max residual " + fmt17(worst_res) + ", min order " + fmt17(worst_order));
    return out;
}

// ---------------------------------------------------------------------------
// 3. Dynamic and Gronwall identities on manufactured pairs.
Outcome criterion3() {
    Outcome out;
    const double kappa = 1.2;
    const double t_end = 0.5;
    auto q1_fn = [](double t, double x) { return 0.3 * std::exp(-x * x) * std::cos(t); };
    auto q2_fn = [](double, double x) { return 0.3 * std::exp(-x * x); };

    // Residuals at the stated desk resolution: 64 time intervals, 512 x cells.
    {
        const UniformGrid grid(-8.0, 8.0, 513);
        std::vector<double> times(65);
        for (std::size_t k = 0; k < 65; ++k) times[k] = t_end * double(k) / 64.0;
        const ForcedPair p1 = manufactured_pair(q1_fn, grid, times);
        const ForcedPair p2 = manufactured_pair(q2_fn, grid, times);
        const double dyn = verify_dynamic_identity(p1, kappa, t_end / 2.0);
        const double gro =
            verify_gronwall_identity(p1, p2, kappa, Weight::sech(1.0), t_end);
        out.require(dyn < 1e-3, "g-dt residual " + fmt17(dyn));
        out.require(gro < 1e-3, "gronwall residual " + fmt17(gro));
        out.note("g-dt " + fmt17(dyn) + ", gronwall " + fmt17(gro));
    }

    // h-refinement orders, measured with sharper profiles and a time grid fine
    // enough that the central-difference floor stays below the spatial error;
    // mean order over two h-halvings.
    auto grid_h = [](double h) {
        std::size_t n = std::size_t(std::llround(16.0 / h)) + 1;
        if (n % 2 == 0) ++n;
        return UniformGrid(-8.0, 8.0, n);
    };
    {
        auto travel = [](double t, double x) {
            const double u = x - 0.4 * t;
            return 0.3 * std::exp(-2.0 * u * u);
        };
        std::vector<double> times(257);
        for (std::size_t k = 0; k < 257; ++k) times[k] = t_end * double(k) / 256.0;
        auto run = [&](double h) {
            return verify_dynamic_identity(manufactured_pair(travel, grid_h(h), times),
                                           kappa, t_end / 2.0);
        };
        const double order =
            std::log2(run(1.0 / 16.0) / run(1.0 / 64.0)) / 2.0;
        out.require(order >= 3.0, "g-dt order " + fmt17(order));
        out.note("g-dt order " + fmt17(order));
    }
    {
        auto s1 = [](double t, double x) {
            return 0.3 * std::exp(-2.0 * x * x) * std::cos(t);
        };
        auto s2 = [](double, double x) { return 0.3 * std::exp(-2.0 * x * x); };
        std::vector<double> times(65);
        for (std::size_t k = 0; k < 65; ++k) times[k] = t_end * double(k) / 64.0;
        auto run = [&](double h) {
            return verify_gronwall_identity(manufactured_pair(s1, grid_h(h), times),
                                            manufactured_pair(s2, grid_h(h), times), kappa,
                                            Weight::sech(1.0), t_end);
        };
        const double order = std::log2(run(1.0 / 8.0) / run(1.0 / 32.0)) / 2.0;
        out.require(order >= 3.0, "gronwall order " + fmt17(order));
        out.note("gronwall order " + fmt17(order));
    }
    return out;
}

// ---------------------------------------------------------------------------
// 4. q-diff identity: constant pairs semi-analytic, Gaussian pairs.
Outcome criterion4() {
    Outcome out;
    const double kappa = 1.0;
    const Weight w = Weight::sech(1.0);
    const UniformGrid grid = grid_Lh(22.0, 1.0 / 64.0);
    const double r_const = verify_qdiff_identity(SampledPotential::constant(grid, 0.0),
                                                 SampledPotential::constant(grid, 0.2),
                                                 kappa, w, 1e-12);
    out.require(r_const < 1e-5, "constant-pair residual " + fmt17(r_const));

    auto q1 = [](double x) {
        return 0.22 * std::exp(-x * x) - 0.1 * std::exp(-(x - 2.0) * (x - 2.0) / 2.0);
    };
    auto q2 = [](double x) {
        return 0.18 * std::exp(-(x + 1.0) * (x + 1.0)) +
               0.07 * std::exp(-(x - 1.5) * (x - 1.5));
    };
    const double r_gauss = verify_qdiff_identity(SampledPotential::from_function(grid, q1),
                                                 SampledPotential::from_function(grid, q2),
                                                 kappa, w, 1e-12);
    out.require(r_gauss < 1e-4, "gaussian-pair residual " + fmt17(r_gauss));
    out.note("constant " + fmt17(r_const) + ", gaussian " + fmt17(r_gauss));
    return out;
}

// ---------------------------------------------------------------------------
// 5. Talbot reconstruction at rational times; continuity trend at the
// irrational surrogate.
Outcome criterion5() {
    Outcome out;
    const int N = 4001;
    // Exclusion wide enough that the Dirichlet tail (2/pi)/(N d) sits below
    // the 5e-3 tolerance at the window edge.
    const double gibbs = 25.0 * (2.0 * pi / double(N));
    for (const auto [p, q] : {std::pair<long long, long long>{1, 1},
                              {1, 2},
                              {1, 3},
                              {2, 5}}) {
        const SpatialSampling sampling = SpatialSampling::uniform(2048, -pi, pi);
        const TalbotResult result = talbot_reconstruct(p, q, 1.0, N, sampling, kWorkers);
        double worst = 0.0;
        for (std::size_t i = 0; i < sampling.points.size(); ++i) {
            const double x = sampling.points[i];
            const double cell = pi / double(q);
            if (std::abs(std::remainder(x, cell)) < gibbs) continue;
            worst = std::max(worst,
                             std::abs(result.samples[i] - result.direct_samples[i]));
        }
        out.require(worst < 5e-3, "p/q=" + std::to_string(p) + "/" + std::to_string(q) +
                                      " mismatch " + fmt17(worst));
    }

    // Irrational surrogate t/2pi = 1/sqrt(2): increments shrink >= 3x under an
    // 8x grid refinement at fixed truncation.
    const FrequencyBasis basis = FrequencyBasis::standard();
    const double t = 2.0 * pi / std::sqrt(2.0);
    const CoefficientField data = square_wave_coefficients(basis, 1, N);
    const CoefficientField evolved = airy_propagate(data, t, basis);
    const SpatialSampling coarse = SpatialSampling::uniform(2048, -pi, pi);
    const SpatialSampling fine = SpatialSampling::uniform(16384, -pi, pi);
    const double inc_coarse =
        jump_profile(evaluate_field(evolved, basis, coarse, kWorkers), coarse).max_increment;
    const double inc_fine =
        jump_profile(evaluate_field(evolved, basis, fine, kWorkers), fine).max_increment;
    out.require(inc_coarse / inc_fine >= 3.0,
                "increment ratio " + fmt17(inc_coarse / inc_fine));
    out.note("increment " + fmt17(inc_coarse) + " -> " + fmt17(inc_fine));
    return out;
}

// ---------------------------------------------------------------------------
// 6. KdV solver: quadratic smallness ratio and RK4 Richardson order.
Outcome criterion6() {
    Outcome out;
    const FrequencyBasis basis = FrequencyBasis::standard();
    SolverConfig config;
    config.N = 32;
    config.dt = 1e-4;
    config.T = 0.01;
    config.workers = kWorkers;
    const CoefficientField base = square_wave_both_components(basis, config.N);
    auto smoothing_l1 = [&](double eps) {
        CoefficientField data = base;
        data.scale(eps);
        const Trajectory traj = solve(data, config, basis);
        return l1_difference(traj.states.back(),
                             airy_propagate(data, config.T, basis));
    };
    const double ratio = smoothing_l1(0.1) / smoothing_l1(0.05);
    out.require(std::abs(ratio - 4.0) <= 0.5, "epsilon ratio " + fmt17(ratio));

    // Richardson order on a 10-mode smooth field.
    CoefficientField field(4);
    field.set({1, 0}, Complex(0.31, 0.11));
    field.set({0, 1}, Complex(-0.17, 0.23));
    field.set({1, 1}, Complex(0.09, -0.19));
    field.set({2, 1}, Complex(0.05, 0.02));
    field.set({1, -2}, Complex(-0.04, 0.07));
    SolverConfig rich;
    rich.N = 4;
    rich.T = 0.1;
    rich.dt = rich.T / 25.0;
    const CoefficientField u_c = solve(field, rich, basis).states.back();
    rich.dt /= 2.0;
    const CoefficientField u_m = solve(field, rich, basis).states.back();
    rich.dt /= 2.0;
    const CoefficientField u_f = solve(field, rich, basis).states.back();
    const double order = std::log2(l1_difference(u_c, u_m) / l1_difference(u_m, u_f));
    out.require(order >= 3.5, "RK4 Richardson order " + fmt17(order));
    out.note("ratio " + fmt17(ratio) + ", order " + fmt17(order));
    return out;
}

// ---------------------------------------------------------------------------
// 7. Nonlinear smoothing trend: l1 difference stable 32 -> 64 while the
// linear l1 grows by the exact harmonic increment.
Outcome criterion7() {
    Outcome out;
    const FrequencyBasis basis = FrequencyBasis::standard();
    auto run = [&](int N) {
        SolverConfig config;
        config.N = N;
        config.dt = 1e-4;
        config.T = 0.01;
        config.workers = kWorkers;
        const CoefficientField data = square_wave_both_components(basis, N);
        const Trajectory traj = solve(data, config, basis);
        const SmoothingReport report = smoothing_difference(traj, basis);
        return std::pair<double, double>(report.l1_difference.back(),
                                         report.l1_linear.back());
    };
    const auto [diff32, lin32] = run(32);
    const auto [diff64, lin64] = run(64);
    const double change = std::abs(diff64 - diff32) / diff32;
    out.require(change < 0.20, "l1 difference changed by " + fmt17(change));

    long double increment = 0.0L;
    for (int k = 33; k <= 63; k += 2) increment += 1.0L / k;
    const double predicted = (8.0 / M_PI) * double(increment);
    out.require(std::abs((lin64 - lin32) - predicted) < 1e-12 * predicted + 1e-12,
                "harmonic increment " + fmt17(lin64 - lin32) + " vs " + fmt17(predicted));
    out.note("D32 " + fmt17(diff32) + ", D64 " + fmt17(diff64) + ", change " +
             fmt17(change) + " (theta 0.9, gamma 2; theta-window gamma 1.5)");
    return out;
}

// ---------------------------------------------------------------------------
// 8. Almost periods: the (eps = 1) scan accepts only 0 for the two-wave data;
// the linear slice at an irrational time has a relatively dense accepted set.
Outcome criterion8() {
    Outcome out;
    const FrequencyBasis basis = FrequencyBasis::standard();
    {
        AlmostPeriodQuery query;
        query.epsilon = 1.0;
        query.x_min = -50.0;
        query.x_max = 50.0;
        query.samples = 20000;
        query.workers = kWorkers;
        for (long long k = -10000; k <= 10000; ++k)
            query.shift_grid.push_back(double(k) * 0.01);
        const double a1 = basis.alpha1, a2 = basis.alpha2;
        const ShiftScanReport scan = almost_period_scan(
            [a1, a2](double x) { return square_wave(a1 * x) + square_wave(a2 * x); },
            query);
        out.require(scan.accepted.size() == 1 && scan.accepted.front() == 0.0,
                    "square-sum scan accepted " + std::to_string(scan.accepted.size()) +
                        " shifts");
    }
    {
        // Linear slice at t = 1 (both t/2pi and alpha2^3 t/2pi irrational).
        // Genuine almost-periods sit at multiples of 2 pi * 29 ~ 182.2 (the
        // sqrt2 convergent 41/29), so the shift range must reach past them.
        const int N = 128;
        const double t = 1.0;
        const CoefficientField evolved =
            airy_propagate(square_wave_both_components(basis, N), t, basis);
        const double x_min = -20.0, x_max = 20.0;
        const long long count = 25000;
        const double step = 0.01;
        const std::size_t window_samples = 8000;
        const double wstep = (x_max - x_min) / double(window_samples);
        const double lattice_step = wstep / 2.0;  // 0.0025 divides every shift
        const double lo = x_min - double(count) * step - 1.0;
        const std::size_t lattice_n =
            std::size_t((x_max + double(count) * step + 1.0 - lo) / lattice_step) + 2;
        const SpatialSampling lattice = SpatialSampling::uniform(
            lattice_n, lo, lo + lattice_step * double(lattice_n - 1));
        const auto values = evaluate_field(evolved, basis, lattice, kWorkers);
        auto slice = [&](double x) {
            return values[std::size_t(std::llround((x - lo) / lattice_step))];
        };
        AlmostPeriodQuery query;
        query.epsilon = 1.0;
        query.x_min = x_min;
        query.x_max = x_max;
        query.samples = window_samples;
        query.workers = kWorkers;
        for (long long k = -count; k <= count; ++k)
            query.shift_grid.push_back(double(k) * step);
        const ShiftScanReport scan = almost_period_scan(slice, query);
        out.require(scan.accepted.size() >= 3,
                    "slice scan accepted " + std::to_string(scan.accepted.size()));
        // Relative density on the scanned range: edge-inclusive gaps between
        // accepted shifts stay below L_eps = 200 (the 2 pi * 29 spacing).
        double gap = 0.0, last = -double(count) * step;
        for (double a : scan.accepted) {
            gap = std::max(gap, a - last);
            last = a;
        }
        gap = std::max(gap, double(count) * step - last);
        out.require(gap <= 200.0, "slice L_eps " + fmt17(gap));
        out.note("slice accepted " + std::to_string(scan.accepted.size()) +
                 ", L_eps (edge-inclusive max gap) " + fmt17(gap));
    }
    return out;
}

// ---------------------------------------------------------------------------
// 9. Wave-packet construction: diagonal lower bounds, off-diagonal envelope,
// and the strictly increasing concentration trend.
Outcome criterion9() {
    Outcome out;
    WavePacketSpec spec;
    for (int n = 1; n <= 10; ++n) {
        const double eta = std::pow(2.0, n);
        const double plus = packet_inner_product(spec, eta, 0.0, eta, 0.0).real();
        const double minus = packet_inner_product(spec, -eta, 0.0, -eta, 0.0).real();
        out.require(plus >= 0.5, "diagonal at +2^" + std::to_string(n) + " = " +
                                     fmt17(plus));
        out.require(minus >= 0.5, "diagonal at -2^" + std::to_string(n) + " = " +
                                      fmt17(minus));
    }

    spec.n_max = 6;
    spec.k_max = 2;
    const ConcentrationReport report = concentration_diagnostic(spec);
    out.require(std::abs(report.offdiagonal_total) <= report.envelope_bound,
                "off-diagonal " + fmt17(report.offdiagonal_total) + " exceeds envelope " +
                    fmt17(report.envelope_bound));
    for (std::size_t m = 1; m < report.partial_sums.size(); ++m) {
        const double inc = report.partial_sums[m] - report.partial_sums[m - 1];
        // Two freshly added centered packets, each with diagonal >= 1/2:
        // increment >= 0.5 * 2 * 0.5.
        out.require(inc >= 0.5 * 2.0 * 0.5,
                    "increment at level " + std::to_string(m + 1) + " = " + fmt17(inc));
    }
    out.note("partial sums " + fmt17(report.partial_sums.front()) + " .. " +
             fmt17(report.partial_sums.back()));
    return out;
}

// ---------------------------------------------------------------------------
// 10. Determinism: identical configs give bitwise-identical CSVs across 1, 4,
// and 8 workers.
Outcome criterion10() {
    Outcome out;
    const fs::path base = fs::temp_directory_path() / "kdvq_acceptance_det";
    fs::remove_all(base);

    auto campaign = [&](unsigned workers) {
        const fs::path dir = base / ("w" + std::to_string(workers));
        std::vector<std::pair<std::string, nlohmann::json>> runs = {
            {"talbot", {{"p", 1}, {"q", 3}, {"alpha", 1.0}, {"N", 1001}, {"samples", 512}}},
            {"airy-evolve", {{"N", 301}, {"t", 0.37}, {"component", "both"},
                             {"samples", 512}}},
            {"smoothing-report",
             {{"N", 12}, {"dt", 5e-4}, {"T", 5e-3}, {"store_every", 5}}},
        };
        for (const auto& [command, params] : runs) {
            driver::RunConfig config;
            config.command = command;
            config.parameters = params;
            config.output_dir = dir / command;
            config.workers = workers;
            const auto result = driver::run(config);
            if (result.exit_code != 0) out.require(false, command + " run failed");
        }
        return dir;
    };
    const fs::path w1 = campaign(1);
    const fs::path w4 = campaign(4);
    const fs::path w8 = campaign(8);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    std::size_t compared = 0;
    for (auto it = fs::recursive_directory_iterator(w1);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file() || it->path().extension() != ".csv") continue;
        const fs::path rel = fs::relative(it->path(), w1);
        const std::string a = slurp(it->path());
        const std::string b = slurp(w4 / rel);
        const std::string c = slurp(w8 / rel);
        if (a != b || a != c) out.require(false, "CSV differs across workers: " + rel.string());
        ++compared;
    }
    out.require(compared >= 5, "only " + std::to_string(compared) + " CSVs compared");
    out.note(std::to_string(compared) + " CSVs bitwise-identical across 1/4/8 workers");
    return out;
}

}  // namespace

int main() {
    struct Entry {
        int number;
        const char* title;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria = {
        {1, "Green's bounds on 20 randomized potentials", 30.0, criterion1},
        {2, "static identities, residual < 1e-4 and order >= 3.5", 120.0, criterion2},
        {3, "dynamic + Gronwall identities, residual < 1e-3 and order >= 3", 300.0,
         criterion3},
        {4, "q-diff identity, constant and Gaussian pairs", 60.0, criterion4},
        {5, "Talbot reconstruction and continuity trend", 60.0, criterion5},
        {6, "KdV quadratic smallness and RK4 order", 300.0, criterion6},
        {7, "nonlinear smoothing trend 32 -> 64", 900.0, criterion7},
        {8, "almost-period scans", 120.0, criterion8},
        {9, "wave-packet concentration", 600.0, criterion9},
        {10, "worker-count determinism of CSV artifacts", 600.0, criterion10},
    };

    int failures = 0;
    for (const auto& entry : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = entry.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > entry.budget_s) {
            outcome.pass = false;
            outcome.detail += (outcome.detail.empty() ? "" : "; ") + std::string("over budget");
        }
        std::printf("[%s] criterion %2d: %s (%.1f s%s)%s%s\n",
                    outcome.pass ? "PASS" : "FAIL", entry.number, entry.title, elapsed,
                    elapsed > entry.budget_s ? ", OVER BUDGET" : "",
                    outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
        if (!outcome.pass) ++failures;
    }
    return failures;
}
