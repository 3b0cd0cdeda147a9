#include "kdvq/driver.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <numbers>

#include "kdvq/almostper.hpp"
#include "kdvq/greens.hpp"
#include "kdvq/io.hpp"
#include "kdvq/kdv.hpp"
#include "kdvq/random.hpp"
#include "kdvq/smoothing.hpp"
#include "kdvq/waves.hpp"

namespace kdvq::driver {

using nlohmann::json;
using std::numbers::pi;

namespace {

constexpr const char* kVersion = "0.1.0";

class StageTimer {
public:
    StageTimer(std::vector<StageRecord>& stages, std::string name)
        : stages_(stages), start_(std::chrono::steady_clock::now()) {
        record_.name = std::move(name);
    }
    void finish(bool ok = true, std::string detail = {}) {
        record_.ok = ok;
        record_.detail = std::move(detail);
        record_.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        stages_.push_back(record_);
    }

private:
    std::vector<StageRecord>& stages_;
    StageRecord record_;
    std::chrono::steady_clock::time_point start_;
};

FrequencyBasis basis_from_params(const json& p) {
    double a1 = 1.0, a2 = std::sqrt(2.0);
    if (p.contains("alpha")) {
        const auto& a = p.at("alpha");
        if (!a.is_array() || a.size() != 2)
            throw ConfigError("parameter 'alpha' must be [alpha1, alpha2]");
        a1 = a[0].get<double>();
        a2 = a[1].get<double>();
    }
    return FrequencyBasis(a1, a2, p.value("gamma", 2.0), p.value("c0", 0.0));
}

SolverConfig solver_config_from_params(const json& p, unsigned workers) {
    SolverConfig config;
    config.dt = p.value("dt", 1e-4);
    config.T = p.value("T", 0.01);
    config.N = p.value("N", 32);
    config.picard_tol = p.value("picard_tol", 1e-12);
    config.picard_max_iter = p.value("picard_max_iter", 60);
    config.nonlinear = p.value("nonlinear", true);
    config.workers = workers;
    const std::string scheme = p.value("scheme", "exponential-rk4");
    if (scheme == "exponential-rk4")
        config.scheme = Scheme::exponential_rk4;
    else if (scheme == "picard-fixed-point")
        config.scheme = Scheme::picard_fixed_point;
    else
        throw ConfigError("unknown scheme '" + scheme + "'");
    config.validate();
    return config;
}

/// "constant:c", "gaussian:amp[:width]", "random:sup:seed", "sine:amp:freq"
SampledPotential potential_from_spec(const std::string& spec, const UniformGrid& grid) {
    const auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            const std::size_t next = s.find(':', pos);
            parts.push_back(s.substr(pos, next == std::string::npos ? next : next - pos));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        return parts;
    };
    const auto parts = split(spec);
    const std::string kind = parts.empty() ? "" : parts[0];
    auto arg = [&](std::size_t i, double fallback) {
        return parts.size() > i && !parts[i].empty() ? std::stod(parts[i]) : fallback;
    };
    if (kind == "constant") return SampledPotential::constant(grid, arg(1, 0.0));
    if (kind == "gaussian") {
        const double amp = arg(1, 0.25), width = arg(2, 1.0);
        return SampledPotential::from_function(grid, [amp, width](double x) {
            return amp * std::exp(-(x * x) / (width * width));
        });
    }
    if (kind == "random")
        return random_bump_potential(grid, arg(1, 0.25), std::uint64_t(arg(2, 1.0)));
    if (kind == "sine") {
        const double amp = arg(1, 0.25), freq = arg(2, 4.0);
        return SampledPotential::from_function(grid, [amp, freq](double x) {
            return amp * std::sin(freq * x) * std::exp(-x * x);
        });
    }
    throw ConfigError("unknown potential spec '" + spec + "'");
}

UniformGrid grid_from_params(const json& p, double default_L = 8.0,
                             double default_h = 1.0 / 64.0) {
    const double L = p.value("L", default_L);
    const double h = p.value("h", default_h);
    std::size_t n = std::size_t(std::llround(2.0 * L / h)) + 1;
    if (n % 2 == 0) ++n;
    return UniformGrid(-L, L, n);
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- commands

void cmd_airy_evolve(const RunConfig& config, std::vector<StageRecord>& stages,
                     json& results) {
    const json& p = config.parameters;
    const FrequencyBasis basis = basis_from_params(p);
    const int N = p.value("N", 1001);
    const double t = p.value("t", 0.0);
    const std::string component = p.value("component", "both");
    const std::size_t samples = p.value("samples", std::size_t(2048));
    const double window = p.value("window", 2.0 * pi);

    StageTimer timer(stages, "airy-evolve");
    CoefficientField data = component == "both"
                                ? square_wave_both_components(basis, N)
                                : square_wave_coefficients(basis, component == "2" ? 2 : 1, N);
    const CoefficientField evolved = airy_propagate(data, t, basis);
    const SpatialSampling sampling = SpatialSampling::uniform(samples, -window, window);
    const auto values = evaluate_field(evolved, basis, sampling, config.workers);

    write_text_file(config.output_dir / "airy_samples.csv",
                    samples_to_csv(sampling.points, values));
    write_json(config.output_dir / "airy_coefficients.json", field_to_json(evolved));
    const auto profile = jump_profile(values, sampling);
    results["max_increment"] = profile.max_increment;
    results["t"] = t;
    timer.finish();
}

void cmd_talbot(const RunConfig& config, std::vector<StageRecord>& stages, json& results) {
    const json& p = config.parameters;
    const long long pp = p.value("p", 1ll);
    const long long qq = p.value("q", 2ll);
    const double alpha = p.value("alpha", 1.0);
    const int N = p.value("N", 2001);
    const std::size_t samples = p.value("samples", std::size_t(2048));
    const double window = p.value("window", 2.0 * pi);

    StageTimer timer(stages, "talbot");
    const SpatialSampling sampling = SpatialSampling::uniform(samples, -window, window);
    const TalbotResult result = talbot_reconstruct(pp, qq, alpha, N, sampling, config.workers);

    const std::string suffix = "_p" + std::to_string(pp) + "_q" + std::to_string(qq);
    write_text_file(config.output_dir / ("talbot_profile" + suffix + ".csv"),
                    samples_to_csv(sampling.points, result.samples));
    write_text_file(config.output_dir / ("talbot_direct" + suffix + ".csv"),
                    samples_to_csv(sampling.points, result.direct_samples));
    json weights = json::array();
    for (const auto& d : result.decomposition.weights)
        weights.push_back({{"re", d.real()}, {"im", d.imag()}});
    write_json(config.output_dir / ("talbot_weights" + suffix + ".json"),
               {{"p", pp},
                {"q", qq},
                {"shift_step", result.decomposition.shift_step},
                {"weights", weights}});

    double mismatch = 0.0;
    for (std::size_t i = 0; i < result.samples.size(); ++i)
        mismatch = std::max(mismatch,
                            std::abs(result.samples[i] - result.direct_samples[i]));
    results["max_profile_vs_direct"] = mismatch;
    results["weights_count"] = result.decomposition.weights.size();
    timer.finish();
}

Trajectory run_kdv_solve(const RunConfig& config, std::vector<StageRecord>& stages,
                         json& results) {
    const json& p = config.parameters;
    const FrequencyBasis basis = basis_from_params(p);
    const SolverConfig solver = solver_config_from_params(p, config.workers);
    const double epsilon = p.value("epsilon", 1.0);

    StageTimer timer(stages, "kdv-solve");
    CoefficientField data = square_wave_both_components(basis, solver.N);
    if (epsilon != 1.0) data.scale(epsilon);
    Trajectory traj = solve(data, solver, basis);

    const int stride = std::max(1, p.value("store_every", 10));
    json header = {{"config", solver_config_to_json(solver)},
                   {"basis", basis_to_json(basis)},
                   {"epsilon", epsilon},
                   {"store_every", stride},
                   {"times", json::array()}};
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        if (k % std::size_t(stride) != 0 && k + 1 != traj.states.size()) continue;
        char name[64];
        std::snprintf(name, sizeof(name), "state_%06zu.csv", k);
        write_text_file(config.output_dir / name, field_to_csv(traj.states[k]));
        header["times"].push_back({{"index", k}, {"t", traj.times[k]}, {"file", name}});
    }
    write_json(config.output_dir / "trajectory.json", header);

    const double theta = p.value("theta", 0.9);
    results["g_theta_initial"] = g_theta_norm(traj.states.front(), theta, basis);
    results["g_theta_final"] = g_theta_norm(traj.states.back(), theta, basis);
    results["theta"] = theta;
    timer.finish();
    return traj;
}

void cmd_smoothing_report(const RunConfig& config, std::vector<StageRecord>& stages,
                          json& results) {
    const json& p = config.parameters;
    const FrequencyBasis basis = basis_from_params(p);
    Trajectory traj = run_kdv_solve(config, stages, results);

    StageTimer timer(stages, "smoothing-report");
    const SmoothingReport report = smoothing_difference(traj, basis);
    write_text_file(config.output_dir / "smoothing.csv", smoothing_report_to_csv(report));
    write_json(config.output_dir / "smoothing_meta.json",
               {{"N", report.truncation},
                {"theta", p.value("theta", 0.9)},
                {"gamma", basis.gamma},
                {"gamma_theta_window", p.value("gamma_theta_window", 1.5)},
                {"margin", p.value("margin", 8.0)}});
    results["l1_difference_final"] = report.l1_difference.back();
    results["l1_linear"] = report.l1_linear.back();
    timer.finish();
}

void cmd_greens_verify(const RunConfig& config, std::vector<StageRecord>& stages,
                       json& results) {
    const json& p = config.parameters;
    const double kappa = p.value("kappa", 2.0);
    const double tol = p.value("tol", 1e-8);
    const UniformGrid grid = grid_from_params(p, 12.0);
    const SampledPotential pot = potential_from_spec(p.value("q", "constant:0"), grid);
    if (kappa * kappa < 4.0 * pot.sup_norm)
        throw HypothesisViolated("greens-verify: kappa^2 < 4 sup|q|");

    {
        StageTimer timer(stages, "greens-field");
        const GreensField field = greens_field(pot, kappa, tol);
        write_text_file(config.output_dir / "greens_field.csv", greens_field_to_csv(field));
        const GreensFieldAudit audit = audit_greens_field(field);
        results["bounds"] = {{"lower_slack", audit.lower_slack},
                             {"upper_slack", audit.upper_slack},
                             {"prime_slack", audit.prime_slack}};
        timer.finish(audit.lower_slack >= 0 && audit.upper_slack >= 0 &&
                     audit.prime_slack >= 0);
    }

    const TestFunction f = TestFunction::gaussian();
    json residuals = json::array();
    const struct {
        StaticIdentity kind;
        const char* name;
    } kinds[] = {{StaticIdentity::q_equation, "q-equation"},
                 {StaticIdentity::g_second, "g-second"},
                 {StaticIdentity::g_third, "g-third"},
                 {StaticIdentity::G_identity, "G-identity"}};
    for (const auto& [kind, name] : kinds) {
        StageTimer timer(stages, std::string("identity-") + name);
        const double res = verify_static_identity(kind, pot, kappa, tol, &f);
        // Order estimate from one h-halving.
        UniformGrid fine(grid.x_min, grid.x_max, 2 * grid.n - 1);
        SampledPotential pot_fine =
            potential_from_spec(p.value("q", "constant:0"), fine);
        const double res_fine = verify_static_identity(kind, pot_fine, kappa, tol, &f);
        const double order = (res > 0 && res_fine > 0) ? std::log2(res / res_fine) : 99.0;
        residuals.push_back({{"kind", name},
                             {"h", grid.h()},
                             {"residual", res},
                             {"order_estimate", order}});
        timer.finish();
    }
    write_json(config.output_dir / "identity_residuals.json", residuals);
    results["identities"] = residuals;
}

void cmd_gronwall_check(const RunConfig& config, std::vector<StageRecord>& stages,
                        json& results) {
    const json& p = config.parameters;
    const double kappa = p.value("kappa", 1.0);
    const double tol = p.value("tol", 1e-8);
    const double L = p.value("L", 12.0);
    const std::size_t x_nodes = p.value("x_nodes", std::size_t(513));
    const std::size_t t_slices = p.value("t_slices", std::size_t(65));
    const double t_end = p.value("t_end", 0.5);
    const double amp = p.value("amplitude", 0.2);
    const Weight w = Weight::sech(p.value("R", 1.0));
    auto q1_fn = [amp](double t, double x) { return amp * std::exp(-x * x) * std::cos(t); };
    auto q2_fn = [amp](double, double x) { return amp * std::exp(-x * x); };

    std::vector<double> times(t_slices);
    for (std::size_t k = 0; k < t_slices; ++k)
        times[k] = t_end * double(k) / double(t_slices - 1);

    // Residuals at the requested resolution and at half the spacing, so every
    // verifier reports an order estimate alongside its residual.
    auto residuals = [&](std::size_t nodes) {
        const UniformGrid grid(-L, L, nodes % 2 == 0 ? nodes + 1 : nodes);
        const ForcedPair pair1 = manufactured_pair(q1_fn, grid, times);
        const ForcedPair pair2 = manufactured_pair(q2_fn, grid, times);
        const SampledPotential p1(grid, pair1.q.back(), pair1.sup_norm);
        const SampledPotential p2(grid, pair2.q.back(), pair2.sup_norm);
        return std::array<double, 3>{
            verify_dynamic_identity(pair1, kappa, t_end / 2.0, DynamicIdentity::g_dt, tol),
            verify_gronwall_identity(pair1, pair2, kappa, w, t_end, tol),
            verify_qdiff_identity(p1, p2, kappa, w, tol)};
    };

    StageTimer coarse_timer(stages, "identities-at-h");
    const auto coarse = residuals(x_nodes);
    coarse_timer.finish();
    StageTimer fine_timer(stages, "identities-at-h/2");
    const auto fine = residuals(2 * x_nodes - 1);
    fine_timer.finish();

    const double h = 2.0 * L / double(x_nodes - 1);
    const char* names[3] = {"g-dt", "gronwall", "q-diff"};
    json report = json::array();
    for (int i = 0; i < 3; ++i) {
        const double order = (coarse[std::size_t(i)] > 0 && fine[std::size_t(i)] > 0)
                                 ? std::log2(coarse[std::size_t(i)] / fine[std::size_t(i)])
                                 : 99.0;
        report.push_back({{"kind", names[i]},
                          {"h", h},
                          {"residual", coarse[std::size_t(i)]},
                          {"order_estimate", order}});
    }
    results["identities"] = report;
    write_json(config.output_dir / "gronwall_check.json", report);
}

void cmd_almost_periods(const RunConfig& config, std::vector<StageRecord>& stages,
                        json& results) {
    const json& p = config.parameters;
    const FrequencyBasis basis = basis_from_params(p);
    AlmostPeriodQuery query;
    query.epsilon = p.value("epsilon", 1.0);
    query.x_min = p.value("x_min", -50.0);
    query.x_max = p.value("x_max", 50.0);
    query.samples = p.value("samples", std::size_t(20000));
    query.workers = config.workers;
    const double shift_step = p.value("shift_step", 0.01);
    const long long shift_count = p.value("shift_count", 10000ll);
    for (long long k = -shift_count; k <= shift_count; ++k)
        query.shift_grid.push_back(double(k) * shift_step);

    StageTimer timer(stages, "almost-periods");
    const double a1 = basis.alpha1, a2 = basis.alpha2;
    auto f = [a1, a2](double x) { return square_wave(a1 * x) + square_wave(a2 * x); };
    const ShiftScanReport report = almost_period_scan(f, query);
    json accepted = json::array();
    for (double ell : report.accepted) accepted.push_back(ell);
    write_json(config.output_dir / "almost_periods.json",
               {{"epsilon", query.epsilon},
                {"window", {query.x_min, query.x_max}},
                {"window_step", report.window_step},
                {"accepted", accepted},
                {"max_gap", report.max_gap}});
    results["accepted_count"] = report.accepted.size();
    results["max_gap"] = report.max_gap;
    timer.finish();
}

void cmd_stepanov_demo(const RunConfig& config, std::vector<StageRecord>& stages,
                       json& results) {
    const json& p = config.parameters;
    const double pu = p.value("p", 2.0);
    std::vector<double> shifts;
    for (int k = -64; k <= 64; ++k) shifts.push_back(double(k) * 0.125);

    StageTimer norms(stages, "stepanov-norms");
    results["sq_norm"] = stepanov_norm([](double x) { return square_wave(x); }, pu, shifts);
    results["sum_norm"] = stepanov_norm(
        [](double x) { return square_wave(x) + square_wave(std::sqrt(2.0) * x); }, pu, shifts);
    norms.finish();

    WavePacketSpec spec;
    spec.t0 = p.value("t0", 1e-6);
    spec.n_max = p.value("n_max", 6);
    spec.k_max = p.value("k_max", 2);

    StageTimer conc(stages, "concentration");
    const ConcentrationReport report = concentration_diagnostic(spec);
    json sums = json::array();
    for (double s : report.partial_sums) sums.push_back(s);
    json diags = json::array();
    for (double s : report.diagonal_partial_sums) diags.push_back(s);
    write_json(config.output_dir / "concentration.json",
               {{"partial_sums", sums},
                {"diagonal_partial_sums", diags},
                {"offdiagonal_total", report.offdiagonal_total},
                {"envelope_bound", report.envelope_bound},
                {"n_max", report.n_max},
                {"k_max", report.k_max},
                {"diagonal_lower_bound", 0.5},
                {"diagonal_lower_bound_note",
                 "calibrated threshold for the centered-packet inner products; "
                 "not a sharp constant"}});
    results["partial_sums"] = sums;
    conc.finish();

    // u(t0) samples on a window, with the weighted density.
    StageTimer samples(stages, "u-samples");
    const std::size_t n_samples = p.value("samples", std::size_t(4096));
    const EvolvedEnvelope env(spec.t0, 16.0 + 9.0);
    std::string csv = "x,re,im,weighted_density\n";
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double x = -8.0 + 16.0 * double(i) / double(n_samples - 1);
        std::complex<double> u(0.0, 0.0);
        for (int n = 1; n <= spec.n_max; ++n) {
            const double eta = std::pow(2.0, n);
            for (int k = -spec.k_max; k <= spec.k_max; ++k) {
                const double y = double(k) * eta;
                if (std::abs(y) > 16.0 + 9.0) continue;
                const std::complex<double> e = env(x - y);
                u += std::polar(1.0, eta * (x - y)) * e;
                u += std::polar(1.0, -eta * (x - y)) * e;
            }
        }
        csv += fmt17(x) + "," + fmt17(u.real()) + "," + fmt17(u.imag()) + "," +
               fmt17(std::norm(u) * std::exp(-x * x)) + "\n";
    }
    write_text_file(config.output_dir / "u_t0_samples.csv", csv);
    samples.finish();
}

void cmd_deift_pipeline(const RunConfig& config, std::vector<StageRecord>& stages,
                        json& results) {
    const json& p = config.parameters;
    const FrequencyBasis basis = basis_from_params(p);

    // Stage 1-2: nonlinear run from square-wave data plus the smoothing report.
    cmd_smoothing_report(config, stages, results);

    // Stage 3: epsilon = 1 almost periods of the initial data: only l = 0 survives.
    {
        StageTimer timer(stages, "scan-initial-data");
        AlmostPeriodQuery query;
        query.epsilon = p.value("epsilon_scan", 1.0);
        query.x_min = -50.0;
        query.x_max = 50.0;
        query.samples = p.value("scan_samples", std::size_t(20000));
        query.workers = config.workers;
        const double step = p.value("shift_step", 0.01);
        const long long count = p.value("shift_count", 10000ll);
        for (long long k = -count; k <= count; ++k) query.shift_grid.push_back(double(k) * step);
        const double a1 = basis.alpha1, a2 = basis.alpha2;
        auto f = [a1, a2](double x) { return square_wave(a1 * x) + square_wave(a2 * x); };
        const ShiftScanReport scan = almost_period_scan(f, query);
        results["initial_accepted_count"] = scan.accepted.size();
        results["initial_accepted_only_zero"] =
            scan.accepted.size() == 1 && scan.accepted.front() == 0.0;
        timer.finish(scan.accepted.size() == 1);
    }

    // Stage 4: linear part at an irrational-time slice: continuity profile and a
    // relatively dense accepted set.
    {
        StageTimer timer(stages, "scan-linear-slice");
        const int N = p.value("slice_N", 128);
        const double t = p.value("slice_t", 2.0 * pi / std::sqrt(2.0));
        const CoefficientField data = square_wave_both_components(basis, N);
        const CoefficientField evolved = airy_propagate(data, t, basis);

        // Dense lattice covering window + shifts, indexed exactly by the scan.
        const double step = p.value("shift_step", 0.01);
        const long long count = p.value("slice_shift_count", 25000ll);
        const double x_min = -20.0, x_max = 20.0;
        const std::size_t window_samples = p.value("slice_samples", std::size_t(8000));
        const double wstep = (x_max - x_min) / double(window_samples);
        const double lattice_step = wstep / 2.0;
        const double lo = x_min - double(count) * step - 1.0;
        const double hi = x_max + double(count) * step + 1.0;
        const std::size_t lattice_n = std::size_t((hi - lo) / lattice_step) + 2;
        const SpatialSampling lattice = SpatialSampling::uniform(lattice_n, lo,
                                                                 lo + lattice_step *
                                                                         double(lattice_n - 1));
        const auto values = evaluate_field(evolved, basis, lattice, config.workers);
        auto slice = [&](double x) {
            const double idx = (x - lo) / lattice_step;
            return values[std::size_t(std::llround(idx))];
        };

        AlmostPeriodQuery query;
        query.epsilon = p.value("epsilon_scan", 1.0);
        query.x_min = x_min;
        query.x_max = x_max;
        query.samples = window_samples;
        query.workers = config.workers;
        for (long long k = -count; k <= count; ++k) {
            const double ell = double(k) * step;
            // Keep candidates on the lattice exactly.
            if (std::abs(ell / lattice_step - std::llround(ell / lattice_step)) < 1e-9)
                query.shift_grid.push_back(ell);
        }
        const ShiftScanReport scan = almost_period_scan(slice, query);
        results["slice_accepted_count"] = scan.accepted.size();
        double gap = 0.0, last = -double(count) * step;
        for (double a : scan.accepted) {
            gap = std::max(gap, a - last);
            last = a;
        }
        gap = std::max(gap, double(count) * step - last);
        results["slice_L_eps"] = gap;
        results["slice_t"] = t;

        // Continuity profile: increments shrink under grid refinement.
        const SpatialSampling coarse = SpatialSampling::uniform(512, -pi, pi);
        const SpatialSampling fine = SpatialSampling::uniform(4096, -pi, pi);
        const auto coarse_vals = evaluate_field(evolved, basis, coarse, config.workers);
        const auto fine_vals = evaluate_field(evolved, basis, fine, config.workers);
        results["slice_increment_coarse"] = jump_profile(coarse_vals, coarse).max_increment;
        results["slice_increment_fine"] = jump_profile(fine_vals, fine).max_increment;
        timer.finish(!scan.accepted.empty());
    }
    write_json(config.output_dir / "deift_pipeline.json", results);
}

using CommandFn = void (*)(const RunConfig&, std::vector<StageRecord>&, json&);

const std::vector<std::pair<std::string, CommandFn>>& command_table() {
    static const std::vector<std::pair<std::string, CommandFn>> table = {
        {"airy-evolve", cmd_airy_evolve},
        {"talbot", cmd_talbot},
        {"kdv-solve",
         [](const RunConfig& c, std::vector<StageRecord>& s, json& r) {
             run_kdv_solve(c, s, r);
         }},
        {"smoothing-report", cmd_smoothing_report},
        {"greens-verify", cmd_greens_verify},
        {"gronwall-check", cmd_gronwall_check},
        {"almost-periods", cmd_almost_periods},
        {"stepanov-demo", cmd_stepanov_demo},
        {"deift-pipeline", cmd_deift_pipeline},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, fn] : command_table()) out.push_back(name);
        return out;
    }();
    return names;
}

nlohmann::json emit_manifest(const RunConfig& config, const std::vector<StageRecord>& stages,
                             const nlohmann::json& results, const nlohmann::json* error) {
    json stage_list = json::array();
    bool all_ok = true;
    for (const auto& s : stages) {
        stage_list.push_back(
            {{"name", s.name}, {"seconds", s.seconds}, {"ok", s.ok}, {"detail", s.detail}});
        all_ok = all_ok && s.ok;
    }
    const json echo = {{"command", config.command},
                       {"parameters", config.parameters},
                       {"seed", config.seed},
                       {"workers", config.workers}};
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(echo.dump())));
    json manifest = {{"command", config.command},
                     {"config", echo},
                     {"config_hash", std::string(hash)},
                     {"versions", {{"kdvq", kVersion}, {"compiler", __VERSION__}}},
                     {"stages", stage_list},
                     {"results", results},
                     {"ok", all_ok && error == nullptr}};
    if (error) manifest["error"] = *error;
    return manifest;
}

nlohmann::json strip_timings(nlohmann::json manifest) {
    if (manifest.contains("stages"))
        for (auto& s : manifest["stages"]) s.erase("seconds");
    manifest.erase("wall_time_s");
    return manifest;
}

RunResult run(const RunConfig& config) {
    std::vector<StageRecord> stages;
    json results = json::object();

    CommandFn fn = nullptr;
    for (const auto& [name, f] : command_table())
        if (name == config.command) fn = f;

    RunResult out;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (!fn) throw ConfigError("unknown command '" + config.command + "'");
        if (config.output_dir.empty()) throw ConfigError("output_dir is required");
        std::filesystem::create_directories(config.output_dir);
        if (!config.parameters.is_object())
            throw ConfigError("parameters must be a JSON object");
        fn(config, stages, results);
        out.manifest = emit_manifest(config, stages, results, nullptr);
        out.exit_code = out.manifest["ok"].get<bool>() ? 0 : 1;
    } catch (const Error& e) {
        const json error = {{"type", e.code()},
                            {"message", e.what()},
                            {"stage", stages.empty() ? "setup" : stages.back().name}};
        if (!config.output_dir.empty()) {
            std::filesystem::create_directories(config.output_dir);
            write_json(config.output_dir / "error.json", error);
        }
        out.manifest = emit_manifest(config, stages, results, &error);
        out.exit_code = 2;
    }
    out.manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!config.output_dir.empty() && std::filesystem::exists(config.output_dir))
        write_json(config.output_dir / "manifest.json", out.manifest);
    return out;
}

}  // namespace kdvq::driver
