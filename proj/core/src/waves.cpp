#include "kdvq/waves.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "kdvq/parallel.hpp"

namespace kdvq {

using std::numbers::pi;

SpatialSampling::SpatialSampling(std::vector<double> pts, double a, double b)
    : points(std::move(pts)), x_min(a), x_max(b) {
    if (!(b > a)) throw ConfigError("SpatialSampling: empty window");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] < x_min || points[i] > x_max)
            throw ConfigError("SpatialSampling: point outside window");
        if (i > 0 && !(points[i] > points[i - 1]))
            throw ConfigError("SpatialSampling: points must be strictly increasing");
    }
}

SpatialSampling SpatialSampling::uniform(std::size_t n, double a, double b) {
    if (n < 2) throw ConfigError("SpatialSampling: need at least 2 points");
    std::vector<double> pts(n);
    const double h = (b - a) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) pts[i] = a + double(i) * h;
    return SpatialSampling(std::move(pts), a, b);
}

CoefficientField square_wave_coefficients(const FrequencyBasis& basis, int component, int N) {
    (void)basis;
    if (component != 1 && component != 2)
        throw ConfigError("square_wave_coefficients: component must be 1 or 2");
    if (N < 1) throw ConfigError("square_wave_coefficients: N must be >= 1");
    CoefficientField field(N);
    for (int k = 1; k <= N; k += 2) {
        const Complex a = 2.0 / (pi * Complex(0.0, 1.0) * double(k));
        if (component == 1)
            field.set({k, 0}, a);
        else
            field.set({0, k}, a);
    }
    return field;
}

CoefficientField square_wave_both_components(const FrequencyBasis& basis, int N) {
    CoefficientField field = square_wave_coefficients(basis, 1, N);
    square_wave_coefficients(basis, 2, N).for_each([&](const FrequencyIndex& xi, Complex a) {
        if (xi.is_canonical()) field.add(xi, a);
    });
    return field;
}

CoefficientField airy_propagate(const CoefficientField& field, double t,
                                const FrequencyBasis& basis) {
    CoefficientField out(field.truncation_radius());
    for (const auto& [xi, a] : field.canonical_entries()) {
        const double w = dot_frequency(basis, xi);
        out.set(xi, a * std::polar(1.0, t * w * w * w));
    }
    return out;
}

std::vector<double> evaluate_field(const CoefficientField& field, const FrequencyBasis& basis,
                                   const SpatialSampling& sampling, unsigned workers) {
    // Flatten once so every sample point sums the modes in the same order.
    struct Mode {
        double w;
        Complex a;
    };
    std::vector<Mode> modes;
    modes.reserve(field.size());
    double total_mag = 0.0;
    field.for_each([&](const FrequencyIndex& xi, Complex a) {
        modes.push_back({dot_frequency(basis, xi), a});
        total_mag += std::abs(a);
    });

    const double audit = 1e-9 * total_mag;
    std::vector<double> values(sampling.points.size(), 0.0);
    std::vector<double> residues(sampling.points.size(), 0.0);
    parallel_for(sampling.points.size(), workers, [&](std::size_t i) {
        const double x = sampling.points[i];
        Complex acc(0.0, 0.0);
        for (const Mode& m : modes) acc += m.a * std::polar(1.0, m.w * x);
        values[i] = acc.real();
        residues[i] = std::abs(acc.imag());
    });
    for (std::size_t i = 0; i < residues.size(); ++i)
        if (residues[i] > audit)
            throw SymmetryViolation("evaluate_field: imaginary residue " +
                                    std::to_string(residues[i]) + " at sample " +
                                    std::to_string(i));
    return values;
}

TalbotResult talbot_reconstruct(long long p, long long q, double alpha_scalar, int N,
                                const SpatialSampling& sampling, unsigned workers) {
    if (q < 1 || std::gcd(std::llabs(p), q) != 1)
        throw NotCoprime("talbot_reconstruct: need coprime p/q with q >= 1");
    if (!(alpha_scalar > 0.0)) throw ConfigError("talbot_reconstruct: alpha must be positive");
    if (N < 1) throw ConfigError("talbot_reconstruct: N must be >= 1");

    TalbotResult result;
    result.decomposition.p = p;
    result.decomposition.q = q;
    result.decomposition.shift_step = 2.0 * pi / (double(q) * alpha_scalar);
    // d_k = (1/q) sum_{r mod q} e^{2 pi i p r^3 / q} e^{-2 pi i k r / q}
    result.decomposition.weights.resize(std::size_t(q));
    const long long pm = ((p % q) + q) % q;
    for (long long k = 0; k < q; ++k) {
        Complex acc(0.0, 0.0);
        for (long long r = 0; r < q; ++r) {
            const long long cubic = ((r * r) % q) * r % q;
            const long long num = ((pm * cubic - k * r) % q + q) % q;
            acc += std::polar(1.0, 2.0 * pi * double(num) / double(q));
        }
        result.decomposition.weights[std::size_t(k)] = acc / double(q);
    }

    const auto& d = result.decomposition.weights;
    double weight_norm = 0.0;
    for (const auto& w : d) weight_norm += std::norm(w);
    if (std::abs(weight_norm - 1.0) > 1e-10)
        throw ConfigError("talbot_reconstruct: multiplier transform lost unitarity");

    const double t = 2.0 * pi * double(p) /
                     (double(q) * alpha_scalar * alpha_scalar * alpha_scalar);

    result.samples.resize(sampling.points.size());
    result.direct_samples.resize(sampling.points.size());
    parallel_for(sampling.points.size(), workers, [&](std::size_t i) {
        const double x = sampling.points[i];
        Complex oracle(0.0, 0.0);
        for (long long k = 0; k < q; ++k)
            oracle += d[std::size_t(k)] *
                      square_wave(alpha_scalar * x + 2.0 * pi * double(k) / double(q));
        result.samples[i] = oracle.real();

        Complex direct(0.0, 0.0);
        for (int xi = -N; xi <= N; ++xi) {
            if (xi % 2 == 0) continue;
            const double w = alpha_scalar * double(xi);
            const Complex a = 2.0 / (pi * Complex(0.0, 1.0) * double(xi));
            direct += a * std::polar(1.0, w * x + w * w * w * t);
        }
        result.direct_samples[i] = direct.real();
    });
    return result;
}

JumpProfile jump_profile(const std::vector<double>& samples, const SpatialSampling& sampling) {
    if (samples.size() < 2 || samples.size() != sampling.points.size())
        throw ConfigError("jump_profile: need >= 2 samples matching the sampling");
    JumpProfile profile;
    profile.increments.resize(samples.size() - 1);
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        profile.increments[i] = std::abs(samples[i + 1] - samples[i]);
        profile.max_increment = std::max(profile.max_increment, profile.increments[i]);
    }
    return profile;
}

}  // namespace kdvq
