#pragma once

#include <cmath>
#include <cstdint>

#include "kdvq/greens.hpp"

namespace kdvq {

/// splitmix64: tiny deterministic generator, identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    double uniform(double a, double b) {
        const double u = double(next() >> 11) * 0x1.0p-53;  // [0, 1)
        return a + (b - a) * u;
    }

private:
    std::uint64_t state_;
};

/// Sum of a few random Gaussian bumps, rescaled so that sup|q| == sup.
inline SampledPotential random_bump_potential(const UniformGrid& grid, double sup,
                                              std::uint64_t seed) {
    Rng rng(seed);
    const int bumps = 3 + int(rng.next() % 4);
    std::vector<double> centers(bumps), widths(bumps), amps(bumps);
    for (int b = 0; b < bumps; ++b) {
        centers[b] = rng.uniform(grid.x_min * 0.6, grid.x_max * 0.6);
        widths[b] = rng.uniform(0.6, 2.0);
        amps[b] = rng.uniform(-1.0, 1.0);
    }
    std::vector<double> v(grid.n, 0.0);
    double peak = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        double q = 0.0;
        for (int b = 0; b < bumps; ++b) {
            const double u = (x - centers[b]) / widths[b];
            q += amps[b] * std::exp(-u * u);
        }
        v[i] = q;
        peak = std::max(peak, std::abs(q));
    }
    if (peak > 0.0)
        for (double& q : v) q *= sup / peak;
    return SampledPotential(grid, std::move(v), sup);
}

}  // namespace kdvq
