#pragma once

#include <cstddef>
#include <vector>

#include "kdvq/errors.hpp"

namespace kdvq {

/** Uniform 1-D grid on [x_min, x_max] with an odd number of nodes, so that
 *  composite Simpson weights are well defined. */
struct UniformGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t n = 0;  // node count, odd, >= 3

    UniformGrid() = default;
    UniformGrid(double a, double b, std::size_t nodes) : x_min(a), x_max(b), n(nodes) {
        if (!(b > a)) throw ConfigError("UniformGrid: empty interval");
        if (nodes < 3 || nodes % 2 == 0)
            throw ConfigError("UniformGrid: node count must be odd and >= 3");
    }

    double h() const { return (x_max - x_min) / double(n - 1); }
    double x(std::size_t i) const { return x_min + double(i) * h(); }
    bool operator==(const UniformGrid&) const = default;
};

/// Composite Simpson weights h/3 * {1,4,2,...,4,1}.
inline std::vector<double> simpson_weights(const UniformGrid& g) {
    std::vector<double> w(g.n);
    const double h3 = g.h() / 3.0;
    w.front() = h3;
    w.back() = h3;
    for (std::size_t i = 1; i + 1 < g.n; ++i) w[i] = (i % 2 == 1) ? 4.0 * h3 : 2.0 * h3;
    return w;
}

template <typename Fn>
double simpson_integrate(const UniformGrid& g, Fn&& f) {
    const auto w = simpson_weights(g);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) acc += w[i] * f(g.x(i));
    return acc;
}

/// 4th-order central first derivative of grid samples; the outermost two
/// nodes on each side are filled with one-sided 4th-order stencils.
std::vector<double> derivative1_o4(const std::vector<double>& f, double h);

/// 4th-order central second derivative (one-sided at the edges).
std::vector<double> derivative2_o4(const std::vector<double>& f, double h);

/// 6th-order central first derivative of a callable sampled off-grid as needed.
template <typename Fn>
double derivative1_o6(Fn&& f, double x, double h) {
    return (-f(x - 3 * h) + 9 * f(x - 2 * h) - 45 * f(x - h) + 45 * f(x + h) -
            9 * f(x + 2 * h) + f(x + 3 * h)) /
           (60.0 * h);
}

/// 6th-order central third derivative of a callable.
template <typename Fn>
double derivative3_o6(Fn&& f, double x, double h) {
    // 9-point antisymmetric stencil, offsets -4..4.
    const double c4 = 7.0 / 240.0, c3 = -3.0 / 10.0, c2 = 169.0 / 120.0, c1 = -61.0 / 30.0;
    return (c4 * (f(x + 4 * h) - f(x - 4 * h)) + c3 * (f(x + 3 * h) - f(x - 3 * h)) +
            c2 * (f(x + 2 * h) - f(x - 2 * h)) + c1 * (f(x + h) - f(x - h))) /
           (h * h * h);
}

}  // namespace kdvq
