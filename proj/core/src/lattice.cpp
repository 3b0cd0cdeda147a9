#include "kdvq/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kdvq {

FrequencyBasis FrequencyBasis::standard() {
    return FrequencyBasis(1.0, std::sqrt(2.0), 2.0);
}

Complex CoefficientField::at(const FrequencyIndex& xi) const {
    if (xi.is_canonical()) {
        auto it = entries_.find(xi);
        return it == entries_.end() ? Complex(0.0, 0.0) : it->second;
    }
    auto it = entries_.find(-xi);
    return it == entries_.end() ? Complex(0.0, 0.0) : std::conj(it->second);
}

bool CoefficientField::contains(const FrequencyIndex& xi) const {
    return entries_.count(xi.is_canonical() ? xi : -xi) > 0;
}

void CoefficientField::set(const FrequencyIndex& xi, Complex a) {
    if (xi.is_zero())
        throw ConfigError("CoefficientField: the zero index carries no mode");
    if (std::max(std::abs(xi.xi1), std::abs(xi.xi2)) > radius_)
        throw ConfigError("CoefficientField: index outside truncation radius N=" +
                          std::to_string(radius_));
    if (xi.is_canonical())
        entries_[xi] = a;
    else
        entries_[-xi] = std::conj(a);
}

void CoefficientField::add(const FrequencyIndex& xi, Complex a) {
    set(xi, at(xi) + a);
}

double CoefficientField::symmetry_audit() const {
    double worst = 0.0;
    for (const auto& [xi, a] : entries_)
        worst = std::max(worst, std::abs(at(-xi) - std::conj(a)));
    return worst;
}

void CoefficientField::scale(double c) {
    for (auto& [xi, a] : entries_) a *= c;
}

DiophantineReport verify_diophantine(const FrequencyBasis& basis, int radius) {
    if (radius < 1) throw ConfigError("verify_diophantine: radius must be >= 1");
    DiophantineReport report;
    report.radius = radius;
    bool first = true;
    for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
            if (i == 0 && j == 0) continue;
            const FrequencyIndex xi{i, j};
            const double dot = dot_frequency(basis, xi);
            if (dot == 0.0)
                throw RationalDependence("alpha.xi == 0 at xi=(" + std::to_string(i) + "," +
                                         std::to_string(j) + ")");
            const double norm = std::hypot(double(i), double(j));
            const double product = std::abs(dot) * std::pow(norm, basis.gamma);
            if (first || product < report.min_product) {
                report.min_product = product;
                report.witness = xi;
                first = false;
            }
        }
    }
    return report;
}

namespace {
double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }
}  // namespace

double g_theta_norm(const CoefficientField& field, double theta, const FrequencyBasis& basis) {
    double sum = 0.0;
    field.for_each([&](const FrequencyIndex& xi, Complex a) {
        const double dot = dot_frequency(basis, xi);
        if (dot == 0.0)
            throw RationalDependence("g_theta_norm: alpha.xi == 0 for a stored mode");
        const double term = std::pow(japanese_bracket(double(xi.xi1)), theta) *
                            std::pow(japanese_bracket(double(xi.xi2)), theta) * std::abs(a) /
                            std::sqrt(std::abs(dot));
        sum += term * term;
    });
    return std::sqrt(sum);
}

std::pair<double, double> l1_and_weak_l1(const CoefficientField& field) {
    std::vector<double> mags;
    mags.reserve(field.size());
    double l1 = 0.0;
    field.for_each([&](const FrequencyIndex&, Complex a) {
        const double m = std::abs(a);
        l1 += m;
        mags.push_back(m);
    });
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double weak = 0.0;
    for (std::size_t k = 0; k < mags.size(); ++k)
        weak = std::max(weak, double(k + 1) * mags[k]);
    return {l1, weak};
}

}  // namespace kdvq
