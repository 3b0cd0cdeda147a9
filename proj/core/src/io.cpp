#include "kdvq/io.hpp"

#include <cmath>

namespace kdvq {

nlohmann::json field_to_json(const CoefficientField& field) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [xi, a] : field.canonical_entries()) {
        arr.push_back({{"xi1", xi.xi1}, {"xi2", xi.xi2}, {"re", a.real()}, {"im", a.imag()}});
    }
    return arr;
}

CoefficientField field_from_json(const nlohmann::json& records, int truncation_radius) {
    CoefficientField field(truncation_radius);
    for (const auto& rec : records) {
        const FrequencyIndex xi{rec.at("xi1").get<std::int32_t>(),
                                rec.at("xi2").get<std::int32_t>()};
        const Complex a(rec.at("re").get<double>(), rec.at("im").get<double>());
        if (field.contains(xi)) {
            const Complex existing = field.at(xi);
            if (std::abs(existing - a) > 1e-12 * (1.0 + std::abs(a)))
                throw SymmetryViolation("field_from_json: inconsistent mirror at (" +
                                        std::to_string(xi.xi1) + "," + std::to_string(xi.xi2) +
                                        ")");
            continue;
        }
        field.set(xi, a);
    }
    return field;
}

std::string field_to_csv(const CoefficientField& field) {
    std::string csv = "xi1,xi2,re,im\n";
    for (const auto& [xi, a] : field.canonical_entries()) {
        csv += std::to_string(xi.xi1) + "," + std::to_string(xi.xi2) + "," + fmt17(a.real()) +
               "," + fmt17(a.imag()) + "\n";
    }
    return csv;
}

std::string samples_to_csv(const std::vector<double>& xs, const std::vector<double>& values) {
    if (xs.size() != values.size()) throw ConfigError("samples_to_csv: size mismatch");
    std::string csv = "x,value\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        csv += fmt17(xs[i]) + "," + fmt17(values[i]) + "\n";
    return csv;
}

std::string greens_field_to_csv(const GreensField& field) {
    std::string csv = "x,g,g_prime,tail_bound\n";
    for (std::size_t i = 0; i < field.grid.n; ++i)
        csv += fmt17(field.grid.x(i)) + "," + fmt17(field.g[i]) + "," +
               fmt17(field.g_prime[i]) + "," + fmt17(field.tail_bound[i]) + "\n";
    return csv;
}

std::string smoothing_report_to_csv(const SmoothingReport& report) {
    std::string csv = "t,l1_difference,l1_linear\n";
    for (std::size_t i = 0; i < report.times.size(); ++i)
        csv += fmt17(report.times[i]) + "," + fmt17(report.l1_difference[i]) + "," +
               fmt17(report.l1_linear[i]) + "\n";
    return csv;
}

nlohmann::json solver_config_to_json(const SolverConfig& config) {
    return {{"dt", config.dt},
            {"T", config.T},
            {"N", config.N},
            {"picard_tol", config.picard_tol},
            {"picard_max_iter", config.picard_max_iter},
            {"scheme", config.scheme == Scheme::exponential_rk4 ? "exponential-rk4"
                                                                : "picard-fixed-point"},
            {"nonlinear", config.nonlinear},
            {"workers", config.workers}};
}

nlohmann::json basis_to_json(const FrequencyBasis& basis) {
    return {{"alpha1", basis.alpha1},
            {"alpha2", basis.alpha2},
            {"gamma", basis.gamma},
            {"c0", basis.c0}};
}

FrequencyBasis basis_from_json(const nlohmann::json& j) {
    return FrequencyBasis(j.at("alpha1").get<double>(), j.at("alpha2").get<double>(),
                          j.value("gamma", 2.0), j.value("c0", 0.0));
}

}  // namespace kdvq
