#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "kdvq/greens.hpp"
#include "kdvq/kdv.hpp"
#include "kdvq/smoothing.hpp"

namespace kdvq {

/// 17-significant-digit decimal form; round-trips the double exactly.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

/// CoefficientField -> JSON array of {xi1, xi2, re, im}; canonical half only,
/// the mirror being implied by Hermitian symmetry.
nlohmann::json field_to_json(const CoefficientField& field);

/// Inverse of field_to_json; accepts either or both members of a +-xi pair and
/// rejects inconsistent mirrors.
CoefficientField field_from_json(const nlohmann::json& records, int truncation_radius);

std::string field_to_csv(const CoefficientField& field);

std::string samples_to_csv(const std::vector<double>& xs, const std::vector<double>& values);

std::string greens_field_to_csv(const GreensField& field);

std::string smoothing_report_to_csv(const SmoothingReport& report);

nlohmann::json solver_config_to_json(const SolverConfig& config);
nlohmann::json basis_to_json(const FrequencyBasis& basis);
FrequencyBasis basis_from_json(const nlohmann::json& j);

/// FNV-1a 64-bit over a string; used for config hashes in manifests.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace kdvq
