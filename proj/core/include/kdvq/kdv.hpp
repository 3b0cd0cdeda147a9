#pragma once

#include <vector>

#include "kdvq/lattice.hpp"

namespace kdvq {

enum class Scheme { exponential_rk4, picard_fixed_point };

struct SolverConfig {
    double dt = 1e-4;
    double T = 0.01;  // negative T integrates backwards with -dt
    int N = 32;
    double picard_tol = 1e-12;
    int picard_max_iter = 60;
    Scheme scheme = Scheme::exponential_rk4;
    bool nonlinear = true;
    unsigned workers = 1;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("SolverConfig: dt must be positive");
        if (N < 1) throw ConfigError("SolverConfig: N must be >= 1");
        if (!(picard_tol > 0.0)) throw ConfigError("SolverConfig: picard_tol must be positive");
        if (picard_max_iter < 1) throw ConfigError("SolverConfig: picard_max_iter must be >= 1");
    }
};

/// Time-stamped coefficient states produced by solve(); times start at 0.
struct Trajectory {
    std::vector<double> times;
    std::vector<CoefficientField> states;
    SolverConfig config;
    FrequencyBasis basis;
};

/** Quadratic interaction: xi -> 3 i (alpha.xi) sum_{xi1 + xi2 = xi} f_xi1 f_xi2,
 *  summed over decompositions with both halves nonzero and inside the box
 *  max(|.|) <= N; output truncated back to radius N. */
CoefficientField nonlinear_term(const CoefficientField& field, const FrequencyBasis& basis,
                                int N, unsigned workers = 1);

/// Advances one step of size config.dt from state at time t.
CoefficientField step(const CoefficientField& state, double t, const SolverConfig& config,
                      const FrequencyBasis& basis);

/// Integrates from t = 0 to config.T, recording every step.
Trajectory solve(const CoefficientField& initial, const SolverConfig& config,
                 const FrequencyBasis& basis);

}  // namespace kdvq
