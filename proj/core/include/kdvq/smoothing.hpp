#pragma once

#include <array>
#include <vector>

#include "kdvq/kdv.hpp"

namespace kdvq {

/** Per-time l1 distance between the trajectory and the Airy flow of its own
 *  initial data; l1_linear is the (constant-in-time) l1 norm of the propagated
 *  initial data, kept alongside for contrast. */
struct SmoothingReport {
    std::vector<double> times;
    std::vector<double> l1_difference;
    std::vector<double> l1_linear;
    int truncation = 0;
};

SmoothingReport smoothing_difference(const Trajectory& traj, const FrequencyBasis& basis);

/// 3 [alpha.(xi_j + xi_k)] [alpha.(xi_j + xi_l)] [alpha.(xi_k + xi_l)].
double resonance_phase(const std::array<FrequencyIndex, 3>& xi, const FrequencyBasis& basis);

enum class RegionCase { case1, case2 };

struct RegionClassification {
    RegionCase region = RegionCase::case1;
    bool swapped = false;  // inputs exchanged so that |alpha.xi1| >= |alpha.xi2|
};

/** Classifies a decomposition (xi1, xi2).  After normalizing so that
 *  |alpha.xi1| >= |alpha.xi2|, the pair is case2 when
 *  |xi1_1| > margin * (|xi1_2| + |xi2_1| + |xi2_2|), else case1. */
RegionClassification region_classifier(const FrequencyIndex& xi1, const FrequencyIndex& xi2,
                                       const FrequencyBasis& basis, double margin);

/** Normal-form boundary term at time s, acting on the interaction-representation
 *  field u(s): xi -> sum over case2 decompositions of
 *  -e^{-3 i s (alpha.xi)(alpha.xi1)(alpha.xi2)} u_xi1 u_xi2 / [(alpha.xi1)(alpha.xi2)]. */
CoefficientField boundary_term(const CoefficientField& u_state, double s,
                               const FrequencyBasis& basis, double margin);

/** Consistency audit of the normal-form split: the case2 part of u_xi(t) - u_xi(0),
 *  accumulated by time quadrature along the trajectory, must equal
 *  B(t) - B(0) plus the time integral of the cubic remainder.  Returns the l1
 *  norm of the mismatch (quadrature-limited). */
double normal_form_audit(const Trajectory& traj, const FrequencyBasis& basis, double margin);

}  // namespace kdvq
