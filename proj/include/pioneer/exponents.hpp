#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pioneer/lattice.hpp"
#include "pioneer/rng.hpp"

namespace pioneer {

enum class ExponentKind { intersection, disconnection, generalized };

// xi(k, lambda), xi(k) and xi_c(k); exact closed forms, planar.
double closed_form_exponent(ExponentKind kind, double k, double lambda = 0.0, double c = 0.0);

enum class EventKind { nonintersection, disconnection, generalized };
std::string to_string(EventKind k);
EventKind parse_event_kind(const std::string& s);

struct EventParams {
    EventKind kind = EventKind::disconnection;
    int k = 1;              // walks (first packet)
    int l = 0;              // second packet, non-intersection only
    int dim = 2;
    double c = 0.0;         // soup intensity, generalized only
    int inner_radius = 4;   // walks start on the band [r0 - 1, r0]; the inner set is dist < r0 - 1
    void validate() const;
    std::string describe() const;  // "k=1;l=2;d=3;c=0"
};

struct CurveLevel {
    int j = 0;                     // outer radius 2^j
    std::uint64_t trials = 0;      // attempts at this level
    std::uint64_t successes = 0;   // survivors among them
    double p = 0.0;                // estimate of the unconditional survival probability
    double stderr_p = 0.0;
};

struct ProbabilityCurve {
    EventParams params;
    std::string method;            // "direct" or "split"
    std::uint64_t seed = 0;
    std::vector<CurveLevel> levels;
    bool truncated = false;        // budget ran out; levels stop early
    std::uint64_t steps = 0;       // walk steps spent
    const CurveLevel& at(int j) const;
    std::string to_csv() const;    // header plus one row per level
};

// Direct Monte Carlo: each trial runs its walks level by level and stops at
// the first failed level. step_budget caps the total walk steps (0: none).
ProbabilityCurve estimate_crossing_prob(const EventParams& params, int j0, int j1, std::uint64_t trials, std::uint64_t seed,
                                        std::uint64_t step_budget = 0);

// Fixed-effort splitting: population resampled to M before each extension.
ProbabilityCurve split_estimate(const EventParams& params, int j0, int j1, std::uint64_t population, std::uint64_t seed);

enum class FitMethod { regression, ratio };

struct ExponentEstimate {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double intercept = 0.0;
    int j0 = 0, j1 = 0;
    FitMethod method = FitMethod::regression;
    int dof = 0;  // residual degrees of freedom
    std::string to_csv_row(const ProbabilityCurve& curve) const;
};

// Slope of -log2 p_j against j over [j0, j1]. Passing j0 = j1 = -1 drops the
// two smallest levels of the curve and fits the rest.
ExponentEstimate fit_exponent(const ProbabilityCurve& curve, int j0 = -1, int j1 = -1, FitMethod method = FitMethod::regression);

// Two-sided 95% Student t quantile.
double t_quantile_975(int dof);

}  // namespace pioneer
