#pragma once

#include <cstdint>

#include "conehit/g_analysis.hpp"

namespace conehit {

/// Inputs of the constant estimator. The integrand is already standardized:
/// everything is expressed through (sigma_II, mu_I, a) with
/// a = Sigma_II^{-1} b_I / t0 > 0 componentwise.
struct PickandsInput {
    PDMatrix sigma_II;
    Vector mu_I;
    Vector a;
    double T = 8.0;
    int n_steps = 256;
    long n_paths = 10000;
    std::uint64_t seed = 1;
    int n_workers = 1;
    /// Include the grid point t = 0 (the full running-supremum functional).
    /// Disable to get the single-time-point estimator used by the
    /// closed-form identity check.
    bool include_origin = true;
};

struct PickandsEstimate {
    double HT = 0.0;
    double stderr_ = 0.0;
    double T = 0.0;
    double HT_over_T = 0.0;
    double HT_over_T_stderr = 0.0;
    double lower_bound = 0.0;
    long n_effective = 0;
    /// Filled by estimate_H: values of HT/T along the T-ladder.
    std::vector<double> ladder_T;
    std::vector<double> ladder_value;
    std::vector<double> ladder_stderr;
};

/// Exact value of  integral e^{a.x} 1{exists k: x < points_k} dx  over R^m:
/// an exponential change of variables turns it into the volume of a union of
/// origin-anchored boxes, computed exactly.
double weighted_lower_set_integral(const std::vector<Vector>& points,
                                   const Vector& a);

/// Exact volume of the union of boxes [0, p] over the given corner points;
/// coordinates must be nonnegative.
double hypervolume_origin(std::vector<std::vector<double>> points);

/// Finite-horizon constant by path simulation on the grid k*T/n_steps.
/// The full running-supremum functional (include_origin) uses a
/// first-crossing decomposition with an exponential change of measure per
/// term, which keeps every contribution bounded; the plain average of
/// weighted_lower_set_integral saturates near (log n_paths)/a at the
/// critical weights produced by the analysis. The single-time variant
/// averages weighted_lower_set_integral directly. Deterministic per seed for
/// any worker count.
PickandsEstimate estimate_HT(const PickandsInput& inp);

/// Run the T-ladder on coupled paths (each T is a prefix of the longest
/// simulation) and return the estimate at the largest T together with the
/// observed trend of HT/T, which must be nonincreasing up to MC error.
PickandsEstimate estimate_H(const PickandsInput& base,
                            const std::vector<double>& T_ladder);

/// Closed-form positive lower bound for the limiting constant,
/// mu_I . a / (16 prod a_i) in standardized coordinates.
double lower_bound_H(const GAnalysis& analysis);
double lower_bound_H(const PickandsInput& inp);

/// Standardized estimator input derived from an analysis record.
PickandsInput pickands_input_from(const GAnalysis& analysis, double T,
                                  int n_steps, long n_paths,
                                  std::uint64_t seed);

/// Closed-form mean of the single-time-point estimator, 1 / prod a_i.
double single_time_value(const PickandsInput& inp);

} // namespace conehit
