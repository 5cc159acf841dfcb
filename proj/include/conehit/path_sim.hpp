#pragma once

#include <string>
#include <utility>

#include "conehit/asymptotics.hpp"

namespace conehit {

enum class SimMode { crude, tilted };

struct SimConfig {
    double u = 1.0;
    double horizon_factor = 3.0; // simulate t in [0, horizon_factor * t0 * u]
    int n_steps_per_unit = 200;  // grid resolution, steps per unit of time
    long n_paths = 10000;
    std::uint64_t seed = 1;
    SimMode mode = SimMode::crude;
    int n_workers = 1;
};

struct SimEstimate {
    double p_hat = 0.0;
    double stderr_ = 0.0;
    long n_hits = 0;
    long n_paths = 0;
    /// First passage times of hitting paths, in path order, with their
    /// likelihood weights (1 in crude mode) and the ids of those paths.
    std::vector<double> taus;
    std::vector<double> weights;
    std::vector<long> hit_ids;
    double ess = 0.0; // effective sample size of the hit weights
    double ks_vs_limit = std::numeric_limits<double>::quiet_NaN();
};

/// Estimate P(u) = P{exists t >= 0: X(t) - mu t > alpha u} on a time grid.
/// Tilted mode shifts the drift by b_tilde / t0 for the whole run and
/// corrects with the exact likelihood ratio at the (stopped) hitting time.
/// Deterministic per seed for any worker count.
SimEstimate simulate_P(const ProblemSpec& spec, const SimConfig& cfg);

struct ValidationRow {
    double u = 0.0;
    double p_hat = 0.0;
    double stderr_ = 0.0;
    double predicted = 0.0;
    double band_lo = 0.0;
    double band_hi = 0.0;
    double ratio = 0.0;
};

/// Simulated P(u) against the asymptotic evaluator over a u-ladder.
std::vector<ValidationRow> validate_theorem1(const ProblemSpec& spec,
                                             const AsymptoticResult& ar,
                                             const std::vector<double>& u_ladder,
                                             SimConfig base);

/// Weighted Kolmogorov-Smirnov distance between standardized conditional
/// passage times and the limit law; returns (ks, n_hits).
std::pair<double, long> validate_theorem2(const ProblemSpec& spec,
                                          const PassageTimeLaw& law,
                                          const SimConfig& cfg);

/// KS distance of a weighted sample against a CDF evaluated through `cdf`.
double weighted_ks(std::vector<double> xs, std::vector<double> ws,
                   const std::function<double(double)>& cdf);

/// Raw per-hit sample dump: path_id, hit flag, tau, log likelihood ratio.
void write_samples_csv(const std::string& path, const SimEstimate& est);

} // namespace conehit
