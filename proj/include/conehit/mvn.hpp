#pragma once

#include <cstdint>

#include "conehit/g_analysis.hpp"

namespace conehit {

struct GaussianVec {
    Vector mean;
    PDMatrix cov;
    bool regularized = false; // a ridge was added to make the Cholesky succeed

    int dim() const { return cov.dim(); }
};

/// Build a Gaussian vector; when `regularize` is set and the covariance is
/// only semidefinite, a ridge of 1e-12 * trace / k is added and the flag
/// recorded. Otherwise failure raises CovNotPD.
GaussianVec make_gaussian(Vector mean, Matrix cov, bool regularize = false);

struct TailProb {
    double p = 0.0;
    double err = 0.0; // standard error across randomizations
};

struct MvnOptions {
    std::uint64_t seed = 0;
    int n_points = 1 << 13; // lattice points per randomization
    int n_shifts = 16;      // random shifts
};

/// P(gv > lower componentwise) by separation-of-variables integration over a
/// randomly shifted lattice. Exact for dim 1. Deterministic per seed.
TailProb tail_prob(const GaussianVec& gv, const Vector& lower,
                   const MvnOptions& opts = {});

/// Conditional covariance of the weakly essential block given the essential
/// one: D_KK = Sigma_KK - Sigma_KI Sigma_II^{-1} Sigma_IK.
Matrix schur_complement_KK(const GAnalysis& analysis);

/// Threshold direction of the prefactor correction:
/// (1/sqrt(t0)) (mu_K - Sigma_KI Sigma_II^{-1} mu_I).
Vector psi_threshold(const GAnalysis& analysis);

/// psi(x) = 1 when K is empty; otherwise P{Y_K > psi_threshold * x} with
/// Y_K ~ N(0, D_KK). Exact via the normal survival function when #K = 1.
double psi(const GAnalysis& analysis, double x, const MvnOptions& opts = {});

} // namespace conehit
