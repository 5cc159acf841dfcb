#pragma once

#include <string>

#include "conehit/mvn.hpp"
#include "conehit/pickands.hpp"
#include "conehit/stats.hpp"

namespace conehit {

/// How many coordinates survive at the optimum:
///   full       - every coordinate essential (K and J empty),
///   reduced    - some coordinates dropped entirely (J nonempty, K empty),
///   breakpoint - minimizer sits at an index-set change (K nonempty).
enum class Classification { full, reduced, breakpoint };

std::string to_string(Classification c);

/// Approximation P(u) ~ C * H * u^{(1-m)/2} e^{-ghat u / 2} with a
/// confidence band from the Monte Carlo error of H. For m = 1 the constant
/// H is known in closed form (it equals the essential drift component) and
/// carries no error.
struct AsymptoticResult {
    GAnalysis analysis;
    int m = 0;
    double C_I = 0.0;
    PickandsEstimate H_I;
    Classification classification = Classification::full;

    double evaluate(double u) const;
    double evaluate_lo(double u) const; // H - 2 stderr
    double evaluate_hi(double u) const; // H + 2 stderr
};

/// Limit law of the standardized conditional passage time
/// (tau_u - t0 u) / sqrt(2u / gtilde). Standard normal when K is empty.
struct PassageTimeLaw {
    double t0 = 0.0;
    double gtilde = 0.0;
    bool gaussian = true;
    double normalizer = 0.0; // integral of e^{-x^2/2} psi(sqrt(2/gtilde) x)
    CubicSpline cdf_spline;  // only when not gaussian
    double grid_lo = 0.0, grid_hi = 0.0;

    double cdf(double s) const;
    double standardize(double tau, double u) const;
};

/// Prefactor C = (2 pi t0)^{-m/2} |Sigma_II|^{-1/2} integral of
/// e^{-gtilde x^2 / 4} psi(x) dx, by refining quadrature on a cached psi
/// grid. Matches closed_form_CI when K is empty.
double compute_CI(const GAnalysis& analysis, const MvnOptions& opts = {});

/// 2^{1-m/2} pi^{(1-m)/2} / sqrt(t0^m gtilde |Sigma_II|), valid for K empty.
double closed_form_CI(const GAnalysis& analysis);

AsymptoticResult assemble(const GAnalysis& analysis, const PickandsEstimate& pk,
                          const MvnOptions& opts = {});
AsymptoticResult assemble(const ProblemSpec& spec, const PickandsEstimate& pk,
                          const MvnOptions& opts = {});

PassageTimeLaw passage_time_law(const GAnalysis& analysis,
                                const MvnOptions& opts = {});

/// Closed-form results for special families, computed independently of the
/// segment machinery; used to cross-check the general pipeline. For m > 1
/// the constant H is not closed form, so those results carry H = NaN and
/// only (t0, ghat, gtilde, index sets, C_I) are meaningful.
AsymptoticResult oracle_2d(const ProblemSpec& spec);
AsymptoticResult oracle_independent(const ProblemSpec& spec);
AsymptoticResult oracle_negassoc(const ProblemSpec& spec);

} // namespace conehit
