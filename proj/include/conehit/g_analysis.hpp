#pragma once

#include <optional>

#include "conehit/qp.hpp"

namespace conehit {

/// Process description: covariance Sigma (possibly via a factor A with
/// Sigma = A A^T), target direction alpha and drift mu. A nonsingular cone
/// matrix can be folded in up front, after which the quadrant problem is
/// solved unchanged.
struct ProblemSpec {
    PDMatrix sigma;
    Vector alpha;
    Vector mu;

    int dim() const { return sigma.dim(); }
};

ProblemSpec make_spec(Matrix sigma, Vector alpha, Vector mu);
ProblemSpec make_spec_from_factor(const Matrix& A, Vector alpha, Vector mu);
/// Transform (A, alpha, mu) |-> (M A, M alpha, M mu) before analysis.
ProblemSpec apply_cone(const ProblemSpec& spec, const Matrix& Mcone);

/// One maximal interval on which the active index set of the constrained
/// projection of alpha + mu t is constant, so that
///   g(t) = a / t + c2 + c t   on (lo, hi).
struct Segment {
    double lo = 0.0;
    double hi = 0.0; // +inf sentinel for the last segment
    IndexSet index_set;
    double a = 0.0;  // alpha_V^T Sigma_VV^{-1} alpha_V
    double c2 = 0.0; // 2 alpha_V^T Sigma_VV^{-1} mu_V
    double c = 0.0;  // mu_V^T Sigma_VV^{-1} mu_V
};

struct GAnalysis {
    ProblemSpec spec;
    std::vector<Segment> segments;
    double t0 = 0.0;
    double ghat = 0.0;   // g(t0)
    double gtilde = 0.0; // 2 t0^{-3} alpha_I^T Sigma_II^{-1} alpha_I
    Vector b;            // alpha + t0 mu
    QpSolution qp_at_t0; // projection of b, yields (I, K, J)
    bool at_breakpoint = false;
    /// Distance from t0 to the nearest segment junction (diagnostics for the
    /// breakpoint-coincidence call; +inf when there is no junction).
    double breakpoint_margin = 0.0;
    /// One-sided curvatures 2 a_seg / t0^3 from the segments left and right
    /// of t0; they differ when t0 sits at a junction. Diagnostics only.
    double curvature_left = 0.0;
    double curvature_right = 0.0;
};

/// Enumerate index-set segments of (0, inf) by intersecting the per-subset
/// linear-in-t feasibility and completion inequalities.
std::vector<Segment> compute_segments(const ProblemSpec& spec);

/// Minimize g over the segment structure; fills the full analysis record.
GAnalysis minimize_g(const ProblemSpec& spec);

/// g(t) = (1/t) inf_{v >= alpha + mu t} v^T Sigma^{-1} v, evaluated directly.
double eval_g(const ProblemSpec& spec, double t);

} // namespace conehit
