#pragma once

#include "conehit/linalg.hpp"

namespace conehit {

/// Solution of the constrained quadratic program
///   minimise x^T M^{-1} x  subject to  x >= b,
/// together with the index partition it induces:
///   essential I        : x sits on the constraint with positive multiplier,
///   weakly essential K : on the constraint with zero multiplier,
///   unessential J      : strictly inside the feasible region.
struct QpSolution {
    Vector b_tilde;
    IndexSet essential;        // I, sorted
    IndexSet weakly_essential; // K, sorted
    IndexSet unessential;      // J, sorted
    double value = 0.0;        // b_I^T M_II^{-1} b_I
    Vector lambda;             // M_II^{-1} b_I, on I, strictly positive
};

struct QpOptions {
    /// K-membership: |b_tilde_j - b_j| <= eq_tol * (1 + |b_j|).
    double eq_tol = 1e-9;
    /// Strictness margin for multiplier positivity and candidate comparison.
    double strict_tol = 1e-11;
};

/// Solve by exhaustive enumeration of candidate index sets (exact for the
/// supported range d <= 12). The essential set is the unique maximal-
/// cardinality subset V with M_VV^{-1} b_V > 0 whose completion satisfies
/// M_{V^c V} M_VV^{-1} b_V >= b_{V^c}.
QpSolution solve_qp(const PDMatrix& M, const Vector& b,
                    const QpOptions& opts = {});

/// x^T M^{-1} b_tilde, which collapses to x_I^T M_II^{-1} b_I.
double qp_value_quadform(const QpSolution& sol, const Vector& x);

} // namespace conehit
