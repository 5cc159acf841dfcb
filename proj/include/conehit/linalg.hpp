#pragma once

#include <Eigen/Dense>
#include <vector>

#include "conehit/errors.hpp"

namespace conehit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<int>; // sorted, 0-based

/// Symmetric positive definite matrix with a cached Cholesky factor.
/// Construction validates symmetry and positive definiteness.
class PDMatrix {
public:
    explicit PDMatrix(Matrix entries);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& entries() const { return entries_; }
    /// Lower-triangular L with L L^T = entries.
    const Matrix& chol() const { return chol_; }

    /// Solve entries * x = rhs via the cached factor.
    Vector solve(const Vector& rhs) const;

    double logdet() const;

    /// Principal sub-block entries[idx, idx].
    Matrix sub(const IndexSet& idx) const;

    /// Off-diagonal block entries[rows, cols].
    Matrix block(const IndexSet& rows, const IndexSet& cols) const;

private:
    Matrix entries_;
    Matrix chol_;
};

/// Solve M_VV x = b_V with a fresh Cholesky of the sub-block (never by
/// slicing a precomputed full inverse).
Vector subblock_solve(const Matrix& full, const IndexSet& idx, const Vector& rhs_full);
Vector subblock_solve_vec(const Matrix& sub, const Vector& rhs);

Vector gather(const Vector& v, const IndexSet& idx);
IndexSet complement(const IndexSet& idx, int d);

} // namespace conehit
