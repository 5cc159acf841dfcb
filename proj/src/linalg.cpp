#include "conehit/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace conehit {

PDMatrix::PDMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.rows() != entries_.cols())
        throw NotPositiveDefinite("matrix must be square with dim >= 1");
    const double scale = entries_.cwiseAbs().maxCoeff();
    if (!((entries_ - entries_.transpose()).cwiseAbs().maxCoeff()
          <= 1e-12 * std::max(1.0, scale)))
        throw NotPositiveDefinite("matrix is not symmetric to tolerance");
    entries_ = 0.5 * (entries_ + entries_.transpose().eval());
    Eigen::LLT<Matrix> llt(entries_);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("Cholesky factorization failed");
    chol_ = llt.matrixL();
    const Matrix recon = chol_ * chol_.transpose();
    if ((recon - entries_).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale))
        throw NotPositiveDefinite("Cholesky reconstruction check failed");
}

Vector PDMatrix::solve(const Vector& rhs) const {
    Vector y = chol_.triangularView<Eigen::Lower>().solve(rhs);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

double PDMatrix::logdet() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += std::log(chol_(i, i));
    return 2.0 * s;
}

Matrix PDMatrix::sub(const IndexSet& idx) const {
    return block(idx, idx);
}

Matrix PDMatrix::block(const IndexSet& rows, const IndexSet& cols) const {
    Matrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(i, j) = entries_(rows[i], cols[j]);
    return out;
}

Vector subblock_solve_vec(const Matrix& sub, const Vector& rhs) {
    Eigen::LLT<Matrix> llt(sub);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("sub-block Cholesky failed");
    return llt.solve(rhs);
}

Vector subblock_solve(const Matrix& full, const IndexSet& idx, const Vector& rhs_full) {
    Matrix sub(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            sub(i, j) = full(idx[i], idx[j]);
    Vector rhs(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) rhs(i) = rhs_full(idx[i]);
    return subblock_solve_vec(sub, rhs);
}

Vector gather(const Vector& v, const IndexSet& idx) {
    Vector out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

IndexSet complement(const IndexSet& idx, int d) {
    IndexSet out;
    std::size_t k = 0;
    for (int i = 0; i < d; ++i) {
        if (k < idx.size() && idx[k] == i) {
            ++k;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

} // namespace conehit
