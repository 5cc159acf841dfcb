#include "conehit/mvn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "conehit/rng.hpp"
#include "conehit/stats.hpp"

namespace conehit {
namespace {

// Square roots of the first primes, for the shifted Kronecker lattice.
const double kKronecker[] = {
    1.4142135623730951, 1.7320508075688772, 2.23606797749979,
    2.6457513110645907, 3.3166247903554,    3.605551275463989,
    4.123105625617661,  4.358898943540674,  4.795831523312719,
    5.385164807134504,  5.5677643628300215, 6.082762530298219,
    6.4031242374328485, 6.557438524302,     6.855654600401044,
    7.280109889280518,  7.681145747868608,  7.810249675906654,
    8.18535277187245,   8.426149773176359};

double frac(double x) { return x - std::floor(x); }

// One separation-of-variables evaluation of P(W <= b), W ~ N(0, C = L L^T),
// at a point w in [0,1)^{k-1}.
double sov_eval(const Matrix& L, const Vector& b, const double* w) {
    const int k = static_cast<int>(b.size());
    double f = norm_cdf(b(0) / L(0, 0));
    double e_prev = f;
    Vector y(k);
    for (int i = 1; i < k; ++i) {
        const double u = std::min(std::max(e_prev * w[i - 1], 1e-16), 1.0 - 1e-16);
        y(i - 1) = norm_ppf(u);
        double s = 0.0;
        for (int j = 0; j < i; ++j) s += L(i, j) * y(j);
        e_prev = norm_cdf((b(i) - s) / L(i, i));
        f *= e_prev;
    }
    return f;
}

} // namespace

GaussianVec make_gaussian(Vector mean, Matrix cov, bool regularize) {
    const int k = static_cast<int>(cov.rows());
    if (mean.size() != k) throw InvalidConfig("make_gaussian: dimension mismatch");
    try {
        return GaussianVec{std::move(mean), PDMatrix(cov), false};
    } catch (const NotPositiveDefinite& e) {
        if (!regularize) throw CovNotPD(e.what());
        const double ridge = 1e-12 * cov.trace() / k;
        Matrix c2 = cov + ridge * Matrix::Identity(k, k);
        try {
            return GaussianVec{std::move(mean), PDMatrix(std::move(c2)), true};
        } catch (const NotPositiveDefinite& e2) {
            throw CovNotPD(e2.what());
        }
    }
}

TailProb tail_prob(const GaussianVec& gv, const Vector& lower,
                   const MvnOptions& opts) {
    const int k = gv.dim();
    if (lower.size() != k) throw InvalidConfig("tail_prob: dimension mismatch");
    // P(Z > lower) with Z = mean + W equals P(-W <= mean - lower) and -W has
    // the same law as W, so integrate the CDF at b = mean - lower.
    Vector b = gv.mean - lower;

    if (k == 1) {
        const double sd = std::sqrt(gv.cov.entries()(0, 0));
        return TailProb{norm_cdf(b(0) / sd), 0.0};
    }
    if (k > 20) throw InvalidConfig("tail_prob: supported dimension is k <= 20");

    // Order variables by standardized limit, tightest first; this is the
    // usual variable-reordering heuristic for separation of variables.
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    const Matrix& C = gv.cov.entries();
    std::sort(perm.begin(), perm.end(), [&](int i, int j) {
        return b(i) / std::sqrt(C(i, i)) < b(j) / std::sqrt(C(j, j));
    });
    Matrix Cp(k, k);
    Vector bp(k);
    for (int i = 0; i < k; ++i) {
        bp(i) = b(perm[i]);
        for (int j = 0; j < k; ++j) Cp(i, j) = C(perm[i], perm[j]);
    }
    const Matrix L = PDMatrix(Cp).chol();

    std::vector<double> shift_means(opts.n_shifts);
    std::vector<double> w(k - 1), shift(k - 1);
    for (int s = 0; s < opts.n_shifts; ++s) {
        Rng rng(opts.seed, 0x6d766e0000ULL + static_cast<std::uint64_t>(s));
        for (int j = 0; j < k - 1; ++j) shift[j] = rng.uniform();
        double acc = 0.0;
        for (int n = 1; n <= opts.n_points; ++n) {
            for (int j = 0; j < k - 1; ++j)
                w[j] = frac(n * kKronecker[j] + shift[j]);
            acc += sov_eval(L, bp, w.data());
        }
        shift_means[s] = acc / opts.n_points;
    }
    const MeanStderr ms = mean_stderr(shift_means);
    double p = std::min(std::max(ms.mean, 0.0), 1.0);
    return TailProb{p, ms.stderr_};
}

Matrix schur_complement_KK(const GAnalysis& analysis) {
    const IndexSet& I = analysis.qp_at_t0.essential;
    const IndexSet& K = analysis.qp_at_t0.weakly_essential;
    const PDMatrix& S = analysis.spec.sigma;
    const Matrix SKK = S.block(K, K);
    const Matrix SKI = S.block(K, I);
    const Matrix SII = S.sub(I);
    Eigen::LLT<Matrix> llt(SII);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("schur_complement_KK: essential block not PD");
    return SKK - SKI * llt.solve(SKI.transpose());
}

Vector psi_threshold(const GAnalysis& analysis) {
    const IndexSet& I = analysis.qp_at_t0.essential;
    const IndexSet& K = analysis.qp_at_t0.weakly_essential;
    const PDMatrix& S = analysis.spec.sigma;
    const Vector mu_I_sol = subblock_solve(S.entries(), I, analysis.spec.mu);
    Vector thr = gather(analysis.spec.mu, K) - S.block(K, I) * mu_I_sol;
    return thr / std::sqrt(analysis.t0);
}

double psi(const GAnalysis& analysis, double x, const MvnOptions& opts) {
    const IndexSet& K = analysis.qp_at_t0.weakly_essential;
    if (K.empty()) return 1.0;
    const Vector thr = psi_threshold(analysis) * x;
    const Matrix DKK = schur_complement_KK(analysis);
    if (K.size() == 1) return norm_sf(thr(0) / std::sqrt(DKK(0, 0)));
    const GaussianVec gv = make_gaussian(Vector::Zero(K.size()), DKK, true);
    return tail_prob(gv, thr, opts).p;
}

} // namespace conehit
