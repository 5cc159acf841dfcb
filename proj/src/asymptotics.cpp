#include "conehit/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conehit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double clamp01(double v) { return std::min(std::max(v, 0.0), 1.0); }

CubicSpline build_psi_spline(const GAnalysis& an, double L, int n_nodes,
                             const MvnOptions& opts) {
    std::vector<double> xs(n_nodes), ys(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        xs[i] = -L + 2.0 * L * i / (n_nodes - 1);
        ys[i] = psi(an, xs[i], opts);
    }
    return CubicSpline(std::move(xs), std::move(ys));
}

Classification classify(const QpSolution& qp) {
    if (!qp.weakly_essential.empty()) return Classification::breakpoint;
    if (!qp.unessential.empty()) return Classification::reduced;
    return Classification::full;
}

PickandsEstimate exact_constant(double value) {
    PickandsEstimate pe;
    pe.HT_over_T = value;
    pe.HT_over_T_stderr = 0.0;
    return pe;
}

// Shared scaffolding for the closed-form oracles: fill the analysis record
// directly from known quantities instead of running the segment machinery.
GAnalysis oracle_analysis(const ProblemSpec& spec, double t0, double ghat,
                          double gtilde, const IndexSet& I, const IndexSet& K,
                          const IndexSet& J) {
    GAnalysis an{spec};
    an.t0 = t0;
    an.ghat = ghat;
    an.gtilde = gtilde;
    an.b = spec.alpha + t0 * spec.mu;
    an.qp_at_t0.essential = I;
    an.qp_at_t0.weakly_essential = K;
    an.qp_at_t0.unessential = J;
    an.qp_at_t0.lambda = subblock_solve(spec.sigma.entries(), I, an.b);
    an.qp_at_t0.value = gather(an.b, I).dot(an.qp_at_t0.lambda);
    an.qp_at_t0.b_tilde = an.b;
    IndexSet comp = complement(I, spec.dim());
    for (int j : comp) {
        double v = 0.0;
        for (std::size_t r = 0; r < I.size(); ++r)
            v += spec.sigma.entries()(j, I[r]) * an.qp_at_t0.lambda(r);
        an.qp_at_t0.b_tilde(j) = v;
    }
    an.at_breakpoint = !K.empty();
    an.breakpoint_margin = K.empty() ? std::numeric_limits<double>::infinity() : 0.0;
    an.curvature_left = an.curvature_right = gtilde;
    return an;
}

} // namespace

std::string to_string(Classification c) {
    switch (c) {
        case Classification::full: return "full";
        case Classification::reduced: return "reduced";
        default: return "breakpoint";
    }
}

double AsymptoticResult::evaluate(double u) const {
    return C_I * H_I.HT_over_T * std::pow(u, 0.5 * (1.0 - m)) *
           std::exp(-0.5 * analysis.ghat * u);
}

double AsymptoticResult::evaluate_lo(double u) const {
    const double H = std::max(H_I.HT_over_T - 2.0 * H_I.HT_over_T_stderr, 0.0);
    return C_I * H * std::pow(u, 0.5 * (1.0 - m)) * std::exp(-0.5 * analysis.ghat * u);
}

double AsymptoticResult::evaluate_hi(double u) const {
    const double H = H_I.HT_over_T + 2.0 * H_I.HT_over_T_stderr;
    return C_I * H * std::pow(u, 0.5 * (1.0 - m)) * std::exp(-0.5 * analysis.ghat * u);
}

double closed_form_CI(const GAnalysis& analysis) {
    const IndexSet& I = analysis.qp_at_t0.essential;
    const int m = static_cast<int>(I.size());
    const double logdet = PDMatrix(analysis.spec.sigma.sub(I)).logdet();
    const double logC = (1.0 - 0.5 * m) * std::log(2.0) +
                        0.5 * (1.0 - m) * std::log(M_PI) -
                        0.5 * (m * std::log(analysis.t0) +
                               std::log(analysis.gtilde) + logdet);
    return std::exp(logC);
}

double compute_CI(const GAnalysis& analysis, const MvnOptions& opts) {
    const IndexSet& I = analysis.qp_at_t0.essential;
    const IndexSet& K = analysis.qp_at_t0.weakly_essential;
    const int m = static_cast<int>(I.size());
    const double logdet = PDMatrix(analysis.spec.sigma.sub(I)).logdet();
    const double log_pref =
        -0.5 * (m * std::log(2.0 * M_PI * analysis.t0) + logdet);
    if (K.empty())
        return std::exp(log_pref) * 2.0 * std::sqrt(M_PI / analysis.gtilde);

    const double gt = analysis.gtilde;
    const double L = 8.0 * std::sqrt(2.0 / gt);
    const CubicSpline psi_sp = build_psi_spline(analysis, L, 257, opts);
    auto f = [&](double x) {
        return std::exp(-0.25 * gt * x * x) * clamp01(psi_sp(x));
    };
    const double integral = simpson_adaptive(f, -L, L, 1e-8, 256, 1 << 16);
    return std::exp(log_pref) * integral;
}

AsymptoticResult assemble(const GAnalysis& analysis, const PickandsEstimate& pk,
                          const MvnOptions& opts) {
    AsymptoticResult r{analysis};
    r.m = static_cast<int>(analysis.qp_at_t0.essential.size());
    r.classification = classify(analysis.qp_at_t0);
    r.C_I = compute_CI(analysis, opts);
    r.H_I = pk;
    if (r.m == 1) {
        // One essential coordinate: the constant reduces to the classical
        // Brownian one and equals the essential drift component exactly.
        r.H_I.HT_over_T = analysis.spec.mu(analysis.qp_at_t0.essential[0]);
        r.H_I.HT_over_T_stderr = 0.0;
    }
    return r;
}

AsymptoticResult assemble(const ProblemSpec& spec, const PickandsEstimate& pk,
                          const MvnOptions& opts) {
    return assemble(minimize_g(spec), pk, opts);
}

double PassageTimeLaw::cdf(double s) const {
    if (gaussian) return norm_cdf(s);
    if (s <= grid_lo) return 0.0;
    if (s >= grid_hi) return 1.0;
    return clamp01(cdf_spline(s));
}

double PassageTimeLaw::standardize(double tau, double u) const {
    return (tau - t0 * u) / std::sqrt(2.0 * u / gtilde);
}

PassageTimeLaw passage_time_law(const GAnalysis& analysis,
                                const MvnOptions& opts) {
    PassageTimeLaw law;
    law.t0 = analysis.t0;
    law.gtilde = analysis.gtilde;
    law.gaussian = analysis.qp_at_t0.weakly_essential.empty();
    if (law.gaussian) {
        law.normalizer = std::sqrt(2.0 * M_PI);
        return law;
    }
    const double scale = std::sqrt(2.0 / analysis.gtilde);
    const double S = 8.0;
    const CubicSpline psi_sp =
        build_psi_spline(analysis, S * scale * 1.0001, 257, opts);
    auto f = [&](double s) {
        return std::exp(-0.5 * s * s) * clamp01(psi_sp(scale * s));
    };
    const int n = 512;
    const double h = 2.0 * S / n;
    std::vector<double> xs(n + 1), cum(n + 1);
    xs[0] = -S;
    cum[0] = 0.0;
    double f_lo = f(-S);
    for (int i = 1; i <= n; ++i) {
        xs[i] = -S + i * h;
        const double f_hi = f(xs[i]);
        const double f_mid = f(xs[i] - 0.5 * h);
        cum[i] = cum[i - 1] + h / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
        f_lo = f_hi;
    }
    law.normalizer = cum[n];
    if (!(law.normalizer > 0.0))
        throw QuadratureNotConverged("passage_time_law: degenerate normalizer");
    for (double& v : cum) v /= law.normalizer;
    law.grid_lo = -S;
    law.grid_hi = S;
    law.cdf_spline = CubicSpline(std::move(xs), std::move(cum));
    return law;
}

AsymptoticResult oracle_2d(const ProblemSpec& spec) {
    if (spec.dim() != 2) throw OutOfScope2D("oracle_2d: need d = 2");
    const Matrix& S = spec.sigma.entries();
    if (std::abs(S(0, 0) - 1.0) > 1e-12 || std::abs(S(1, 1) - 1.0) > 1e-12)
        throw OutOfScope2D("oracle_2d: covariance must be a correlation matrix");
    if (std::abs(spec.mu(0) - 1.0) > 1e-12 || std::abs(spec.mu(1) - 1.0) > 1e-12)
        throw OutOfScope2D("oracle_2d: drift must be (1, 1)");
    const double a1 = spec.alpha(0), a2 = spec.alpha(1);
    if (!(a1 > a2 && a2 > 0.0))
        throw OutOfScope2D("oracle_2d: need alpha_1 > alpha_2 > 0");
    const double rho = S(0, 1);
    const double rho2 = (a1 + a2) / (2.0 * a1);
    const double tol = 1e-12;

    if (rho < rho2 - tol) {
        // Both coordinates essential.
        const double q = a1 * a1 + a2 * a2 - 2.0 * a1 * a2 * rho;
        const double t0 = std::sqrt(q / (2.0 * (1.0 - rho)));
        const double ghat = 2.0 * (a1 + a2 + 2.0 * t0) / (1.0 + rho);
        const double gtilde = 2.0 * q / (t0 * t0 * t0 * (1.0 - rho * rho));
        AsymptoticResult r{oracle_analysis(spec, t0, ghat, gtilde, {0, 1}, {}, {})};
        r.m = 2;
        r.classification = Classification::full;
        r.C_I = 1.0 / std::sqrt(M_PI * t0 * t0 * (1.0 - rho * rho) * gtilde);
        r.H_I = exact_constant(kNaN);
        return r;
    }
    const double t0 = a1, ghat = 4.0 * a1, gtilde = 2.0 / a1;
    if (rho <= rho2 + tol) {
        // Boundary correlation: second coordinate weakly essential.
        AsymptoticResult r{oracle_analysis(spec, t0, ghat, gtilde, {0}, {1}, {})};
        r.m = 1;
        r.classification = Classification::breakpoint;
        const double c = (1.0 - rho) / std::sqrt(a1 * (1.0 - rho * rho));
        auto f = [&](double x) {
            return std::exp(-x * x / (2.0 * a1)) * norm_sf(c * x);
        };
        const double L = 10.0 * std::sqrt(a1);
        r.C_I = simpson_adaptive(f, -L, L, 1e-10, 256, 1 << 16) /
                std::sqrt(2.0 * M_PI * a1);
        r.H_I = exact_constant(1.0);
        return r;
    }
    // Strong correlation: second coordinate drops out entirely.
    AsymptoticResult r{oracle_analysis(spec, t0, ghat, gtilde, {0}, {}, {1})};
    r.m = 1;
    r.classification = Classification::reduced;
    r.C_I = 1.0;
    r.H_I = exact_constant(1.0);
    return r;
}

AsymptoticResult oracle_independent(const ProblemSpec& spec) {
    const int d = spec.dim();
    const Matrix& S = spec.sigma.entries();
    if ((S - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12)
        throw OutOfScopeIndependent("oracle_independent: covariance must be identity");
    if ((spec.alpha.array() <= 0.0).any())
        throw OutOfScopeIndependent("oracle_independent: alpha must be positive");
    int n = 0;
    while (n < d && spec.mu(n) > 0.0) ++n;
    if (n == 0)
        throw OutOfScopeIndependent("oracle_independent: need a positive leading drift");
    for (int j = n; j < d; ++j)
        if (!(spec.mu(j) < 0.0))
            throw OutOfScopeIndependent(
                "oracle_independent: trailing drifts must be strictly negative");
    for (int j = n + 1; j < d; ++j)
        if (-spec.mu(j - 1) / spec.alpha(j - 1) > -spec.mu(j) / spec.alpha(j) + 1e-12)
            throw OutOfScopeIndependent(
                "oracle_independent: trailing components must be ordered by |mu|/alpha");

    // Group boundaries k_1 = d > ... > k_l > k_{l+1} = n over distinct values
    // of |mu_j| / alpha_j, and the change-of-dimension instants t'_i.
    std::vector<int> k{d};
    std::vector<double> tprime{0.0}; // t'_0
    {
        std::vector<double> ts;
        for (int j = d; j > n; --j) {
            const double tj = spec.alpha(j - 1) / -spec.mu(j - 1);
            if (ts.empty() || std::abs(tj - ts.back()) > 1e-12 * (1.0 + tj)) {
                if (!ts.empty()) k.push_back(j);
                ts.push_back(tj);
            }
        }
        for (double t : ts) tprime.push_back(t);
    }
    k.push_back(n);
    // Number of distinct change-of-dimension instants (tprime holds t'_0 = 0
    // plus one entry per distinct value at this point).
    const std::size_t l = tprime.size() - 1;
    tprime.push_back(std::numeric_limits<double>::infinity()); // t'_{l+1}

    // Select the bracket whose unconstrained minimizer falls inside it.
    int p = -1;
    double t0 = 0.0;
    for (std::size_t i = 1; i <= l + 1; ++i) {
        const int ki = k[i - 1];
        double sa = 0.0, sm = 0.0;
        for (int j = 0; j < ki; ++j) {
            sa += spec.alpha(j) * spec.alpha(j);
            sm += spec.mu(j) * spec.mu(j);
        }
        const double ti = std::sqrt(sa / sm);
        if (tprime[i - 1] <= ti * (1.0 + 1e-12) && ti < tprime[i]) {
            p = static_cast<int>(i);
            t0 = ti;
            break;
        }
    }
    if (p < 0)
        throw OutOfScopeIndependent("oracle_independent: no bracket matched");

    const int kp = k[p - 1];
    IndexSet I, K, J;
    for (int j = 0; j < kp; ++j) I.push_back(j);
    const bool at_junction =
        p >= 2 && std::abs(t0 - tprime[p - 1]) <= 1e-9 * (1.0 + tprime[p - 1]);
    const int k_prev = at_junction ? k[p - 2] : kp;
    for (int j = kp; j < k_prev; ++j) K.push_back(j);
    for (int j = k_prev; j < d; ++j) J.push_back(j);

    double sa = 0.0, ghat = 0.0;
    for (int j = 0; j < kp; ++j) {
        sa += spec.alpha(j) * spec.alpha(j);
        const double bj = spec.alpha(j) + spec.mu(j) * t0;
        ghat += bj * bj;
    }
    ghat /= t0;
    const double gtilde = 2.0 * sa / (t0 * t0 * t0);

    AsymptoticResult r{oracle_analysis(spec, t0, ghat, gtilde, I, K, J)};
    r.m = kp;
    r.classification = classify(r.analysis.qp_at_t0);
    // Prefactor with psi(x) = prod_{i in K} Psi(mu_i x / sqrt(t0)).
    auto f = [&](double x) {
        double v = std::exp(-0.25 * gtilde * x * x);
        for (int i : K) v *= norm_sf(spec.mu(i) * x / std::sqrt(t0));
        return v;
    };
    const double L = 8.0 * std::sqrt(2.0 / gtilde);
    const double integral = simpson_adaptive(f, -L, L, 1e-10, 256, 1 << 16);
    r.C_I = integral / std::pow(2.0 * M_PI * t0, 0.5 * kp);
    r.H_I = exact_constant(kp == 1 ? spec.mu(0) : kNaN);
    return r;
}

AsymptoticResult oracle_negassoc(const ProblemSpec& spec) {
    const int d = spec.dim();
    const Vector wa = spec.sigma.solve(spec.alpha);
    const Vector wm = spec.sigma.solve(spec.mu);
    if ((wa.array() <= 0.0).any() || (wm.array() <= 0.0).any())
        throw OutOfScopeNegAssoc(
            "oracle_negassoc: need Sigma^{-1} alpha > 0 and Sigma^{-1} mu > 0");
    const double qa = spec.alpha.dot(wa);
    const double qm = spec.mu.dot(wm);
    const double t0 = std::sqrt(qa / qm);
    const Vector b = spec.alpha + t0 * spec.mu;
    const double ghat = b.dot(spec.sigma.solve(b)) / t0;
    const double gtilde = 2.0 * qa / (t0 * t0 * t0);

    IndexSet I(d);
    for (int i = 0; i < d; ++i) I[i] = i;
    AsymptoticResult r{oracle_analysis(spec, t0, ghat, gtilde, I, {}, {})};
    r.m = d;
    r.classification = Classification::full;
    r.C_I = closed_form_CI(r.analysis);
    r.H_I = exact_constant(d == 1 ? spec.mu(0) : kNaN);
    return r;
}

} // namespace conehit
