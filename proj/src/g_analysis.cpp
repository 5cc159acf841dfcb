#include "conehit/g_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conehit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_vectors(const PDMatrix& sigma, const Vector& alpha, const Vector& mu) {
    const int d = sigma.dim();
    if (alpha.size() != d || mu.size() != d)
        throw InvalidConfig("spec: alpha/mu dimension mismatch");
    if (!alpha.allFinite() || !mu.allFinite())
        throw InvalidConfig("spec: alpha/mu must be finite");
    bool ok = false;
    for (int i = 0; i < d; ++i)
        if (alpha(i) > 0.0 && mu(i) > 0.0) ok = true;
    if (!ok)
        throw InvalidConfig("spec: need some coordinate with alpha_i > 0 and mu_i > 0");
}

IndexSet bits_to_set(unsigned mask, int d) {
    IndexSet out;
    for (int i = 0; i < d; ++i)
        if (mask & (1u << i)) out.push_back(i);
    return out;
}

// Intersect {t : p + q t > 0 (strict) resp. >= 0} with [lo, hi].
void clip_halfline(double p, double q, double tiny, double& lo, double& hi) {
    if (std::abs(q) <= tiny) {
        if (p <= 0.0) lo = kInf; // empty
        return;
    }
    const double root = -p / q;
    if (q > 0.0)
        lo = std::max(lo, root);
    else
        hi = std::min(hi, root);
}

} // namespace

ProblemSpec make_spec(Matrix sigma, Vector alpha, Vector mu) {
    PDMatrix S(std::move(sigma));
    validate_vectors(S, alpha, mu);
    return ProblemSpec{std::move(S), std::move(alpha), std::move(mu)};
}

ProblemSpec make_spec_from_factor(const Matrix& A, Vector alpha, Vector mu) {
    if (A.rows() != A.cols())
        throw InvalidConfig("spec: factor A must be square");
    return make_spec(A * A.transpose(), std::move(alpha), std::move(mu));
}

ProblemSpec apply_cone(const ProblemSpec& spec, const Matrix& Mcone) {
    const int d = spec.dim();
    if (Mcone.rows() != d || Mcone.cols() != d)
        throw InvalidConfig("spec: cone matrix dimension mismatch");
    if (std::abs(Mcone.determinant()) < 1e-12)
        throw InvalidConfig("spec: cone matrix must be nonsingular");
    Matrix sigma = Mcone * spec.sigma.entries() * Mcone.transpose();
    return make_spec(std::move(sigma), Mcone * spec.alpha, Mcone * spec.mu);
}

std::vector<Segment> compute_segments(const ProblemSpec& spec) {
    const int d = spec.dim();
    if (d > 12) throw InvalidConfig("compute_segments: supported range is d <= 12");
    const Matrix& S = spec.sigma.entries();
    const double scale = std::max({1.0, spec.alpha.cwiseAbs().maxCoeff(),
                                   spec.mu.cwiseAbs().maxCoeff()});
    const double tiny = 1e-14 * scale;

    std::vector<Segment> segs;
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
        const IndexSet V = bits_to_set(mask, d);
        Vector p, q;
        try {
            p = subblock_solve(S, V, spec.alpha);
            q = subblock_solve(S, V, spec.mu);
        } catch (const NotPositiveDefinite&) {
            continue;
        }
        double lo = 0.0, hi = kInf;
        for (std::size_t i = 0; i < V.size() && lo < hi; ++i)
            clip_halfline(p(i), q(i), tiny, lo, hi);
        const IndexSet comp = complement(V, d);
        for (std::size_t r = 0; r < comp.size() && lo < hi; ++r) {
            double rr = -spec.alpha(comp[r]), ss = -spec.mu(comp[r]);
            for (std::size_t j = 0; j < V.size(); ++j) {
                rr += S(comp[r], V[j]) * p(j);
                ss += S(comp[r], V[j]) * q(j);
            }
            clip_halfline(rr, ss, tiny, lo, hi);
        }
        if (!(hi - lo > 1e-10 * (1.0 + lo))) continue;

        // Confirm against the projection itself at an interior point; this
        // prunes subsets that pass the inequalities only marginally.
        const double t_mid = std::isinf(hi) ? (lo > 0.0 ? 2.0 * lo + 1.0 : 1.0)
                                            : 0.5 * (lo + hi);
        try {
            const QpSolution sol = solve_qp(spec.sigma, spec.alpha + t_mid * spec.mu);
            if (sol.essential != V) continue;
        } catch (const Error&) {
            continue;
        }

        Segment seg;
        seg.lo = lo;
        seg.hi = hi;
        seg.index_set = V;
        const Vector aV = gather(spec.alpha, V);
        const Vector mV = gather(spec.mu, V);
        seg.a = aV.dot(p);
        seg.c2 = 2.0 * aV.dot(q);
        seg.c = mV.dot(q);
        segs.push_back(std::move(seg));
    }

    std::sort(segs.begin(), segs.end(),
              [](const Segment& x, const Segment& y) { return x.lo < y.lo; });

    if (segs.empty() || segs.front().lo > 1e-9)
        throw CoverageGap("compute_segments: segments do not start at t = 0");
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        const double gap = segs[i + 1].lo - segs[i].hi;
        const double tol = 1e-7 * (1.0 + std::abs(segs[i].hi));
        if (gap > tol)
            throw CoverageGap("compute_segments: gap between segments");
        if (gap < -tol) {
            // Overlap beyond tolerance: resolve the junction by projecting at
            // the middle of the overlap.
            const double t_mid = 0.5 * (segs[i + 1].lo + segs[i].hi);
            const QpSolution sol = solve_qp(spec.sigma, spec.alpha + t_mid * spec.mu);
            if (sol.essential == segs[i].index_set)
                segs[i + 1].lo = segs[i].hi;
            else
                segs[i].hi = segs[i + 1].lo;
        }
    }
    if (!std::isinf(segs.back().hi))
        throw CoverageGap("compute_segments: last segment must be unbounded");
    return segs;
}

GAnalysis minimize_g(const ProblemSpec& spec) {
    GAnalysis out{spec, compute_segments(spec)};

    double best_g = kInf, best_t = 0.0;
    for (const Segment& seg : out.segments) {
        double t = std::sqrt(seg.a / seg.c);
        if (t < seg.lo) t = seg.lo;
        if (t > seg.hi) t = seg.hi;
        if (!(t > 0.0)) continue;
        const double g = seg.a / t + seg.c2 + seg.c * t;
        if (g < best_g) {
            best_g = g;
            best_t = t;
        }
    }
    if (!(best_t > 0.0))
        throw NumericalAmbiguity("minimize_g: no interior minimizer found");

    out.t0 = best_t;
    out.b = spec.alpha + best_t * spec.mu;
    out.qp_at_t0 = solve_qp(spec.sigma, out.b);
    out.ghat = out.qp_at_t0.value / best_t;

    const IndexSet& I = out.qp_at_t0.essential;
    const Vector alpha_sol = subblock_solve(spec.sigma.entries(), I, spec.alpha);
    out.gtilde = 2.0 * gather(spec.alpha, I).dot(alpha_sol) / (best_t * best_t * best_t);

    out.breakpoint_margin = kInf;
    for (std::size_t i = 0; i + 1 < out.segments.size(); ++i) {
        const double tj = out.segments[i].hi;
        out.breakpoint_margin = std::min(out.breakpoint_margin, std::abs(best_t - tj));
        if (std::abs(best_t - tj) <= 1e-7 * (1.0 + tj)) out.at_breakpoint = true;
    }
    if (!out.qp_at_t0.weakly_essential.empty()) out.at_breakpoint = true;

    out.curvature_left = out.curvature_right = out.gtilde;
    const double tol = 1e-7 * (1.0 + best_t);
    for (const Segment& seg : out.segments) {
        const double curv = 2.0 * seg.a / (best_t * best_t * best_t);
        if (seg.lo < best_t && seg.hi >= best_t - tol) out.curvature_left = curv;
        if (seg.hi > best_t && seg.lo <= best_t + tol) out.curvature_right = curv;
    }
    return out;
}

double eval_g(const ProblemSpec& spec, double t) {
    if (!(t > 0.0)) throw InvalidConfig("eval_g: t must be positive");
    return solve_qp(spec.sigma, spec.alpha + t * spec.mu).value / t;
}

} // namespace conehit
