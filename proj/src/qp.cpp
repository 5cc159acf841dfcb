#include "conehit/qp.hpp"

#include <cmath>

namespace conehit {
namespace {

struct Candidate {
    IndexSet set;
    Vector lambda;   // M_VV^{-1} b_V
    Vector b_tilde;  // completion
    bool strict_ok = false;     // lambda > 0
    bool completion_ok = false; // b_tilde_{V^c} >= b_{V^c}
    double margin = 0.0;        // min slack over both condition families
};

IndexSet bits_to_set(unsigned mask, int d) {
    IndexSet out;
    for (int i = 0; i < d; ++i)
        if (mask & (1u << i)) out.push_back(i);
    return out;
}

} // namespace

QpSolution solve_qp(const PDMatrix& M, const Vector& b, const QpOptions& opts) {
    const int d = M.dim();
    if (b.size() != d) throw InvalidConfig("solve_qp: dimension mismatch");
    if ((b.array() <= 0.0).all())
        throw InfeasibleSign("solve_qp: b must have a positive entry");
    if (d > 12)
        throw InvalidConfig("solve_qp: supported range is d <= 12");

    // Enumerate candidate index sets; keep those satisfying the strict
    // multiplier condition, then require the completion inequality.
    int best_card = 0;
    std::vector<Candidate> best;
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
        Candidate c;
        c.set = bits_to_set(mask, d);
        const Vector bV = gather(b, c.set);
        Vector lam;
        try {
            lam = subblock_solve(M.entries(), c.set, b);
        } catch (const NotPositiveDefinite&) {
            continue;
        }
        double margin = lam.minCoeff();
        if (!(margin > opts.strict_tol)) continue;
        c.lambda = lam;
        c.strict_ok = true;

        c.b_tilde = b;
        const IndexSet comp = complement(c.set, d);
        bool comp_ok = true;
        for (std::size_t r = 0; r < comp.size(); ++r) {
            double v = 0.0;
            for (std::size_t j = 0; j < c.set.size(); ++j)
                v += M.entries()(comp[r], c.set[j]) * lam(j);
            c.b_tilde(comp[r]) = v;
            const double slack = v - b(comp[r]);
            if (slack < -opts.eq_tol * (1.0 + std::abs(b(comp[r]))))
                comp_ok = false;
            margin = std::min(margin, slack);
        }
        c.completion_ok = comp_ok;
        c.margin = margin;
        if (!comp_ok) continue;

        const int card = static_cast<int>(c.set.size());
        if (card > best_card) {
            best_card = card;
            best.clear();
        }
        if (card == best_card) best.push_back(std::move(c));
    }

    if (best.empty())
        throw NumericalAmbiguity("solve_qp: no candidate index set satisfies "
                                 "the optimality conditions");
    if (best.size() > 1) {
        // Several maximal-cardinality sets: genuine only at exact degeneracy;
        // beyond tolerance it signals ill-conditioning.
        bool distinct = false;
        for (std::size_t i = 1; i < best.size(); ++i)
            if ((best[i].b_tilde - best[0].b_tilde).cwiseAbs().maxCoeff() >
                opts.eq_tol * (1.0 + b.cwiseAbs().maxCoeff()))
                distinct = true;
        if (distinct)
            throw NumericalAmbiguity(
                "solve_qp: multiple maximal candidate sets beyond tolerance");
    }

    const Candidate& c = best.front();
    QpSolution sol;
    sol.essential = c.set;
    sol.lambda = c.lambda;
    sol.b_tilde = c.b_tilde;
    const IndexSet comp = complement(c.set, d);
    for (int j : comp) {
        if (std::abs(sol.b_tilde(j) - b(j)) <= opts.eq_tol * (1.0 + std::abs(b(j))))
            sol.weakly_essential.push_back(j);
        else
            sol.unessential.push_back(j);
    }
    sol.value = gather(b, c.set).dot(c.lambda);
    return sol;
}

double qp_value_quadform(const QpSolution& sol, const Vector& x) {
    if (x.size() != sol.b_tilde.size())
        throw InvalidConfig("qp_value_quadform: dimension mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < sol.essential.size(); ++i)
        v += x(sol.essential[i]) * sol.lambda(i);
    return v;
}

} // namespace conehit
