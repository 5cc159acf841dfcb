#include <doctest.h>

#include <cmath>
#include <random>

#include "conehit/g_analysis.hpp"

using namespace conehit;

namespace {

Matrix corr2(double rho) { return Matrix{{1.0, rho}, {rho, 1.0}}; }

ProblemSpec random_admissible_spec(int d, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.2, 1.5);
    Matrix A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = nd(gen);
    Matrix sigma = A * A.transpose() + 0.2 * Matrix::Identity(d, d);
    sigma = 0.5 * (sigma + sigma.transpose());
    Vector alpha(d), mu(d);
    for (int i = 0; i < d; ++i) {
        alpha(i) = nd(gen);
        mu(i) = nd(gen);
    }
    alpha(0) = ud(gen); // guarantee an admissible coordinate
    mu(0) = ud(gen);
    return make_spec(sigma, alpha, mu);
}

// Junction times of the segment structure (finite his).
std::vector<double> junctions(const std::vector<Segment>& segs) {
    std::vector<double> out;
    for (const Segment& s : segs)
        if (std::isfinite(s.hi)) out.push_back(s.hi);
    return out;
}

} // namespace

TEST_CASE("2d high-correlation segment structure") {
    const ProblemSpec spec =
        make_spec(corr2(0.9), Vector{{1.0, 0.5}}, Vector{{1.0, 1.0}});
    const auto segs = compute_segments(spec);
    REQUIRE(segs.size() == 2);
    const double Q = (1.0 * 0.9 - 0.5) / (1.0 - 0.9); // index-set switch time
    CHECK(segs[0].lo == doctest::Approx(0.0));
    CHECK(segs[0].hi == doctest::Approx(Q).epsilon(1e-9));
    CHECK(segs[0].index_set == IndexSet{0});
    CHECK(segs[1].index_set == IndexSet{0, 1});
    CHECK(std::isinf(segs[1].hi));
}

TEST_CASE("2d negative correlation keeps both coordinates on all of (0,inf)") {
    const ProblemSpec spec =
        make_spec(corr2(-0.5), Vector{{0.8, 0.6}}, Vector{{1.0, 0.7}});
    const auto segs = compute_segments(spec);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].index_set == IndexSet{0, 1});
    CHECK(std::isinf(segs[0].hi));
}

TEST_CASE("independent coordinates drop at t = alpha_j / |mu_j|") {
    const ProblemSpec spec = make_spec(Matrix::Identity(3, 3),
                                       Vector{{1.0, 1.0, 1.0}},
                                       Vector{{1.0, -1.0, -2.0}});
    const auto segs = compute_segments(spec);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].index_set == IndexSet{0, 1, 2});
    CHECK(segs[0].hi == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(segs[1].index_set == IndexSet{0, 1});
    CHECK(segs[1].hi == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(segs[2].index_set == IndexSet{0});
}

TEST_CASE("minimize_g on reference 2d specs") {
    SUBCASE("reduced regime rho = 0.9") {
        const ProblemSpec spec =
            make_spec(corr2(0.9), Vector{{1.0, 0.5}}, Vector{{1.0, 1.0}});
        const GAnalysis an = minimize_g(spec);
        CHECK(an.t0 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(an.ghat == doctest::Approx(4.0).epsilon(1e-10));
        CHECK(an.gtilde == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(an.qp_at_t0.essential == IndexSet{0});
        CHECK(an.qp_at_t0.weakly_essential.empty());
        CHECK(!an.at_breakpoint);
        // On the first segment g is the scalar profile (alpha_1 + t)^2 / t.
        for (double t : {0.3, 1.0, 2.5})
            CHECK(eval_g(spec, t) ==
                  doctest::Approx((1.0 + t) * (1.0 + t) / t).epsilon(1e-10));
    }
    SUBCASE("full regime rho = 0") {
        const ProblemSpec spec =
            make_spec(corr2(0.0), Vector{{1.0, 1.0}}, Vector{{1.0, 1.0}});
        const GAnalysis an = minimize_g(spec);
        CHECK(an.t0 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(an.ghat == doctest::Approx(8.0).epsilon(1e-10));
        CHECK(an.gtilde == doctest::Approx(4.0).epsilon(1e-10));
        CHECK(an.qp_at_t0.essential == IndexSet{0, 1});
    }
    SUBCASE("breakpoint regime rho = 0.75") {
        const ProblemSpec spec =
            make_spec(corr2(0.75), Vector{{1.0, 0.5}}, Vector{{1.0, 1.0}});
        const GAnalysis an = minimize_g(spec);
        CHECK(an.t0 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(an.ghat == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(an.at_breakpoint);
        CHECK(an.qp_at_t0.essential == IndexSet{0});
        CHECK(an.qp_at_t0.weakly_essential == IndexSet{1});
    }
}

TEST_CASE("homogeneous target: t0 = alpha/mu, ghat = 4 D alpha mu") {
    const double alpha = 2.0, mu = 0.5, rho = 0.3;
    const ProblemSpec spec = make_spec(corr2(rho),
                                       Vector(Vector::Constant(2, alpha)),
                                       Vector(Vector::Constant(2, mu)));
    const GAnalysis an = minimize_g(spec);
    const double D = 2.0 / (1.0 + rho); // inf_{v >= 1} v^T Sigma^{-1} v
    CHECK(an.t0 == doctest::Approx(alpha / mu).epsilon(1e-10));
    CHECK(an.ghat == doctest::Approx(4.0 * D * alpha * mu).epsilon(1e-10));
    CHECK(an.gtilde ==
          doctest::Approx(2.0 * D * mu * mu * mu / alpha).epsilon(1e-10));
}

TEST_CASE("first-order condition and value identity at the minimizer") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 40; ++trial) {
        const ProblemSpec spec = random_admissible_spec(2 + trial % 3, gen);
        const GAnalysis an = minimize_g(spec);
        const IndexSet& I = an.qp_at_t0.essential;
        const Matrix SII = an.spec.sigma.sub(I);
        const Vector bI = gather(an.b, I);
        const Vector muI = gather(an.spec.mu, I);
        const Vector w = subblock_solve_vec(SII, bI);
        CHECK(an.ghat == doctest::Approx(bI.dot(w) / an.t0).epsilon(1e-9));
        if (!an.at_breakpoint) {
            const double foc =
                -muI.dot(w) / an.t0 + bI.dot(w) / (2 * an.t0 * an.t0);
            CHECK(std::abs(foc) < 1e-8 * (1 + an.ghat));
        }
        CHECK(an.gtilde > 0);
    }
}

TEST_CASE("segment coefficients reproduce eval_g") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const ProblemSpec spec = random_admissible_spec(2 + trial % 3, gen);
        for (const Segment& s : compute_segments(spec)) {
            const double hi = std::isfinite(s.hi) ? s.hi : 4.0 * s.lo + 8.0;
            for (int k = 0; k < 3; ++k) {
                const double t = s.lo + (hi - s.lo) * (0.1 + 0.8 * ud(gen));
                const double from_coeffs = s.a / t + s.c2 + s.c * t;
                CHECK(from_coeffs ==
                      doctest::Approx(eval_g(spec, t)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("g is convex and continuous with matching one-sided derivatives") {
    std::mt19937_64 gen(37);
    std::uniform_real_distribution<double> ud(0.05, 6.0);
    for (int trial = 0; trial < 20; ++trial) {
        const ProblemSpec spec = random_admissible_spec(2 + trial % 3, gen);
        for (int k = 0; k < 10; ++k) {
            const double t1 = ud(gen), t2 = ud(gen);
            const double mid = 0.5 * (t1 + t2);
            CHECK(eval_g(spec, mid) <=
                  0.5 * (eval_g(spec, t1) + eval_g(spec, t2)) + 1e-9);
        }
        const auto segs = compute_segments(spec);
        for (size_t j = 0; j + 1 < segs.size(); ++j) {
            const double tj = segs[j].hi;
            const double dl = -segs[j].a / (tj * tj) + segs[j].c;
            const double dr = -segs[j + 1].a / (tj * tj) + segs[j + 1].c;
            // Continuity: the jump across the junction is bounded by the
            // local slope times the window, shrinking linearly with eps.
            for (double eps : {1e-4, 1e-6})
                CHECK(std::abs(eval_g(spec, tj - eps) - eval_g(spec, tj + eps)) <
                      2.0 * (std::abs(dl) + std::abs(dr) + 1.0) * eps + 1e-9);
            // C^1: the analytic one-sided derivatives agree at the junction.
            CHECK(dl == doctest::Approx(dr).epsilon(1e-7));
        }
    }
}

TEST_CASE("index sets nest across a junction") {
    std::mt19937_64 gen(51);
    for (int trial = 0; trial < 20; ++trial) {
        const ProblemSpec spec = random_admissible_spec(3, gen);
        const auto segs = compute_segments(spec);
        for (size_t j = 0; j + 1 < segs.size(); ++j) {
            const double tj = segs[j].hi;
            const Vector bj = spec.alpha + tj * spec.mu;
            const QpSolution at = solve_qp(spec.sigma, bj);
            IndexSet closure = at.essential;
            closure.insert(closure.end(), at.weakly_essential.begin(),
                           at.weakly_essential.end());
            std::sort(closure.begin(), closure.end());
            for (const IndexSet& side :
                 {segs[j].index_set, segs[j + 1].index_set}) {
                CHECK(std::includes(side.begin(), side.end(),
                                    at.essential.begin(), at.essential.end()));
                CHECK(std::includes(closure.begin(), closure.end(),
                                    side.begin(), side.end()));
            }
        }
    }
}

TEST_CASE("minimize_g agrees with a dense grid search") {
    std::mt19937_64 gen(65);
    for (int trial = 0; trial < 8; ++trial) {
        const ProblemSpec spec = random_admissible_spec(2 + trial % 3, gen);
        const GAnalysis an = minimize_g(spec);
        double grid_min = std::numeric_limits<double>::infinity();
        const int n = 10000;
        for (int k = 0; k <= n; ++k) {
            const double t =
                an.t0 * std::pow(10.0, -3.0 + 6.0 * k / static_cast<double>(n));
            grid_min = std::min(grid_min, eval_g(spec, t));
        }
        CHECK(an.ghat <= grid_min + 1e-12 * (1 + std::abs(grid_min)));
        CHECK(an.ghat == doctest::Approx(grid_min).epsilon(1e-6));
    }
}

TEST_CASE("cone preprocessing folds into the spec") {
    const Matrix A{{1.0, 0.0}, {0.4, 0.9}};
    const ProblemSpec spec =
        make_spec_from_factor(A, Vector{{1.0, 0.5}}, Vector{{1.0, 0.8}});
    const Matrix M{{2.0, 0.5}, {-0.3, 1.0}};
    const ProblemSpec coned = apply_cone(spec, M);
    const Matrix MA = M * A;
    CHECK((coned.sigma.entries() - MA * MA.transpose()).norm() < 1e-12);
    CHECK((coned.alpha - M * spec.alpha).norm() < 1e-12);
    CHECK((coned.mu - M * spec.mu).norm() < 1e-12);
    // Identity cone is a no-op.
    const ProblemSpec same = apply_cone(spec, Matrix::Identity(2, 2));
    CHECK((same.sigma.entries() - spec.sigma.entries()).norm() < 1e-14);
}

TEST_CASE("inadmissible directions are rejected") {
    CHECK_THROWS_AS(make_spec(Matrix::Identity(2, 2), Vector{{-1.0, 1.0}},
                              Vector{{1.0, -1.0}}),
                    InvalidConfig);
}
