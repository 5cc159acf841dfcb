#include <doctest.h>

#include <cmath>
#include <random>

#include "conehit/mvn.hpp"
#include "conehit/stats.hpp"

using namespace conehit;

namespace {

// Dense conditioning oracle for P(X1 > l1, X2 > l2) under a standard
// bivariate normal with correlation rho:
//   integral over x > l1 of phi(x) * Psi((l2 - rho x)/sqrt(1-rho^2)) dx.
double bvn_tail_oracle(double rho, double l1, double l2) {
    const double s = std::sqrt(1.0 - rho * rho);
    auto f = [&](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI) *
               norm_sf((l2 - rho * x) / s);
    };
    return simpson(f, l1, l1 + 12.0, 4000);
}

} // namespace

TEST_CASE("scalar tail is exact") {
    const GaussianVec gv = make_gaussian(Vector{{0.0}}, Matrix{{1.0}});
    CHECK(tail_prob(gv, Vector{{0.0}}).p == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(tail_prob(gv, Vector{{1.3}}).p ==
          doctest::Approx(norm_sf(1.3)).epsilon(1e-12));
}

TEST_CASE("bivariate orthant closed form") {
    for (double rho : {-0.9, 0.0, 0.5, 0.9}) {
        const GaussianVec gv =
            make_gaussian(Vector{{0.0, 0.0}}, Matrix{{1.0, rho}, {rho, 1.0}});
        const TailProb r = tail_prob(gv, Vector{{0.0, 0.0}});
        const double exact = 0.25 + std::asin(rho) / (2.0 * M_PI);
        CHECK(std::abs(r.p - exact) < 3.0 * r.err + 1e-12);
        CHECK(std::abs(r.p - exact) < 1e-4);
    }
}

TEST_CASE("bivariate tails match a dense conditioning quadrature") {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> urho(-0.85, 0.85), ul(-1.5, 1.5);
    for (int trial = 0; trial < 12; ++trial) {
        const double rho = urho(gen), l1 = ul(gen), l2 = ul(gen);
        const GaussianVec gv =
            make_gaussian(Vector{{0.0, 0.0}}, Matrix{{1.0, rho}, {rho, 1.0}});
        const TailProb r = tail_prob(gv, Vector{{l1, l2}});
        const double exact = bvn_tail_oracle(rho, l1, l2);
        CHECK(std::abs(r.p - exact) < 3.0 * r.err + 1e-6);
        CHECK(std::abs(r.p - exact) < 1e-4);
    }
}

TEST_CASE("independent trivariate orthant") {
    const GaussianVec gv =
        make_gaussian(Vector(Vector::Zero(3)), Matrix(Matrix::Identity(3, 3)));
    const TailProb r = tail_prob(gv, Vector(Vector::Zero(3)));
    CHECK(r.p == doctest::Approx(0.125).epsilon(2e-4));
}

TEST_CASE("tail limits and mean shift") {
    const GaussianVec gv =
        make_gaussian(Vector{{0.4, -0.2}}, Matrix{{1.0, 0.3}, {0.3, 1.0}});
    CHECK(tail_prob(gv, Vector(Vector::Constant(2, -30.0))).p ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(tail_prob(gv, Vector(Vector::Constant(2, 9.0))).p < 1e-12);
}

TEST_CASE("deterministic per seed") {
    const GaussianVec gv =
        make_gaussian(Vector{{0.0, 0.0}}, Matrix{{1.0, 0.6}, {0.6, 1.0}});
    MvnOptions o;
    o.seed = 77;
    const TailProb a = tail_prob(gv, Vector{{0.2, -0.4}}, o);
    const TailProb b = tail_prob(gv, Vector{{0.2, -0.4}}, o);
    CHECK(a.p == b.p);
    CHECK(a.err == b.err);
}

TEST_CASE("semidefinite covariance needs the regularization flag") {
    const Matrix singular{{1.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(make_gaussian(Vector(Vector::Zero(2)), singular),
                    CovNotPD);
    const GaussianVec gv =
        make_gaussian(Vector(Vector::Zero(2)), singular, true);
    CHECK(gv.regularized);
}

TEST_CASE("psi reference values") {
    SUBCASE("empty K gives 1") {
        const ProblemSpec spec = make_spec(Matrix{{1.0, 0.9}, {0.9, 1.0}},
                                           Vector{{1.0, 0.5}},
                                           Vector{{1.0, 1.0}});
        const GAnalysis an = minimize_g(spec);
        REQUIRE(an.qp_at_t0.weakly_essential.empty());
        for (double x : {-2.0, 0.0, 3.0}) CHECK(psi(an, x) == 1.0);
    }
    SUBCASE("singleton K evaluates the scalar survival function") {
        const double rho = 0.75; // breakpoint family: K = {1}
        const ProblemSpec spec = make_spec(Matrix{{1.0, rho}, {rho, 1.0}},
                                           Vector{{1.0, 0.5}},
                                           Vector{{1.0, 1.0}});
        const GAnalysis an = minimize_g(spec);
        REQUIRE(an.qp_at_t0.weakly_essential == IndexSet{1});
        CHECK(psi(an, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
        // Standardized threshold: (1-rho) x / sqrt(t0 (1-rho^2)), t0 = 1.
        const double denom = std::sqrt(1.0 - rho * rho);
        for (double x : {-1.5, 0.3, 2.0})
            CHECK(psi(an, x) ==
                  doctest::Approx(norm_sf((1.0 - rho) * x / denom))
                      .epsilon(1e-10));
        // Nonincreasing in x for a nonnegative threshold direction.
        double prev = 2.0;
        for (double x = -3.0; x <= 3.0; x += 0.25) {
            const double v = psi(an, x);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("schur complement and threshold direction") {
    const double rho = 0.75;
    const ProblemSpec spec = make_spec(Matrix{{1.0, rho}, {rho, 1.0}},
                                       Vector{{1.0, 0.5}}, Vector{{1.0, 1.0}});
    const GAnalysis an = minimize_g(spec);
    const Matrix D = schur_complement_KK(an);
    REQUIRE(D.rows() == 1);
    CHECK(D(0, 0) == doctest::Approx(1.0 - rho * rho).epsilon(1e-12));
    const Vector thr = psi_threshold(an);
    REQUIRE(thr.size() == 1);
    CHECK(thr(0) == doctest::Approx((1.0 - rho) / std::sqrt(an.t0)).epsilon(1e-10));
}
