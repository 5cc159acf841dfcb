#include <doctest.h>

#include <cmath>
#include <random>

#include "conehit/asymptotics.hpp"

using namespace conehit;

namespace {

Matrix corr2(double rho) { return Matrix{{1.0, rho}, {rho, 1.0}}; }

ProblemSpec spec2(double rho, double a1, double a2) {
    return make_spec(corr2(rho), Vector{{a1, a2}}, Vector{{1.0, 1.0}});
}

void check_against_pipeline(const AsymptoticResult& oracle,
                            const ProblemSpec& spec, bool check_CI = true) {
    const GAnalysis an = minimize_g(spec);
    CHECK(oracle.analysis.t0 == doctest::Approx(an.t0).epsilon(1e-8));
    CHECK(oracle.analysis.ghat == doctest::Approx(an.ghat).epsilon(1e-8));
    CHECK(oracle.analysis.gtilde == doctest::Approx(an.gtilde).epsilon(1e-8));
    CHECK(oracle.analysis.qp_at_t0.essential == an.qp_at_t0.essential);
    CHECK(oracle.analysis.qp_at_t0.weakly_essential ==
          an.qp_at_t0.weakly_essential);
    if (check_CI)
        CHECK(oracle.C_I == doctest::Approx(compute_CI(an)).epsilon(1e-6));
}

} // namespace

TEST_CASE("closed-form prefactor reference point") {
    // m = 1, t0 = 1, gtilde = 2, Sigma_II = (1): C = sqrt(2)/sqrt(2) = 1.
    const GAnalysis an = minimize_g(spec2(0.9, 1.0, 0.5));
    REQUIRE(an.qp_at_t0.essential.size() == 1);
    CHECK(closed_form_CI(an) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(compute_CI(an) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("quadrature prefactor matches the closed form when K is empty") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> urho(-0.8, 0.45), ua(0.3, 1.5);
    for (int trial = 0; trial < 10; ++trial) {
        const ProblemSpec spec = spec2(urho(gen), ua(gen), ua(gen));
        const GAnalysis an = minimize_g(spec);
        if (!an.qp_at_t0.weakly_essential.empty()) continue;
        CHECK(compute_CI(an) ==
              doctest::Approx(closed_form_CI(an)).epsilon(1e-6));
    }
}

TEST_CASE("2d oracle: full regime") {
    const ProblemSpec spec = spec2(0.0, 1.0, 0.5);
    const AsymptoticResult r = oracle_2d(spec);
    const double t0 = std::sqrt(1.25 / 2.0);
    CHECK(r.analysis.t0 == doctest::Approx(t0).epsilon(1e-12));
    CHECK(r.analysis.ghat == doctest::Approx(2.0 * (1.5 + 2.0 * t0)).epsilon(1e-12));
    CHECK(r.analysis.gtilde ==
          doctest::Approx(2.0 * 1.25 / (t0 * t0 * t0)).epsilon(1e-12));
    CHECK(r.m == 2);
    CHECK(r.classification == Classification::full);
    check_against_pipeline(r, spec);
}

TEST_CASE("2d oracle: breakpoint regime") {
    const ProblemSpec spec = spec2(0.75, 1.0, 0.5);
    const AsymptoticResult r = oracle_2d(spec);
    CHECK(r.analysis.ghat == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.analysis.t0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.m == 1);
    CHECK(r.classification == Classification::breakpoint);
    CHECK(r.analysis.qp_at_t0.weakly_essential == IndexSet{1});
    check_against_pipeline(r, spec);
}

TEST_CASE("2d oracle: reduced regime is the exact exponential") {
    const ProblemSpec spec = spec2(0.9, 1.0, 0.5);
    const AsymptoticResult r = oracle_2d(spec);
    CHECK(r.m == 1);
    CHECK(r.classification == Classification::reduced);
    CHECK(r.C_I * r.H_I.HT_over_T == doctest::Approx(1.0).epsilon(1e-10));
    for (double u : {1.0, 3.0, 7.0})
        CHECK(r.evaluate(u) == doctest::Approx(std::exp(-2.0 * u)).epsilon(1e-10));
    check_against_pipeline(r, spec);
}

TEST_CASE("2d oracle rejects out-of-scope inputs") {
    CHECK_THROWS_AS(oracle_2d(make_spec(corr2(0.2), Vector{{0.5, 1.0}},
                                        Vector{{1.0, 1.0}})),
                    OutOfScope2D); // needs alpha1 > alpha2
    CHECK_THROWS_AS(oracle_2d(make_spec(corr2(0.2), Vector{{1.0, 0.5}},
                                        Vector{{1.0, 2.0}})),
                    OutOfScope2D); // needs unit drift
}

TEST_CASE("exponent is continuous across the regime boundary") {
    const double rho2 = 0.75;
    const double below = oracle_2d(spec2(rho2 - 1e-9, 1.0, 0.5)).analysis.ghat;
    const double above = oracle_2d(spec2(rho2 + 1e-9, 1.0, 0.5)).analysis.ghat;
    CHECK(below == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(above == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("independent oracle") {
    SUBCASE("homogeneous identity") {
        const ProblemSpec spec =
            make_spec(Matrix::Identity(3, 3), Vector{{1.0, 1.0, 1.0}},
                      Vector{{1.0, 1.0, 1.0}});
        const AsymptoticResult r = oracle_independent(spec);
        CHECK(r.analysis.t0 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.analysis.ghat == doctest::Approx(12.0).epsilon(1e-12));
        CHECK(r.m == 3);
        check_against_pipeline(r, spec);
    }
    SUBCASE("negative drift at the change-of-dimension instant") {
        const ProblemSpec spec = make_spec(Matrix::Identity(2, 2),
                                           Vector{{1.0, 1.0}},
                                           Vector{{1.0, -1.0}});
        const AsymptoticResult r = oracle_independent(spec);
        // t1' = 1 equals t0(1) = 1: the dropped coordinate is weakly
        // essential, not gone.
        CHECK(r.analysis.t0 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.classification == Classification::breakpoint);
        CHECK(r.analysis.qp_at_t0.weakly_essential == IndexSet{1});
        check_against_pipeline(r, spec);
    }
    SUBCASE("trailing drift drops out") {
        const ProblemSpec spec = make_spec(Matrix::Identity(2, 2),
                                           Vector{{1.0, 0.3}},
                                           Vector{{1.0, -2.0}});
        const AsymptoticResult r = oracle_independent(spec);
        CHECK(r.analysis.qp_at_t0.essential == IndexSet{0});
        check_against_pipeline(r, spec);
    }
    SUBCASE("ordering violation is out of scope") {
        CHECK_THROWS_AS(oracle_independent(make_spec(
                            Matrix::Identity(2, 2), Vector{{1.0, 1.0}},
                            Vector{{-1.0, 1.0}})),
                        OutOfScopeIndependent);
    }
}

TEST_CASE("negatively associated oracle") {
    SUBCASE("identity reduces to the independent case") {
        const ProblemSpec spec = make_spec(Matrix::Identity(2, 2),
                                           Vector{{0.8, 1.1}},
                                           Vector{{1.0, 0.6}});
        const AsymptoticResult na = oracle_negassoc(spec);
        const AsymptoticResult ind = oracle_independent(spec);
        CHECK(na.analysis.t0 == doctest::Approx(ind.analysis.t0).epsilon(1e-12));
        CHECK(na.analysis.ghat == doctest::Approx(ind.analysis.ghat).epsilon(1e-12));
        CHECK(na.analysis.gtilde ==
              doctest::Approx(ind.analysis.gtilde).epsilon(1e-12));
        check_against_pipeline(na, spec);
    }
    SUBCASE("M-matrix covariance keeps every coordinate") {
        const Matrix sigma{{1.0, -0.4}, {-0.4, 1.0}};
        const ProblemSpec spec =
            make_spec(sigma, Vector{{1.0, 1.0}}, Vector{{1.0, 1.0}});
        const AsymptoticResult r = oracle_negassoc(spec);
        CHECK(r.analysis.qp_at_t0.essential == IndexSet{0, 1});
        CHECK(r.classification == Classification::full);
        check_against_pipeline(r, spec);
    }
    SUBCASE("random admissible instances agree with the pipeline") {
        std::mt19937_64 gen(91);
        std::uniform_real_distribution<double> ua(0.4, 1.6), ur(-0.35, 0.0);
        int done = 0;
        while (done < 8) {
            const int d = 2 + done % 3;
            Matrix sigma = Matrix::Identity(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j)
                    sigma(i, j) = sigma(j, i) = ur(gen);
            Eigen::LLT<Matrix> llt(sigma);
            if (llt.info() != Eigen::Success) continue;
            Vector alpha(d), mu(d);
            for (int i = 0; i < d; ++i) {
                alpha(i) = ua(gen);
                mu(i) = ua(gen);
            }
            if (llt.solve(alpha).minCoeff() <= 0 ||
                llt.solve(mu).minCoeff() <= 0)
                continue;
            const ProblemSpec spec = make_spec(sigma, alpha, mu);
            check_against_pipeline(oracle_negassoc(spec), spec);
            ++done;
        }
    }
    SUBCASE("precondition violation is out of scope") {
        CHECK_THROWS_AS(oracle_negassoc(spec2(0.9, 1.0, 0.5)),
                        OutOfScopeNegAssoc);
    }
}

TEST_CASE("evaluator shape and logarithmic asymptotics") {
    const ProblemSpec spec = spec2(0.0, 1.0, 1.0);
    const GAnalysis an = minimize_g(spec);
    PickandsEstimate pk;
    pk.HT_over_T = 0.8;
    pk.HT_over_T_stderr = 0.05;
    const AsymptoticResult r = assemble(an, pk);
    CHECK(r.m == 2);
    for (double u : {2.0, 5.0}) {
        const double expect = r.C_I * 0.8 * std::pow(u, -0.5) *
                              std::exp(-0.5 * an.ghat * u);
        CHECK(r.evaluate(u) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(r.evaluate_lo(u) < r.evaluate(u));
        CHECK(r.evaluate_hi(u) > r.evaluate(u));
    }
    for (double u : {50.0, 100.0, 170.0}) { // largest u before underflow
        const double log_rate = -2.0 * std::log(r.evaluate(u)) / u;
        CHECK(std::abs(log_rate - an.ghat) < 6.0 * std::log(u) / u);
    }
}

TEST_CASE("m = 1 carries an exact constant") {
    const GAnalysis an = minimize_g(spec2(0.9, 1.0, 0.5));
    PickandsEstimate ignored; // the assembled result must not depend on it
    ignored.HT_over_T = 123.0;
    const AsymptoticResult r = assemble(an, ignored);
    CHECK(r.H_I.HT_over_T == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.H_I.HT_over_T_stderr == 0.0);
    CHECK(r.evaluate(4.0) == doctest::Approx(std::exp(-8.0)).epsilon(1e-10));
}

TEST_CASE("passage law is standard normal when K is empty") {
    for (double rho : {-0.4, 0.0, 0.9}) {
        const ProblemSpec spec = spec2(rho, 1.0, 0.5);
        const GAnalysis an = minimize_g(spec);
        REQUIRE(an.qp_at_t0.weakly_essential.empty());
        const PassageTimeLaw law = passage_time_law(an);
        CHECK(law.gaussian);
        for (int k = 0; k <= 40; ++k) {
            const double s = -4.0 + 0.2 * k;
            CHECK(std::abs(law.cdf(s) - norm_cdf(s)) < 1e-7);
        }
    }
}

TEST_CASE("breakpoint passage law") {
    const double rho = 0.75;
    const ProblemSpec spec = spec2(rho, 1.0, 0.5);
    const GAnalysis an = minimize_g(spec);
    const PassageTimeLaw law = passage_time_law(an);
    REQUIRE(!law.gaussian);
    // Direct quadrature of the defining ratio with the scalar psi.
    const double denom = std::sqrt(an.t0 * (1.0 - rho * rho));
    auto w = [&](double x) {
        return std::exp(-0.5 * x * x) *
               norm_sf((1.0 - rho) * std::sqrt(2.0 / an.gtilde) * x / denom);
    };
    const double Z = simpson(w, -10.0, 10.0, 4000);
    for (double s : {-1.5, -0.3, 0.0, 0.8, 2.0}) {
        const double num = simpson(w, -10.0, s, 4000);
        CHECK(law.cdf(s) == doctest::Approx(num / Z).epsilon(1e-6));
    }
    // Median by bisection.
    double lo = -6.0, hi = 6.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (law.cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    CHECK(law.cdf(0.5 * (lo + hi)) == doctest::Approx(0.5).epsilon(1e-9));
    // Monotone, with the right limits.
    CHECK(law.cdf(-30.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(law.cdf(30.0) == doctest::Approx(1.0).epsilon(1e-9));
    // Standardization map.
    const double u = 9.0;
    const double tau = an.t0 * u + 1.3 * std::sqrt(2.0 * u / an.gtilde);
    CHECK(law.standardize(tau, u) == doctest::Approx(1.3).epsilon(1e-10));
}

TEST_CASE("2d regime sweep matches the closed-form thresholds") {
    for (int k = 0; k <= 38; ++k) {
        const double rho = (-19.0 + k) / 20.0;
        const ProblemSpec spec = spec2(rho, 1.0, 0.5);
        const GAnalysis an = minimize_g(spec);
        const AsymptoticResult r = oracle_2d(spec);
        if (rho < 0.75 - 1e-12) {
            CHECK(r.classification == Classification::full);
            CHECK(an.qp_at_t0.essential == IndexSet{0, 1});
        } else if (rho > 0.75 + 1e-12) {
            CHECK(r.classification == Classification::reduced);
            CHECK(an.qp_at_t0.essential == IndexSet{0});
        } else {
            CHECK(r.classification == Classification::breakpoint);
        }
        CHECK(an.t0 == doctest::Approx(r.analysis.t0).epsilon(1e-8));
        CHECK(an.ghat == doctest::Approx(r.analysis.ghat).epsilon(1e-8));
        CHECK(an.gtilde == doctest::Approx(r.analysis.gtilde).epsilon(1e-8));
    }
}
