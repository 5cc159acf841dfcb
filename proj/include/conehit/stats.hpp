#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace conehit {

/// Standard normal CDF.
double norm_cdf(double x);
/// Standard normal survival function 1 - Phi(x).
double norm_sf(double x);
/// Inverse of the standard normal CDF (Acklam's rational approximation with
/// one Halley refinement; ~1e-15 absolute accuracy).
double norm_ppf(double p);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error of a sample, accumulated in index order so the
/// result does not depend on how the work was split across workers.
MeanStderr mean_stderr(const std::vector<double>& xs);

/// Composite Simpson quadrature of f over [a, b] with n panels (n even).
double simpson(const std::function<double(double)>& f, double a, double b, int n);

/// Simpson refined by doubling until |I_2n - I_n| <= tol * |I_2n|; throws
/// QuadratureNotConverged past max_n panels.
double simpson_adaptive(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int n0 = 64,
                        int max_n = 1 << 20);

/// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;

private:
    std::vector<double> x_, y_, m_; // m_: second derivatives
};

/// Map worker/path-count independent blocking: fixed block size keeps
/// floating-point accumulation order identical for any worker count.
constexpr std::size_t kAccumBlock = 4096;

} // namespace conehit
