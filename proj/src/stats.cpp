#include "conehit/stats.hpp"

#include <cmath>
#include <limits>

#include "conehit/errors.hpp"

namespace conehit {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double norm_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw InvalidConfig("norm_ppf: p must lie in [0, 1]");
    }
    // Acklam's rational approximation, then one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr out;
    out.n = xs.size();
    if (out.n == 0) return out;
    // Block the sums so the accumulation order matches what a fixed-block
    // parallel producer would see.
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t b = 0; b < xs.size(); b += kAccumBlock) {
        const std::size_t end = std::min(xs.size(), b + kAccumBlock);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = b; i < end; ++i) {
            s += xs[i];
            s2 += xs[i] * xs[i];
        }
        sum += s;
        sumsq += s2;
    }
    const double n = static_cast<double>(out.n);
    out.mean = sum / n;
    if (out.n > 1) {
        double var = (sumsq - n * out.mean * out.mean) / (n - 1.0);
        if (var < 0.0) var = 0.0;
        out.stderr_ = std::sqrt(var / n);
    }
    return out;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n < 2 || n % 2 != 0) throw InvalidConfig("simpson: n must be even, >= 2");
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double simpson_adaptive(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int n0, int max_n) {
    double prev = simpson(f, a, b, n0);
    for (int n = 2 * n0; n <= max_n; n *= 2) {
        const double cur = simpson(f, a, b, n);
        if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300))
            return cur;
        prev = cur;
    }
    throw QuadratureNotConverged("simpson_adaptive: not converged at max panel count");
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw InvalidGrid("CubicSpline: need at least two nodes, equal sizes");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw InvalidGrid("CubicSpline: abscissae must be strictly increasing");
    m_.assign(n, 0.0);
    if (n == 2) return;
    // Tridiagonal solve for second derivatives, natural end conditions.
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x_[i] - x_[i - 1];
        const double hr = x_[i + 1] - x_[i];
        sub[i] = hl;
        diag[i] = 2.0 * (hl + hr);
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * (x_[i] - x_[i - 1]);
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        double upper = (i + 2 < n) ? (x_[i + 1] - x_[i]) * m_[i + 1] : 0.0;
        m_[i] = (rhs[i] - upper) / diag[i];
        if (i == 1) break;
    }
}

double CubicSpline::operator()(double t) const {
    const std::size_t n = x_.size();
    if (t <= x_.front()) {
        const double h = x_[1] - x_[0];
        const double slope = (y_[1] - y_[0]) / h - h * (2.0 * m_[0] + m_[1]) / 6.0;
        return y_[0] + slope * (t - x_[0]);
    }
    if (t >= x_.back()) {
        const double h = x_[n - 1] - x_[n - 2];
        const double slope =
            (y_[n - 1] - y_[n - 2]) / h + h * (2.0 * m_[n - 1] + m_[n - 2]) / 6.0;
        return y_[n - 1] + slope * (t - x_[n - 1]);
    }
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (x_[mid] <= t) lo = mid;
        else hi = mid;
    }
    const double h = x_[hi] - x_[lo];
    const double A = (x_[hi] - t) / h;
    const double B = (t - x_[lo]) / h;
    return A * y_[lo] + B * y_[hi] +
           ((A * A * A - A) * m_[lo] + (B * B * B - B) * m_[hi]) * h * h / 6.0;
}

} // namespace conehit
