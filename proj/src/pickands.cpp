#include "conehit/pickands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "conehit/rng.hpp"
#include "conehit/stats.hpp"

namespace conehit {
namespace {

using Pt = std::vector<double>;

bool dominates_eq(const Pt& a, const Pt& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] < b[i]) return false;
    return true;
}

bool dominates_eq(const Pt& a, const double* b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] < b[i]) return false;
    return true;
}

bool dominates_eq(const double* a, const Pt& b) {
    for (std::size_t i = 0; i < b.size(); ++i)
        if (a[i] < b[i]) return false;
    return true;
}

std::vector<Pt> pareto_prune(const std::vector<Pt>& pts) {
    std::vector<Pt> out;
    for (const Pt& p : pts) {
        bool covered = false;
        for (auto it = out.begin(); it != out.end();) {
            if (dominates_eq(*it, p)) {
                covered = true;
                break;
            }
            if (dominates_eq(p, *it))
                it = out.erase(it);
            else
                ++it;
        }
        if (!covered) out.push_back(p);
    }
    return out;
}

/// Keep a point set Pareto-maximal while appending one point at a time.
void front_add(std::vector<Pt>& front, const double* w, int m) {
    for (auto it = front.begin(); it != front.end();) {
        if (dominates_eq(*it, w)) return;
        if (dominates_eq(w, *it))
            it = front.erase(it);
        else
            ++it;
    }
    front.emplace_back(w, w + m);
}

// Recursive slicing over exclusive contributions (WFG scheme). Points must
// be nonnegative; pruning keeps the recursion shallow.
double hv_rec(std::vector<Pt> pts) {
    pts = pareto_prune(pts);
    if (pts.empty()) return 0.0;
    const std::size_t m = pts[0].size();
    if (m == 1) {
        double mx = 0.0;
        for (const Pt& p : pts) mx = std::max(mx, p[0]);
        return mx;
    }
    if (m == 2) {
        std::sort(pts.begin(), pts.end(),
                  [](const Pt& a, const Pt& b) { return a[0] > b[0]; });
        double area = 0.0, y_prev = 0.0;
        for (const Pt& p : pts) {
            area += p[0] * (p[1] - y_prev);
            y_prev = p[1];
        }
        return area;
    }
    std::sort(pts.begin(), pts.end(),
              [m](const Pt& a, const Pt& b) { return a[m - 1] > b[m - 1]; });
    double total = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        double vol = 1.0;
        for (double v : pts[k]) vol *= v;
        std::vector<Pt> limited;
        limited.reserve(pts.size() - k - 1);
        for (std::size_t j = k + 1; j < pts.size(); ++j) {
            Pt q(m);
            for (std::size_t i = 0; i < m; ++i)
                q[i] = std::min(pts[j][i], pts[k][i]);
            limited.push_back(std::move(q));
        }
        total += vol - hv_rec(std::move(limited));
    }
    return total;
}

double integral_of_front(const std::vector<Pt>& front, const Vector& a) {
    if (front.empty()) return 0.0;
    const int m = static_cast<int>(a.size());
    Pt wbar(m, -std::numeric_limits<double>::infinity());
    for (const Pt& p : front)
        for (int i = 0; i < m; ++i) wbar[i] = std::max(wbar[i], p[i]);
    double log_scale = 0.0;
    for (int i = 0; i < m; ++i) log_scale += a(i) * wbar[i] - std::log(a(i));
    if (log_scale > 700.0)
        throw Overflow("weighted_lower_set_integral: exponent out of range");
    std::vector<Pt> u(front.size(), Pt(m));
    for (std::size_t k = 0; k < front.size(); ++k)
        for (int i = 0; i < m; ++i)
            u[k][i] = std::exp(a(i) * (front[k][i] - wbar[i]));
    return std::exp(log_scale) * hv_rec(std::move(u));
}

void check_weights(const Vector& a) {
    if (a.size() < 1 || (a.array() <= 0.0).any())
        throw InvalidConfig("weights must be strictly positive");
}

/// First-crossing decomposition of the running-supremum functional with an
/// exponential change of measure per term. The target
///   HT = int e^{a.x} P{exists k <= K: W(t_k) > x} dx
/// splits over the first grid index whose point exceeds x; recentering each
/// term by e^{a.W(t_k)} (Cameron-Martin shift Sigma a min(s, t_k)) turns it
/// into
///   HT = 1/prod(a) + sum_k e^{kappa t_k} E[(1/prod(a)) (1 - Vol(U_k))],
/// kappa = a.Sigma a / 2 - a.mu, where Vol(U_k) is the volume of the union
/// of boxes [0, z_j], z_j = min(1, e^{-a o (U(t_k) - U(t_j))}), j < k, along
/// a single path U with drift Sigma a - mu. Every term is bounded by
/// 1/prod(a), unlike the plain average of e^{a.sup} whose sample mean
/// saturates near (log n_paths)/a at the critical weights a = 2 Sigma^-1 mu
/// that the analysis produces. The inner index k is sampled by strata so a
/// path costs O(strata * K) instead of O(K^2); the estimator stays exactly
/// unbiased for the grid functional.
std::vector<std::vector<double>> simulate_crossing_values(
    const PickandsInput& inp, const std::vector<long>& ckpt_steps, double dt) {
    check_weights(inp.a);
    const int m = static_cast<int>(inp.a.size());
    if (inp.sigma_II.dim() != m || inp.mu_I.size() != m)
        throw InvalidConfig("estimator input: dimension mismatch");
    if (ckpt_steps.empty() || ckpt_steps.front() < 1)
        throw InvalidGrid("estimator input: need at least one step");
    if (inp.n_paths < 1) throw InvalidConfig("estimator input: n_paths >= 1");

    const long total_steps = ckpt_steps.back();
    const Matrix L = inp.sigma_II.chol() * std::sqrt(dt);
    const Vector sig_a = inp.sigma_II.entries() * inp.a;
    const double kappa = 0.5 * inp.a.dot(sig_a) - inp.a.dot(inp.mu_I);
    if (kappa * dt * static_cast<double>(total_steps) > 700.0)
        throw Overflow("estimate_HT: supercritical weights overflow the "
                       "exponent range");
    const Vector drift = dt * (sig_a - inp.mu_I);
    double inv_prod_a = 1.0;
    for (int i = 0; i < m; ++i) inv_prod_a /= inp.a(i);
    const long n_strata = 8;

    std::vector<std::vector<double>> values(
        ckpt_steps.size(), std::vector<double>(inp.n_paths, 0.0));

    const long n_blocks =
        (inp.n_paths + static_cast<long>(kAccumBlock) - 1) /
        static_cast<long>(kAccumBlock);
    std::atomic<long> next_block{0};
    std::exception_ptr worker_error;
    std::mutex err_mutex;

    auto worker = [&]() {
        try {
            Vector z(m);
            std::vector<double> path(static_cast<std::size_t>(total_steps + 1) * m);
            std::vector<Pt> front;
            Pt zbox(m);
            for (;;) {
                const long blk = next_block.fetch_add(1);
                if (blk >= n_blocks) break;
                const long lo = blk * static_cast<long>(kAccumBlock);
                const long hi =
                    std::min(inp.n_paths, lo + static_cast<long>(kAccumBlock));
                for (long p = lo; p < hi; ++p) {
                    Rng rng(inp.seed, static_cast<std::uint64_t>(p));
                    Eigen::Map<Matrix> U(path.data(), m, total_steps + 1);
                    U.col(0).setZero();
                    for (long k = 1; k <= total_steps; ++k) {
                        for (int i = 0; i < m; ++i) z(i) = rng.normal();
                        U.col(k) = U.col(k - 1) + drift;
                        U.col(k).noalias() += L * z;
                    }
                    for (std::size_t ci = 0; ci < ckpt_steps.size(); ++ci) {
                        const long K = ckpt_steps[ci];
                        const long R = std::min(n_strata, K);
                        double value = inv_prod_a; // first-index term, t = 0
                        for (long e = 0; e < R; ++e) {
                            const long b0 = K * e / R, b1 = K * (e + 1) / R;
                            const long n_e = b1 - b0;
                            const long k =
                                b0 + 1 +
                                static_cast<long>(rng.uniform() *
                                                  static_cast<double>(n_e));
                            front.clear();
                            for (long j = 0; j < k; ++j) {
                                bool all_one = true;
                                for (int i = 0; i < m; ++i) {
                                    const double c = U(i, k) - U(i, j);
                                    zbox[i] = c <= 0.0 ? 1.0
                                                       : std::exp(-inp.a(i) * c);
                                    if (zbox[i] < 1.0) all_one = false;
                                }
                                if (all_one) {
                                    front.clear();
                                    front.push_back(zbox);
                                    break;
                                }
                                front_add(front, zbox.data(), m);
                            }
                            const double miss = 1.0 - hv_rec(front);
                            if (miss <= 0.0) continue;
                            value += static_cast<double>(n_e) *
                                     std::exp(kappa * dt *
                                              static_cast<double>(k)) *
                                     inv_prod_a * miss;
                        }
                        values[ci][p] = value;
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!worker_error) worker_error = std::current_exception();
        }
    };

    const int n_workers = std::max(1, inp.n_workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (worker_error) std::rethrow_exception(worker_error);
    return values;
}

/// Per-path exact integrals evaluated at cumulative step counts
/// ckpt_steps[0] < ... < ckpt_steps.back(); returns values[ckpt][path].
/// Paths are keyed by path id, and results land in a preallocated slot, so
/// the outcome is identical for any worker count.
std::vector<std::vector<double>> simulate_integrals(
    const PickandsInput& inp, const std::vector<long>& ckpt_steps, double dt) {
    check_weights(inp.a);
    const int m = static_cast<int>(inp.a.size());
    if (inp.sigma_II.dim() != m || inp.mu_I.size() != m)
        throw InvalidConfig("estimator input: dimension mismatch");
    if (ckpt_steps.empty() || ckpt_steps.front() < 1)
        throw InvalidGrid("estimator input: need at least one step");
    if (inp.n_paths < 1) throw InvalidConfig("estimator input: n_paths >= 1");

    const long total_steps = ckpt_steps.back();
    const Matrix L = inp.sigma_II.chol() * std::sqrt(dt);
    const Vector drift = -dt * inp.mu_I;

    std::vector<std::vector<double>> values(
        ckpt_steps.size(), std::vector<double>(inp.n_paths, 0.0));

    const long n_blocks =
        (inp.n_paths + static_cast<long>(kAccumBlock) - 1) / static_cast<long>(kAccumBlock);
    std::atomic<long> next_block{0};
    std::exception_ptr worker_error;
    std::mutex err_mutex;

    auto worker = [&]() {
        try {
            Vector z(m), w(m);
            std::vector<Pt> front;
            for (;;) {
                const long blk = next_block.fetch_add(1);
                if (blk >= n_blocks) break;
                const long lo = blk * static_cast<long>(kAccumBlock);
                const long hi = std::min(inp.n_paths, lo + static_cast<long>(kAccumBlock));
                for (long path = lo; path < hi; ++path) {
                    Rng rng(inp.seed, static_cast<std::uint64_t>(path));
                    w.setZero();
                    front.clear();
                    if (inp.include_origin) front.emplace_back(m, 0.0);
                    std::size_t ci = 0;
                    for (long k = 1; k <= total_steps; ++k) {
                        for (int i = 0; i < m; ++i) z(i) = rng.normal();
                        w += drift;
                        w.noalias() += L * z;
                        front_add(front, w.data(), m);
                        while (ci < ckpt_steps.size() && k == ckpt_steps[ci]) {
                            values[ci][path] = integral_of_front(front, inp.a);
                            ++ci;
                        }
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!worker_error) worker_error = std::current_exception();
        }
    };

    const int n_workers = std::max(1, inp.n_workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (worker_error) std::rethrow_exception(worker_error);
    return values;
}

} // namespace

double hypervolume_origin(std::vector<std::vector<double>> points) {
    for (const Pt& p : points)
        for (double v : p)
            if (!(v >= 0.0))
                throw InvalidConfig("hypervolume_origin: coordinates must be >= 0");
    return hv_rec(std::move(points));
}

double weighted_lower_set_integral(const std::vector<Vector>& points,
                                   const Vector& a) {
    check_weights(a);
    std::vector<Pt> pts;
    pts.reserve(points.size());
    for (const Vector& p : points) {
        if (p.size() != a.size())
            throw InvalidConfig("weighted_lower_set_integral: dimension mismatch");
        pts.emplace_back(p.data(), p.data() + p.size());
    }
    return integral_of_front(pareto_prune(pts), a);
}

PickandsEstimate estimate_HT(const PickandsInput& inp) {
    if (inp.n_steps < 1) throw InvalidGrid("estimate_HT: n_steps >= 1");
    if (!(inp.T > 0.0)) throw InvalidConfig("estimate_HT: T > 0");
    const double dt = inp.T / inp.n_steps;
    const auto values = inp.include_origin
                            ? simulate_crossing_values(inp, {inp.n_steps}, dt)
                            : simulate_integrals(inp, {inp.n_steps}, dt);
    const MeanStderr ms = mean_stderr(values[0]);
    PickandsEstimate est;
    est.HT = ms.mean;
    est.stderr_ = ms.stderr_;
    est.T = inp.T;
    est.HT_over_T = ms.mean / inp.T;
    est.HT_over_T_stderr = ms.stderr_ / inp.T;
    est.lower_bound = lower_bound_H(inp);
    est.n_effective = inp.n_paths;
    return est;
}

PickandsEstimate estimate_H(const PickandsInput& base,
                            const std::vector<double>& T_ladder) {
    if (T_ladder.size() < 2)
        throw InvalidConfig("estimate_H: ladder needs at least two horizons");
    for (std::size_t i = 1; i < T_ladder.size(); ++i)
        if (!(T_ladder[i] > T_ladder[i - 1]))
            throw InvalidConfig("estimate_H: ladder must be strictly increasing");
    if (base.n_steps < 1) throw InvalidGrid("estimate_H: n_steps >= 1");
    if (!base.include_origin)
        throw InvalidConfig("estimate_H: requires the full supremum functional");

    // One simulation at the top horizon; smaller horizons are prefixes of the
    // same paths, which couples the ladder and makes the trend test sharp.
    const double T_max = T_ladder.back();
    const double dt = T_max / base.n_steps;
    std::vector<long> ckpt_steps;
    for (double T : T_ladder) {
        const long k = std::lround(T / dt);
        if (k < 1 || std::abs(k * dt - T) > 1e-9 * T)
            throw InvalidGrid("estimate_H: ladder horizons must be grid-aligned");
        ckpt_steps.push_back(k);
    }
    const auto values = simulate_crossing_values(base, ckpt_steps, dt);

    PickandsEstimate est;
    for (std::size_t i = 0; i < T_ladder.size(); ++i) {
        const MeanStderr ms = mean_stderr(values[i]);
        est.ladder_T.push_back(T_ladder[i]);
        est.ladder_value.push_back(ms.mean / T_ladder[i]);
        est.ladder_stderr.push_back(ms.stderr_ / T_ladder[i]);
        if (i + 1 == T_ladder.size()) {
            est.HT = ms.mean;
            est.stderr_ = ms.stderr_;
            est.T = T_ladder[i];
            est.HT_over_T = ms.mean / T_ladder[i];
            est.HT_over_T_stderr = ms.stderr_ / T_ladder[i];
        }
    }
    for (std::size_t i = 1; i < est.ladder_value.size(); ++i) {
        const double rise = est.ladder_value[i] - est.ladder_value[i - 1];
        const double se = std::sqrt(est.ladder_stderr[i] * est.ladder_stderr[i] +
                                    est.ladder_stderr[i - 1] * est.ladder_stderr[i - 1]);
        if (rise > 3.0 * se)
            throw NonConvergent("estimate_H: HT/T increased along the ladder "
                                "beyond Monte Carlo error");
    }
    est.lower_bound = lower_bound_H(base);
    est.n_effective = base.n_paths;
    return est;
}

double lower_bound_H(const PickandsInput& inp) {
    check_weights(inp.a);
    double prod = 1.0;
    for (int i = 0; i < inp.a.size(); ++i) prod *= inp.a(i);
    return inp.mu_I.dot(inp.a) / (16.0 * prod);
}

double lower_bound_H(const GAnalysis& analysis) {
    PickandsInput inp = pickands_input_from(analysis, 1.0, 1, 1, 1);
    return lower_bound_H(inp);
}

PickandsInput pickands_input_from(const GAnalysis& analysis, double T,
                                  int n_steps, long n_paths,
                                  std::uint64_t seed) {
    const IndexSet& I = analysis.qp_at_t0.essential;
    PickandsInput inp{PDMatrix(analysis.spec.sigma.sub(I)),
                      gather(analysis.spec.mu, I),
                      analysis.qp_at_t0.lambda / analysis.t0};
    inp.T = T;
    inp.n_steps = n_steps;
    inp.n_paths = n_paths;
    inp.seed = seed;
    return inp;
}

double single_time_value(const PickandsInput& inp) {
    check_weights(inp.a);
    double prod = 1.0;
    for (int i = 0; i < inp.a.size(); ++i) prod *= inp.a(i);
    return 1.0 / prod;
}

} // namespace conehit
