#include "conehit/path_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "conehit/rng.hpp"

namespace conehit {
namespace {

bool all_above(const Vector& x, const Vector& bound) {
    for (int i = 0; i < x.size(); ++i)
        if (!(x(i) > bound(i))) return false;
    return true;
}

} // namespace

SimEstimate simulate_P(const ProblemSpec& spec, const SimConfig& cfg) {
    if (!(cfg.u > 0.0)) throw InvalidConfig("simulate_P: u must be positive");
    if (cfg.horizon_factor < 2.0)
        throw InvalidConfig("simulate_P: horizon_factor must be >= 2");
    if (cfg.n_steps_per_unit < 1 || cfg.n_paths < 1)
        throw InvalidConfig("simulate_P: invalid grid or path count");

    const int d = spec.dim();
    const GAnalysis analysis = minimize_g(spec);
    const double dt = 1.0 / cfg.n_steps_per_unit;
    const double horizon = cfg.horizon_factor * analysis.t0 * cfg.u;
    const long n_steps = std::max<long>(1, std::lround(std::ceil(horizon / dt)));
    const Matrix L = spec.sigma.chol() * std::sqrt(dt);
    const Vector target = cfg.u * spec.alpha;

    const bool tilted = cfg.mode == SimMode::tilted;
    // Tilt toward the most likely crossing path: constant drift b_tilde / t0,
    // kept active until the hit (or the horizon) and corrected with the
    // Girsanov likelihood ratio at the hitting time. The first-order
    // condition at t0 makes theta . (alpha u + mu t) - half_quad t constant
    // in t, so hit weights are nearly deterministic; switching the drift off
    // at t0 u instead leaves late hits with exploding weight variance.
    const Vector c = analysis.qp_at_t0.b_tilde / analysis.t0;
    const Vector theta = spec.sigma.solve(c);
    const double half_quad = 0.5 * c.dot(theta);

    std::vector<double> values(cfg.n_paths, 0.0);
    std::vector<double> taus_all(cfg.n_paths, -1.0);
    std::vector<double> logw_all(cfg.n_paths, 0.0);

    const long block = static_cast<long>(kAccumBlock);
    const long n_blocks = (cfg.n_paths + block - 1) / block;
    std::atomic<long> next_block{0};
    std::exception_ptr worker_error;
    std::mutex err_mutex;

    auto worker = [&]() {
        try {
            Vector z(d), x(d), shifted(d);
            for (;;) {
                const long blk = next_block.fetch_add(1);
                if (blk >= n_blocks) break;
                const long lo = blk * block;
                const long hi = std::min(cfg.n_paths, lo + block);
                for (long path = lo; path < hi; ++path) {
                    Rng rng(cfg.seed, static_cast<std::uint64_t>(path));
                    x.setZero();
                    for (long k = 1; k <= n_steps; ++k) {
                        for (int i = 0; i < d; ++i) z(i) = rng.normal();
                        x.noalias() += L * z;
                        if (tilted) x += dt * c;
                        const double t = k * dt;
                        shifted = x - t * spec.mu;
                        if (all_above(shifted, target)) {
                            taus_all[path] = t;
                            if (tilted) {
                                const double logw =
                                    -theta.dot(x) + half_quad * t;
                                logw_all[path] = logw;
                                values[path] = std::exp(logw);
                            } else {
                                values[path] = 1.0;
                            }
                            break;
                        }
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!worker_error) worker_error = std::current_exception();
        }
    };

    const int n_workers = std::max(1, cfg.n_workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (worker_error) std::rethrow_exception(worker_error);

    SimEstimate est;
    est.n_paths = cfg.n_paths;
    const MeanStderr ms = mean_stderr(values);
    est.p_hat = ms.mean;
    est.stderr_ = ms.stderr_;
    double wsum = 0.0, wsq = 0.0;
    for (long p = 0; p < cfg.n_paths; ++p) {
        if (taus_all[p] < 0.0) continue;
        est.hit_ids.push_back(p);
        est.taus.push_back(taus_all[p]);
        const double w = tilted ? std::exp(logw_all[p]) : 1.0;
        est.weights.push_back(w);
        wsum += w;
        wsq += w * w;
    }
    est.n_hits = static_cast<long>(est.taus.size());
    est.ess = wsq > 0.0 ? wsum * wsum / wsq : 0.0;
    if (tilted && est.ess < 50.0)
        throw EffectiveSampleTooSmall(
            "simulate_P: tilted estimator effective sample size below 50");
    return est;
}

std::vector<ValidationRow> validate_theorem1(const ProblemSpec& spec,
                                             const AsymptoticResult& ar,
                                             const std::vector<double>& u_ladder,
                                             SimConfig base) {
    std::vector<ValidationRow> rows;
    for (double u : u_ladder) {
        SimConfig cfg = base;
        cfg.u = u;
        const SimEstimate est = simulate_P(spec, cfg);
        ValidationRow row;
        row.u = u;
        row.p_hat = est.p_hat;
        row.stderr_ = est.stderr_;
        row.predicted = ar.evaluate(u);
        row.band_lo = ar.evaluate_lo(u);
        row.band_hi = ar.evaluate_hi(u);
        row.ratio = row.predicted > 0.0 ? est.p_hat / row.predicted : 0.0;
        rows.push_back(row);
    }
    return rows;
}

double weighted_ks(std::vector<double> xs, std::vector<double> ws,
                   const std::function<double(double)>& cdf) {
    if (xs.size() != ws.size() || xs.empty())
        throw InvalidConfig("weighted_ks: need matching nonempty samples");
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
    double total = 0.0;
    for (double w : ws) total += w;
    if (!(total > 0.0)) throw InvalidConfig("weighted_ks: weights sum to zero");
    double cum = 0.0, ks = 0.0;
    for (std::size_t i : order) {
        const double f = cdf(xs[i]);
        ks = std::max(ks, std::abs(cum / total - f));
        cum += ws[i];
        ks = std::max(ks, std::abs(cum / total - f));
    }
    return ks;
}

std::pair<double, long> validate_theorem2(const ProblemSpec& spec,
                                          const PassageTimeLaw& law,
                                          const SimConfig& cfg) {
    const SimEstimate est = simulate_P(spec, cfg);
    if (est.n_hits < 200)
        throw TooFewHits("validate_theorem2: fewer than 200 hitting paths");
    std::vector<double> xs(est.taus.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = law.standardize(est.taus[i], cfg.u);
    const double ks =
        weighted_ks(std::move(xs), est.weights, [&](double s) { return law.cdf(s); });
    return {ks, est.n_hits};
}

void write_samples_csv(const std::string& path, const SimEstimate& est) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_samples_csv: cannot open " + path);
    out << "path_id,hit,tau,log_likelihood_ratio\n";
    out.precision(17);
    std::size_t next = 0;
    for (long p = 0; p < est.n_paths; ++p) {
        if (next < est.hit_ids.size() && est.hit_ids[next] == p) {
            out << p << ",1," << est.taus[next] << ','
                << std::log(est.weights[next]) << '\n';
            ++next;
        } else {
            out << p << ",0,,\n";
        }
    }
    if (!out) throw IoError("write_samples_csv: write failed for " + path);
}

} // namespace conehit
