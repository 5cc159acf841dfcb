#include "conehit/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace conehit {
namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
    if (!j.contains(key))
        throw ConfigError("CONFIG_MISSING_FIELD",
                          std::string("missing field: ") + key);
    return j.at(key);
}

double as_finite_number(const json& j, const std::string& what) {
    if (!j.is_number())
        throw ConfigError("CONFIG_BAD_TYPE", what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw ConfigError("CONFIG_NOT_FINITE", what + " must be finite");
    return v;
}

Vector as_vector(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ConfigError("CONFIG_BAD_TYPE", what + " must be a nonempty array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(i) = as_finite_number(j[i], what);
    return v;
}

Matrix as_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ConfigError("CONFIG_BAD_TYPE", what + " must be an array of rows");
    const std::size_t n = j.size();
    Matrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!j[r].is_array() || j[r].size() != n)
            throw ConfigError("CONFIG_BAD_TYPE", what + " must be square");
        for (std::size_t c = 0; c < n; ++c)
            m(r, c) = as_finite_number(j[r][c], what);
    }
    return m;
}

std::vector<double> as_double_list(const json& j, const std::string& what) {
    const Vector v = as_vector(j, what);
    return std::vector<double>(v.data(), v.data() + v.size());
}

json vec_to_json(const Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json set_to_json(const IndexSet& s) {
    json out = json::array();
    for (int i : s) out.push_back(i);
    return out;
}

json mat_to_json(const Matrix& m) {
    json out = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

ProblemSpec parse_spec(const json& jspec) {
    const int n_cov = jspec.contains("sigma") + jspec.contains("factor") +
                      jspec.contains("correlation");
    if (n_cov != 1)
        throw ConfigError("CONFIG_COVARIANCE",
                          "give exactly one of sigma, factor, correlation");
    const Vector alpha = as_vector(require(jspec, "alpha"), "spec.alpha");
    const Vector mu = as_vector(require(jspec, "mu"), "spec.mu");

    Matrix sigma;
    if (jspec.contains("sigma")) {
        sigma = as_matrix(jspec.at("sigma"), "spec.sigma");
    } else if (jspec.contains("factor")) {
        const Matrix A = as_matrix(jspec.at("factor"), "spec.factor");
        sigma = A * A.transpose();
    } else {
        const Matrix corr = as_matrix(jspec.at("correlation"), "spec.correlation");
        Vector scales = Vector::Ones(corr.rows());
        if (jspec.contains("scales"))
            scales = as_vector(jspec.at("scales"), "spec.scales");
        if (scales.size() != corr.rows())
            throw ConfigError("CONFIG_BAD_TYPE", "spec.scales length mismatch");
        sigma = scales.asDiagonal() * corr * scales.asDiagonal();
    }
    ProblemSpec spec = make_spec(std::move(sigma), alpha, mu);
    if (jspec.contains("cone"))
        spec = apply_cone(spec, as_matrix(jspec.at("cone"), "spec.cone"));
    return spec;
}

struct Outputs {
    std::filesystem::path dir;

    void write_text(const std::string& name, const std::string& text) const {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw IoError("cannot open " + (dir / name).string());
        out << text;
        if (!out) throw IoError("write failed for " + (dir / name).string());
    }
};

std::string format_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

RunMode parse_mode(const std::string& name) {
    if (name == "analyze") return RunMode::analyze;
    if (name == "estimate") return RunMode::estimate;
    if (name == "validate") return RunMode::validate;
    if (name == "oracle") return RunMode::oracle;
    throw ConfigError("CONFIG_BAD_MODE", "unknown mode: " + name);
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("CONFIG_PARSE", e.what());
    }
    RunConfig cfg{parse_spec(require(root, "spec"))};
    cfg.config_hash = fnv1a_hex(text);

    if (root.contains("pickands")) {
        const json& p = root.at("pickands");
        if (p.contains("T_ladder"))
            cfg.pk_T_ladder = as_double_list(p.at("T_ladder"), "pickands.T_ladder");
        if (p.contains("n_steps"))
            cfg.pk_n_steps = static_cast<int>(as_finite_number(p.at("n_steps"),
                                                               "pickands.n_steps"));
        if (p.contains("n_paths"))
            cfg.pk_n_paths = static_cast<long>(as_finite_number(p.at("n_paths"),
                                                                "pickands.n_paths"));
    }
    if (root.contains("u_grid"))
        cfg.u_grid = as_double_list(root.at("u_grid"), "u_grid");
    if (root.contains("sim")) {
        const json& s = root.at("sim");
        if (s.contains("u_ladder"))
            cfg.sim_u_ladder = as_double_list(s.at("u_ladder"), "sim.u_ladder");
        if (s.contains("mode")) {
            const std::string m = s.at("mode").get<std::string>();
            if (m == "crude") cfg.sim_mode = SimMode::crude;
            else if (m == "tilted") cfg.sim_mode = SimMode::tilted;
            else throw ConfigError("CONFIG_BAD_MODE", "sim.mode must be crude|tilted");
        }
        if (s.contains("horizon_factor"))
            cfg.sim_horizon_factor =
                as_finite_number(s.at("horizon_factor"), "sim.horizon_factor");
        if (s.contains("n_steps_per_unit"))
            cfg.sim_steps_per_unit = static_cast<int>(
                as_finite_number(s.at("n_steps_per_unit"), "sim.n_steps_per_unit"));
        if (s.contains("n_paths"))
            cfg.sim_n_paths =
                static_cast<long>(as_finite_number(s.at("n_paths"), "sim.n_paths"));
        if (s.contains("emit_samples"))
            cfg.emit_samples = s.at("emit_samples").get<bool>();
    }
    if (root.contains("seed")) {
        cfg.seed = static_cast<std::uint64_t>(
            as_finite_number(root.at("seed"), "seed"));
        cfg.seed_given = true;
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("CONFIG_UNREADABLE", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

int run(RunMode mode, const RunOptions& opts) {
    Outputs out{std::filesystem::path(opts.out_dir)};
    std::error_code ec;
    std::filesystem::create_directories(out.dir, ec);

    try {
        RunConfig cfg = parse_config_file(opts.config_path);
        std::uint64_t seed;
        if (opts.seed) {
            seed = *opts.seed;
        } else if (cfg.seed_given) {
            seed = cfg.seed;
        } else {
            seed = std::random_device{}();
            std::cout << "generated seed: " << seed << "\n";
        }
        int workers = opts.workers.value_or(1);
        if (const char* env = std::getenv("CONEHIT_WORKERS"))
            workers = std::max(1, std::atoi(env));

        const MvnOptions mvn_opts{seed};
        const GAnalysis an = minimize_g(cfg.spec);
        const int m = static_cast<int>(an.qp_at_t0.essential.size());

        json report;
        report["version"] = "0.1.0";
        report["mode"] = mode == RunMode::analyze    ? "analyze"
                         : mode == RunMode::estimate ? "estimate"
                         : mode == RunMode::validate ? "validate"
                                                     : "oracle";
        report["config_hash"] = cfg.config_hash;
        report["seed"] = seed;
        report["workers"] = workers;
        report["inputs"] = {{"sigma", mat_to_json(cfg.spec.sigma.entries())},
                            {"alpha", vec_to_json(cfg.spec.alpha)},
                            {"mu", vec_to_json(cfg.spec.mu)}};

        report["qp"] = {{"b_tilde", vec_to_json(an.qp_at_t0.b_tilde)},
                        {"essential", set_to_json(an.qp_at_t0.essential)},
                        {"weakly_essential", set_to_json(an.qp_at_t0.weakly_essential)},
                        {"unessential", set_to_json(an.qp_at_t0.unessential)},
                        {"value", an.qp_at_t0.value},
                        {"lambda", vec_to_json(an.qp_at_t0.lambda)}};
        json segs = json::array();
        for (const Segment& s : an.segments)
            segs.push_back({{"lo", s.lo},
                            {"hi", std::isinf(s.hi) ? json() : json(s.hi)},
                            {"index_set", set_to_json(s.index_set)},
                            {"a", s.a},
                            {"c2", s.c2},
                            {"c", s.c}});
        report["g"] = {{"t0", an.t0},
                       {"ghat", an.ghat},
                       {"gtilde", an.gtilde},
                       {"b", vec_to_json(an.b)},
                       {"segments", segs},
                       {"at_breakpoint", an.at_breakpoint},
                       {"breakpoint_margin",
                        std::isinf(an.breakpoint_margin) ? json()
                                                         : json(an.breakpoint_margin)}};

        // Constant H: exact for m = 1, Monte Carlo when estimating, lower
        // bound as a placeholder in the purely analytic modes.
        PickandsEstimate pk;
        std::string h_source;
        const double lb = lower_bound_H(an);
        if (m == 1) {
            h_source = "exact";
        } else if (mode == RunMode::estimate || mode == RunMode::validate) {
            PickandsInput inp = pickands_input_from(an, cfg.pk_T_ladder.back(),
                                                    cfg.pk_n_steps, cfg.pk_n_paths,
                                                    seed);
            inp.n_workers = workers;
            pk = estimate_H(inp, cfg.pk_T_ladder);
            h_source = "monte_carlo";
        } else {
            pk.HT_over_T = lb;
            pk.HT_over_T_stderr = 0.0;
            h_source = "lower_bound";
        }
        AsymptoticResult ar = assemble(an, pk, mvn_opts);

        report["classification"] = to_string(ar.classification);
        report["C_I"] = ar.C_I;
        json hj = {{"value", ar.H_I.HT_over_T},
                   {"stderr", ar.H_I.HT_over_T_stderr},
                   {"lower_bound", lb},
                   {"source", m == 1 ? "exact" : h_source}};
        if (!ar.H_I.ladder_T.empty()) {
            hj["ladder_T"] = ar.H_I.ladder_T;
            hj["ladder_value"] = ar.H_I.ladder_value;
            hj["ladder_stderr"] = ar.H_I.ladder_stderr;
        }
        report["H"] = hj;

        json table = json::array();
        for (double u : cfg.u_grid)
            table.push_back({{"u", u},
                             {"p", ar.evaluate(u)},
                             {"lo", ar.evaluate_lo(u)},
                             {"hi", ar.evaluate_hi(u)}});
        report["evaluator"] = table;

        if (mode == RunMode::oracle) {
            json oj;
            AsymptoticResult orc = [&] {
                try {
                    oj["family"] = "two_dimensional";
                    return oracle_2d(cfg.spec);
                } catch (const OutOfScope2D&) {}
                try {
                    oj["family"] = "independent";
                    return oracle_independent(cfg.spec);
                } catch (const OutOfScopeIndependent&) {}
                oj["family"] = "negatively_associated";
                try {
                    return oracle_negassoc(cfg.spec);
                } catch (const OutOfScopeNegAssoc&) {
                    throw Error("ORACLE_NONE_APPLIES",
                                "no closed-form family matches this input");
                }
            }();
            auto rel = [](double a, double b) {
                return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
            };
            const bool sets_ok =
                orc.analysis.qp_at_t0.essential == an.qp_at_t0.essential &&
                orc.analysis.qp_at_t0.weakly_essential == an.qp_at_t0.weakly_essential &&
                orc.analysis.qp_at_t0.unessential == an.qp_at_t0.unessential;
            const bool reals_ok = rel(orc.analysis.t0, an.t0) <= 1e-8 &&
                                  rel(orc.analysis.ghat, an.ghat) <= 1e-8 &&
                                  rel(orc.analysis.gtilde, an.gtilde) <= 1e-8;
            const bool ci_ok = rel(orc.C_I, ar.C_I) <= 1e-6;
            oj["t0"] = orc.analysis.t0;
            oj["ghat"] = orc.analysis.ghat;
            oj["gtilde"] = orc.analysis.gtilde;
            oj["C_I"] = orc.C_I;
            oj["classification"] = to_string(orc.classification);
            oj["agrees"] = sets_ok && reals_ok && ci_ok;
            report["oracle"] = oj;
            if (!(sets_ok && reals_ok && ci_ok))
                throw Error("ORACLE_MISMATCH",
                            "general pipeline disagrees with the closed form: " +
                                oj.dump());
            if (orc.m == 1) {
                // Exact evaluator available; refresh the table from it.
                json otable = json::array();
                for (double u : cfg.u_grid)
                    otable.push_back({{"u", u}, {"p", orc.evaluate(u)}});
                report["evaluator_oracle"] = otable;
            }
        }

        std::vector<ValidationRow> rows;
        if (mode == RunMode::validate) {
            SimConfig base;
            base.horizon_factor = cfg.sim_horizon_factor;
            base.n_steps_per_unit = cfg.sim_steps_per_unit;
            base.n_paths = cfg.sim_n_paths;
            base.seed = seed;
            base.mode = cfg.sim_mode;
            base.n_workers = workers;
            rows = validate_theorem1(cfg.spec, ar, cfg.sim_u_ladder, base);
            json t1 = json::array();
            for (const ValidationRow& r : rows)
                t1.push_back({{"u", r.u},
                              {"p_hat", r.p_hat},
                              {"stderr", r.stderr_},
                              {"predicted", r.predicted},
                              {"band_lo", r.band_lo},
                              {"band_hi", r.band_hi},
                              {"ratio", r.ratio}});
            report["theorem1"] = t1;

            const PassageTimeLaw law = passage_time_law(an, mvn_opts);
            SimConfig t2cfg = base;
            t2cfg.u = cfg.sim_u_ladder.back();
            json t2;
            try {
                const SimEstimate est = simulate_P(cfg.spec, t2cfg);
                if (est.n_hits < 200)
                    throw TooFewHits("fewer than 200 hitting paths");
                std::vector<double> xs(est.taus.size());
                for (std::size_t i = 0; i < xs.size(); ++i)
                    xs[i] = law.standardize(est.taus[i], t2cfg.u);
                const double ks = weighted_ks(xs, est.weights,
                                              [&](double s) { return law.cdf(s); });
                t2["u"] = t2cfg.u;
                t2["ks"] = ks;
                t2["n_hits"] = est.n_hits;
                t2["gaussian_limit"] = law.gaussian;

                std::string csv = "s,F_limit,F_empirical\n";
                std::vector<std::size_t> order(xs.size());
                std::iota(order.begin(), order.end(), 0);
                std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
                    return xs[i] < xs[j];
                });
                double total = 0.0;
                for (double w : est.weights) total += w;
                const int n_grid = 81;
                std::size_t pos = 0;
                double cum = 0.0;
                for (int gi = 0; gi < n_grid; ++gi) {
                    const double s = -4.0 + 8.0 * gi / (n_grid - 1);
                    while (pos < order.size() && xs[order[pos]] <= s)
                        cum += est.weights[order[pos++]];
                    csv += format_row({num(s), num(law.cdf(s)), num(cum / total)});
                }
                out.write_text("passage.csv", csv);
                if (cfg.emit_samples)
                    write_samples_csv((out.dir / "samples.csv").string(), est);
            } catch (const Error& e) {
                t2["skipped"] = e.code();
                t2["message"] = e.what();
            }
            report["theorem2"] = t2;
        }

        {
            std::string csv = "u,p_pred,band_lo,band_hi,p_hat,stderr\n";
            if (mode == RunMode::validate) {
                for (const ValidationRow& r : rows)
                    csv += format_row({num(r.u), num(r.predicted), num(r.band_lo),
                                       num(r.band_hi), num(r.p_hat), num(r.stderr_)});
            } else {
                for (double u : cfg.u_grid)
                    csv += format_row({num(u), num(ar.evaluate(u)),
                                       num(ar.evaluate_lo(u)),
                                       num(ar.evaluate_hi(u)), "", ""});
            }
            out.write_text("curve.csv", csv);
        }
        out.write_text("report.json", report.dump(2) + "\n");
        return 0;
    } catch (const Error& e) {
        json err = {{"error", {{"code", e.code()}, {"message", e.what()}}}};
        out.write_text("error.json", err.dump(2) + "\n");
        std::cerr << err.dump() << "\n";
        return e.code().rfind("CONFIG_", 0) == 0 ? 2 : 1;
    } catch (const std::exception& e) {
        json err = {{"error", {{"code", "INTERNAL"}, {"message", e.what()}}}};
        out.write_text("error.json", err.dump(2) + "\n");
        std::cerr << err.dump() << "\n";
        return 1;
    }
}

} // namespace conehit
