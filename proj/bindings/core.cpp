#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "conehit/path_sim.hpp"
#include "conehit/report.hpp"

namespace py = pybind11;
using namespace conehit;

PYBIND11_MODULE(_core, m) {
    m.doc() = "hitting asymptotics for correlated Brownian motion with drift";

    py::register_exception<Error>(m, "ConehitError");

    py::class_<QpSolution>(m, "QpSolution")
        .def_readonly("b_tilde", &QpSolution::b_tilde)
        .def_readonly("essential", &QpSolution::essential)
        .def_readonly("weakly_essential", &QpSolution::weakly_essential)
        .def_readonly("unessential", &QpSolution::unessential)
        .def_readonly("value", &QpSolution::value)
        .def_readonly("lambda_", &QpSolution::lambda);

    py::class_<Segment>(m, "Segment")
        .def_readonly("lo", &Segment::lo)
        .def_readonly("hi", &Segment::hi)
        .def_readonly("index_set", &Segment::index_set)
        .def_readonly("a", &Segment::a)
        .def_readonly("c2", &Segment::c2)
        .def_readonly("c", &Segment::c);

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def_property_readonly(
            "sigma", [](const ProblemSpec& s) { return s.sigma.entries(); })
        .def_readonly("alpha", &ProblemSpec::alpha)
        .def_readonly("mu", &ProblemSpec::mu)
        .def_property_readonly("dim", &ProblemSpec::dim);

    py::class_<GAnalysis>(m, "GAnalysis")
        .def_readonly("spec", &GAnalysis::spec)
        .def_readonly("segments", &GAnalysis::segments)
        .def_readonly("t0", &GAnalysis::t0)
        .def_readonly("ghat", &GAnalysis::ghat)
        .def_readonly("gtilde", &GAnalysis::gtilde)
        .def_readonly("b", &GAnalysis::b)
        .def_readonly("qp_at_t0", &GAnalysis::qp_at_t0)
        .def_readonly("at_breakpoint", &GAnalysis::at_breakpoint)
        .def_readonly("breakpoint_margin", &GAnalysis::breakpoint_margin);

    py::class_<PickandsEstimate>(m, "PickandsEstimate")
        .def_readonly("HT", &PickandsEstimate::HT)
        .def_readonly("stderr", &PickandsEstimate::stderr_)
        .def_readonly("T", &PickandsEstimate::T)
        .def_readonly("HT_over_T", &PickandsEstimate::HT_over_T)
        .def_readonly("HT_over_T_stderr", &PickandsEstimate::HT_over_T_stderr)
        .def_readonly("lower_bound", &PickandsEstimate::lower_bound)
        .def_readonly("n_effective", &PickandsEstimate::n_effective)
        .def_readonly("ladder_T", &PickandsEstimate::ladder_T)
        .def_readonly("ladder_value", &PickandsEstimate::ladder_value)
        .def_readonly("ladder_stderr", &PickandsEstimate::ladder_stderr);

    py::class_<AsymptoticResult>(m, "AsymptoticResult")
        .def_readonly("analysis", &AsymptoticResult::analysis)
        .def_readonly("m", &AsymptoticResult::m)
        .def_readonly("C_I", &AsymptoticResult::C_I)
        .def_readonly("H_I", &AsymptoticResult::H_I)
        .def_property_readonly(
            "classification",
            [](const AsymptoticResult& r) { return to_string(r.classification); })
        .def("evaluate", &AsymptoticResult::evaluate)
        .def("evaluate_lo", &AsymptoticResult::evaluate_lo)
        .def("evaluate_hi", &AsymptoticResult::evaluate_hi);

    py::class_<PassageTimeLaw>(m, "PassageTimeLaw")
        .def_readonly("t0", &PassageTimeLaw::t0)
        .def_readonly("gtilde", &PassageTimeLaw::gtilde)
        .def_readonly("gaussian", &PassageTimeLaw::gaussian)
        .def("cdf", &PassageTimeLaw::cdf)
        .def("standardize", &PassageTimeLaw::standardize);

    py::class_<SimEstimate>(m, "SimEstimate")
        .def_readonly("p_hat", &SimEstimate::p_hat)
        .def_readonly("stderr", &SimEstimate::stderr_)
        .def_readonly("n_hits", &SimEstimate::n_hits)
        .def_readonly("n_paths", &SimEstimate::n_paths)
        .def_readonly("taus", &SimEstimate::taus)
        .def_readonly("weights", &SimEstimate::weights)
        .def_readonly("ess", &SimEstimate::ess);

    m.def(
        "make_spec",
        [](const Matrix& sigma, const Vector& alpha, const Vector& mu) {
            return make_spec(sigma, alpha, mu);
        },
        py::arg("sigma"), py::arg("alpha"), py::arg("mu"));

    m.def(
        "solve_qp",
        [](const Matrix& M, const Vector& b) { return solve_qp(PDMatrix(M), b); },
        py::arg("M"), py::arg("b"));

    m.def("minimize_g", &minimize_g, py::arg("spec"));
    m.def("eval_g", &eval_g, py::arg("spec"), py::arg("t"));

    m.def(
        "orthant_tail_prob",
        [](const Vector& mean, const Matrix& cov, const Vector& lower,
           std::uint64_t seed) {
            MvnOptions opts;
            opts.seed = seed;
            const TailProb r = tail_prob(make_gaussian(mean, cov, true), lower, opts);
            return std::make_pair(r.p, r.err);
        },
        py::arg("mean"), py::arg("cov"), py::arg("lower"), py::arg("seed") = 0);

    m.def(
        "psi",
        [](const GAnalysis& an, double x, std::uint64_t seed) {
            MvnOptions opts;
            opts.seed = seed;
            return psi(an, x, opts);
        },
        py::arg("analysis"), py::arg("x"), py::arg("seed") = 0);

    m.def(
        "estimate_H",
        [](const GAnalysis& an, std::vector<double> T_ladder, int n_steps,
           long n_paths, std::uint64_t seed, int workers) {
            PickandsInput inp =
                pickands_input_from(an, T_ladder.back(), n_steps, n_paths, seed);
            inp.n_workers = workers;
            return estimate_H(inp, T_ladder);
        },
        py::arg("analysis"), py::arg("T_ladder"), py::arg("n_steps") = 1024,
        py::arg("n_paths") = 20000, py::arg("seed") = 1, py::arg("workers") = 1);

    m.def("lower_bound_H",
          py::overload_cast<const GAnalysis&>(&lower_bound_H), py::arg("analysis"));
    m.def("compute_CI",
          [](const GAnalysis& an) { return compute_CI(an); }, py::arg("analysis"));

    m.def(
        "assemble",
        [](const GAnalysis& an, const PickandsEstimate& pk) {
            return assemble(an, pk);
        },
        py::arg("analysis"), py::arg("pickands"));

    m.def("passage_time_law",
          [](const GAnalysis& an) { return passage_time_law(an); },
          py::arg("analysis"));

    m.def("oracle_2d", &oracle_2d, py::arg("spec"));
    m.def("oracle_independent", &oracle_independent, py::arg("spec"));
    m.def("oracle_negassoc", &oracle_negassoc, py::arg("spec"));

    m.def(
        "simulate_P",
        [](const ProblemSpec& spec, double u, long n_paths, int n_steps_per_unit,
           double horizon_factor, std::uint64_t seed, const std::string& mode,
           int workers) {
            SimConfig cfg;
            cfg.u = u;
            cfg.n_paths = n_paths;
            cfg.n_steps_per_unit = n_steps_per_unit;
            cfg.horizon_factor = horizon_factor;
            cfg.seed = seed;
            cfg.n_workers = workers;
            if (mode == "crude") cfg.mode = SimMode::crude;
            else if (mode == "tilted") cfg.mode = SimMode::tilted;
            else throw InvalidConfig("mode must be crude|tilted");
            return simulate_P(spec, cfg);
        },
        py::arg("spec"), py::arg("u"), py::arg("n_paths") = 10000,
        py::arg("n_steps_per_unit") = 200, py::arg("horizon_factor") = 3.0,
        py::arg("seed") = 1, py::arg("mode") = "crude", py::arg("workers") = 1);

    m.def(
        "run",
        [](const std::string& mode, const std::string& config_path,
           const std::string& out_dir, std::optional<std::uint64_t> seed,
           int workers) {
            RunOptions opts;
            opts.config_path = config_path;
            opts.out_dir = out_dir;
            opts.seed = seed;
            opts.workers = workers;
            return run(parse_mode(mode), opts);
        },
        py::arg("mode"), py::arg("config_path"), py::arg("out_dir"),
        py::arg("seed") = std::nullopt, py::arg("workers") = 1);
}
