"""Asymptotics of quadrant hitting by correlated Brownian motion with drift."""

from ._core import (
    AsymptoticResult,
    ConehitError,
    GAnalysis,
    PassageTimeLaw,
    PickandsEstimate,
    ProblemSpec,
    QpSolution,
    Segment,
    SimEstimate,
    assemble,
    compute_CI,
    estimate_H,
    eval_g,
    lower_bound_H,
    make_spec,
    minimize_g,
    oracle_2d,
    oracle_independent,
    oracle_negassoc,
    orthant_tail_prob,
    passage_time_law,
    psi,
    run,
    simulate_P,
    solve_qp,
)

__all__ = [
    "AsymptoticResult",
    "ConehitError",
    "GAnalysis",
    "PassageTimeLaw",
    "PickandsEstimate",
    "ProblemSpec",
    "QpSolution",
    "Segment",
    "SimEstimate",
    "assemble",
    "compute_CI",
    "estimate_H",
    "eval_g",
    "lower_bound_H",
    "make_spec",
    "minimize_g",
    "oracle_2d",
    "oracle_independent",
    "oracle_negassoc",
    "orthant_tail_prob",
    "passage_time_law",
    "psi",
    "run",
    "simulate_P",
    "solve_qp",
]

__version__ = "0.1.0"
