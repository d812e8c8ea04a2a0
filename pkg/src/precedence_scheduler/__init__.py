"""
Exact simulation of non-clairvoyant scheduling with online precedence
constraints and predictions.

Build an `Instance`, pick a policy from `precedence_scheduler.policies`, and
`simulate` it; compare against the exact optima in `precedence_scheduler.oracles`.
"""

from .core import Instance, Job, classify_topology, make_instance, validate, width
from .engine import PolicyView, ScheduleResult, Trace, min_rho_witness, realize_mcnaughton, simulate
from .errors import SchedulingError
from .experiments import ExperimentSpec, ResultRow, report, run
from .oracles import opt_brute_force, opt_chain_exact, optimum
from .predictions import PredictionBundle, ground_truth, perturb

__all__ = [
    "ExperimentSpec",
    "Instance",
    "Job",
    "PolicyView",
    "PredictionBundle",
    "ResultRow",
    "ScheduleResult",
    "SchedulingError",
    "Trace",
    "classify_topology",
    "ground_truth",
    "make_instance",
    "min_rho_witness",
    "opt_brute_force",
    "opt_chain_exact",
    "optimum",
    "perturb",
    "realize_mcnaughton",
    "report",
    "run",
    "simulate",
    "validate",
    "width",
]
