"""
Command-line interface: generate instances and predictions, simulate a policy,
compute optima and error measures, run experiment sweeps and render reports.

Errors are printed to stderr as ``{"error", "message", "details"}`` JSON and
exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, get_args

import numpy as np
from pydantic import ValidationError

from .adversarial import FamilySpec
from .config import get_settings
from .core import Instance
from .engine import min_rho_witness, simulate
from .errors import SchedulingError
from .experiments import (
    FAMILIES,
    ExperimentSpec,
    RandomModelSpec,
    error_report,
    random_instance,
    report,
    report_csv,
    rows_from_json,
    rows_to_json,
    run,
)
from .oracles import opt_brute_force, opt_chain_exact, optimum, parallel_lower_bound
from .policies.registry import PolicySpec, build_policy, policy_names
from .predictions import NoiseSpec, PredictionBundle, PredictionModel, ground_truth, perturb
from .rationals import format_rational, parse_rational

logger = logging.getLogger(__name__)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _dump(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _family_params(pairs: Sequence[str]) -> Dict[str, int]:
    params: Dict[str, int] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {pair!r}")
        params[key.strip()] = int(value)
    return params


# --- commands --------------------------------------------------------------------


def _cmd_gen(args: argparse.Namespace) -> None:
    if args.family:
        family: FamilySpec = FAMILIES[args.family](**_family_params(args.param))
        instance = family.instance
        if args.out:
            sidecar = Path(args.out).with_suffix(".meta.json")
            sidecar.write_text(_dump(family.sidecar()), encoding="utf-8")
            logger.info("wrote %s", sidecar)
    else:
        spec = RandomModelSpec(
            model=args.random,
            min_n=args.n,
            max_n=args.n,
            unit_processing=args.unit,
        )
        instance = random_instance(spec, np.random.default_rng(args.seed))
    _emit(instance.to_json() + "\n", args.out)


def _cmd_predict(args: argparse.Namespace) -> None:
    instance = Instance.load(args.instance)
    bundle = ground_truth(instance, args.model)
    noise = NoiseSpec(beta=args.beta, swaps=args.swaps, length_delta=args.length_delta)
    if noise != NoiseSpec():
        bundle = perturb(bundle, noise, args.seed)
    _emit(bundle.to_json() + "\n", args.out)


def _policy_spec(args: argparse.Namespace) -> PolicySpec:
    params = json.loads(args.params) if args.params else {}
    return PolicySpec(name=args.policy, params=params)


def _cmd_simulate(args: argparse.Namespace) -> None:
    instance = Instance.load(args.instance)
    bundle = PredictionBundle.load(args.prediction) if args.prediction else None
    policy = build_policy(_policy_spec(args), bundle, args.machines)
    result, trace = simulate(instance, policy, args.machines)
    if args.trace:
        Path(args.trace).write_text(trace.to_jsonl(), encoding="utf-8")
    if args.format == "csv":
        _emit(result.to_csv(), args.out)
        return
    rho = min_rho_witness(trace, instance)
    payload = {
        "policy": policy.label,
        "machines": args.machines,
        **result.model_dump(mode="json"),
        "segments": len(trace.segments),
        "rho": "inf" if rho is None else format_rational(rho),
    }
    _emit(_dump(payload), args.out)


def _cmd_opt(args: argparse.Namespace) -> None:
    instance = Instance.load(args.instance)
    if args.machines > 1:
        result = opt_brute_force(instance, args.machines)
        payload = result.model_dump(mode="json")
        payload["lower_bound"] = format_rational(parallel_lower_bound(instance, args.machines))
    else:
        solvers = {
            "auto": optimum,
            "chain_exact": opt_chain_exact,
            "brute_force": opt_brute_force,
        }
        payload = solvers[args.solver](instance).model_dump(mode="json")
    _emit(_dump(payload), args.out)


def _cmd_eval(args: argparse.Namespace) -> None:
    instance = Instance.load(args.instance)
    bundle = PredictionBundle.load(args.prediction)
    measured = error_report(instance, bundle, epsilon=args.epsilon)
    if measured is None:
        payload: Dict[str, Any] = {"model": bundle.model, "value": None, "available": False}
    else:
        payload = measured.model_dump(mode="json")
        payload["value"] = "inf" if measured.infinite else payload["value"]
        payload["available"] = True
    _emit(_dump(payload), args.out)


def _cmd_run(args: argparse.Namespace) -> None:
    spec = ExperimentSpec.load(args.spec)
    workers = args.workers or get_settings().workers
    rows = run(spec, master_seed=args.seed, workers=workers)
    if args.rows:
        Path(args.rows).write_text(rows_to_json(rows), encoding="utf-8")
    if args.format == "json":
        _emit(rows_to_json(rows) + "\n", args.out)
    elif args.format == "csv":
        _emit(report_csv(rows, args.precision, include_timing=args.timing), args.out)
    else:
        _emit(report(rows, "summary", args.precision), args.out)


def _cmd_report(args: argparse.Namespace) -> None:
    rows = rows_from_json(Path(args.rows).read_text(encoding="utf-8"))
    _emit(report(rows, args.format, args.precision), args.out)


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="precedence-scheduler",
        description="Non-clairvoyant scheduling with online precedence constraints and predictions.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at INFO level.")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="Write a family or random instance as JSON.")
    source = gen.add_mutually_exclusive_group(required=True)
    source.add_argument("--family", choices=sorted(FAMILIES))
    source.add_argument("--random", choices=["chains", "out_forest", "in_forest", "general"])
    gen.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Family parameter, e.g. n=8 hidden=3 or omega=4 d=12.",
    )
    gen.add_argument("--n", type=int, default=8, help="Job count for --random.")
    gen.add_argument("--unit", action="store_true", help="Unit processing times for --random.")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="Instance path; the family sidecar goes next to it.")
    gen.set_defaults(handler=_cmd_gen)

    predict = commands.add_parser("predict", help="Write a (perturbed) prediction bundle.")
    predict.add_argument("instance")
    predict.add_argument("--model", required=True, choices=sorted(get_args(PredictionModel)))
    predict.add_argument("--beta", type=parse_rational, default=Fraction(0))
    predict.add_argument("--swaps", type=int, default=0)
    predict.add_argument("--length-delta", type=int, default=0)
    predict.add_argument("--seed", type=int, default=0)
    predict.add_argument("--out")
    predict.set_defaults(handler=_cmd_predict)

    sim = commands.add_parser("simulate", help="Run one policy on one instance.")
    sim.add_argument("instance")
    sim.add_argument("--policy", required=True, choices=policy_names())
    sim.add_argument("--params", help="Policy parameters as a JSON object.")
    sim.add_argument("--prediction", help="Prediction bundle JSON.")
    sim.add_argument("--machines", type=int, default=1)
    sim.add_argument("--trace", help="Write the segment trace as JSON lines.")
    sim.add_argument("--format", choices=["json", "csv"], default="json")
    sim.add_argument("--out")
    sim.set_defaults(handler=_cmd_simulate)

    opt = commands.add_parser("opt", help="Exact optimum of an instance.")
    opt.add_argument("instance")
    opt.add_argument("--machines", type=int, default=1)
    opt.add_argument("--solver", choices=["auto", "chain_exact", "brute_force"], default="auto")
    opt.add_argument("--out")
    opt.set_defaults(handler=_cmd_opt)

    evaluate = commands.add_parser("eval", help="Error measure of a prediction bundle.")
    evaluate.add_argument("instance")
    evaluate.add_argument("prediction")
    evaluate.add_argument("--epsilon", type=parse_rational, default=Fraction(1, 10))
    evaluate.add_argument("--out")
    evaluate.set_defaults(handler=_cmd_eval)

    sweep = commands.add_parser("run", help="Run an experiment spec.")
    sweep.add_argument("spec")
    sweep.add_argument("--seed", type=int, default=0, help="Master seed.")
    sweep.add_argument("--workers", type=int, help="Worker processes (PRECSCHED_WORKERS).")
    sweep.add_argument("--format", choices=["csv", "summary", "json"], default="csv")
    sweep.add_argument("--precision", type=int, default=3)
    sweep.add_argument("--timing", action="store_true", help="Add the wall_time column.")
    sweep.add_argument("--rows", help="Also save the rows as JSON for `report`.")
    sweep.add_argument("--out")
    sweep.set_defaults(handler=_cmd_run)

    render = commands.add_parser("report", help="Render saved rows.")
    render.add_argument("rows")
    render.add_argument("--format", choices=["csv", "summary"], default="csv")
    render.add_argument("--precision", type=int, default=3)
    render.add_argument("--out")
    render.set_defaults(handler=_cmd_report)
    return parser


def _fail(payload: Dict[str, Any]) -> None:
    sys.stderr.write(json.dumps(payload) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = "INFO" if args.verbose else get_settings().log_level.upper()
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.handler(args)
    except SchedulingError as exc:
        _fail(exc.to_payload())
        return 2
    except ValidationError as exc:
        _fail(
            {
                "error": "ValidationError",
                "message": f"{exc.error_count()} validation error(s) for {exc.title}",
                "details": {"errors": json.loads(exc.json(include_url=False))},
            }
        )
        return 2
    except (OSError, ValueError, TypeError) as exc:
        _fail({"error": type(exc).__name__, "message": str(exc), "details": {}})
        return 2
    return 0
