"""
Experiment harness: seeded sweeps over instance sources, policies, prediction
noise and seeds, with exact ratios against optimal oracles and CSV/summary
reports.

Random instance models
----------------------
``chains``      chains of geometric length (mean ``mean_chain_length``) until n jobs exist.
``out_forest``  job j > 0 gets a uniform parent among 0..j-1 unless it becomes a root
                (probability ``root_probability``).
``in_forest``   the mirror image: job j < n-1 gets a uniform successor among j+1..n-1.
``general``     every pair i < j is an edge with probability ``edge_probability``.

Weights and processing times are integers drawn uniformly from their ranges and
divided by ``denominator``. Job count n is uniform in [min_n, max_n].
"""

from __future__ import annotations

import csv
import inspect
import io
import logging
import time
from collections import defaultdict
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from .adversarial import (
    FamilySpec,
    gen_average_lb,
    gen_hidden_chain,
    gen_intree,
    gen_outtree_static,
    gen_static_order_lb,
)
from .config import get_settings
from .core import Instance, classify_topology, make_instance, width
from .engine import Trace, min_rho_witness, simulate
from .errors import RatioBelowOneError, SchedulingError
from .oracles import opt_brute_force, opt_chain_exact, parallel_lower_bound
from .policies.orders import order_adaptive
from .policies.registry import PolicySpec, build_policy, check_spec, required_model
from .predictions import (
    ErrorReport,
    NoiseSpec,
    PredictionBundle,
    PredictionModel,
    distortion_error,
    eta_inversions,
    ground_truth,
    l_eps_error,
    lambda_error,
    orders_from_ranks,
    perturb,
    static_weight_error,
)
from .rationals import Rational, format_decimal, format_rational, rational_sum

logger = logging.getLogger(__name__)

FAMILIES: Dict[str, Callable[..., FamilySpec]] = {
    "hidden_chain": gen_hidden_chain,
    "outtree_static": gen_outtree_static,
    "intree": gen_intree,
    "average_lb": gen_average_lb,
    "static_order_lb": gen_static_order_lb,
}

RandomModel = Literal["chains", "out_forest", "in_forest", "general"]
OracleChoice = Literal["auto", "chain_exact", "brute_force", "reference", "none"]


class RandomModelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: RandomModel = "chains"
    min_n: int = Field(default=1, ge=1)
    max_n: int = Field(default=8, ge=1)
    weight_range: Tuple[int, int] = (0, 5)
    processing_range: Tuple[int, int] = (1, 3)
    denominator: int = Field(default=1, ge=1)
    unit_processing: bool = False
    mean_chain_length: Rational = Fraction(2)
    root_probability: Rational = Fraction(1, 4)
    edge_probability: Rational = Fraction(1, 3)

    @model_validator(mode="after")
    def _ranges(self) -> "RandomModelSpec":
        if self.min_n > self.max_n:
            raise ValueError("min_n exceeds max_n")
        for name in ("weight_range", "processing_range"):
            low, high = getattr(self, name)
            if low < 0 or low > high:
                raise ValueError(f"{name} must satisfy 0 <= low <= high")
        if self.mean_chain_length < 1:
            raise ValueError("mean_chain_length must be at least 1")
        return self


def _uniform(rng: np.random.Generator, low: int, high: int, denominator: int) -> Fraction:
    return Fraction(int(rng.integers(low, high + 1)), denominator)


def random_instance(spec: RandomModelSpec, rng: np.random.Generator) -> Instance:
    n = int(rng.integers(spec.min_n, spec.max_n + 1))
    edges: List[Tuple[int, int]] = []
    if spec.model == "chains":
        start = 0
        while start < n:
            length = min(int(rng.geometric(float(1 / spec.mean_chain_length))), n - start)
            edges.extend((start + i, start + i + 1) for i in range(length - 1))
            start += length
    elif spec.model == "out_forest":
        for j in range(1, n):
            if rng.random() >= spec.root_probability:
                edges.append((int(rng.integers(0, j)), j))
    elif spec.model == "in_forest":
        for j in range(n - 1):
            if rng.random() >= spec.root_probability:
                edges.append((j, int(rng.integers(j + 1, n))))
    else:
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < spec.edge_probability:
                    edges.append((i, j))
    weights = [_uniform(rng, *spec.weight_range, spec.denominator) for _ in range(n)]
    if spec.unit_processing:
        processing = [Fraction(1)] * n
    else:
        processing = [_uniform(rng, *spec.processing_range, spec.denominator) for _ in range(n)]
    return make_instance(processing, weights, edges)


class InstanceSource(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["file", "family", "random"] = "random"
    path: Optional[str] = None
    family: Optional[str] = None
    params: Dict[str, int] = Field(default_factory=dict)
    random: RandomModelSpec = RandomModelSpec()

    @model_validator(mode="after")
    def _complete(self) -> "InstanceSource":
        if self.kind == "file" and not self.path:
            raise ValueError("file source needs a path")
        if self.kind == "family" and self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; known: {sorted(FAMILIES)}")
        if self.kind == "family":
            try:
                inspect.signature(FAMILIES[self.family]).bind(**self.params)
            except TypeError as exc:
                raise ValueError(f"bad params for family {self.family!r}: {exc}") from exc
        return self


class PredictionSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: Optional[PredictionModel] = Field(
        default=None, description="Defaults to the model the policy needs."
    )
    noise: NoiseSpec = NoiseSpec()


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "experiment"
    instances: InstanceSource = InstanceSource()
    count: int = Field(default=1, ge=1, description="Instances per seed.")
    policy: PolicySpec
    prediction: PredictionSpec = PredictionSpec()
    machines: int = Field(default=1, ge=1)
    seeds: Tuple[int, ...] = (0,)
    oracle: OracleChoice = "auto"
    epsilon: Rational = Fraction(1, 10)

    @model_validator(mode="after")
    def _seeds(self) -> "ExperimentSpec":
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        return self

    @classmethod
    def load(cls, path: Path | str) -> "ExperimentSpec":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


class ResultRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    experiment: str
    seed: int
    index: int
    policy: str
    prediction_model: str = ""
    beta: Rational = Fraction(0)
    swaps: int = 0
    length_delta: int = 0
    machines: int = 1
    n: Optional[int] = None
    width: Optional[int] = None
    alg: Optional[Rational] = None
    opt: Optional[Rational] = None
    opt_kind: str = ""
    lower_bound: Optional[Rational] = None
    ratio: Optional[Rational] = None
    error_kind: str = ""
    error: Optional[Rational] = None
    error_infinite: bool = False
    rho: Optional[Rational] = None
    rho_infinite: bool = False
    wall_time: float = 0.0
    failure: str = ""


# --- cells ----------------------------------------------------------------------


def _cell_seed(master_seed: int, seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, seed, index])


def _cell_instance(spec: ExperimentSpec, rng: np.random.Generator) -> Tuple[Instance, Dict[str, Fraction]]:
    source = spec.instances
    if source.kind == "file":
        return Instance.load(source.path or ""), {}
    if source.kind == "family":
        family = FAMILIES[source.family or ""](**source.params)
        return family.instance, dict(family.references)
    return random_instance(source.random, rng), {}


def _prediction_model(spec: ExperimentSpec) -> Optional[PredictionModel]:
    if spec.prediction.model is not None:
        return spec.prediction.model
    models = sorted(required_model(spec.policy))
    return models[0] if models else None  # type: ignore[return-value]


def error_report(
    instance: Instance,
    bundle: PredictionBundle,
    trace: Optional[Trace] = None,
    epsilon: Fraction = Fraction(1, 10),
) -> Optional[ErrorReport]:
    """The error measure that belongs to ``bundle.model``, or None if the model
    has none on this instance. ``adaptive_order`` is measured along ``trace``;
    without one, the order policy itself is simulated to obtain it."""
    model = bundle.model
    if model == "static_weights" and classify_topology(instance).is_chains:
        return static_weight_error(instance, bundle.weights or {})
    if model == "adaptive_weights":
        return distortion_error(instance, bundle.weights or {})
    if model == "adaptive_order":
        if trace is None:
            _, trace = simulate(instance, order_adaptive(bundle.order or ()))
        history = orders_from_ranks(trace, bundle.order or ())
        return l_eps_error(trace, history, instance, epsilon)
    if model in ("actions_static", "actions_adaptive"):
        return eta_inversions(instance, bundle.order or ())
    if model == "input" and bundle.instance is not None:
        return lambda_error(bundle.instance, instance)
    return None


def _reference_opt(references: Dict[str, Fraction]) -> Optional[Fraction]:
    for key in ("opt", "opt_ref", "opt_bound"):
        if key in references:
            return references[key]
    return None


def _optimum(
    spec: ExperimentSpec, instance: Instance, references: Dict[str, Fraction]
) -> Tuple[Optional[Fraction], str]:
    choice = spec.oracle
    settings = get_settings()
    if spec.machines > 1:
        if choice in ("auto", "brute_force") and instance.n <= settings.parallel_brute_force_limit:
            return opt_brute_force(instance, spec.machines).objective, "brute_force_nonpreemptive"
        return None, "none"
    if choice == "auto":
        if classify_topology(instance).is_chains:
            choice = "chain_exact"
        elif instance.n <= settings.brute_force_limit:
            choice = "brute_force"
        else:
            choice = "reference"
    if choice == "chain_exact":
        return opt_chain_exact(instance).objective, "chain_exact"
    if choice == "brute_force":
        return opt_brute_force(instance).objective, "brute_force"
    if choice == "reference":
        value = _reference_opt(references)
        return (value, "reference") if value is not None else (None, "none")
    return None, "none"


def run_cell(spec: ExperimentSpec, master_seed: int, seed: int, index: int) -> ResultRow:
    """One (seed, index) cell. Failures become a row with ``failure`` set."""
    started = time.perf_counter()
    model = _prediction_model(spec)
    noise = spec.prediction.noise
    base = dict(
        experiment=spec.name,
        seed=seed,
        index=index,
        policy=spec.policy.name,
        prediction_model=model or "",
        beta=noise.beta,
        swaps=noise.swaps,
        length_delta=noise.length_delta,
        machines=spec.machines,
    )
    try:
        sequence = _cell_seed(master_seed, seed, index)
        instance_seq, noise_seq = sequence.spawn(2)
        instance, references = _cell_instance(spec, np.random.default_rng(instance_seq))
        bundle: Optional[PredictionBundle] = None
        if model is not None:
            bundle = ground_truth(instance, model)
            if noise != NoiseSpec():
                bundle = perturb(bundle, noise, int(noise_seq.generate_state(1)[0]))
        policy = build_policy(spec.policy, bundle, spec.machines)
        result, trace = simulate(instance, policy, spec.machines)

        opt, opt_kind = _optimum(spec, instance, references)
        ratio = result.objective / opt if opt else None
        if ratio is not None and ratio < 1 and spec.machines == 1 and opt_kind != "reference":
            raise RatioBelowOneError(
                f"ratio {format_rational(ratio)} below 1 against an exact optimum", ratio=ratio
            )
        lower = parallel_lower_bound(instance, spec.machines) if spec.machines > 1 else None
        report: Optional[ErrorReport] = None
        if model is not None and bundle is not None:
            try:
                report = error_report(instance, bundle, trace, spec.epsilon)
            except SchedulingError as exc:
                logger.info("no %s error for seed=%d index=%d: %s", model, seed, index, exc)
        rho = min_rho_witness(trace, instance)
        return ResultRow(
            **base,
            n=instance.n,
            width=width(instance) if 0 < instance.n <= 200 else None,
            alg=result.objective,
            opt=opt,
            opt_kind=opt_kind,
            lower_bound=lower,
            ratio=ratio,
            error_kind=report.model if report else "",
            error=report.value if report else None,
            error_infinite=bool(report and report.infinite),
            rho=rho,
            rho_infinite=rho is None,
            wall_time=time.perf_counter() - started,
        )
    except RatioBelowOneError:
        raise
    except (SchedulingError, ValueError, TypeError) as exc:
        logger.warning("cell seed=%d index=%d failed: %s", seed, index, exc)
        return ResultRow(
            **base,
            failure=f"{type(exc).__name__}: {exc}",
            wall_time=time.perf_counter() - started,
        )


def _run_cell_args(args: Tuple[ExperimentSpec, int, int, int]) -> ResultRow:
    return run_cell(*args)


def run(spec: ExperimentSpec, master_seed: int = 0, workers: Optional[int] = None) -> List[ResultRow]:
    """All cells of ``spec``, ordered by (seed, index) whatever the execution order."""
    check_spec(spec.policy)
    cells = [(spec, master_seed, seed, index) for seed in spec.seeds for index in range(spec.count)]
    workers = workers or get_settings().workers
    logger.info("experiment %s: %d cells on %d worker(s)", spec.name, len(cells), workers)
    if workers > 1 and len(cells) > 1:
        with Pool(min(workers, len(cells))) as pool:
            rows = pool.map(_run_cell_args, cells)
    else:
        rows = [_run_cell_args(cell) for cell in cells]
    failed = sum(1 for row in rows if row.failure)
    logger.info("experiment %s finished: %d rows, %d failed", spec.name, len(rows), failed)
    return sorted(rows, key=lambda row: (row.seed, row.index))


# --- reports --------------------------------------------------------------------

CSV_COLUMNS = [
    "experiment", "seed", "index", "policy", "prediction_model", "beta", "swaps",
    "length_delta", "machines", "n", "width", "alg", "opt", "opt_kind", "lower_bound",
    "ratio", "ratio_decimal", "error_kind", "error", "error_decimal", "rho", "failure",
]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return format_rational(value)
    return str(value)


def _csv_record(row: ResultRow, precision: int) -> Dict[str, str]:
    record = {name: _cell(getattr(row, name, None)) for name in CSV_COLUMNS}
    record["ratio_decimal"] = format_decimal(row.ratio, precision) if row.ratio is not None else ""
    if row.error_infinite:
        record["error"] = record["error_decimal"] = "inf"
    else:
        record["error_decimal"] = format_decimal(row.error, precision) if row.error is not None else ""
    if row.rho_infinite and row.alg is not None:
        record["rho"] = "inf"
    return record


def report_csv(rows: Iterable[ResultRow], precision: int = 3, include_timing: bool = False) -> str:
    columns = CSV_COLUMNS + (["wall_time"] if include_timing else [])
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        record = _csv_record(row, precision)
        if include_timing:
            record["wall_time"] = f"{row.wall_time:.6f}"
        writer.writerow(record)
    return buffer.getvalue()


SUMMARY_KEYS = ("policy", "prediction_model", "beta", "swaps", "length_delta", "machines")


def _mean(values: Sequence[Fraction]) -> Optional[Fraction]:
    return rational_sum(values) / len(values) if values else None


def summarize(rows: Iterable[ResultRow]) -> List[Dict[str, Any]]:
    """One line per (policy, prediction, noise level, machines) group."""
    groups: Dict[Tuple[Any, ...], List[ResultRow]] = defaultdict(list)
    for row in rows:
        groups[tuple(getattr(row, key) for key in SUMMARY_KEYS)].append(row)
    lines = []
    for key in sorted(groups, key=lambda k: tuple(str(part) for part in k)):
        members = groups[key]
        ratios = [row.ratio for row in members if row.ratio is not None]
        errors = [row.error for row in members if row.error is not None and not row.error_infinite]
        lines.append(
            {
                **dict(zip(SUMMARY_KEYS, key)),
                "rows": len(members),
                "failures": sum(1 for row in members if row.failure),
                "max_ratio": max(ratios) if ratios else None,
                "mean_ratio": _mean(ratios),
                "mean_error": _mean(errors),
                "infinite_errors": sum(1 for row in members if row.error_infinite),
            }
        )
    return lines


def _summary_cell(value: Any, precision: int) -> str:
    if value is None:
        return "-"
    if isinstance(value, Fraction):
        return format_decimal(value, precision)
    return str(value)


def report_summary(rows: Iterable[ResultRow], precision: int = 3) -> str:
    header = list(SUMMARY_KEYS) + [
        "rows", "failures", "max_ratio", "mean_ratio", "mean_error", "infinite_errors",
    ]
    table = [header]
    for line in summarize(rows):
        table.append([_summary_cell(line[name], precision) for name in header])
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    return "\n".join(
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in table
    ) + "\n"


def report(rows: Iterable[ResultRow], fmt: str = "csv", precision: int = 3) -> str:
    rows = list(rows)
    if fmt == "csv":
        return report_csv(rows, precision)
    if fmt == "summary":
        return report_summary(rows, precision)
    raise ValueError(f"unknown report format {fmt!r}")


_ROWS = TypeAdapter(List[ResultRow])


def rows_to_json(rows: Iterable[ResultRow]) -> str:
    return _ROWS.dump_json(list(rows), indent=2).decode("utf-8")


def rows_from_json(text: str) -> List[ResultRow]:
    return _ROWS.validate_json(text)
