"""
Prediction bundles for every prediction model: exact ground truth, seeded
perturbation, and the error measures that quantify how wrong a bundle is.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import get_settings
from .core import Instance, chain_list, make_instance, successor_sums, successor_weights
from .engine import Trace
from .errors import (
    HistoryMismatchError,
    IncompatibleNoiseError,
    MissingPredictionError,
    TooLargeError,
    UndefinedAverageError,
    UnitProcessingRequiredError,
    UnmatchedChainError,
)
from .oracles import opt_chain_exact, optimum, weighted_max_unbounded
from .rationals import Rational, rational_sum

logger = logging.getLogger(__name__)

PredictionModel = Literal[
    "static_weights",
    "adaptive_weights",
    "static_order",
    "adaptive_order",
    "averages",
    "actions_static",
    "actions_adaptive",
    "input",
]
WEIGHT_MODELS = frozenset({"static_weights", "adaptive_weights", "averages"})
ORDER_MODELS = frozenset({"static_order", "adaptive_order", "actions_static", "actions_adaptive"})


class NoiseSpec(BaseModel):
    """Perturbation strength. ``beta`` scales weights/averages by exp(u) with
    u uniform on [-beta, beta]; ``swaps`` random adjacent transpositions for
    orders and actions; ``length_delta`` changes each predicted chain length by
    a uniform amount in [-length_delta, length_delta]."""

    model_config = ConfigDict(frozen=True)

    beta: Rational = Fraction(0)
    swaps: int = Field(default=0, ge=0)
    length_delta: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _non_negative(self) -> "NoiseSpec":
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        return self


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["truth", "perturbed"] = "truth"
    seed: Optional[int] = None
    noise: Optional[NoiseSpec] = None


class PredictionBundle(BaseModel):
    """One prediction. Exactly one payload field is set, according to ``model``:
    ``weights`` (id -> rational), ``order`` (job ids, first = highest) or
    ``instance`` (a predicted instance)."""

    model_config = ConfigDict(frozen=True)

    model: PredictionModel
    weights: Optional[Dict[int, Rational]] = None
    order: Optional[Tuple[int, ...]] = None
    instance: Optional[Instance] = None
    provenance: Provenance = Provenance()

    @model_validator(mode="after")
    def _payload_matches_model(self) -> "PredictionBundle":
        expected = (
            "weights" if self.model in WEIGHT_MODELS
            else "order" if self.model in ORDER_MODELS
            else "instance"
        )
        present = [name for name in ("weights", "order", "instance") if getattr(self, name) is not None]
        if present != [expected]:
            raise ValueError(f"model {self.model!r} needs exactly the {expected!r} payload")
        if self.weights is not None and any(value < 0 for value in self.weights.values()):
            raise ValueError("predicted weights must be non-negative")
        if self.order is not None and len(set(self.order)) != len(self.order):
            raise ValueError("predicted order repeats a job")
        return self

    def to_json(self) -> str:
        return self.model_dump_json(exclude_none=True)

    @classmethod
    def load(cls, path: Path | str) -> "PredictionBundle":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: Path | str) -> Path:
        target = Path(path)
        target.write_text(self.to_json() + "\n", encoding="utf-8")
        return target


class ErrorReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    value: Optional[Rational] = Field(
        default=None, description="The error; None stands for +infinity."
    )
    components: Dict[str, Rational] = Field(default_factory=dict)
    parameters: Dict[str, Rational] = Field(default_factory=dict)

    @property
    def infinite(self) -> bool:
        return self.value is None


# --- ground truth -------------------------------------------------------------


def _by_weight_order(instance: Instance, jobs: Sequence[int]) -> Tuple[int, ...]:
    totals = successor_weights(instance)
    return tuple(sorted(jobs, key=lambda j: (-totals[j], j)))


def ground_truth(instance: Instance, model: PredictionModel) -> PredictionBundle:
    if model == "static_weights":
        totals = successor_weights(instance)
        return PredictionBundle(model=model, weights={r: totals[r] for r in instance.roots})
    if model == "adaptive_weights":
        return PredictionBundle(model=model, weights=dict(enumerate(successor_weights(instance))))
    if model == "static_order":
        return PredictionBundle(model=model, order=_by_weight_order(instance, instance.roots))
    if model == "adaptive_order":
        return PredictionBundle(model=model, order=_by_weight_order(instance, range(instance.n)))
    if model == "averages":
        totals = successor_weights(instance)
        lengths = successor_sums(instance, instance.processing)
        averages: Dict[int, Fraction] = {}
        for v in range(instance.n):
            if lengths[v] == 0:
                raise UndefinedAverageError(v)
            averages[v] = totals[v] / lengths[v]
        return PredictionBundle(model=model, weights=averages)
    if model in ("actions_static", "actions_adaptive"):
        return PredictionBundle(model=model, order=optimum(instance).order)
    return PredictionBundle(model="input", instance=instance)


# --- perturbation -------------------------------------------------------------


def _scale(value: Fraction, beta: Fraction, rng: np.random.Generator, resolution: int) -> Fraction:
    step = int(rng.integers(0, resolution + 1))
    exponent = beta * Fraction(2 * step - resolution, resolution)
    if exponent == 0:
        return value
    factor = Fraction(math.exp(exponent)).limit_denominator(resolution)
    return value * factor


def _swap_adjacent(order: Sequence[int], swaps: int, rng: np.random.Generator) -> Tuple[int, ...]:
    items = list(order)
    if len(items) < 2:
        return tuple(items)
    for _ in range(swaps):
        i = int(rng.integers(0, len(items) - 1))
        items[i], items[i + 1] = items[i + 1], items[i]
    return tuple(items)


def _perturb_input(
    instance: Instance, noise: NoiseSpec, rng: np.random.Generator, resolution: int
) -> Instance:
    chains = chain_list(instance)
    kept: List[List[int]] = []
    padding: List[int] = []
    for chain in chains:
        delta = int(rng.integers(-noise.length_delta, noise.length_delta + 1))
        kept.append(chain[: max(1, len(chain) + delta)] if delta < 0 else list(chain))
        padding.append(max(0, delta))

    survivors = sorted(j for chain in kept for j in chain)
    new_id = {old: new for new, old in enumerate(survivors)}
    processing: List[Fraction] = [instance.processing[old] for old in survivors]
    weights: List[Fraction] = [
        _scale(instance.weights[old], noise.beta, rng, resolution) for old in survivors
    ]
    edges: List[Tuple[int, int]] = []
    for chain, extra in zip(kept, padding):
        ids = [new_id[old] for old in chain]
        for _ in range(extra):
            ids.append(len(processing))
            processing.append(Fraction(1))
            weights.append(Fraction(0))
        edges.extend(zip(ids, ids[1:]))
    return make_instance(processing, weights, edges)


def perturb(bundle: PredictionBundle, noise: NoiseSpec, seed: int) -> PredictionBundle:
    """Seeded, exact perturbation of a bundle."""
    rng = np.random.default_rng(seed)
    resolution = get_settings().noise_resolution
    provenance = Provenance(kind="perturbed", seed=seed, noise=noise)
    if bundle.model in WEIGHT_MODELS:
        if noise.swaps or noise.length_delta:
            raise IncompatibleNoiseError(
                f"{bundle.model} takes only multiplicative noise", model=bundle.model
            )
        assert bundle.weights is not None
        weights = {
            key: _scale(bundle.weights[key], noise.beta, rng, resolution)
            for key in sorted(bundle.weights)
        }
        result = bundle.model_copy(update={"weights": weights, "provenance": provenance})
    elif bundle.model in ORDER_MODELS:
        if noise.beta or noise.length_delta:
            raise IncompatibleNoiseError(
                f"{bundle.model} takes only adjacent swaps", model=bundle.model
            )
        assert bundle.order is not None
        order = _swap_adjacent(bundle.order, noise.swaps, rng)
        result = bundle.model_copy(update={"order": order, "provenance": provenance})
    else:
        if noise.swaps:
            raise IncompatibleNoiseError("input predictions take weight and length noise")
        assert bundle.instance is not None
        predicted = _perturb_input(bundle.instance, noise, rng, resolution)
        result = bundle.model_copy(update={"instance": predicted, "provenance": provenance})
    logger.debug("perturbed %s with seed %d: %s", bundle.model, seed, noise)
    return result


# --- error measures -------------------------------------------------------------


def eta_inversions(instance: Instance, order: Sequence[int]) -> ErrorReport:
    """Weighted inversions of a predicted order against a fixed optimal order.

    Ids outside the instance are ignored; jobs missing from the prediction are
    ranked after it, by id.
    """
    optimal = optimum(instance).order
    seen: Dict[int, int] = {}
    for job_id in order:
        if 0 <= job_id < instance.n and job_id not in seen:
            seen[job_id] = len(seen)
    for job_id in range(instance.n):
        if job_id not in seen:
            seen[job_id] = len(seen)

    p, w = instance.processing, instance.weights
    eta = Fraction(0)
    for i, first in enumerate(optimal):
        for second in optimal[i + 1 :]:
            if seen[second] < seen[first]:
                eta += w[first] * p[second] - w[second] * p[first]
    return ErrorReport(model="actions", value=eta)


def _require_unit(instance: Instance, role: str) -> None:
    if any(p != 1 for p in instance.processing):
        raise UnitProcessingRequiredError(f"{role} instance must have unit processing times")


def lambda_error(predicted: Instance, actual: Instance) -> ErrorReport:
    """Gamma_u, Gamma_a and Lambda for a predicted chain instance.

    Both instances are padded with zero-weight unit jobs to a shared chain
    structure; Gamma_u is the largest cost of the unexpected actual weight
    (w - w_hat)+ over schedules optimal for the predicted weights, Gamma_a the
    largest cost of the absent predicted weight (w_hat - w)+ over schedules
    optimal for the actual weights.
    """
    predicted_chains = chain_list(predicted)
    actual_chains = chain_list(actual)
    _require_unit(predicted, "predicted")
    _require_unit(actual, "actual")
    if len(predicted_chains) != len(actual_chains):
        raise UnmatchedChainError(
            f"predicted {len(predicted_chains)} chains, actual {len(actual_chains)}",
            predicted=len(predicted_chains),
            actual=len(actual_chains),
        )

    ideals = 1
    for mine, theirs in zip(predicted_chains, actual_chains):
        ideals *= max(len(mine), len(theirs)) + 1
    limit = get_settings().brute_force_limit
    if ideals > 1 << limit:
        raise TooLargeError(ideals, 1 << limit, "order ideals of the shared chain instance")

    actual_w: List[Fraction] = []
    predicted_w: List[Fraction] = []
    edges: List[Tuple[int, int]] = []
    for mine, theirs in zip(predicted_chains, actual_chains):
        start = len(actual_w)
        for position in range(max(len(mine), len(theirs))):
            actual_w.append(actual.weights[theirs[position]] if position < len(theirs) else Fraction(0))
            predicted_w.append(predicted.weights[mine[position]] if position < len(mine) else Fraction(0))
            if position:
                edges.append((start + position - 1, start + position))
    shared = make_instance([1] * len(actual_w), actual_w, edges)

    unexpected = [max(Fraction(0), w - w_hat) for w, w_hat in zip(actual_w, predicted_w)]
    absent = [max(Fraction(0), w_hat - w) for w, w_hat in zip(actual_w, predicted_w)]
    gamma_u = weighted_max_unbounded(unexpected, predicted_w, shared)
    gamma_a = weighted_max_unbounded(absent, actual_w, shared)
    return ErrorReport(
        model="input",
        value=gamma_u + gamma_a,
        components={"gamma_u": gamma_u, "gamma_a": gamma_a},
    )


def distortion_error(instance: Instance, table: Mapping[int, Fraction]) -> ErrorReport:
    """max_v W_hat_v / w(S(v)) * max_v w(S(v)) / W_hat_v; infinite on any zero."""
    truth = successor_weights(instance)
    over, under = Fraction(0), Fraction(0)
    for v in range(instance.n):
        if v not in table:
            raise MissingPredictionError(v, "adaptive weight prediction")
        predicted = Fraction(table[v])
        if predicted == 0 or truth[v] == 0:
            return ErrorReport(model="adaptive_weights", value=None)
        over = max(over, predicted / truth[v])
        under = max(under, truth[v] / predicted)
    return ErrorReport(
        model="adaptive_weights",
        value=over * under,
        components={"overprediction": over, "underprediction": under},
    )


def orders_from_ranks(trace: Trace, order: Sequence[int]) -> List[Tuple[int, ...]]:
    """The order a fixed ranking reports over the front of every trace segment."""
    ranks = {job_id: position for position, job_id in enumerate(order)}
    history = []
    for segment in trace.segments:
        missing = [j for j in segment.front if j not in ranks]
        if missing:
            raise HistoryMismatchError(f"ranking misses front jobs {missing}", job_ids=missing)
        history.append(tuple(sorted(segment.front, key=ranks.__getitem__)))
    return history


def l_eps_error(
    trace: Trace,
    orders: Sequence[Sequence[int]],
    instance: Instance,
    epsilon: Fraction,
) -> ErrorReport:
    """Largest count of epsilon-approximate inversions over the run.

    Reported error is max{1 + epsilon, L(epsilon), 1}; the raw count is kept
    in the components.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if len(orders) != len(trace.segments):
        raise HistoryMismatchError(
            f"{len(orders)} orders for {len(trace.segments)} segments",
            orders=len(orders),
            segments=len(trace.segments),
        )
    totals = successor_weights(instance)
    largest = 0
    for segment, order in zip(trace.segments, orders):
        ranks = {job_id: position for position, job_id in enumerate(order)}
        if any(job_id not in ranks for job_id in segment.front):
            raise HistoryMismatchError(
                f"order at t={segment.start} does not rank the whole front", time=segment.start
            )
        for j in segment.front:
            count = sum(
                1
                for i in segment.front
                if totals[j] / (1 + epsilon) >= totals[i] and ranks[i] <= ranks[j]
            )
            largest = max(largest, count)
    raw = Fraction(largest)
    return ErrorReport(
        model="order",
        value=max(1 + epsilon, raw, Fraction(1)),
        components={"l_eps": raw},
        parameters={"epsilon": epsilon},
    )


# --- weight sub-instances -------------------------------------------------------


class WeightSubinstances(BaseModel):
    """The predicted chains and the under-, over- and pruned sub-instances
    induced by static chain weight predictions."""

    model_config = ConfigDict(frozen=True)

    predicted: Instance
    underpredicted: Instance
    overpredicted: Instance
    pruned: Instance


ChainJobs = List[Tuple[Fraction, Fraction]]


def _chains_to_instance(chains: Sequence[ChainJobs]) -> Instance:
    processing: List[Fraction] = []
    weights: List[Fraction] = []
    edges: List[Tuple[int, int]] = []
    for chain in chains:
        for position, (p, w) in enumerate(chain):
            if position:
                edges.append((len(processing) - 1, len(processing)))
            processing.append(p)
            weights.append(w)
    return make_instance(processing, weights, edges)


def build_weight_subinstances(
    instance: Instance, predictions: Mapping[int, Fraction]
) -> WeightSubinstances:
    predicted: List[ChainJobs] = []
    under: List[ChainJobs] = []
    over: List[ChainJobs] = []
    pruned: List[ChainJobs] = []
    p, w = instance.processing, instance.weights
    for chain in chain_list(instance):
        head = chain[0]
        if head not in predictions:
            raise MissingPredictionError(head, "static weight prediction")
        estimate = Fraction(predictions[head])
        actual = rational_sum(w[j] for j in chain)
        jobs = [(p[j], w[j]) for j in chain]
        if estimate == actual:
            predicted.append(jobs)
            pruned.append(jobs)
        elif estimate < actual:
            k, prefix = 0, Fraction(0)
            while prefix + w[chain[k]] < estimate:
                prefix += w[chain[k]]
                k += 1
            # chain[k] is the first job where the prefix weight reaches the estimate.
            head_part = jobs[:k] + [(p[chain[k]], estimate - prefix)]
            predicted.append(head_part)
            pruned.append(head_part)
            bottom = (
                rational_sum(job_p for job_p, _ in head_part),
                prefix + w[chain[k]] - estimate,
            )
            under.append([bottom] + jobs[k + 1 :])
        else:
            last = (p[chain[-1]], estimate - (actual - w[chain[-1]]))
            predicted.append(jobs[:-1] + [last])
            pruned.append(jobs)
            top = (rational_sum(job_p for job_p, _ in jobs), estimate - actual)
            over.append([top])
    return WeightSubinstances(
        predicted=_chains_to_instance(predicted),
        underpredicted=_chains_to_instance(under),
        overpredicted=_chains_to_instance(over),
        pruned=_chains_to_instance(pruned),
    )


def static_weight_error(instance: Instance, predictions: Mapping[int, Fraction]) -> ErrorReport:
    """Opt(C_o) + omega * Opt(C_u), reported with Opt(C_p) alongside."""
    parts = build_weight_subinstances(instance, predictions)
    omega = len(instance.roots)
    opt_under = opt_chain_exact(parts.underpredicted).objective
    opt_over = opt_chain_exact(parts.overpredicted).objective
    opt_pruned = opt_chain_exact(parts.pruned).objective
    return ErrorReport(
        model="static_weights",
        value=opt_over + omega * opt_under,
        components={
            "opt_underpredicted": opt_under,
            "opt_overpredicted": opt_over,
            "opt_pruned": opt_pruned,
            "opt_predicted": opt_chain_exact(parts.predicted).objective,
        },
    )
