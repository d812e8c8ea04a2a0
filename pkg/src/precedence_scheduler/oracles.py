"""
Exact optimal baselines for the weighted completion time objective.

- ``opt_chain_exact``: the prefix-density ratio rule, optimal on chains.
- ``opt_brute_force``: dynamic program over order ideals (one machine) or a
  pruned search over semi-active nonpreemptive schedules (several machines).
- ``opt_weighted_max``: the largest cost under a second weight vector among all
  schedules that are optimal for the first.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .config import get_settings
from .core import Instance, chain_list, classify_topology
from .errors import TooLargeError
from .rationals import Rational, rational_sum

logger = logging.getLogger(__name__)

Solver = Literal["chain_exact", "brute_force"]


class OptResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    objective: Rational
    order: Tuple[int, ...] = Field(..., description="Jobs in start order.")
    solver: Solver
    machines: Tuple[int, ...] = Field(
        default=(), description="Machine of each job in `order` (several machines only)."
    )


def sequence_objective(instance: Instance, order: Sequence[int]) -> Fraction:
    """Objective of processing ``order`` back to back on one machine."""
    time, total = Fraction(0), Fraction(0)
    for job_id in order:
        time += instance.processing[job_id]
        total += instance.weights[job_id] * time
    return total


# --- chains: ratio rule ------------------------------------------------------

_INFINITE = (1, Fraction(0))


def _density(weight: Fraction, processing: Fraction) -> Tuple[int, Fraction]:
    if processing == 0:
        return _INFINITE if weight > 0 else (0, Fraction(0))
    return (0, weight / processing)


def _best_prefix(instance: Instance, remaining: Sequence[int]) -> Tuple[Tuple[int, Fraction], Fraction, int]:
    """(density, processing, length) of the max-density prefix, shortest on ties."""
    best: Optional[Tuple[Tuple[int, Fraction], Fraction, int]] = None
    weight, processing = Fraction(0), Fraction(0)
    for length, job_id in enumerate(remaining, start=1):
        weight += instance.weights[job_id]
        processing += instance.processing[job_id]
        density = _density(weight, processing)
        if best is None or density > best[0]:
            best = (density, processing, length)
    assert best is not None
    return best


def opt_chain_exact(instance: Instance) -> OptResult:
    chains = chain_list(instance)
    cursors = [0] * len(chains)
    order: List[int] = []
    while True:
        candidates = []
        for rank, chain in enumerate(chains):
            if cursors[rank] < len(chain):
                density, processing, length = _best_prefix(instance, chain[cursors[rank]:])
                candidates.append((density, processing, rank, length))
        if not candidates:
            break
        if all(density == (0, Fraction(0)) for density, *_ in candidates):
            for rank, chain in enumerate(chains):
                order.extend(chain[cursors[rank]:])
            break
        density, _, rank, length = min(candidates, key=lambda c: ((-c[0][0], -c[0][1]), c[1], c[2]))
        order.extend(chains[rank][cursors[rank]:cursors[rank] + length])
        cursors[rank] += length
    return OptResult(
        objective=sequence_objective(instance, order), order=tuple(order), solver="chain_exact"
    )


# --- one machine: dynamic program over ideals ---------------------------------


def _pred_masks(instance: Instance) -> List[int]:
    masks = []
    for preds in instance.predecessors:
        mask = 0
        for pred in preds:
            mask |= 1 << pred
        masks.append(mask)
    return masks


def _ideal_dp(
    instance: Instance,
    base: Sequence[Fraction],
    measure: Optional[Sequence[Fraction]] = None,
) -> Tuple[Fraction, Fraction, Tuple[int, ...]]:
    """Minimise the ``base`` cost; among minimisers maximise the ``measure`` cost.

    Returns (base cost, measure cost, order). Ties prefer the smaller job id.
    """
    n = instance.n
    measure = measure if measure is not None else [Fraction(0)] * n
    pred_masks = _pred_masks(instance)
    full = (1 << n) - 1
    memo: Dict[int, Tuple[Fraction, Fraction, int]] = {full: (Fraction(0), Fraction(0), -1)}
    elapsed: Dict[int, Fraction] = {}

    def time_of(mask: int) -> Fraction:
        if mask not in elapsed:
            elapsed[mask] = rational_sum(
                instance.processing[j] for j in range(n) if mask >> j & 1
            )
        return elapsed[mask]

    def solve(mask: int) -> Tuple[Fraction, Fraction, int]:
        if mask in memo:
            return memo[mask]
        start = time_of(mask)
        best: Optional[Tuple[Fraction, Fraction, int]] = None
        for j in range(n):
            if mask >> j & 1 or pred_masks[j] & ~mask:
                continue
            completion = start + instance.processing[j]
            rest_base, rest_measure, _ = solve(mask | 1 << j)
            candidate = (
                base[j] * completion + rest_base,
                measure[j] * completion + rest_measure,
                j,
            )
            if best is None or (candidate[0], -candidate[1]) < (best[0], -best[1]):
                best = candidate
        assert best is not None
        memo[mask] = best
        return best

    base_cost, measure_cost, _ = solve(0)
    order: List[int] = []
    mask = 0
    while mask != full:
        j = memo[mask][2]
        order.append(j)
        mask |= 1 << j
    return base_cost, measure_cost, tuple(order)


# --- several machines: semi-active schedules ----------------------------------


def _parallel_search(instance: Instance, machines: int) -> OptResult:
    n = instance.n
    weights, processing = instance.weights, instance.processing
    preds = instance.predecessors
    best_cost: List[Optional[Fraction]] = [None]
    best_plan: List[Tuple[Tuple[int, int], ...]] = [()]

    completion: Dict[int, Fraction] = {}
    plan: List[Tuple[int, int]] = []

    def search(free: Tuple[Fraction, ...], last_start: Fraction, cost: Fraction) -> None:
        if len(completion) == n:
            if best_cost[0] is None or cost < best_cost[0]:
                best_cost[0], best_plan[0] = cost, tuple(plan)
            return
        # Lower bound: every remaining job completes no earlier than last_start + p_j.
        bound = cost + rational_sum(
            weights[j] * (last_start + processing[j]) for j in range(n) if j not in completion
        )
        if best_cost[0] is not None and bound >= best_cost[0]:
            return
        for j in range(n):
            if j in completion or any(pred not in completion for pred in preds[j]):
                continue
            ready = max((completion[pred] for pred in preds[j]), default=Fraction(0))
            tried: set[Fraction] = set()
            for machine in range(machines):
                if free[machine] in tried:
                    continue
                tried.add(free[machine])
                start = max(free[machine], ready)
                if start < last_start:
                    continue
                end = start + processing[j]
                completion[j] = end
                plan.append((j, machine))
                search(free[:machine] + (end,) + free[machine + 1 :], start, cost + weights[j] * end)
                plan.pop()
                del completion[j]

    search(tuple(Fraction(0) for _ in range(machines)), Fraction(0), Fraction(0))
    assert best_cost[0] is not None
    return OptResult(
        objective=best_cost[0],
        order=tuple(j for j, _ in best_plan[0]),
        machines=tuple(machine for _, machine in best_plan[0]),
        solver="brute_force",
    )


def opt_brute_force(instance: Instance, machines: int = 1) -> OptResult:
    if machines < 1:
        raise ValueError("machine count must be at least 1")
    settings = get_settings()
    limit = settings.brute_force_limit if machines == 1 else settings.parallel_brute_force_limit
    if instance.n > limit:
        raise TooLargeError(instance.n, limit, f"brute force on {machines} machine(s)")
    if instance.n == 0:
        return OptResult(objective=Fraction(0), order=(), solver="brute_force")
    if machines == 1:
        objective, _, order = _ideal_dp(instance, instance.weights)
        return OptResult(objective=objective, order=order, solver="brute_force")
    logger.debug("parallel brute force: n=%d m=%d", instance.n, machines)
    return _parallel_search(instance, machines)


def opt_weighted_max(
    measure: Sequence[Fraction], base: Sequence[Fraction], instance: Instance
) -> Fraction:
    limit = get_settings().brute_force_limit
    if instance.n > limit:
        raise TooLargeError(instance.n, limit, "weighted max")
    return weighted_max_unbounded(measure, base, instance)


def weighted_max_unbounded(
    measure: Sequence[Fraction], base: Sequence[Fraction], instance: Instance
) -> Fraction:
    """`opt_weighted_max` without the size guard; the cost is the number of
    order ideals, which stays small on few chains."""
    if len(measure) != instance.n or len(base) != instance.n:
        raise ValueError("weight vectors must have one entry per job")
    if instance.n == 0:
        return Fraction(0)
    _, measure_cost, _ = _ideal_dp(instance, list(base), list(measure))
    return measure_cost


def optimum(instance: Instance) -> OptResult:
    """Single-machine optimum with the cheapest exact solver that applies."""
    if instance.n and classify_topology(instance).is_chains:
        return opt_chain_exact(instance)
    return opt_brute_force(instance)


# --- parallel lower bound -----------------------------------------------------


def chain_prefix_lengths(instance: Instance) -> Tuple[Fraction, ...]:
    """Largest total processing of a precedence path ending in each job."""
    lengths: List[Fraction] = [Fraction(0)] * instance.n
    for v in instance.topological_order:
        before = max((lengths[u] for u in instance.predecessors[v]), default=Fraction(0))
        lengths[v] = before + instance.processing[v]
    return tuple(lengths)


def parallel_lower_bound(instance: Instance, machines: int) -> Fraction:
    """max{sum_j w_j * chain_j, Opt_1 / m}, valid for preemptive schedules."""
    path_bound = rational_sum(
        w * length for w, length in zip(instance.weights, chain_prefix_lengths(instance))
    )
    return max(path_bound, optimum(instance).objective / machines)
