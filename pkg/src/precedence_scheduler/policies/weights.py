"""
Weight-driven policies: equal share, weighted round robin on chains (single and
parallel machines) and the adaptive weighted round robin for out-forests.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from ..engine import PolicyView, RateVector
from ..errors import InfeasibleRatesError, MissingPredictionError, OracleFailureError
from ..rationals import parse_rational, rational_sum
from .base import ChainTracker, Policy


def _share(count: int, machines: int) -> Fraction:
    return min(Fraction(1), Fraction(machines, count))


class EqualShare(Policy):
    label = "equal_share"

    def decide(self, view: PolicyView) -> RateVector:
        if not view.front:
            return {}
        rate = _share(len(view.front), view.machines)
        return {job_id: rate for job_id in view.front_ids}


def equal_share() -> Policy:
    return EqualShare()


def capped_proportional(
    weights: List[Tuple[int, Fraction]], machines: int
) -> Dict[int, Fraction]:
    """WDEQ allotment: keys with a proportional share of at least one machine get
    rate 1 (largest weight first, ties by key); the rest share what is left."""
    pool = sorted(weights, key=lambda item: (-item[1], item[0]))
    rates: Dict[int, Fraction] = {}
    capacity = Fraction(machines)
    while pool:
        total = rational_sum(weight for _, weight in pool)
        key, weight = pool[0]
        if capacity * weight < total:
            break
        rates[key] = Fraction(1)
        capacity -= 1
        pool.pop(0)
        if capacity <= 0:
            break
    if pool and capacity > 0:
        total = rational_sum(weight for _, weight in pool)
        for key, weight in pool:
            rates[key] = capacity * weight / total
    return rates


class WeightedRoundRobinChains(Policy):
    """Each chain's front job is processed proportionally to the chain's
    predicted remaining weight."""

    def __init__(
        self,
        predictions: Mapping[int, Fraction],
        machines: Optional[int] = None,
        label: str = "wrr_chains",
    ) -> None:
        self.predictions = {int(k): parse_rational(v) for k, v in predictions.items()}
        self.machines = machines
        self.label = label
        self.reset()

    def reset(self) -> None:
        self.tracker = ChainTracker()
        self.predicted: Dict[int, Fraction] = {}

    def remaining_weight(self, head: int) -> Fraction:
        return self.predicted[head] - self.tracker.completed_weight[head]

    def decide(self, view: PolicyView) -> RateVector:
        if self.machines is not None and view.machines != self.machines:
            raise InfeasibleRatesError(
                f"{self.label} configured for m={self.machines}, run with m={view.machines}",
                configured=self.machines,
                machines=view.machines,
            )
        for head in self.tracker.observe(view):
            if head not in self.predictions:
                raise MissingPredictionError(head, "static weight prediction")
            self.predicted[head] = self.predictions[head]

        fronts = self.tracker.front_by_chain(view)
        positive = [
            (head, self.remaining_weight(head))
            for head in sorted(fronts)
            if self.remaining_weight(head) > 0
        ]
        if positive:
            rates = capped_proportional(positive, view.machines)
            return {fronts[head]: rate for head, rate in rates.items()}

        # Only chains whose predicted weight is used up remain.
        drain = sorted(fronts.values())
        if not drain:
            return {}
        if view.machines == 1:
            return {drain[0]: Fraction(1)}
        rate = _share(len(drain), view.machines)
        return {job_id: rate for job_id in drain}


def wrr_chains(predictions: Mapping[int, Fraction]) -> Policy:
    return WeightedRoundRobinChains(predictions)


def wdeq_chains(predictions: Mapping[int, Fraction], machines: int) -> Policy:
    if machines < 1:
        raise ValueError("machine count must be at least 1")
    return WeightedRoundRobinChains(predictions, machines=machines, label="wdeq_chains")


class AdaptiveWeightedRoundRobin(Policy):
    """Rates min{1, m * W_j / sum W} from a table answering for every job."""

    label = "wrr_adaptive"

    def __init__(self, table: Mapping[int, Fraction]) -> None:
        self.table = {int(k): parse_rational(v) for k, v in table.items()}

    def lookup(self, job_id: int) -> Fraction:
        try:
            value = self.table[job_id]
        except KeyError:
            raise OracleFailureError(
                f"weight oracle has no answer for job {job_id}", job_id=job_id
            ) from None
        if value < 0:
            raise OracleFailureError(f"negative weight prediction for job {job_id}", job_id=job_id)
        return value

    def decide(self, view: PolicyView) -> RateVector:
        if not view.front:
            return {}
        predicted = {job_id: self.lookup(job_id) for job_id in view.front_ids}
        total = rational_sum(predicted.values())
        if total == 0:
            rate = _share(len(predicted), view.machines)
            return {job_id: rate for job_id in predicted}
        return {
            job_id: min(Fraction(1), view.machines * value / total)
            for job_id, value in predicted.items()
            if value > 0
        }


def wrr_adaptive(table: Mapping[int, Fraction]) -> Policy:
    return AdaptiveWeightedRoundRobin(table)
