"""
Weight-order policies: the harmonic rate rule driven by an adaptive order oracle,
and its static counterpart that ranks chains once at time zero.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Literal, Sequence

from ..engine import PolicyView, RateVector
from ..errors import MissingInitialJobError, OracleFailureError, OrderNotTotalError
from ..rationals import harmonic
from .base import ChainTracker, Policy

StaticVariant = Literal["strict", "work_conserving"]


def rank_table(order: Sequence[int]) -> Dict[int, int]:
    ranks: Dict[int, int] = {}
    for position, job_id in enumerate(order):
        if job_id in ranks:
            raise OrderNotTotalError(f"job {job_id} appears twice in the order", job_id=job_id)
        ranks[int(job_id)] = position
    return ranks


def harmonic_rate(position: int, count: int, machines: int) -> Fraction:
    """min{1, m / (H_count * position)} for a 1-based position."""
    return min(Fraction(1), machines / (harmonic(count) * position))


class AdaptiveOrder(Policy):
    label = "order_adaptive"

    def __init__(self, order: Sequence[int]) -> None:
        self.ranks = rank_table(order)

    def decide(self, view: PolicyView) -> RateVector:
        missing = [job_id for job_id in view.front_ids if job_id not in self.ranks]
        if missing:
            raise OracleFailureError(
                f"order oracle does not rank front jobs {missing}", job_ids=missing
            )
        ordered = sorted(view.front_ids, key=self.ranks.__getitem__)
        count = len(ordered)
        return {
            job_id: harmonic_rate(position, count, view.machines)
            for position, job_id in enumerate(ordered, start=1)
        }


def order_adaptive(order: Sequence[int]) -> Policy:
    return AdaptiveOrder(order)


class StaticOrder(Policy):
    """Chains ranked once by the initial order. ``strict`` keeps every chain's
    initial rate for good; ``work_conserving`` re-ranks over the alive chains."""

    def __init__(self, order: Sequence[int], variant: StaticVariant = "strict") -> None:
        if variant not in ("strict", "work_conserving"):
            raise ValueError(f"unknown static order variant {variant!r}")
        self.ranks = rank_table(order)
        self.variant = variant
        self.label = f"order_static[{variant}]"
        self.reset()

    def reset(self) -> None:
        self.tracker = ChainTracker()
        self.position: Dict[int, int] = {}
        self.width = 0

    def _rank_initial(self, heads: Sequence[int]) -> None:
        missing = [head for head in heads if head not in self.ranks]
        if missing:
            raise MissingInitialJobError(
                f"initial order misses front jobs {missing}", job_ids=missing
            )
        ordered = sorted(heads, key=self.ranks.__getitem__)
        self.position = {head: position for position, head in enumerate(ordered, start=1)}
        self.width = len(ordered)

    def decide(self, view: PolicyView) -> RateVector:
        new_heads = self.tracker.observe(view)
        if new_heads:
            if self.position:
                raise MissingInitialJobError(
                    f"jobs {new_heads} started new chains after time zero", job_ids=new_heads
                )
            self._rank_initial(new_heads)
        fronts = self.tracker.front_by_chain(view)
        if self.variant == "strict":
            return {
                job_id: harmonic_rate(self.position[head], self.width, view.machines)
                for head, job_id in fronts.items()
            }
        alive = sorted(fronts, key=self.position.__getitem__)
        return {
            fronts[head]: harmonic_rate(position, len(alive), view.machines)
            for position, head in enumerate(alive, start=1)
        }


def order_static(order: Sequence[int], variant: StaticVariant = "strict") -> Policy:
    return StaticOrder(order, variant)
