"""
Time-sharing of two policies on one set of machines.

Each sub-policy runs against its own virtual progress ledger at a fixed share of
the machines. A sub-policy sees a job as unfinished until its own ledger reaches
the job's processing time (known once the job has really completed), and sees a
successor only once it has virtually completed every predecessor. Work a
sub-policy spends on a job that is already really complete is lost capacity.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from ..engine import PolicyView, RateVector
from ..rationals import format_rational, parse_rational
from .base import Policy
from .weights import equal_share, wrr_chains


class _Ledger:
    """Virtual execution state of one sub-policy."""

    def __init__(self, policy: Policy, share: Fraction) -> None:
        self.policy = policy.spawn()
        self.share = share
        self.time = Fraction(0)
        self.progress: Dict[int, Fraction] = defaultdict(Fraction)
        self.front: Set[int] = set()
        self.done: Set[int] = set()
        self.waiting: Dict[int, Set[int]] = {}
        self.rates: Dict[int, Fraction] = {}
        self.revealed: List[int] = []
        self.completed: List[int] = []
        self.started = False

    def advance(self, elapsed: Fraction) -> None:
        for job_id, rate in self.rates.items():
            self.progress[job_id] += self.share * rate * elapsed
        self.time += self.share * elapsed

    def expect(self, job_id: int, preds: Tuple[int, ...]) -> None:
        self.waiting[job_id] = {pred for pred in preds if pred not in self.done}

    def settle(self, known: Dict[int, Fraction], children: Dict[int, List[int]]) -> None:
        """Reveal jobs whose predecessors are virtually done, then complete jobs
        whose ledger reached their known processing time, cascading by id."""
        finished: List[int] = []
        for job_id in sorted(job_id for job_id, missing in self.waiting.items() if not missing):
            del self.waiting[job_id]
            self._reveal(job_id, known, finished)
        for job_id in self.front:
            if job_id in known and self.progress[job_id] >= known[job_id]:
                finished.append(job_id)
        heapq.heapify(finished)
        while finished:
            job_id = heapq.heappop(finished)
            if job_id not in self.front:
                continue
            self.front.discard(job_id)
            self.done.add(job_id)
            self.completed.append(job_id)
            self.rates.pop(job_id, None)
            released = []
            for child in children.get(job_id, ()):
                missing = self.waiting.get(child)
                if missing is not None and job_id in missing:
                    missing.discard(job_id)
                    if not missing:
                        released.append(child)
            for child in sorted(released):
                del self.waiting[child]
                self._reveal(child, known, finished)

    def _reveal(self, job_id: int, known: Dict[int, Fraction], finished: List[int]) -> None:
        self.front.add(job_id)
        self.revealed.append(job_id)
        if known.get(job_id) == 0:
            heapq.heappush(finished, job_id)

    def wants_query(self) -> bool:
        if not self.started or self.revealed or self.completed:
            return True
        wakeup = self.policy.next_wakeup()
        return wakeup is not None and wakeup <= self.time

    def query(
        self,
        machines: int,
        weights: Dict[int, Fraction],
        preds: Dict[int, Tuple[int, ...]],
    ) -> None:
        self.started = True
        view = PolicyView(
            time=self.time,
            front=tuple((job_id, weights[job_id]) for job_id in sorted(self.front)),
            revealed=tuple(self.revealed),
            revealed_by={job_id: preds[job_id] for job_id in self.revealed},
            completed=tuple((job_id, weights[job_id]) for job_id in self.completed),
            machines=machines,
        )
        self.revealed, self.completed = [], []
        if not self.front:
            self.rates = {}
            return
        self.rates = {
            job_id: Fraction(rate)
            for job_id, rate in self.policy.decide(view).items()
            if rate > 0
        }

    def wakeup(self, now: Fraction, known: Dict[int, Fraction]) -> Optional[Fraction]:
        """Earliest real time at which this ledger changes on its own."""
        if self.share == 0:
            return None
        candidates: List[Fraction] = []
        for job_id, rate in self.rates.items():
            if job_id in known:
                candidates.append(now + (known[job_id] - self.progress[job_id]) / (self.share * rate))
        inner = self.policy.next_wakeup()
        if inner is not None and inner > self.time:
            candidates.append(now + (inner - self.time) / self.share)
        return min(candidates, default=None)


class TimeShare(Policy):
    def __init__(self, first: Policy, second: Policy, share: Fraction = Fraction(1, 2)) -> None:
        share = parse_rational(share)
        if not 0 <= share <= 1:
            raise ValueError(f"time-sharing split must lie in [0, 1], got {share}")
        self.first = first
        self.second = second
        self.share = share
        self.label = f"time_share({first.label},{second.label},{format_rational(share)})"
        self.reset()

    def reset(self) -> None:
        self.ledgers = (
            _Ledger(self.first, self.share),
            _Ledger(self.second, 1 - self.share),
        )
        self.weights: Dict[int, Fraction] = {}
        self.preds: Dict[int, Tuple[int, ...]] = {}
        self.children: Dict[int, List[int]] = defaultdict(list)
        self.known: Dict[int, Fraction] = {}
        self.real_progress: Dict[int, Fraction] = defaultdict(Fraction)
        self.physical: Dict[int, Fraction] = {}
        self.last_time = Fraction(0)
        self._wakeup: Optional[Fraction] = None

    def decide(self, view: PolicyView) -> RateVector:
        elapsed = view.time - self.last_time
        self.last_time = view.time
        for job_id, rate in self.physical.items():
            self.real_progress[job_id] += rate * elapsed
        for ledger in self.ledgers:
            ledger.advance(elapsed)

        for job_id, weight in view.front + view.completed:
            self.weights[job_id] = weight
        for job_id, _ in view.completed:
            self.known[job_id] = self.real_progress[job_id]
        for job_id in view.revealed:
            preds = view.revealed_by.get(job_id, ())
            self.preds[job_id] = preds
            for pred in preds:
                self.children[pred].append(job_id)
            for ledger in self.ledgers:
                ledger.expect(job_id, preds)

        for ledger in self.ledgers:
            ledger.settle(self.known, self.children)
            if ledger.wants_query():
                ledger.query(view.machines, self.weights, self.preds)

        front = set(view.front_ids)
        physical: Dict[int, Fraction] = defaultdict(Fraction)
        for ledger in self.ledgers:
            for job_id, rate in ledger.rates.items():
                if job_id in front:
                    physical[job_id] += ledger.share * rate
        self.physical = {job_id: rate for job_id, rate in physical.items() if rate > 0}

        wakeups = [ledger.wakeup(view.time, self.known) for ledger in self.ledgers]
        self._wakeup = min((w for w in wakeups if w is not None), default=None)
        return dict(self.physical)

    def next_wakeup(self) -> Optional[Fraction]:
        return self._wakeup


def time_share(first: Policy, second: Policy, share: Fraction = Fraction(1, 2)) -> Policy:
    return TimeShare(first, second, share)


def robustify(policy: Policy) -> Policy:
    return TimeShare(policy, equal_share(), Fraction(1, 2))


def learning_augmented_wrr(predictions: Dict[int, Fraction]) -> Policy:
    """Weighted round robin on chains with static weight predictions, time-shared
    with equal share for robustness."""
    policy = robustify(wrr_chains(predictions))
    policy.label = "learning_augmented_wrr"
    return policy
