"""
Policy protocol and the shared chain bookkeeping used by the chain algorithms.
"""

from __future__ import annotations

import copy
from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Dict, List, Optional

from ..engine import PolicyView, RateVector
from ..errors import BranchingDetectedError


class Policy(ABC):
    """A rate-assigning strategy. Instances are templates: the engine runs a
    fresh `spawn()` copy, so one policy object can drive many simulations."""

    label: str = "policy"

    def reset(self) -> None:
        """Clear per-run state."""

    @abstractmethod
    def decide(self, view: PolicyView) -> RateVector:
        """Rates for the front jobs of ``view``; omitted jobs get rate 0."""

    def next_wakeup(self) -> Optional[Fraction]:
        """Absolute time at which the policy wants to be re-queried, if any."""
        return None

    def spawn(self) -> "Policy":
        clone = copy.deepcopy(self)
        clone.reset()
        return clone

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class ChainTracker:
    """Follows chain identity from reveal information alone.

    A job revealed without predecessors starts a chain; a job revealed after a
    single predecessor continues that predecessor's chain.
    """

    def __init__(self) -> None:
        self.chain_of: Dict[int, int] = {}
        self.position: Dict[int, int] = {}
        self.heads: List[int] = []
        self.completed_weight: Dict[int, Fraction] = {}
        self._continued: set[int] = set()

    def observe(self, view: PolicyView) -> List[int]:
        """Record reveals and completions; returns heads first seen in this view."""
        new_heads: List[int] = []
        for job_id in view.revealed:
            preds = view.revealed_by.get(job_id, ())
            if not preds:
                self.chain_of[job_id] = job_id
                self.position[job_id] = 0
                self.heads.append(job_id)
                self.completed_weight[job_id] = Fraction(0)
                new_heads.append(job_id)
                continue
            if len(preds) > 1:
                raise BranchingDetectedError(
                    f"job {job_id} has {len(preds)} predecessors", job_id=job_id, preds=preds
                )
            parent = preds[0]
            if parent in self._continued:
                raise BranchingDetectedError(
                    f"job {parent} revealed a second successor {job_id}",
                    job_id=parent,
                    successor=job_id,
                )
            self._continued.add(parent)
            self.chain_of[job_id] = self.chain_of[parent]
            self.position[job_id] = self.position[parent] + 1
        for job_id, weight in view.completed:
            chain = self.chain_of[job_id]
            self.completed_weight[chain] += weight
        return new_heads

    def front_by_chain(self, view: PolicyView) -> Dict[int, int]:
        """Chain head -> current front job."""
        return {self.chain_of[job_id]: job_id for job_id in view.front_ids}

    def chain_rank(self) -> Dict[int, int]:
        return {head: rank for rank, head in enumerate(sorted(self.heads))}
