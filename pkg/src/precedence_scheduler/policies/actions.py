"""
Nonpreemptive policies that follow a predicted schedule: an action (priority)
prediction, or the optimal schedule of a predicted chain instance.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Deque, Dict, List, Literal, Optional, Sequence, Tuple

from ..core import Instance, chain_list, classify_topology
from ..engine import PolicyView, RateVector
from ..errors import TopologyMismatchError, UnmatchedChainError
from ..oracles import opt_chain_exact
from .base import ChainTracker, Policy
from .orders import rank_table

ActionMode = Literal["static", "adaptive"]


class FollowAction(Policy):
    """Run the front jobs with the smallest predicted priority to completion.

    Jobs the prediction does not know come after every predicted job, by id.
    ``mode`` only labels the policy: an adaptive action prediction is a ranking
    fixed at time zero, so both modes run the same initial ranking.
    """

    def __init__(self, order: Sequence[int], mode: ActionMode = "static") -> None:
        self.ranks = rank_table(order)
        self.unknown_offset = len(self.ranks)
        self.mode = mode
        self.label = f"follow_action[{mode}]"
        self.reset()

    def reset(self) -> None:
        self.running: List[int] = []

    def priority(self, job_id: int) -> int:
        return self.ranks.get(job_id, self.unknown_offset + job_id)

    def decide(self, view: PolicyView) -> RateVector:
        front = set(view.front_ids)
        self.running = [job_id for job_id in self.running if job_id in front]
        waiting = sorted(
            (job_id for job_id in front if job_id not in self.running), key=self.priority
        )
        while len(self.running) < view.machines and waiting:
            self.running.append(waiting.pop(0))
        return {job_id: Fraction(1) for job_id in self.running}


def follow_action(order: Sequence[int], mode: ActionMode = "static") -> Policy:
    return FollowAction(order, mode)


class FollowInput(Policy):
    """Follow the optimal order of a predicted chain instance.

    Chains are matched by the rank of their head id. When an actual chain ends
    early its remaining predicted jobs are dropped; actual jobs beyond the
    predicted length run after the predicted schedule, in reveal order.
    """

    label = "follow_input"

    def __init__(self, predicted: Instance) -> None:
        if not classify_topology(predicted).is_chains:
            raise TopologyMismatchError("predicted instance is not a set of chains")
        chains = chain_list(predicted)
        slot: Dict[int, Tuple[int, int]] = {}
        for rank, chain in enumerate(chains):
            for position, job_id in enumerate(chain):
                slot[job_id] = (rank, position)
        self.chain_count = len(chains)
        self.lengths = [len(chain) for chain in chains]
        self.plan: Tuple[Tuple[int, int], ...] = tuple(
            slot[job_id] for job_id in opt_chain_exact(predicted).order
        )
        self.reset()

    def reset(self) -> None:
        self.tracker = ChainTracker()
        self.cursor = 0
        self.extras: Deque[int] = deque()
        self.current: Optional[int] = None

    def _next_planned(self, view: PolicyView) -> Optional[int]:
        ranks = self.tracker.chain_rank()
        front_by_rank = {
            ranks[head]: job_id for head, job_id in self.tracker.front_by_chain(view).items()
        }
        while self.cursor < len(self.plan):
            rank, position = self.plan[self.cursor]
            job_id = front_by_rank.get(rank)
            if job_id is not None and self.tracker.position[job_id] == position:
                return job_id
            # Position already passed or the actual chain ended before it.
            self.cursor += 1
        return None

    def decide(self, view: PolicyView) -> RateVector:
        new_heads = self.tracker.observe(view)
        if new_heads and len(self.tracker.heads) != self.chain_count:
            raise UnmatchedChainError(
                f"predicted {self.chain_count} chains, actual instance has "
                f"{len(self.tracker.heads)}",
                predicted=self.chain_count,
                actual=len(self.tracker.heads),
            )
        for job_id in view.revealed:
            if self.tracker.position[job_id] >= self._predicted_length(job_id):
                self.extras.append(job_id)

        front = set(view.front_ids)
        if self.current in front:
            return {self.current: Fraction(1)}
        self.current = self._next_planned(view)
        if self.current is None:
            while self.extras and self.extras[0] not in front:
                self.extras.popleft()
            self.current = self.extras[0] if self.extras else None
        return {self.current: Fraction(1)} if self.current is not None else {}

    def _predicted_length(self, job_id: int) -> int:
        rank = self.tracker.chain_rank()[self.tracker.chain_of[job_id]]
        return self.lengths[rank]


def follow_input(predicted: Instance) -> Policy:
    return FollowInput(predicted)
