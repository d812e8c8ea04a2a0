"""
Immutable instance model: jobs with exact processing times and weights, a
precedence DAG over them, topology classification, width and successor aggregates.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, List, Literal, Optional, Sequence, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import (
    EmptyInstanceError,
    InstanceValidationError,
    TopologyMismatchError,
    UnknownIdError,
)
from .rationals import Rational, rational_sum

SCHEMA_VERSION = 1


class Job(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0, description="Dense job id, 0..n-1.")
    p: Rational = Field(..., description="Processing requirement (time units).")
    w: Rational = Field(..., description="Weight.")


DefectKind = Literal[
    "Cyclic", "DanglingEdge", "DuplicateId", "DuplicateEdge", "SelfLoop", "NegativeValue", "SparseIds"
]


class Defect(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: DefectKind
    ids: Tuple[int, ...]
    detail: str = ""

    def describe(self) -> str:
        suffix = f" ({self.detail})" if self.detail else ""
        return f"{self.kind}{{{', '.join(map(str, self.ids))}}}{suffix}"


def find_defects(jobs: Sequence[Job], edges: Sequence[Tuple[int, int]]) -> List[Defect]:
    defects: List[Defect] = []
    id_counts = Counter(job.id for job in jobs)
    for job_id, count in sorted(id_counts.items()):
        if count > 1:
            defects.append(Defect(kind="DuplicateId", ids=(job_id,), detail=f"{count} jobs"))
    ids = set(id_counts)
    if ids and ids != set(range(len(ids))):
        missing = sorted(set(range(max(ids) + 1)) - ids)
        defects.append(Defect(kind="SparseIds", ids=tuple(missing), detail="ids must be 0..n-1"))

    for job in jobs:
        negative = [name for name in ("p", "w") if getattr(job, name) < 0]
        if negative:
            defects.append(
                Defect(kind="NegativeValue", ids=(job.id,), detail=", ".join(negative))
            )

    edge_counts = Counter(edges)
    for (source, target), count in sorted(edge_counts.items()):
        if count > 1:
            defects.append(Defect(kind="DuplicateEdge", ids=(source, target)))
    graph = nx.DiGraph()
    graph.add_nodes_from(ids)
    for source, target in sorted(edge_counts):
        dangling = [endpoint for endpoint in (source, target) if endpoint not in ids]
        if dangling:
            defects.append(Defect(kind="DanglingEdge", ids=(source, target)))
            continue
        if source == target:
            defects.append(Defect(kind="SelfLoop", ids=(source,)))
            continue
        graph.add_edge(source, target)

    for component in nx.strongly_connected_components(graph):
        if len(component) > 1:
            defects.append(Defect(kind="Cyclic", ids=tuple(sorted(component))))
    return defects


class Instance(BaseModel):
    """A weighted job DAG. Edges ``(a, b)`` mean a precedes b."""

    model_config = ConfigDict(frozen=True)

    version: int = SCHEMA_VERSION
    jobs: Tuple[Job, ...] = ()
    edges: Tuple[Tuple[int, int], ...] = ()

    @model_validator(mode="after")
    def _check_structure(self) -> "Instance":
        defects = find_defects(self.jobs, self.edges)
        if defects:
            raise InstanceValidationError(defects)
        if self.version != SCHEMA_VERSION:
            raise ValueError(f"unsupported instance schema version {self.version}")
        return self

    # --- derived views -----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.jobs)

    @cached_property
    def processing(self) -> Tuple[Fraction, ...]:
        by_id = sorted(self.jobs, key=lambda job: job.id)
        return tuple(job.p for job in by_id)

    @cached_property
    def weights(self) -> Tuple[Fraction, ...]:
        by_id = sorted(self.jobs, key=lambda job: job.id)
        return tuple(job.w for job in by_id)

    @cached_property
    def successors(self) -> Tuple[Tuple[int, ...], ...]:
        out: List[List[int]] = [[] for _ in range(self.n)]
        for source, target in self.edges:
            out[source].append(target)
        return tuple(tuple(sorted(targets)) for targets in out)

    @cached_property
    def predecessors(self) -> Tuple[Tuple[int, ...], ...]:
        into: List[List[int]] = [[] for _ in range(self.n)]
        for source, target in self.edges:
            into[target].append(source)
        return tuple(tuple(sorted(sources)) for sources in into)

    @cached_property
    def roots(self) -> Tuple[int, ...]:
        return tuple(v for v in range(self.n) if not self.predecessors[v])

    @cached_property
    def graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    @cached_property
    def topological_order(self) -> Tuple[int, ...]:
        return tuple(nx.lexicographical_topological_sort(self.graph))

    def check_id(self, job_id: int) -> None:
        if not 0 <= job_id < self.n:
            raise UnknownIdError(job_id)

    def total_weight(self) -> Fraction:
        return rational_sum(self.weights)

    # --- I/O ---------------------------------------------------------------

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.model_validate_json(text)

    @classmethod
    def load(cls, path: Path | str) -> "Instance":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: Path | str) -> Path:
        target = Path(path)
        target.write_text(self.to_json() + "\n", encoding="utf-8")
        return target


def validate(raw_jobs: Iterable[Any], raw_edges: Iterable[Sequence[int]]) -> Instance:
    """Build an Instance from raw job records and edge pairs, reporting every defect."""
    jobs = tuple(job if isinstance(job, Job) else Job.model_validate(job) for job in raw_jobs)
    edges = tuple((int(edge[0]), int(edge[1])) for edge in raw_edges)
    return Instance(jobs=jobs, edges=edges)


def validate_defects(raw_jobs: Iterable[Any], raw_edges: Iterable[Sequence[int]]) -> List[Defect]:
    """Like `validate` but returns the defects (empty list when valid)."""
    try:
        validate(raw_jobs, raw_edges)
    except InstanceValidationError as exc:
        return list(exc.defects)
    return []


def make_instance(
    processing: Sequence[Any],
    weights: Sequence[Any],
    edges: Iterable[Sequence[int]] = (),
) -> Instance:
    """Convenience constructor with ids 0..n-1 taken from list positions."""
    if len(processing) != len(weights):
        raise ValueError("processing and weights must have equal length")
    jobs = [{"id": i, "p": p, "w": w} for i, (p, w) in enumerate(zip(processing, weights))]
    return validate(jobs, edges)


# --- topology ----------------------------------------------------------------

TopologyKind = Literal["chains", "out_forest", "in_forest", "general_dag"]


class Topology(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: TopologyKind
    connected: bool = Field(..., description="True for a single component (a tree).")

    @property
    def is_out_forest(self) -> bool:
        return self.kind in ("chains", "out_forest")

    @property
    def is_in_forest(self) -> bool:
        return self.kind in ("chains", "in_forest")

    @property
    def is_chains(self) -> bool:
        return self.kind == "chains"


def classify_topology(instance: Instance) -> Topology:
    max_in = max((len(preds) for preds in instance.predecessors), default=0)
    max_out = max((len(succs) for succs in instance.successors), default=0)
    if max_in <= 1 and max_out <= 1:
        kind: TopologyKind = "chains"
    elif max_in <= 1:
        kind = "out_forest"
    elif max_out <= 1:
        kind = "in_forest"
    else:
        kind = "general_dag"
    components = nx.number_weakly_connected_components(instance.graph) if instance.n else 0
    return Topology(kind=kind, connected=components == 1)


def chain_list(instance: Instance) -> List[List[int]]:
    """The chains of a chain instance, ordered by head id."""
    if not classify_topology(instance).is_chains:
        raise TopologyMismatchError("instance is not a set of chains")
    chains: List[List[int]] = []
    for head in instance.roots:
        chain = [head]
        while instance.successors[chain[-1]]:
            chain.append(instance.successors[chain[-1]][0])
        chains.append(chain)
    return chains


def width(instance: Instance) -> int:
    """Maximum antichain size via Dilworth: n minus a maximum matching in the
    bipartite split of the transitive closure."""
    if instance.n == 0:
        raise EmptyInstanceError("width of an empty instance is undefined")
    closure = nx.transitive_closure_dag(instance.graph)
    bipartite = nx.Graph()
    left = [("L", v) for v in range(instance.n)]
    bipartite.add_nodes_from(left, bipartite=0)
    bipartite.add_nodes_from((("R", v) for v in range(instance.n)), bipartite=1)
    bipartite.add_edges_from((("L", u), ("R", v)) for u, v in closure.edges)
    matching = nx.bipartite.hopcroft_karp_matching(bipartite, top_nodes=left)
    return instance.n - len(matching) // 2


# --- successor sets ----------------------------------------------------------


class SuccessorAggregate(BaseModel):
    model_config = ConfigDict(frozen=True)

    root: int
    members: Tuple[int, ...]
    total_weight: Rational
    total_processing: Rational
    average: Optional[Rational] = Field(
        default=None, description="w(S)/p(S); None when p(S) = 0."
    )


def successor_aggregate(instance: Instance, v: int) -> SuccessorAggregate:
    instance.check_id(v)
    members = tuple(sorted(nx.descendants(instance.graph, v) | {v}))
    total_weight = rational_sum(instance.weights[u] for u in members)
    total_processing = rational_sum(instance.processing[u] for u in members)
    average = total_weight / total_processing if total_processing else None
    return SuccessorAggregate(
        root=v,
        members=members,
        total_weight=total_weight,
        total_processing=total_processing,
        average=average,
    )


def successor_sums(instance: Instance, values: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    """Sum of ``values`` over S(v) for every v, in one reverse-topological pass."""
    order = instance.topological_order
    sums: List[Fraction] = [Fraction(0)] * instance.n
    if all(len(preds) <= 1 for preds in instance.predecessors):
        # Out-forest: successor sets of siblings are disjoint.
        for v in reversed(order):
            sums[v] = values[v] + rational_sum(sums[c] for c in instance.successors[v])
        return tuple(sums)
    reach: List[int] = [0] * instance.n
    for v in reversed(order):
        mask = 1 << v
        for child in instance.successors[v]:
            mask |= reach[child]
        reach[v] = mask
    for v in range(instance.n):
        mask, total = reach[v], Fraction(0)
        while mask:
            lowest = mask & -mask
            total += values[lowest.bit_length() - 1]
            mask ^= lowest
        sums[v] = total
    return tuple(sums)


def successor_weights(instance: Instance) -> Tuple[Fraction, ...]:
    """w(S(v)) for every job v."""
    return successor_sums(instance, instance.weights)
