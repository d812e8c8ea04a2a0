"""
Shared test helpers: hypothesis strategies for chains, out-forests and general
DAGs, and seeded numpy generators for the fixed-seed suites.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from precedence_scheduler.core import Instance, make_instance
from precedence_scheduler.experiments import RandomModelSpec, random_instance

settings.register_profile(
    "precedence",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("precedence")


def _finish(
    draw: st.DrawFn,
    n: int,
    edges: List[Tuple[int, int]],
    min_weight: int,
    max_weight: int,
    unit: bool,
) -> Instance:
    weights = draw(st.lists(st.integers(min_weight, max_weight), min_size=n, max_size=n))
    if unit:
        processing = [1] * n
    else:
        processing = draw(st.lists(st.integers(1, 3), min_size=n, max_size=n))
    return make_instance(processing, weights, edges)


@st.composite
def chain_instances(
    draw: st.DrawFn, max_n: int = 8, min_weight: int = 0, max_weight: int = 5, unit: bool = False
) -> Instance:
    n = draw(st.integers(1, max_n))
    links = draw(st.lists(st.booleans(), min_size=n - 1, max_size=n - 1))
    edges = [(j - 1, j) for j in range(1, n) if links[j - 1]]
    return _finish(draw, n, edges, min_weight, max_weight, unit)


@st.composite
def out_forests(
    draw: st.DrawFn, max_n: int = 8, min_weight: int = 0, max_weight: int = 5
) -> Instance:
    n = draw(st.integers(1, max_n))
    edges = []
    for j in range(1, n):
        parent = draw(st.integers(-1, j - 1))
        if parent >= 0:
            edges.append((parent, j))
    return _finish(draw, n, edges, min_weight, max_weight, False)


@st.composite
def dags(draw: st.DrawFn, max_n: int = 7, min_weight: int = 0, max_weight: int = 5) -> Instance:
    n = draw(st.integers(1, max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    picks = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [pair for pair, keep in zip(pairs, picks) if keep]
    return _finish(draw, n, edges, min_weight, max_weight, False)


def seeded_instances(model: str, count: int, seed: int, **fields) -> List[Instance]:
    """``count`` instances of a random model from one seeded generator."""
    rng = np.random.default_rng(seed)
    spec = RandomModelSpec(model=model, **fields)
    return [random_instance(spec, rng) for _ in range(count)]
