"""
Deterministic lower-bound instance families.

The valuable job is always placed where id tie-breaking reaches it last (or,
for ``gen_intree``, where it is reached first when ``adversarial=False``).
Every family records the reference values of its construction.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .core import Instance, TopologyKind, make_instance
from .errors import NonIntegralLengthError, OutOfRangeError
from .rationals import Rational, harmonic


class FamilySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    params: Dict[str, int]
    instance: Instance
    topology: TopologyKind
    references: Dict[str, Rational] = Field(
        default_factory=dict, description="Closed-form OPT/ALG reference values."
    )

    def sidecar(self) -> dict:
        return {
            "family": self.name,
            "params": self.params,
            "topology": self.topology,
            "node_count": self.instance.n,
            "references": self.model_dump(mode="json")["references"],
        }


def _require(condition: bool, message: str, **details: int) -> None:
    if not condition:
        raise OutOfRangeError(message, **details)


def gen_hidden_chain(n: int, hidden: int) -> FamilySpec:
    """n-1 zero-weight unit jobs; the ``hidden``-th (1-based) releases a unit job of weight 1."""
    _require(n >= 2 and 1 <= hidden <= n - 1, "need n >= 2 and 1 <= h <= n-1", n=n, h=hidden)
    visible = n - 1
    processing = [1] * n
    weights = [0] * visible + [1]
    instance = make_instance(processing, weights, [(hidden - 1, n - 1)])
    return FamilySpec(
        name="hidden_chain",
        params={"n": n, "h": hidden},
        instance=instance,
        topology="chains",
        references={"opt": Fraction(2)},
    )


def gen_outtree_static(n: int, hidden: int) -> FamilySpec:
    """The hidden-chain instance below a zero-weight root (id 0)."""
    _require(n >= 2 and 1 <= hidden <= n - 1, "need n >= 2 and 1 <= h <= n-1", n=n, h=hidden)
    children = list(range(1, n))
    weights = [0] * n + [1]
    edges = [(0, child) for child in children] + [(hidden, n)]
    instance = make_instance([1] * (n + 1), weights, edges)
    return FamilySpec(
        name="outtree_static",
        params={"n": n, "h": hidden},
        instance=instance,
        topology="out_forest",
        references={"opt": Fraction(3)},
    )


def intree_parameters(n: int) -> Tuple[int, int]:
    """(k, l) = (floor(sqrt n), n - 2k - 1) for the sqrt(n) scaling."""
    k = math.isqrt(n)
    return k, n - 2 * k - 1


def gen_intree(k: int, leaves: int, adversarial: bool = True) -> FamilySpec:
    """k two-job chains (leaf w=0, inner w=1) and a node v (w=1) with ``leaves``
    zero-weight leaves, all feeding a zero-weight root.

    With ``adversarial`` the leaves of v get the smallest ids, so id tie-breaks
    finish them before any 2-chain; otherwise the 2-chains come first.
    """
    _require(k >= 1 and leaves >= 1, "need k >= 1 and l >= 1", k=k, l=leaves)
    n = 2 * k + leaves + 2
    if adversarial:
        v_leaves = list(range(leaves))
        v = leaves
        chain_leaves = [leaves + 1 + 2 * i for i in range(k)]
    else:
        chain_leaves = [2 * i for i in range(k)]
        v_leaves = list(range(2 * k, 2 * k + leaves))
        v = 2 * k + leaves
    chain_inner = [leaf + 1 for leaf in chain_leaves]
    root = n - 1

    weights = [0] * n
    weights[v] = 1
    for inner in chain_inner:
        weights[inner] = 1
    edges = [(leaf, v) for leaf in v_leaves] + [(v, root)]
    for leaf, inner in zip(chain_leaves, chain_inner):
        edges += [(leaf, inner), (inner, root)]
    instance = make_instance([1] * n, weights, edges)
    return FamilySpec(
        name="intree",
        params={"k": k, "l": leaves, "adversarial": int(adversarial)},
        instance=instance,
        topology="in_forest",
        references={
            "opt": Fraction(k * (k + 1) + 2 * k + leaves + 1),
            "adversarial_alg": Fraction((k + 1) * (leaves + 1) + k * (k + 1)),
            "node_count": Fraction(n),
        },
    )


def gen_average_lb(s: int) -> FamilySpec:
    """s-1 singleton unit jobs of weight 1 (ids 0..s-2) and one chain of n-s+1
    unit jobs weighted [1, n-s, 0, ...]; every chain has average weight 1."""
    _require(s >= 2, "need s >= 2", s=s)
    n = s * s
    singletons = s - 1
    long_chain = [1, n - s] + [0] * (n - s - 1)
    weights = [1] * singletons + long_chain
    first = singletons
    edges = [(first + i, first + i + 1) for i in range(len(long_chain) - 1)]
    instance = make_instance([1] * n, weights, edges)
    opt_bound = 1 + 2 * (n - s) + sum(3 + i for i in range(1, s))
    alg_bound = sum(range(1, s + 1)) + (s + 1) * (n - s)
    return FamilySpec(
        name="average_lb",
        params={"s": s, "n": n},
        instance=instance,
        topology="chains",
        references={"opt_bound": Fraction(opt_bound), "alg_bound": Fraction(alg_bound)},
    )


def gen_static_order_lb(omega: int, d: int) -> FamilySpec:
    """omega chains of unit jobs and total weight 1; chain i (1-based) has
    d * H_omega * i jobs. The first omega-1 chains carry their weight on the
    first job, the last chain on its last job."""
    _require(omega >= 2 and d >= 1, "need omega >= 2 and d >= 1", omega=omega, d=d)
    scale = d * harmonic(omega)
    if scale.denominator != 1:
        raise NonIntegralLengthError(
            f"d = {d} is not a multiple of lcm(1..{omega}) = {math.lcm(*range(1, omega + 1))}",
            d=d,
            omega=omega,
        )
    lengths = [int(scale) * i for i in range(1, omega + 1)]
    weights: List[int] = []
    edges: List[Tuple[int, int]] = []
    for index, length in enumerate(lengths, start=1):
        start = len(weights)
        chain = [0] * length
        chain[0 if index < omega else -1] = 1
        weights.extend(chain)
        edges.extend((start + i, start + i + 1) for i in range(length - 1))
    instance = make_instance([1] * len(weights), weights, edges)
    h = harmonic(omega)
    return FamilySpec(
        name="static_order_lb",
        params={"omega": omega, "d": d},
        instance=instance,
        topology="chains",
        references={
            "opt_ref": omega * (omega + 1) + omega - 1 + d * h * omega,
            "alg_lb": d * h * h * omega * omega,
            "last_completion": d * h * h * omega * omega,
        },
    )
