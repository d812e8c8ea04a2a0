from fractions import Fraction

import pytest
from hypothesis import given

from conftest import chain_instances, dags
from precedence_scheduler.core import make_instance
from precedence_scheduler.errors import TooLargeError
from precedence_scheduler.oracles import (
    chain_prefix_lengths,
    opt_brute_force,
    opt_chain_exact,
    opt_weighted_max,
    optimum,
    parallel_lower_bound,
    sequence_objective,
)

DIAMOND = [(0, 1), (0, 2), (1, 3), (2, 3)]


def test_chain_exact_on_independent_jobs():
    result = opt_chain_exact(make_instance([1, 1], [3, 1]))
    assert result.objective == 5
    assert result.order == (0, 1)
    assert result.solver == "chain_exact"


def test_chain_exact_takes_the_densest_prefix():
    # The chain 0 -> 1 has prefix density 5, which beats job 2 alone.
    instance = make_instance([1, 1, 1], [0, 10, 3], [(0, 1)])
    result = opt_chain_exact(instance)
    assert result.order == (0, 1, 2)
    assert result.objective == 29


def test_brute_force_small_cases():
    assert opt_brute_force(make_instance([1, 2], [2, 1])).objective == 5
    assert opt_brute_force(make_instance([2], [3])).objective == 6
    assert opt_brute_force(make_instance([], [])).objective == 0


def test_brute_force_respects_precedence():
    result = opt_brute_force(make_instance([1, 1], [0, 5], [(0, 1)]))
    assert result.order == (0, 1)
    assert result.objective == 10


def test_brute_force_size_limits():
    with pytest.raises(TooLargeError):
        opt_brute_force(make_instance([1] * 13, [1] * 13))
    with pytest.raises(TooLargeError):
        opt_brute_force(make_instance([1] * 9, [1] * 9), machines=2)
    with pytest.raises(ValueError):
        opt_brute_force(make_instance([1], [1]), machines=0)


def test_weighted_max_breaks_ties_against_the_measure():
    instance = make_instance([1, 1], [1, 1])
    assert opt_weighted_max([Fraction(0), Fraction(5)], [Fraction(1), Fraction(1)], instance) == 10
    with pytest.raises(ValueError):
        opt_weighted_max([Fraction(1)], [Fraction(1), Fraction(1)], instance)


def test_parallel_brute_force():
    result = opt_brute_force(make_instance([1, 1], [2, 3]), machines=2)
    assert result.objective == 5
    assert len(result.machines) == 2
    assert opt_brute_force(make_instance([1, 1], [1, 1], [(0, 1)]), machines=2).objective == 3


def test_parallel_lower_bound():
    assert parallel_lower_bound(make_instance([1, 1], [1, 1], [(0, 1)]), 2) == 3
    assert parallel_lower_bound(make_instance([1, 1], [1, 1]), 2) == 2


def test_chain_prefix_lengths():
    assert chain_prefix_lengths(make_instance([1, 2, 3, 1], [1] * 4, DIAMOND)) == (1, 3, 4, 5)


def test_optimum_picks_the_solver():
    assert optimum(make_instance([1, 1], [1, 1], [(0, 1)])).solver == "chain_exact"
    assert optimum(make_instance([1] * 4, [1] * 4, DIAMOND)).solver == "brute_force"


@given(chain_instances())
def test_chain_exact_matches_brute_force(instance):
    exact = opt_chain_exact(instance)
    assert exact.objective == opt_brute_force(instance).objective
    assert sequence_objective(instance, exact.order) == exact.objective
    assert set(exact.order) == set(range(instance.n))


@given(dags(max_n=6))
def test_brute_force_beats_the_lexicographic_order(instance):
    best = opt_brute_force(instance)
    assert best.objective <= sequence_objective(instance, instance.topological_order)
    position = {job_id: i for i, job_id in enumerate(best.order)}
    assert all(position[u] < position[v] for u, v in instance.edges)


@given(dags(max_n=5))
def test_parallel_bounds_are_consistent(instance):
    single = opt_brute_force(instance).objective
    double = opt_brute_force(instance, machines=2).objective
    assert double <= single
    assert parallel_lower_bound(instance, 2) <= double
