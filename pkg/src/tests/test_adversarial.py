from fractions import Fraction

import pytest

from precedence_scheduler.adversarial import (
    gen_average_lb,
    gen_hidden_chain,
    gen_intree,
    gen_outtree_static,
    gen_static_order_lb,
    intree_parameters,
)
from precedence_scheduler.core import classify_topology
from precedence_scheduler.engine import simulate
from precedence_scheduler.errors import NonIntegralLengthError, OutOfRangeError
from precedence_scheduler.oracles import opt_brute_force, opt_chain_exact
from precedence_scheduler.policies import (
    equal_share,
    follow_action,
    order_static,
    wrr_adaptive,
)
from precedence_scheduler.predictions import ground_truth


def test_hidden_chain_punishes_equal_share():
    family = gen_hidden_chain(101, 100)
    assert family.instance.n == 101
    assert family.instance.edges == ((99, 100),)
    result, _ = simulate(family.instance, equal_share())
    assert result.objective == 101
    assert opt_chain_exact(family.instance).objective == family.references["opt"] == 2


def test_hidden_chain_sidecar():
    sidecar = gen_hidden_chain(4, 2).sidecar()
    assert sidecar["family"] == "hidden_chain"
    assert sidecar["params"] == {"n": 4, "h": 2}
    assert sidecar["topology"] == "chains"
    assert sidecar["references"] == {"opt": "2"}


def test_out_tree_with_adaptive_weights():
    family = gen_outtree_static(4, 2)
    assert classify_topology(family.instance).kind == "out_forest"
    table = ground_truth(family.instance, "adaptive_weights").weights
    result, _ = simulate(family.instance, wrr_adaptive(table))
    assert result.objective == family.references["opt"] == 3
    assert opt_brute_force(family.instance).objective == 3


def test_intree_id_tie_breaking():
    family = gen_intree(4, 7)
    assert family.instance.n == 17
    assert classify_topology(family.instance).kind == "in_forest"
    result, _ = simulate(family.instance, follow_action(tuple(range(17))))
    assert result.objective == family.references["adversarial_alg"] == 60

    friendly = gen_intree(4, 7, adversarial=False)
    result, _ = simulate(friendly.instance, follow_action(tuple(range(17))))
    assert result.objective == friendly.references["opt"] == 36


def test_intree_reference_optimum():
    family = gen_intree(2, 2)
    assert opt_brute_force(family.instance).objective == family.references["opt"] == 13


def test_intree_parameters():
    assert intree_parameters(64) == (8, 47)
    assert intree_parameters(256) == (16, 223)


def test_average_lower_bound_family():
    family = gen_average_lb(3)
    instance = family.instance
    assert instance.n == 9
    averages = ground_truth(instance, "averages").weights
    assert all(averages[root] == 1 for root in instance.roots)
    assert opt_chain_exact(instance).objective == 20 <= family.references["opt_bound"]
    result, _ = simulate(instance, follow_action(tuple(range(9))))
    assert result.objective == family.references["alg_bound"] == 30


def test_static_order_family():
    family = gen_static_order_lb(2, 2)
    instance = family.instance
    assert len(instance.roots) == 2
    assert instance.n == 9
    order = ground_truth(instance, "static_order").order
    result, _ = simulate(instance, order_static(order))
    assert result.objective == Fraction(39, 2)
    assert result.objective >= family.references["alg_lb"]
    assert result.completion_times[-1] == family.references["last_completion"] == 18


def test_family_parameter_checks():
    with pytest.raises(OutOfRangeError):
        gen_hidden_chain(1, 1)
    with pytest.raises(OutOfRangeError):
        gen_outtree_static(4, 4)
    with pytest.raises(OutOfRangeError):
        gen_intree(0, 3)
    with pytest.raises(OutOfRangeError):
        gen_average_lb(1)
    with pytest.raises(NonIntegralLengthError):
        gen_static_order_lb(2, 3)
