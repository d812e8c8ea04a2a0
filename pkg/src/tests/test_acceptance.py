"""
End-to-end guarantees on seeded random instances and the lower-bound families.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import seeded_instances
from precedence_scheduler.adversarial import (
    gen_average_lb,
    gen_intree,
    gen_static_order_lb,
    intree_parameters,
)
from precedence_scheduler.core import width
from precedence_scheduler.engine import min_rho_witness, realize_mcnaughton, simulate
from precedence_scheduler.experiments import ExperimentSpec, report_csv, run
from precedence_scheduler.oracles import opt_brute_force, opt_chain_exact
from precedence_scheduler.policies import (
    equal_share,
    follow_action,
    follow_input,
    order_adaptive,
    order_static,
    time_share,
    wdeq_chains,
    wrr_adaptive,
    wrr_chains,
)
from precedence_scheduler.predictions import (
    NoiseSpec,
    distortion_error,
    eta_inversions,
    ground_truth,
    lambda_error,
    perturb,
)
from precedence_scheduler.rationals import harmonic


def _truth(instance, model):
    bundle = ground_truth(instance, model)
    return bundle.weights if bundle.weights is not None else bundle.order


def test_weighted_round_robin_on_chains_is_four_competitive():
    started = time.perf_counter()
    for instance in seeded_instances("chains", 500, 1, max_n=10):
        result, _ = simulate(instance, wrr_chains(_truth(instance, "static_weights")))
        opt = opt_brute_force(instance).objective
        assert result.objective <= 4 * opt
    assert time.perf_counter() - started < 120


def test_weighted_round_robin_with_true_weights_has_rho_one():
    for instance in seeded_instances("chains", 200, 2, weight_range=(1, 5)):
        _, trace = simulate(instance, wrr_chains(_truth(instance, "static_weights")))
        assert min_rho_witness(trace, instance) == 1


def test_adaptive_weights_with_true_weights_have_rho_one():
    for instance in seeded_instances("out_forest", 200, 13, weight_range=(1, 5)):
        _, trace = simulate(instance, wrr_adaptive(_truth(instance, "adaptive_weights")))
        assert min_rho_witness(trace, instance) == 1
    for instance in seeded_instances("out_forest", 200, 14, weight_range=(0, 2)):
        _, trace = simulate(instance, wrr_adaptive(_truth(instance, "adaptive_weights")))
        assert min_rho_witness(trace, instance) in (0, 1)


def test_adaptive_weights_on_out_forests():
    for instance in seeded_instances("out_forest", 200, 3):
        result, _ = simulate(instance, wrr_adaptive(_truth(instance, "adaptive_weights")))
        assert result.objective <= 4 * opt_brute_force(instance).objective


def test_adaptive_order_on_out_forests():
    for instance in seeded_instances("out_forest", 200, 4):
        result, _ = simulate(instance, order_adaptive(_truth(instance, "adaptive_order")))
        bound = 4 * harmonic(width(instance))
        assert result.objective <= bound * opt_brute_force(instance).objective


def test_equal_share_on_dags_is_width_competitive():
    for instance in seeded_instances("general", 200, 5, max_n=7):
        result, _ = simulate(instance, equal_share())
        assert result.objective <= width(instance) * opt_brute_force(instance).objective


TIME_SHARE_PAIRS = [
    ("chains", lambda i: wrr_chains(_truth(i, "static_weights")), lambda i: equal_share()),
    ("chains", lambda i: equal_share(), lambda i: wrr_chains({r: 1 for r in i.roots})),
    ("out_forest", lambda i: order_adaptive(_truth(i, "adaptive_order")), lambda i: equal_share()),
    (
        "out_forest",
        lambda i: wrr_adaptive(_truth(i, "adaptive_weights")),
        lambda i: order_adaptive(tuple(reversed(_truth(i, "adaptive_order")))),
    ),
    (
        "out_forest",
        lambda i: follow_action(_truth(i, "actions_static")),
        lambda i: wrr_adaptive(_truth(i, "adaptive_weights")),
    ),
]


@pytest.mark.parametrize("model, first, second", TIME_SHARE_PAIRS)
def test_time_sharing_loses_at_most_a_factor_two_per_job(model, first, second):
    for instance in seeded_instances(model, 100, 6):
        a, _ = simulate(instance, first(instance))
        b, _ = simulate(instance, second(instance))
        combined, _ = simulate(instance, time_share(first(instance), second(instance)))
        for c, x, y in zip(combined.completion_times, a.completion_times, b.completion_times):
            assert c <= 2 * min(x, y)


def test_following_actions_costs_exactly_the_inversions():
    rng = np.random.default_rng(7)
    for instance in seeded_instances("general", 200, 7, edge_probability=0):
        order = tuple(int(j) for j in rng.permutation(instance.n))
        result, _ = simulate(instance, follow_action(order))
        opt = opt_brute_force(instance).objective
        assert result.objective == opt + eta_inversions(instance, order).value


def test_following_a_perturbed_input():
    noise = NoiseSpec(beta=Fraction(1, 2), length_delta=1)
    checked = 0
    for seed, instance in enumerate(seeded_instances("chains", 200, 8, unit_processing=True)):
        if len(instance.roots) > 3:
            continue
        predicted = perturb(ground_truth(instance, "input"), noise, seed).instance
        result, _ = simulate(instance, follow_input(predicted))
        opt = opt_chain_exact(instance).objective
        assert result.objective <= opt + lambda_error(predicted, instance).value
        checked += 1
    assert checked > 20


def test_distorted_adaptive_weights():
    for seed, instance in enumerate(seeded_instances("out_forest", 200, 9, weight_range=(1, 5))):
        table = perturb(ground_truth(instance, "adaptive_weights"), NoiseSpec(beta=1), seed).weights
        distortion = distortion_error(instance, table).value
        result, trace = simulate(instance, wrr_adaptive(table))
        assert result.objective <= 4 * distortion * opt_brute_force(instance).objective
        assert min_rho_witness(trace, instance) <= distortion
        _, scaled = simulate(instance, wrr_adaptive({k: 3 * v for k, v in table.items()}))
        assert scaled.to_jsonl() == trace.to_jsonl()


def test_static_order_lower_bound_grows_with_chain_length():
    h = harmonic(4)
    ratios = []
    for d in (12, 48, 192):
        instance = gen_static_order_lb(4, d).instance
        order = _truth(instance, "static_order")
        result, _ = simulate(instance, order_static(order))
        last = 0
        assert len(instance.roots) == 4
        for i in range(1, 5):
            last += int(d * h) * i
            assert result.completion_times[last - 1] == d * h * h * i * i
        ratios.append(result.objective / opt_chain_exact(instance).objective)
    assert ratios == sorted(ratios)
    assert ratios[-1] > Fraction(8, 10) * 4 * h


def test_intree_families():
    ratios = []
    for n in (64, 256, 1024):
        family = gen_intree(*intree_parameters(n))
        result, _ = simulate(family.instance, equal_share())
        ratios.append(result.objective / family.references["opt"])
        if n <= 256:
            actions, _ = simulate(family.instance, follow_action(tuple(range(family.instance.n))))
            assert actions.objective == family.references["adversarial_alg"]
    assert ratios == [Fraction(576, 136), Fraction(4352, 528), Fraction(33792, 2080)]
    assert all(later >= Fraction(18, 10) * earlier for earlier, later in zip(ratios, ratios[1:]))


@pytest.mark.parametrize("s", [2, 3, 4])
def test_average_lower_bound_family(s):
    family = gen_average_lb(s)
    instance = family.instance
    assert opt_chain_exact(instance).objective <= family.references["opt_bound"]
    result, _ = simulate(instance, follow_action(tuple(range(instance.n))))
    assert result.objective == family.references["alg_bound"]


def _check_mcnaughton(trace, machines):
    for segment in trace.segments:
        timeline = realize_mcnaughton(segment, machines)
        for job_id, rate in segment.rates.items():
            pieces = sorted(timeline.for_job(job_id), key=lambda p: p.start)
            assert sum(p.end - p.start for p in pieces) == rate * segment.length
            assert all(a.end <= b.start for a, b in zip(pieces, pieces[1:]))
        for machine in range(machines):
            pieces = sorted(timeline.for_machine(machine), key=lambda p: p.start)
            assert all(a.end <= b.start for a, b in zip(pieces, pieces[1:]))


def test_two_machines():
    for instance in seeded_instances("chains", 50, 10, max_n=6):
        result, trace = simulate(instance, wdeq_chains(_truth(instance, "static_weights"), 2), 2)
        assert result.objective <= 6 * opt_brute_force(instance, 2).objective
        _check_mcnaughton(trace, 2)
    for instance in seeded_instances("out_forest", 50, 11, max_n=6):
        result, trace = simulate(instance, wrr_adaptive(_truth(instance, "adaptive_weights")), 2)
        assert result.objective <= 6 * opt_brute_force(instance, 2).objective
        _check_mcnaughton(trace, 2)


def test_chain_oracle_agrees_with_brute_force():
    for instance in seeded_instances("chains", 1000, 12):
        assert opt_chain_exact(instance).objective == opt_brute_force(instance).objective


def test_experiment_runs_are_reproducible():
    spec = ExperimentSpec.model_validate(
        {
            "instances": {"random": {"model": "out_forest"}},
            "count": 5,
            "policy": {"name": "wrr_adaptive"},
            "prediction": {"noise": {"beta": "1/2"}},
            "seeds": [0, 1],
        }
    )
    assert report_csv(run(spec, 3)) == report_csv(run(spec, 3))
