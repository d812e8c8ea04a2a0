import json
from fractions import Fraction

import pytest
from hypothesis import given

from conftest import dags
from precedence_scheduler.core import make_instance
from precedence_scheduler.engine import (
    PolicyView,
    Segment,
    min_rho_witness,
    realize_mcnaughton,
    simulate,
)
from precedence_scheduler.errors import (
    InfeasibleRatesError,
    InfeasibleSegmentError,
    PolicyStallError,
    RateOnNonFrontJobError,
    TraceInstanceMismatchError,
)
from precedence_scheduler.policies import Policy, equal_share, wrr_chains


class FixedRates(Policy):
    label = "fixed"

    def __init__(self, rates):
        self.rates = rates

    def decide(self, view):
        return dict(self.rates)


class LowestIdFirst(Policy):
    label = "lowest_id_first"

    def decide(self, view):
        return {min(view.front_ids): Fraction(1)}


def test_equal_share_two_unit_jobs():
    result, trace = simulate(make_instance([1, 1], [1, 1]), equal_share())
    assert result.completion_times == (2, 2)
    assert result.objective == 4
    assert result.makespan == 2
    assert len(trace.segments) == 1
    assert trace.segments[0].rates == {0: Fraction(1, 2), 1: Fraction(1, 2)}


def test_weighted_round_robin_two_chains():
    result, _ = simulate(make_instance([1, 1], [3, 1]), wrr_chains({0: 3, 1: 1}))
    assert result.completion_times == (Fraction(4, 3), 2)
    assert result.objective == 6


def test_overfull_rates_are_infeasible():
    policy = FixedRates({0: Fraction(3, 5), 1: Fraction(3, 5)})
    with pytest.raises(InfeasibleRatesError):
        simulate(make_instance([1, 1], [1, 1]), policy)
    result, _ = simulate(make_instance([1, 1], [1, 1]), policy, machines=2)
    assert result.completion_times == (Fraction(5, 3), Fraction(5, 3))


def test_rate_above_one_is_infeasible():
    with pytest.raises(InfeasibleRatesError):
        simulate(make_instance([1], [1]), FixedRates({0: 2}), machines=2)


def test_rate_on_hidden_job():
    with pytest.raises(RateOnNonFrontJobError) as excinfo:
        simulate(make_instance([1, 1], [1, 1], [(0, 1)]), FixedRates({1: 1}))
    assert excinfo.value.details["job_ids"] == [1]


def test_all_zero_rates_stall():
    with pytest.raises(PolicyStallError):
        simulate(make_instance([1], [1]), FixedRates({}))


def test_event_limit():
    with pytest.raises(PolicyStallError):
        simulate(make_instance([1, 2], [1, 1]), equal_share(), max_events=1)
    with pytest.raises(PolicyStallError) as excinfo:
        simulate(make_instance([1], [1]), equal_share(), max_events=0)
    assert excinfo.value.details["events"] == 0


def test_machine_count_must_be_positive():
    with pytest.raises(ValueError):
        simulate(make_instance([1], [1]), equal_share(), machines=0)


def test_zero_length_jobs_cascade_by_id_at_reveal():
    instance = make_instance([0, 0, 1, 0], [1, 1, 1, 1], [(0, 1), (1, 2)])
    result, trace = simulate(instance, equal_share())
    assert result.completion_times == (0, 0, 1, 0)
    assert [event.job_id for event in trace.completions] == [0, 1, 3, 2]
    assert len(trace.segments) == 1


def test_views_carry_no_processing_times():
    assert set(PolicyView.model_fields) == {
        "time",
        "front",
        "revealed",
        "revealed_by",
        "completed",
        "machines",
    }


@given(dags())
def test_views_show_exactly_the_front(instance):
    views = []
    result, _ = simulate(instance, equal_share(), observer=views.append)
    completion = result.completion_times
    revealed = set()
    for view in views:
        expected = {
            j
            for j in range(instance.n)
            if completion[j] > view.time
            and all(completion[i] <= view.time for i in instance.predecessors[j])
        }
        assert set(view.front_ids) == expected
        assert all(weight == instance.weights[j] for j, weight in view.front)
        for job_id in view.revealed:
            assert view.revealed_by[job_id] == instance.predecessors[job_id]
        revealed |= set(view.revealed)
    assert revealed == set(range(instance.n))


@given(dags())
def test_segments_conserve_work_and_respect_precedence(instance):
    result, trace = simulate(instance, equal_share())
    completion = result.completion_times
    assert trace.segments[0].start == 0
    for before, after in zip(trace.segments, trace.segments[1:]):
        assert before.end == after.start
        assert after.unfinished_weight <= before.unfinished_weight
    work = [Fraction(0)] * instance.n
    for segment in trace.segments:
        assert segment.length > 0
        for job_id, rate in segment.rates.items():
            work[job_id] += rate * segment.length
            assert all(completion[i] <= segment.start for i in instance.predecessors[job_id])
    assert tuple(work) == instance.processing
    assert result.objective == sum(w * c for w, c in zip(instance.weights, completion))


def test_simulation_is_deterministic():
    instance = make_instance([1, 2, 3], [3, 1, 2], [(0, 2)])
    _, first = simulate(instance, equal_share())
    _, second = simulate(instance, equal_share())
    assert first.to_jsonl() == second.to_jsonl()


def test_trace_and_result_export():
    result, trace = simulate(make_instance([1, 2], [1, 1]), equal_share())
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["rates"] == {"0": "1/2", "1": "1/2"}
    assert result.to_csv().splitlines() == [
        "job_id,completion_num,completion_den",
        "0,2,1",
        "1,3,1",
    ]


def _segment(rates, start=0, end=1):
    return Segment(
        start=start,
        end=end,
        front=tuple(sorted(rates)),
        unfinished_weight=0,
        rates=rates,
    )


def test_mcnaughton_wraps_around():
    rate = Fraction(3, 5)
    timeline = realize_mcnaughton(_segment({0: rate, 1: rate, 2: rate}), 2)
    assert [(p.machine, p.start, p.end) for p in timeline.for_job(0)] == [(0, 0, Fraction(3, 5))]
    assert [(p.machine, p.start, p.end) for p in timeline.for_job(1)] == [
        (0, Fraction(3, 5), 1),
        (1, 0, Fraction(1, 5)),
    ]
    assert [(p.machine, p.start, p.end) for p in timeline.for_job(2)] == [
        (1, Fraction(1, 5), Fraction(4, 5))
    ]


def test_mcnaughton_single_job():
    timeline = realize_mcnaughton(_segment({0: Fraction(1)}, start=2, end=5), 1)
    assert [(p.machine, p.start, p.end) for p in timeline.pieces] == [(0, 2, 5)]
    assert realize_mcnaughton(_segment({}), 1).pieces == ()


def test_mcnaughton_rejects_bad_segments():
    with pytest.raises(InfeasibleSegmentError):
        realize_mcnaughton(_segment({0: Fraction(1), 1: Fraction(1)}), 1)
    with pytest.raises(InfeasibleSegmentError):
        realize_mcnaughton(_segment({0: Fraction(1)}, start=1, end=1), 1)


@given(dags())
def test_mcnaughton_never_runs_a_job_twice_at_once(instance):
    _, trace = simulate(instance, equal_share(), machines=3)
    for segment in trace.segments:
        timeline = realize_mcnaughton(segment, 3)
        for job_id, rate in segment.rates.items():
            pieces = sorted(timeline.for_job(job_id), key=lambda piece: piece.start)
            assert sum(piece.end - piece.start for piece in pieces) == rate * segment.length
            for before, after in zip(pieces, pieces[1:]):
                assert before.end <= after.start
        for machine in range(3):
            pieces = sorted(timeline.for_machine(machine), key=lambda piece: piece.start)
            for before, after in zip(pieces, pieces[1:]):
                assert before.end <= after.start
            assert all(segment.start <= p.start and p.end <= segment.end for p in pieces)


def test_min_rho_witness():
    instance = make_instance([1, 1], [3, 1])
    _, trace = simulate(instance, equal_share())
    assert min_rho_witness(trace, instance) == Fraction(3, 2)
    _, trace = simulate(instance, wrr_chains({0: 3, 1: 1}))
    assert min_rho_witness(trace, instance) == 1


def test_min_rho_witness_is_infinite_when_a_weighted_job_starves():
    instance = make_instance([1, 1], [1, 1])
    _, trace = simulate(instance, LowestIdFirst())
    assert min_rho_witness(trace, instance) is None


def test_min_rho_witness_is_zero_without_weight():
    instance = make_instance([1, 1], [0, 0])
    _, trace = simulate(instance, equal_share())
    assert min_rho_witness(trace, instance) == 0


def test_min_rho_witness_rejects_foreign_trace():
    _, trace = simulate(make_instance([1, 1], [1, 1]), equal_share())
    with pytest.raises(TraceInstanceMismatchError):
        min_rho_witness(trace, make_instance([1, 1, 1], [1, 1, 1]))
