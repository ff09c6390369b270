import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfa_anomaly.automata import Dfa, Sample
from dfa_anomaly.encoder import EncodingError, RegularizerSpec, SinkRequiresTwoStatesError
from dfa_anomaly.learner import (
    FOUND,
    NO_DFA,
    NO_DFA_WITHIN_LIMIT,
    learn_single_bound,
    learn_two_bound,
    reduce_exact_learning,
    separates,
)
from dfa_anomaly.solver import BackendConfig, BackendError, EnumerationBackend, ExternalBackend, SolveOutcome

from oracles import best_single_bound, feasible_sizes, has_separator, is_sink_ok, min_penalty, random_instance, weighted_accepted

EX1 = Sample({("a",): 2})
HIGHS = ExternalBackend(BackendConfig(command="highs"))
ORACLE = EnumerationBackend()


@pytest.mark.parametrize("backend", [HIGHS, ORACLE], ids=["highs", "enumerate"])
def test_example1_no_dfa(backend):
    report = learn_two_bound(EX1, 1, 1, backend=backend)
    assert report.status == NO_DFA
    assert [a.n for a in report.sizes_tried] == [1, 2, 3]
    assert all(a.status == "infeasible" for a in report.sizes_tried)
    assert report.dfa is None


def test_trivial_bounds_one_state():
    sample = Sample({("a", "b"): 2, ("b",): 3})
    report = learn_two_bound(sample, 0, sample.size, backend=HIGHS)
    assert report.status == FOUND and report.dfa.n == 1


def test_four_words_two_accepted():
    sample = Sample.from_words([("a",), ("b",), ("a", "a"), ("b", "b")])
    report = learn_two_bound(sample, 2, 2, backend=HIGHS)
    assert report.dfa.n == 2 and report.accepted_count == 2
    assert feasible_sizes(sample, 2, 2, 2) == {1: False, 2: True}


def test_max_size_cap():
    report = learn_two_bound(EX1, 1, 1, backend=ORACLE, max_size=2)
    assert report.status == NO_DFA_WITHIN_LIMIT
    assert len(report.sizes_tried) == 2


def test_sink_starts_at_two():
    sample = Sample.from_words([("a",), ("b",)])
    report = learn_two_bound(sample, 0, 2, RegularizerSpec(lambda_sink=1), backend=HIGHS)
    assert report.sizes_tried[0].n == 2
    assert is_sink_ok(report.dfa)


def test_invalid_bounds():
    with pytest.raises(EncodingError):
        learn_two_bound(EX1, 2, 1, backend=ORACLE)
    with pytest.raises(EncodingError):
        learn_two_bound(EX1, 0, 3, backend=ORACLE)
    with pytest.raises(EncodingError):
        learn_two_bound(Sample({}), 0, 0, backend=ORACLE)


def test_single_bound_one_state():
    sample = Sample({("a",): 2, ("b", "a"): 1})
    assert learn_single_bound(sample, 1, 1, backend=HIGHS).accepted_count == sample.size
    assert learn_single_bound(sample, 0, 1, backend=HIGHS).accepted_count == 0


def test_single_bound_two_states():
    sample = Sample({("a",): 1, ("b",): 1, ("a", "a"): 1})
    report = learn_single_bound(sample, 1, 2, backend=HIGHS)
    assert report.accepted_count == 1 == report.objective_value
    assert report.dfa.n == 2


def test_single_bound_upper():
    sample = Sample({("a",): 2, ("b",): 1})
    report = learn_single_bound(sample, 2, 1, "single-bound-upper", backend=HIGHS)
    assert report.accepted_count == 0
    report = learn_single_bound(sample, 2, 2, "single-bound-upper", backend=HIGHS)
    assert report.accepted_count == 2


def test_single_bound_sink_needs_two_states():
    with pytest.raises(SinkRequiresTwoStatesError):
        learn_single_bound(EX1, 1, 1, reg=RegularizerSpec(lambda_sink=1), backend=ORACLE)


class InfeasibleBackend:
    name = "always-infeasible"

    def solve(self, sample, spec, tree=None):
        return SolveOutcome("infeasible")


def test_single_bound_infeasible_is_fault():
    with pytest.raises(BackendError):
        learn_single_bound(EX1, 1, 1, backend=InfeasibleBackend())


class FailingBackend:
    name = "failing"

    def solve(self, sample, spec, tree=None):
        if spec.n == 2:
            raise BackendError("boom")
        return SolveOutcome("infeasible")


def test_backend_error_carries_size():
    with pytest.raises(BackendError) as info:
        learn_two_bound(EX1, 1, 1, backend=FailingBackend())
    assert info.value.size == 2


def test_report_json_shape():
    report = learn_two_bound(Sample.from_words([("a",), ("b",)]), 1, 1, backend=ORACLE)
    data = report.to_dict()
    assert data["status"] == FOUND and data["states"] == report.dfa.n
    assert data["accepted_count"] == 1
    assert Dfa.from_dict(data["dfa"]) == report.dfa


def test_regularized_single_bound_phase_two():
    sample = Sample.from_words([("a",), ("b",), ("a", "b"), ("b", "b")])
    for which in range(3):
        lams = [0, 0, 0]
        lams[which] = Fraction(2)
        report = learn_single_bound(sample, 1, 2, reg=RegularizerSpec(*lams), backend=HIGHS)
        k = best_single_bound(sample, 1, 2, "single-bound-lower")
        assert report.accepted_count == k
        assert report.penalty_value == min_penalty(sample, 2, lambda c: c == k, lams)


# reduction


def test_reduction_construction():
    sample, lo, up, n = reduce_exact_learning([("a",)], [("b",)], 3)
    assert sample.entries == {("a",): 2, ("b",): 1}
    assert (lo, up, n) == (2, 2, 3)


def test_reduction_empty_positive():
    sample, lo, up, _ = reduce_exact_learning([], [("b",)], 1)
    assert sample.entries == {("b",): 1} and lo == up == 0


def test_reduction_example():
    pos, neg = [("a",)], [("b",), ("a", "b")]
    sample, lo, up, k = reduce_exact_learning(pos, neg, 2)
    report = learn_two_bound(sample, lo, up, backend=HIGHS, max_size=k)
    assert report.dfa is not None and report.dfa.n <= 2
    assert separates(report.dfa, pos, neg)


def test_reduction_overlap():
    with pytest.raises(ValueError):
        reduce_exact_learning([("a",)], [("a",)], 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_two_bound_minimality_property(seed):
    rng = random.Random(seed)
    sample, lower, upper = random_instance(rng, max_words=4, max_len=3)
    report = learn_two_bound(sample, lower, upper, backend=HIGHS, max_size=3)
    sizes = feasible_sizes(sample, lower, upper, 3)
    if report.dfa is None:
        assert not any(sizes.values())
    else:
        assert report.dfa.n == min(n for n, ok in sizes.items() if ok)
        assert lower <= weighted_accepted(report.dfa, sample) <= upper
