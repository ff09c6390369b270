from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfa_anomaly.automata import Dfa, Sample
from dfa_anomaly.datagen import (
    ANOMALY,
    NORMAL,
    DegeneratePlantedDfaError,
    GenSpec,
    PLANTED_FAMILIES,
    format_labels,
    generate,
    parse_labels,
    planted_detector,
    round_half_up,
    split_counts,
)
from dfa_anomaly.eval import evaluate


def test_protocol_arithmetic():
    spec = GenSpec(planted_detector("contains", "abcd", "a"), 100, Fraction(1, 10), seed=1)
    train, test = generate(spec)
    assert train.size == 80 and len(test) == 20
    assert test.count(ANOMALY) == 2 and test.count(NORMAL) == 18
    assert split_counts(spec) == {"train_anomaly": 8, "train_normal": 72, "test_anomaly": 2, "test_normal": 18}
    planted = spec.planted
    assert planted.count_accepted(train) == 8


def test_accept_all_is_degenerate():
    with pytest.raises(DegeneratePlantedDfaError):
        generate(GenSpec(Dfa.trivial("ab", True), 50))


def test_unreachable_length_is_degenerate():
    # accepts only words of length >= 3 but lengths are capped at 2
    dfa = Dfa(4, ("a",), {(0, "a"): 1, (1, "a"): 2, (2, "a"): 3, (3, "a"): 3}, frozenset({3}))
    with pytest.raises(DegeneratePlantedDfaError):
        generate(GenSpec(dfa, 50, max_len=2))


def test_deterministic_given_seed():
    spec = GenSpec(planted_detector("ends-with", "abc", "b"), 120, seed=9)
    assert generate(spec) == generate(spec)
    other = generate(GenSpec(spec.planted, 120, seed=10))
    assert other != generate(spec)


def test_train_carries_no_labels():
    train, _ = generate(GenSpec(planted_detector("contains", "ab", "a"), 60, seed=2))
    assert type(train) is Sample
    assert all(isinstance(c, int) for c in train.entries.values())


def test_duplicates_kept():
    train, _ = generate(GenSpec(planted_detector("contains", "ab", "a"), 200, min_len=1, max_len=2, seed=0))
    assert train.size == 160 and len(train) < train.size


def test_labels_round_trip():
    _, test = generate(GenSpec(planted_detector("odd-count", "ab", "a"), 50, seed=4))
    assert parse_labels(format_labels(test)) == test


def test_bad_label_line():
    with pytest.raises(ValueError):
        parse_labels("weird\ta b\n")


def test_round_half_up():
    assert [round_half_up(Fraction(x, 2)) for x in (1, 3, 5)] == [1, 2, 3]
    assert round_half_up(2.5) == 3


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(sorted(PLANTED_FAMILIES)),
    st.integers(20, 300),
    st.fractions(Fraction(1, 20), Fraction(1, 2)),
    st.integers(0, 1000),
)
def test_generation_invariants(kind, n_total, ratio, seed):
    planted = planted_detector(kind, "abc", "a")
    spec = GenSpec(planted, n_total, ratio, min_len=1, max_len=6, seed=seed)
    train, test = generate(spec)
    target = round_half_up(ratio * n_total)
    train_anom = planted.count_accepted(train)
    assert train_anom + test.count(ANOMALY) == target
    counts = split_counts(spec)
    assert abs(train_anom - counts["train_anomaly"]) <= 1
    assert abs(test.count(ANOMALY) - counts["test_anomaly"]) <= 1
    assert train.size + len(test) == n_total
    # separability by construction
    assert evaluate(planted, test).f1 == (1 if test.count(ANOMALY) else 0)
    assert all(spec.min_len <= len(w) <= spec.max_len for w in train)
