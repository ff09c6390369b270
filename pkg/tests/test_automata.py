import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfa_anomaly.automata import (
    Dfa,
    DotOptions,
    Sample,
    UnknownSymbolError,
    accepts,
    count_accepted,
    format_sample,
    parse_sample,
    read_sample,
    run,
    to_dot,
    write_sample,
)

from oracles import weighted_accepted


def two_cycle():
    return Dfa(2, ("a",), {(0, "a"): 1, (1, "a"): 0}, frozenset({1}))


def parity_a():
    # counts a's mod 2 over {a, b}; state 1 = odd
    return Dfa(2, ("a", "b"), {(0, "a"): 1, (1, "a"): 0, (0, "b"): 0, (1, "b"): 1}, frozenset({1}))


def test_run_two_cycle():
    assert run(two_cycle(), ("a", "a")) == [0, 1, 0]


def test_run_empty_word():
    assert run(two_cycle(), ()) == [0]


def test_run_single_state_absorbs():
    dfa = Dfa.trivial(("a", "b"), accept=True)
    assert run(dfa, tuple("abab")) == [0, 0, 0, 0, 0]


def test_run_unknown_symbol():
    with pytest.raises(UnknownSymbolError):
        run(two_cycle(), ("b",))


def test_accept_all_and_reject_all():
    words = [(), ("a",), ("b", "a", "b")]
    assert all(accepts(Dfa.trivial("ab", True), w) for w in words)
    assert not any(accepts(Dfa.trivial("ab", False), w) for w in words)


def test_parity_acceptance():
    assert accepts(parity_a(), ("a",))
    assert not accepts(parity_a(), ("a", "a"))


def test_count_accepted_example1():
    assert count_accepted(Dfa.trivial(("a",), True), Sample({("a",): 2})) == 2


def test_count_reject_all():
    s = Sample({("a",): 3, ("b", "a"): 2})
    assert count_accepted(Dfa.trivial("ab", False), s) == 0


def test_count_parity_weighted():
    s = Sample({("a",): 3, ("a", "a"): 1})
    assert count_accepted(parity_a(), s) == 3


def test_sample_multiplicities_accumulate():
    s = Sample.from_words([("a",), ("b",), ("a",)])
    assert s[("a",)] == 2 and s.size == 3 and len(s) == 2
    assert s.alphabet == ("a", "b")


@pytest.mark.parametrize("bad", [{("a",): 0}, {("a",): -1}, {("a b",): 1}, {("",): 1}])
def test_sample_rejects_bad_entries(bad):
    with pytest.raises(ValueError):
        Sample(bad)


def test_dfa_must_be_total():
    with pytest.raises(ValueError, match="not total"):
        Dfa(2, ("a",), {(0, "a"): 1}, frozenset())


def test_dfa_rejects_bad_target_and_finals():
    with pytest.raises(ValueError):
        Dfa(1, ("a",), {(0, "a"): 1}, frozenset())
    with pytest.raises(ValueError):
        Dfa(1, ("a",), {(0, "a"): 0}, frozenset({3}))


def test_json_round_trip():
    dfa = parity_a()
    text = dfa.to_json()
    assert Dfa.from_json(text) == dfa
    data = json.loads(text)
    assert data["initial"] == 0 and data["finals"] == [1]
    assert text == Dfa.from_json(text).to_json()


def test_dot_accept_all():
    dot = to_dot(Dfa.trivial(("a",), True))
    assert "q0 [shape=doublecircle]" in dot
    assert 'q0 -> q0 [label="a"]' in dot
    assert "__start -> q0" in dot


def test_dot_omit_self_loops():
    dot = to_dot(Dfa.trivial(("a",), True), DotOptions(omit_self_loops=True))
    assert "q0 -> q0" not in dot
    assert dot.count("->") == 1  # only the start arrow


def test_dot_merges_parallel_edges():
    dfa = Dfa(2, ("a", "b"), {(0, "a"): 1, (0, "b"): 1, (1, "a"): 1, (1, "b"): 1}, frozenset())
    dot = to_dot(dfa)
    assert 'q0 -> q1 [label="a,b"]' in dot
    assert dot.count("q0 -> q1") == 1


def test_sample_file_round_trip(tmp_path):
    s = Sample({(): 1, ("open", "close"): 2, ("x",): 1})
    path = tmp_path / "s.txt"
    write_sample(s, path)
    assert read_sample(path) == s
    assert parse_sample(format_sample(s)) == s


def test_sample_file_comments_and_empty_word():
    s = parse_sample("# header\na b\n\na b\n")
    assert s.entries == {(): 1, ("a", "b"): 2}


words_st = st.lists(st.lists(st.sampled_from("abc"), max_size=5).map(tuple), min_size=1, max_size=8)


@st.composite
def dfas(draw, alphabet="abc"):
    n = draw(st.integers(1, 4))
    table = {(q, a): draw(st.integers(0, n - 1)) for q in range(n) for a in alphabet}
    finals = frozenset(draw(st.sets(st.integers(0, n - 1))))
    return Dfa(n, tuple(alphabet), table, finals)


@settings(max_examples=200, deadline=None)
@given(dfas(), words_st)
def test_count_matches_naive_expansion(dfa, words):
    sample = Sample.from_words(words)
    assert count_accepted(dfa, sample) == weighted_accepted(dfa, sample)
    assert 0 <= count_accepted(dfa, sample) <= sample.size


@settings(max_examples=200, deadline=None)
@given(dfas(), st.lists(st.sampled_from("abc"), max_size=8).map(tuple))
def test_run_length_and_consistency(dfa, word):
    states = run(dfa, word)
    assert len(states) == len(word) + 1
    assert states[0] == 0
    for i, a in enumerate(word):
        assert states[i + 1] == dfa.transitions[(states[i], a)]
    assert accepts(dfa, word) == (states[-1] in dfa.finals)


@settings(max_examples=100, deadline=None)
@given(dfas())
def test_json_round_trip_property(dfa):
    assert Dfa.from_json(dfa.to_json()) == dfa


@settings(max_examples=100, deadline=None)
@given(words_st)
def test_sample_alphabet_is_exact(words):
    s = Sample.from_words(words)
    assert set(s.alphabet) == {a for w in words for a in w}
    assert s.size == len(words)
