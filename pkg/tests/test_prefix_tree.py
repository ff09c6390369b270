import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfa_anomaly.automata import Sample
from dfa_anomaly.prefix_tree import EmptySampleError, build_prefix_tree, size_upper_bound

from oracles import prefixes

FIG1 = Sample.from_words([tuple("aa"), tuple("ab"), tuple("ba"), tuple("aaa")])


def test_figure_one_tree():
    tree = build_prefix_tree(FIG1)
    assert tree.size == 7
    assert set(tree.prefixes) == {(), ("a",), ("b",), tuple("aa"), tuple("ab"), tuple("ba"), tuple("aaa")}
    assert tree.edges[(tree.node("a"), "a")] == tree.node("aa")
    assert tree.edges[(tree.node("aa"), "a")] == tree.node("aaa")
    assert tree.edges[(tree.node("b"), "a")] == tree.node("ba")
    assert (tree.node("b"), "b") not in tree.edges  # partial
    assert size_upper_bound(tree) == 8


def test_empty_word_only():
    tree = build_prefix_tree(Sample({(): 1}))
    assert tree.prefixes == ((),)
    assert size_upper_bound(tree) == 2


def test_multiplicity_adds_no_nodes():
    tree = build_prefix_tree(Sample({("a",): 2, ("b",): 1}))
    assert tree.size == 3
    assert size_upper_bound(tree) == 4


def test_canonical_breadth_first_order():
    tree = build_prefix_tree(FIG1)
    assert tree.prefixes == ((), ("a",), ("b",), tuple("aa"), tuple("ab"), tuple("ba"), tuple("aaa"))


def test_empty_sample():
    with pytest.raises(EmptySampleError):
        build_prefix_tree(Sample({}))


words_st = st.lists(st.lists(st.sampled_from("xyz"), max_size=5).map(tuple), min_size=1, max_size=10)


@settings(max_examples=200, deadline=None)
@given(words_st)
def test_tree_invariants(words):
    sample = Sample.from_words(words)
    tree = build_prefix_tree(sample)
    assert set(tree.prefixes) == prefixes(sample)
    assert tree.size == len(prefixes(sample))
    # each node reached from the root by exactly its own word
    for i, w in enumerate(tree.prefixes):
        node = tree.root
        for a in w:
            node = tree.edges[(node, a)]
        assert node == i
    for w in sample:
        assert tree.prefixes[tree.word_node[w]] == w
    assert build_prefix_tree(sample) == tree
