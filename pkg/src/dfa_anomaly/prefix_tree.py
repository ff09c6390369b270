"""Prefix tree (partial DFA over the prefixes of a sample)."""

from __future__ import annotations

from dataclasses import dataclass

from .automata import Sample, word_key


class EmptySampleError(ValueError):
    pass


@dataclass(frozen=True)
class PrefixTree:
    """Nodes are the prefixes of the sample, numbered breadth-first.

    ``prefixes[i]`` is the word of node ``i`` (node 0 is the empty word),
    ``parent[i]``/``symbol[i]`` give the tree edge into node ``i`` (unset for
    the root) and ``word_node`` maps each sample word to its node.
    """

    prefixes: tuple
    index: dict
    edges: dict
    parent: tuple
    symbol: tuple
    word_node: dict

    root = 0

    @property
    def size(self) -> int:
        return len(self.prefixes)

    def __len__(self) -> int:
        return len(self.prefixes)

    def node(self, word) -> int:
        return self.index[tuple(word)]


def build_prefix_tree(sample: Sample) -> PrefixTree:
    if len(sample) == 0:
        raise EmptySampleError("cannot build a prefix tree of an empty sample")
    seen = {()}
    for word in sample:
        for i in range(1, len(word) + 1):
            seen.add(word[:i])
    prefixes = tuple(sorted(seen, key=word_key))
    index = {w: i for i, w in enumerate(prefixes)}
    edges = {}
    parent = [None]
    symbol = [None]
    for w in prefixes[1:]:
        p = index[w[:-1]]
        edges[(p, w[-1])] = index[w]
        parent.append(p)
        symbol.append(w[-1])
    word_node = {w: index[w] for w in sample}
    return PrefixTree(prefixes, index, edges, tuple(parent), tuple(symbol), word_node)


def size_upper_bound(tree: PrefixTree) -> int:
    """Largest DFA size the two-bound search has to try: |Pref(S)| + 1.

    The extra state is the completion state that absorbs every transition
    the tree leaves unspecified.
    """
    return tree.size + 1
