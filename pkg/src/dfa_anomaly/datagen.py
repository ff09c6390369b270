"""Synthetic anomaly datasets with a planted DFA as ground truth.

Words are drawn by random walks over a source DFA (by default the one-state
DFA over the alphabet, i.e. uniform symbols), with a geometric length
truncated to a range. The planted DFA labels them: accepted words are
anomalies, rejected words are normal.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .automata import Dfa, Sample

ANOMALY = "anomaly"
NORMAL = "normal"


class DegeneratePlantedDfaError(ValueError):
    pass


def round_half_up(x) -> int:
    x = Fraction(x) if not isinstance(x, float) else Fraction(repr(x))
    return int((x + Fraction(1, 2)).__floor__())


@dataclass(frozen=True)
class LabeledSet:
    """Labelled words for evaluation only; labels never reach a learner."""

    items: tuple  # ((word, label), ...)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def alphabet(self) -> tuple:
        return tuple(sorted({a for w, _ in self.items for a in w}))

    def count(self, label: str) -> int:
        return sum(1 for _, lab in self.items if lab == label)


def format_labels(test: LabeledSet) -> str:
    return "".join(f"{label}\t{' '.join(word)}\n" for word, label in test.items)


def parse_labels(text: str) -> LabeledSet:
    items = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line or line.startswith("#"):
            continue
        label, sep, word = line.partition("\t")
        if not sep or label not in (ANOMALY, NORMAL):
            raise ValueError(f"line {lineno}: expected '<anomaly|normal>\\t<word>', got {line!r}")
        items.append((tuple(word.split(" ")) if word else (), label))
    return LabeledSet(tuple(items))


@dataclass(frozen=True)
class GenSpec:
    planted: Dfa
    n_total: int
    anomaly_ratio: Fraction = Fraction(1, 10)
    min_len: int = 1
    max_len: int = 8
    seed: int = 0
    source: Optional[Dfa] = None
    stop_prob: float = 0.25
    test_fraction: Fraction = Fraction(1, 5)
    max_draws: int = 200_000

    def source_dfa(self) -> Dfa:
        if self.source is not None:
            return self.source
        return Dfa.trivial(self.planted.alphabet, accept=True)


def _reachable_verdicts(spec: GenSpec) -> set:
    """Planted verdicts realisable by source walks with length in range (product BFS)."""
    planted, source = spec.planted, spec.source_dfa()
    frontier = {(0, 0)}
    verdicts = set()
    for length in range(spec.max_len + 1):
        if length >= spec.min_len:
            verdicts |= {p in planted.finals for p, _ in frontier}
        if len(verdicts) == 2:
            break
        frontier = {(planted.step(p, a), source.step(s, a)) for p, s in frontier for a in source.alphabet}
    return verdicts


def _walk(rng: random.Random, spec: GenSpec, source: Dfa) -> tuple:
    length = spec.min_len
    while length < spec.max_len and rng.random() >= spec.stop_prob:
        length += 1
    q, word = 0, []
    for _ in range(length):
        a = rng.choice(source.alphabet)
        word.append(a)
        q = source.step(q, a)
    return tuple(word)


def generate(spec: GenSpec) -> tuple:
    """Draw ``n_total`` words, ``round(ratio * n_total)`` of them anomalies, and
    split 80/20 (stratified by label).

    Returns ``(train, test)``: an unlabelled :class:`Sample` and a
    :class:`LabeledSet`. Duplicates are kept.
    """
    if set(spec.source_dfa().alphabet) - set(spec.planted.alphabet):
        raise ValueError("source alphabet must be a subset of the planted DFA's alphabet")
    verdicts = _reachable_verdicts(spec)
    if verdicts != {True, False}:
        missing = "accepted" if True not in verdicts else "rejected"
        raise DegeneratePlantedDfaError(f"no {missing} word of length {spec.min_len}..{spec.max_len} exists")

    rng = random.Random(spec.seed)
    source = spec.source_dfa()
    n_anom = round_half_up(Fraction(spec.anomaly_ratio) * spec.n_total)
    n_norm = spec.n_total - n_anom
    anomalies, normals = [], []
    draws = 0
    while len(anomalies) < n_anom or len(normals) < n_norm:
        draws += 1
        if draws > spec.max_draws:
            raise DegeneratePlantedDfaError(
                f"gave up after {spec.max_draws} draws ({len(anomalies)}/{n_anom} anomalies, {len(normals)}/{n_norm} normal)"
            )
        word = _walk(rng, spec, source)
        if spec.planted.accepts(word):
            if len(anomalies) < n_anom:
                anomalies.append(word)
        elif len(normals) < n_norm:
            normals.append(word)

    test_anom = round_half_up(spec.test_fraction * n_anom)
    test_norm = round_half_up(spec.test_fraction * n_norm)
    train_words = anomalies[test_anom:] + normals[test_norm:]
    test_items = [(w, ANOMALY) for w in anomalies[:test_anom]] + [(w, NORMAL) for w in normals[:test_norm]]
    rng.shuffle(test_items)
    return Sample.from_words(train_words), LabeledSet(tuple(test_items))


def split_counts(spec: GenSpec) -> dict:
    """Expected item counts per split and label."""
    n_anom = round_half_up(Fraction(spec.anomaly_ratio) * spec.n_total)
    n_norm = spec.n_total - n_anom
    ta, tn = round_half_up(spec.test_fraction * n_anom), round_half_up(spec.test_fraction * n_norm)
    return {"train_anomaly": n_anom - ta, "train_normal": n_norm - tn, "test_anomaly": ta, "test_normal": tn}


# planted two-state detectors


def contains_symbol(alphabet, symbol: str) -> Dfa:
    """Accepts words containing ``symbol``."""
    alphabet = tuple(sorted(alphabet))
    table = {(0, a): (1 if a == symbol else 0) for a in alphabet}
    table.update({(1, a): 1 for a in alphabet})
    return Dfa(2, alphabet, table, frozenset({1}))


def ends_with_symbol(alphabet, symbol: str) -> Dfa:
    """Accepts words whose last symbol is ``symbol``."""
    alphabet = tuple(sorted(alphabet))
    table = {(q, a): (1 if a == symbol else 0) for q in (0, 1) for a in alphabet}
    return Dfa(2, alphabet, table, frozenset({1}))


def odd_count(alphabet, symbol: str) -> Dfa:
    """Accepts words with an odd number of ``symbol``."""
    alphabet = tuple(sorted(alphabet))
    table = {(q, a): (1 - q if a == symbol else q) for q in (0, 1) for a in alphabet}
    return Dfa(2, alphabet, table, frozenset({1}))


PLANTED_FAMILIES = {"contains": contains_symbol, "ends-with": ends_with_symbol, "odd-count": odd_count}


def planted_detector(kind: str, alphabet, symbol: str) -> Dfa:
    try:
        return PLANTED_FAMILIES[kind](alphabet, symbol)
    except KeyError:
        raise ValueError(f"unknown planted family {kind!r}; choose from {sorted(PLANTED_FAMILIES)}") from None

