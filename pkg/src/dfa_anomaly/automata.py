"""Words, multi-set samples and complete DFAs.

Symbols are opaque text tokens, words are tuples of tokens, and a DFA is
stored with dense integer states ``0..n-1`` where state 0 is initial.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

Symbol = str
Word = tuple  # tuple[Symbol, ...]; () is the empty word


class UnknownSymbolError(ValueError):
    """A word contains a symbol outside the automaton's alphabet."""


def check_symbol(token: str) -> str:
    if not isinstance(token, str) or not token or any(c.isspace() for c in token):
        raise ValueError(f"invalid symbol {token!r}: must be non-empty text without whitespace")
    return token


def word_key(word: Word) -> tuple:
    """Canonical word order: shorter first, then lexicographic by token."""
    return (len(word), word)


def format_word(word: Word) -> str:
    return " ".join(word) if word else "ε"


@dataclass(frozen=True)
class Sample:
    """Multi-set of words with positive multiplicities.

    Build one with :meth:`from_words` (duplicates accumulate) or directly from
    a ``{word: count}`` mapping.
    """

    entries: Mapping[Word, int]
    alphabet: tuple = field(init=False)

    def __post_init__(self):
        clean = {}
        for word, count in self.entries.items():
            word = tuple(check_symbol(a) for a in word)
            if not isinstance(count, int) or count < 1:
                raise ValueError(f"multiplicity of {format_word(word)} must be a positive integer, got {count!r}")
            clean[word] = clean.get(word, 0) + count
        ordered = dict(sorted(clean.items(), key=lambda kv: word_key(kv[0])))
        object.__setattr__(self, "entries", ordered)
        object.__setattr__(self, "alphabet", tuple(sorted({a for w in ordered for a in w})))

    @classmethod
    def from_words(cls, words: Iterable[Sequence[str]]) -> "Sample":
        return cls(dict(Counter(tuple(w) for w in words)))

    @property
    def size(self) -> int:
        """Total number of occurrences, |S|."""
        return sum(self.entries.values())

    @property
    def words(self) -> tuple:
        """Unique words in canonical order."""
        return tuple(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.entries)

    def __getitem__(self, word: Sequence[str]) -> int:
        return self.entries.get(tuple(word), 0)

    def expand(self) -> list:
        """Every occurrence as its own list item (canonical order)."""
        return [w for w, c in self.entries.items() for _ in range(c)]


@dataclass(frozen=True)
class Dfa:
    """Complete DFA with states ``0..n-1``; state 0 is initial."""

    n: int
    alphabet: tuple
    transitions: Mapping[tuple, int]
    finals: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a DFA needs at least one state")
        alphabet = tuple(sorted({check_symbol(a) for a in self.alphabet}))
        table = {}
        for q in range(self.n):
            for a in alphabet:
                if (q, a) not in self.transitions:
                    raise ValueError(f"transition function is not total: missing ({q}, {a!r})")
                target = self.transitions[(q, a)]
                if not 0 <= target < self.n:
                    raise ValueError(f"transition ({q}, {a!r}) targets unknown state {target}")
                table[(q, a)] = int(target)
        extra = set(self.transitions) - set(table)
        if extra:
            raise ValueError(f"transitions over unknown states/symbols: {sorted(extra)}")
        finals = frozenset(int(q) for q in self.finals)
        if not finals <= set(range(self.n)):
            raise ValueError(f"final states {sorted(finals)} not a subset of 0..{self.n - 1}")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "transitions", table)
        object.__setattr__(self, "finals", finals)

    initial = 0

    @classmethod
    def trivial(cls, alphabet: Iterable[str], accept: bool) -> "Dfa":
        """The one-state DFA accepting everything (or nothing)."""
        alphabet = tuple(alphabet)
        return cls(1, alphabet, {(0, a): 0 for a in alphabet}, frozenset({0}) if accept else frozenset())

    def step(self, q: int, a: str) -> int:
        try:
            return self.transitions[(q, a)]
        except KeyError:
            raise UnknownSymbolError(f"symbol {a!r} not in alphabet {list(self.alphabet)}") from None

    def run(self, word: Sequence[str]) -> list:
        states = [self.initial]
        for a in word:
            states.append(self.step(states[-1], a))
        return states

    def final_state(self, word: Sequence[str]) -> int:
        q = self.initial
        for a in word:
            q = self.step(q, a)
        return q

    def accepts(self, word: Sequence[str]) -> bool:
        return self.final_state(word) in self.finals

    def count_accepted(self, sample: Sample) -> int:
        """Multiplicity-weighted number of accepted words, sum of S(w)*A(w)."""
        return sum(count for word, count in sample.entries.items() if self.accepts(word))

    # serialization

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alphabet": list(self.alphabet),
            "initial": self.initial,
            "transitions": [[q, a, self.transitions[(q, a)]] for q in range(self.n) for a in self.alphabet],
            "finals": sorted(self.finals),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Dfa":
        if data.get("initial", 0) != 0:
            raise ValueError("initial state must be 0")
        return cls(
            int(data["n"]),
            tuple(data["alphabet"]),
            {(int(q), a): int(t) for q, a, t in data["transitions"]},
            frozenset(data["finals"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Dfa":
        return cls.from_dict(json.loads(text))


def run(dfa: Dfa, word: Sequence[str]) -> list:
    return dfa.run(word)


def accepts(dfa: Dfa, word: Sequence[str]) -> bool:
    return dfa.accepts(word)


def count_accepted(dfa: Dfa, sample: Sample) -> int:
    return dfa.count_accepted(sample)


@dataclass(frozen=True)
class DotOptions:
    omit_self_loops: bool = False
    name: str = "dfa"


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(dfa: Dfa, options: DotOptions = DotOptions()) -> str:
    """Render as a Graphviz digraph.

    Parallel transitions are merged into a single edge with a comma-joined
    label; self-loops can be dropped for readability.
    """
    lines = [f"digraph {_dot_quote(options.name)} {{", "  rankdir=LR;", '  __start [shape=none, label=""];']
    for q in range(dfa.n):
        shape = "doublecircle" if q in dfa.finals else "circle"
        lines.append(f"  q{q} [shape={shape}];")
    lines.append("  __start -> q0;")
    for q in range(dfa.n):
        by_target: dict = {}
        for a in dfa.alphabet:
            by_target.setdefault(dfa.transitions[(q, a)], []).append(a)
        for target in sorted(by_target):
            if options.omit_self_loops and target == q:
                continue
            lines.append(f"  q{q} -> q{target} [label={_dot_quote(','.join(by_target[target]))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# sample files: one word per line, tokens separated by single spaces,
# repeated lines accumulate, an empty line is the empty word, '#' starts a comment


def parse_sample(text: str) -> Sample:
    words = []
    for line in text.splitlines():
        if line.startswith("#"):
            continue
        words.append(tuple(line.split(" ")) if line else ())
    return Sample.from_words(words)


def format_sample(sample: Sample) -> str:
    out = []
    for word in sample.expand():
        if word and word[0].startswith("#"):
            raise ValueError(f"word {format_word(word)} would be read back as a comment")
        out.append(" ".join(word))
    return "".join(line + "\n" for line in out)


def read_sample(path) -> Sample:
    with open(path, encoding="utf-8") as fh:
        return parse_sample(fh.read())


def write_sample(sample: Sample, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_sample(sample))
