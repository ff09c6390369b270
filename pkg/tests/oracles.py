"""Reference implementations used only by the tests.

Everything here is deliberately naive (itertools, plain dicts) and shares no
code with the package beyond the Dfa/Sample containers.
"""

import itertools
import random
from fractions import Fraction

from dfa_anomaly.automata import Dfa, Sample


def all_dfas(n, alphabet):
    """Every DFA with n states over ``alphabet`` in (table, finals) lexicographic order."""
    alphabet = tuple(sorted(alphabet))
    cells = [(q, a) for q in range(n) for a in alphabet]
    for targets in itertools.product(range(n), repeat=len(cells)):
        table = dict(zip(cells, targets))
        for bits in itertools.product((0, 1), repeat=n):
            yield Dfa(n, alphabet, table, frozenset(q for q in range(n) if bits[q]))


def simulate(dfa, word):
    q = 0
    for a in word:
        q = dfa.transitions[(q, a)]
    return q in dfa.finals


def weighted_accepted(dfa, sample):
    # per-occurrence counting on the expanded multi-set
    return sum(1 for w in sample.expand() if simulate(dfa, w))


def prefixes(sample):
    out = set()
    for w in sample:
        for i in range(len(w) + 1):
            out.add(tuple(w[:i]))
    return out


def penalty(dfa, lam_sink=0, lam_loop=0, lam_par=0):
    lam_sink, lam_loop, lam_par = Fraction(lam_sink), Fraction(lam_loop), Fraction(lam_par)
    total = Fraction(0)
    for q in range(dfa.n):
        for a in dfa.alphabet:
            t = dfa.transitions[(q, a)]
            if t != 1:
                total += lam_sink
            if t != q:
                total += lam_loop
    pairs = {(q, dfa.transitions[(q, a)]) for q in range(dfa.n) for a in dfa.alphabet}
    return total + lam_par * len(pairs)


def is_sink_ok(dfa):
    return dfa.n >= 2 and 1 not in dfa.finals and all(dfa.transitions[(1, a)] == 1 for a in dfa.alphabet)


def feasible_sizes(sample, lower, upper, max_n):
    """{n: bool} whether some n-state DFA accepts between lower and upper."""
    out = {}
    for n in range(1, max_n + 1):
        out[n] = any(lower <= weighted_accepted(A, sample) <= upper for A in all_dfas(n, sample.alphabet))
    return out


def best_single_bound(sample, bound, n, mode):
    values = {weighted_accepted(A, sample) for A in all_dfas(n, sample.alphabet)}
    if mode == "single-bound-lower":
        return min(k for k in values if k >= bound)
    return max(k for k in values if k <= bound)


def min_penalty(sample, n, accepted_ok, lams):
    """Smallest penalty among n-state DFAs whose weighted acceptance passes ``accepted_ok``."""
    best = None
    for A in all_dfas(n, sample.alphabet):
        if lams[0] and not is_sink_ok(A):
            continue
        if not accepted_ok(weighted_accepted(A, sample)):
            continue
        p = penalty(A, *lams)
        if best is None or p < best:
            best = p
    return best


def subset_sums(weights):
    sums = {0}
    for w in weights:
        sums |= {s + w for s in sums}
    return sums


def random_instance(rng: random.Random, max_words=6, max_len=4, max_mult=3, alphabet="ab"):
    """Random sample in the acceptance-test family plus bounds lower <= upper <= |S|."""
    sigma = alphabet[: rng.randint(1, len(alphabet))]
    pool = sorted({tuple(p) for k in range(max_len + 1) for p in itertools.product(sigma, repeat=k)})
    k = rng.randint(1, min(max_words, len(pool)))
    words = rng.sample(pool, k)
    sample = Sample({w: rng.randint(1, max_mult) for w in words})
    lower = rng.randint(0, sample.size)
    upper = rng.randint(lower, sample.size)
    return sample, lower, upper


def separates(dfa, positive, negative):
    return all(simulate(dfa, w) for w in positive) and not any(simulate(dfa, w) for w in negative)


def has_separator(positive, negative, k, alphabet):
    return any(separates(A, positive, negative) for A in all_dfas(k, alphabet))
