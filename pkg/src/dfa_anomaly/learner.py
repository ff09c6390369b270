"""Two-bound (minimal size search) and single-bound (fixed size) DFA learning."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .automata import Dfa, Sample
from .encoder import (
    NO_REGULARIZERS,
    EncodingError,
    EncodingSpec,
    RegularizerSpec,
    decode_dfa,
    dfa_penalty,
    has_sink,
)
from .prefix_tree import build_prefix_tree, size_upper_bound
from .solver import BackendError, ExternalBackend, SolveOutcome, VerificationError

FOUND = "dfa-found"
NO_DFA = "no-dfa-exists"
NO_DFA_WITHIN_LIMIT = "no-dfa-within-limit"
UNDECIDED = "limit-reached"


@dataclass(frozen=True)
class SizeAttempt:
    n: int
    status: str
    wall_time: float


@dataclass
class LearnReport:
    """Outcome of a learning run.

    ``accepted_count`` is re-computed by simulating the returned DFA on the
    sample, never taken from the solver. In single-bound mode
    ``objective_value`` is the optimal weighted acceptance k.
    """

    status: str
    mode: str
    lower: Optional[int]
    upper: Optional[int]
    backend: str
    dfa: Optional[Dfa] = None
    sizes_tried: list = field(default_factory=list)
    accepted_count: Optional[int] = None
    objective_value: Optional[Fraction] = None
    penalty_value: Optional[Fraction] = None
    optimal: bool = False
    sample_size: int = 0

    @property
    def found(self) -> bool:
        return self.dfa is not None

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            return int(x) if Fraction(x).denominator == 1 else float(x)

        return {
            "status": self.status,
            "mode": self.mode,
            "lower": self.lower,
            "upper": self.upper,
            "backend": self.backend,
            "sample_size": self.sample_size,
            "states": None if self.dfa is None else self.dfa.n,
            "accepted_count": self.accepted_count,
            "objective_value": num(self.objective_value),
            "penalty_value": num(self.penalty_value),
            "optimal": self.optimal,
            "sizes_tried": [{"n": a.n, "status": a.status, "wall_time": round(a.wall_time, 6)} for a in self.sizes_tried],
            "dfa": None if self.dfa is None else self.dfa.to_dict(),
        }


def _solve(backend, sample, spec, tree, attempts) -> SolveOutcome:
    start = time.perf_counter()
    try:
        outcome = backend.solve(sample, spec, tree)
    except BackendError as exc:
        exc.size = spec.n
        raise
    attempts.append(SizeAttempt(spec.n, outcome.status, time.perf_counter() - start))
    return outcome


def _decode(outcome: SolveOutcome, sample: Sample, spec: EncodingSpec) -> Dfa:
    dfa = decode_dfa(outcome.assignment, sample, spec.n)
    accepted = dfa.count_accepted(sample)
    if spec.active_lower is not None and accepted < spec.active_lower:
        raise VerificationError(f"decoded DFA accepts {accepted} < lower bound {spec.active_lower}")
    if spec.active_upper is not None and accepted > spec.active_upper:
        raise VerificationError(f"decoded DFA accepts {accepted} > upper bound {spec.active_upper}")
    if spec.pinned_acceptance is not None and accepted != spec.pinned_acceptance:
        raise VerificationError(f"decoded DFA accepts {accepted}, expected {spec.pinned_acceptance}")
    if spec.regularizers.lambda_sink and not has_sink(dfa):
        raise VerificationError("decoded DFA lacks the required sink state")
    return dfa


def learn_two_bound(
    sample: Sample,
    lower: int,
    upper: int,
    reg: RegularizerSpec = NO_REGULARIZERS,
    backend=None,
    start_size: int = 1,
    max_size: Optional[int] = None,
) -> LearnReport:
    """Smallest DFA accepting between ``lower`` and ``upper`` sample words.

    Sizes start at ``start_size`` (at least 2 with a sink regularizer) and
    go up to |Pref(S)| + 1, beyond which no new solutions can appear. With
    positive regularizer weights the penalty is minimized at the first
    feasible size. ``max_size`` caps the search early.
    """
    backend = ExternalBackend() if backend is None else backend
    if len(sample) == 0:
        raise EncodingError("sample must not be empty")
    if not 0 <= lower <= upper <= sample.size:
        raise EncodingError(f"need 0 <= lower <= upper <= |S| = {sample.size}, got {lower}, {upper}")
    tree = build_prefix_tree(sample)
    limit = size_upper_bound(tree)
    stop = limit if max_size is None else min(limit, max_size)
    first = max(start_size, 2 if reg.lambda_sink else 1)
    report = LearnReport(NO_DFA, "two-bound", lower, upper, backend.name, sample_size=sample.size)

    for n in range(first, stop + 1):
        spec = EncodingSpec(n, "two-bound", lower, upper, reg)
        outcome = _solve(backend, sample, spec, tree, report.sizes_tried)
        if outcome.has_solution:
            dfa = _decode(outcome, sample, spec)
            report.status = FOUND
            report.dfa = dfa
            report.accepted_count = dfa.count_accepted(sample)
            report.penalty_value = dfa_penalty(dfa, reg)
            report.optimal = outcome.status == "optimal"
            if reg.enabled and outcome.objective_value != report.penalty_value:
                raise VerificationError(
                    f"solver penalty {outcome.objective_value} differs from simulated {report.penalty_value}"
                )
            return report
        if outcome.status == "limit-reached":
            report.status = UNDECIDED
            return report
    report.status = NO_DFA if stop == limit else NO_DFA_WITHIN_LIMIT
    return report


def learn_single_bound(
    sample: Sample,
    bound: int,
    n: int,
    mode: str = "single-bound-lower",
    reg: RegularizerSpec = NO_REGULARIZERS,
    backend=None,
) -> LearnReport:
    """DFA of size ``n`` accepting the fewest words k >= bound (lower mode)
    or the most words k <= bound (upper mode).

    With regularizers a second solve minimizes the penalty among DFAs that
    accept exactly k, so interpretability never costs acceptance optimality.
    """
    backend = ExternalBackend() if backend is None else backend
    if mode not in ("single-bound-lower", "single-bound-upper"):
        raise EncodingError(f"not a single-bound mode: {mode!r}")
    if len(sample) == 0:
        raise EncodingError("sample must not be empty")
    if not 0 <= bound <= sample.size:
        raise EncodingError(f"bound {bound} outside [0, {sample.size}]")
    lower, upper = (bound, None) if mode == "single-bound-lower" else (None, bound)
    spec = EncodingSpec(n, mode, lower, upper, reg)
    spec.validate(sample)
    tree = build_prefix_tree(sample)
    report = LearnReport(FOUND, mode, lower, upper, backend.name, sample_size=sample.size)

    outcome = _solve(backend, sample, spec, tree, report.sizes_tried)
    if outcome.status == "limit-reached":
        report.status = UNDECIDED
        return report
    if not outcome.has_solution:
        # accept-all (lower) and reject-all (upper) always qualify
        err = BackendError(f"backend reported {outcome.status} for an always-feasible instance")
        err.size = n
        raise err
    dfa = _decode(outcome, sample, spec)
    k = dfa.count_accepted(sample)
    if outcome.objective_value != k:
        raise VerificationError(f"solver objective {outcome.objective_value} but DFA accepts {k}")
    report.optimal = outcome.status == "optimal"

    if reg.enabled:
        outcome = _solve(backend, sample, spec.pinned(k), tree, report.sizes_tried)
        if not outcome.has_solution:
            err = BackendError(f"penalty phase reported {outcome.status} although acceptance {k} is attainable")
            err.size = n
            raise err
        dfa = _decode(outcome, sample, spec.pinned(k))
        report.optimal = report.optimal and outcome.status == "optimal"

    report.dfa = dfa
    report.accepted_count = k
    report.objective_value = Fraction(k)
    report.penalty_value = dfa_penalty(dfa, reg)
    return report


def reduce_exact_learning(positive: Iterable, negative: Iterable, k: int) -> tuple:
    """Encode "is there a k-state DFA accepting P and rejecting N" as a
    two-bound instance: words of P get multiplicity |N|+1, words of N get 1,
    and both bounds equal |P|(|N|+1).

    Returns ``(sample, lower, upper, n)``.
    """
    pos = {tuple(w) for w in positive}
    neg = {tuple(w) for w in negative}
    if pos & neg:
        raise ValueError(f"P and N overlap on {sorted(pos & neg)}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if not pos and not neg:
        raise ValueError("P and N are both empty")
    weight = len(neg) + 1
    entries = {w: weight for w in pos}
    entries.update({w: 1 for w in neg})
    bound = len(pos) * weight
    return Sample(entries), bound, bound, k


def separates(dfa: Dfa, positive: Iterable, negative: Iterable) -> bool:
    return all(dfa.accepts(w) for w in positive) and not any(dfa.accepts(w) for w in negative)
