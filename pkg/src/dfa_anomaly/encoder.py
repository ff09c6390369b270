"""Compile DFA learning instances to binary MILPs and decode solutions.

Variables (all binary), over states q, q' in 0..n-1, symbols a, prefixes w of
the sample and unique sample words v:

* ``d_q_a_q'``   transition q --a--> q'
* ``f_q``        q is final
* ``x_w_q``      the run on prefix w ends in q
* ``alpha_v_q``  the run on v ends in q and q is final
* ``e_q_q'``     some transition leads from q to q' (parallel-edge regularizer)

Prefixes and words are indexed by their prefix-tree node, symbols by their
position in the sorted sample alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .automata import Dfa, Sample
from .milp import Assignment, LinExpr, MilpModel, VarId, as_fraction, make_assignment
from .prefix_tree import PrefixTree, build_prefix_tree

MODES = ("two-bound", "single-bound-lower", "single-bound-upper")
SINK_STATE = 1


class EncodingError(ValueError):
    pass


class SinkRequiresTwoStatesError(EncodingError):
    pass


class MalformedAssignmentError(ValueError):
    pass


@dataclass(frozen=True)
class RegularizerSpec:
    lambda_sink: Fraction = Fraction(0)
    lambda_selfloop: Fraction = Fraction(0)
    lambda_parallel: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("lambda_sink", "lambda_selfloop", "lambda_parallel"):
            value = as_fraction(getattr(self, name))
            if value < 0:
                raise EncodingError(f"{name} must be >= 0, got {value}")
            object.__setattr__(self, name, value)

    @property
    def enabled(self) -> bool:
        return bool(self.lambda_sink or self.lambda_selfloop or self.lambda_parallel)


NO_REGULARIZERS = RegularizerSpec()


@dataclass(frozen=True)
class EncodingSpec:
    """One MILP instance: target size, bounds, mode and regularizers.

    ``pinned_acceptance`` turns a single-bound spec into its second phase:
    the weighted acceptance is fixed and only the penalty is minimized.
    """

    n: int
    mode: str = "two-bound"
    lower: Optional[int] = None
    upper: Optional[int] = None
    regularizers: RegularizerSpec = field(default_factory=RegularizerSpec)
    pinned_acceptance: Optional[int] = None

    def validate(self, sample: Sample) -> None:
        if self.mode not in MODES:
            raise EncodingError(f"unknown mode {self.mode!r}")
        if self.n < 1:
            raise EncodingError(f"DFA size must be >= 1, got {self.n}")
        total = sample.size
        for name in ("lower", "upper"):
            value = getattr(self, name)
            if value is not None and not 0 <= value <= total:
                raise EncodingError(f"{name} bound {value} outside [0, {total}]")
        if self.mode == "two-bound":
            if self.lower is None or self.upper is None:
                raise EncodingError("two-bound mode needs both bounds")
            if self.lower > self.upper:
                raise EncodingError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        elif self.mode == "single-bound-lower" and self.lower is None:
            raise EncodingError("single-bound-lower mode needs a lower bound")
        elif self.mode == "single-bound-upper" and self.upper is None:
            raise EncodingError("single-bound-upper mode needs an upper bound")
        if self.regularizers.lambda_sink and self.n < 2:
            raise SinkRequiresTwoStatesError("a sink state needs a DFA with at least two states")

    @property
    def active_lower(self) -> Optional[int]:
        return self.lower if self.mode in ("two-bound", "single-bound-lower") else None

    @property
    def active_upper(self) -> Optional[int]:
        return self.upper if self.mode in ("two-bound", "single-bound-upper") else None

    @property
    def phase(self) -> str:
        """What the encoded objective optimizes: feasibility, acceptance or penalty."""
        if self.mode == "two-bound":
            return "penalty" if self.regularizers.enabled else "feasibility"
        return "acceptance" if self.pinned_acceptance is None else "penalty"

    def pinned(self, k: int) -> "EncodingSpec":
        return replace(self, pinned_acceptance=k)


def d(q, a, q2) -> VarId:
    return VarId("d", (q, a, q2))


def f(q) -> VarId:
    return VarId("f", (q,))


def x(w, q) -> VarId:
    return VarId("x", (w, q))


def alpha(w, q) -> VarId:
    return VarId("alpha", (w, q))


def e(q, q2) -> VarId:
    return VarId("e", (q, q2))


def encode_automata_constraints(sample: Sample, tree: PrefixTree, n: int, model: Optional[MilpModel] = None) -> MilpModel:
    """Declare d/f/x variables and the DFA + run constraints for size ``n``."""
    model = MilpModel() if model is None else model
    sigma = range(len(sample.alphabet))
    sym = {a: i for i, a in enumerate(sample.alphabet)}
    states = range(n)
    for q in states:
        for a in sigma:
            for q2 in states:
                model.add_var(d(q, a, q2))
    for q in states:
        model.add_var(f(q))
    for w in range(tree.size):
        for q in states:
            model.add_var(x(w, q))

    for q in states:
        for a in sigma:
            model.add_constraint(LinExpr((1, d(q, a, q2)) for q2 in states), "=", 1, "transition")
    for w in range(tree.size):
        model.add_constraint(LinExpr((1, x(w, q)) for q in states), "=", 1, "single_state")
    model.add_constraint(LinExpr([(1, x(tree.root, 0))]), "=", 1, "initial")
    # x_{w,q} + d_{q,a,q'} - 1 <= x_{wa,q'}
    for node in range(1, tree.size):
        parent, a = tree.parent[node], sym[tree.symbol[node]]
        for q in states:
            for q2 in states:
                expr = LinExpr([(1, x(parent, q)), (1, d(q, a, q2)), (-1, x(node, q2))])
                model.add_constraint(expr, "<=", 1, "run")
    return model


def acceptance_expr(sample: Sample, tree: PrefixTree, n: int) -> LinExpr:
    """Multiplicity-weighted count of accepted sample words."""
    expr = LinExpr()
    for word, count in sample.entries.items():
        node = tree.word_node[word]
        for q in range(n):
            expr.add(count, alpha(node, q))
    return expr


def encode_bound_constraints(model: MilpModel, sample: Sample, tree: PrefixTree, spec: EncodingSpec) -> MilpModel:
    """Declare alpha variables, link them to x and f, and add the active bounds."""
    n = spec.n
    for word in sample:
        node = tree.word_node[word]
        for q in range(n):
            model.add_var(alpha(node, q))
    for word in sample:
        node = tree.word_node[word]
        for q in range(n):
            a = alpha(node, q)
            model.add_constraint(LinExpr([(1, a), (-1, x(node, q)), (-1, f(q))]), ">=", -1, "accept_link")
            model.add_constraint(LinExpr([(1, a), (-1, x(node, q))]), "<=", 0, "accept_link")
            model.add_constraint(LinExpr([(1, a), (-1, f(q))]), "<=", 0, "accept_link")
    accepted = acceptance_expr(sample, tree, n)
    if spec.active_lower is not None:
        model.add_constraint(accepted, ">=", spec.active_lower, "lower_bound")
    if spec.active_upper is not None:
        model.add_constraint(accepted, "<=", spec.active_upper, "upper_bound")
    if spec.pinned_acceptance is not None:
        model.add_constraint(accepted, "=", spec.pinned_acceptance, "pin_acceptance")
    return model


def encode_acceptance_objective(model: MilpModel, sample: Sample, tree: PrefixTree, spec: EncodingSpec) -> MilpModel:
    """Minimize (lower-bound mode) or maximize (upper-bound mode) weighted acceptance."""
    sense = "maximize" if spec.mode == "single-bound-upper" else "minimize"
    model.set_objective(acceptance_expr(sample, tree, spec.n), sense)
    return model


def encode_regularizers(model: MilpModel, sample: Sample, spec: EncodingSpec) -> LinExpr:
    """Add the regularizers' hard constraints and auxiliary variables.

    Returns the penalty expression; the caller decides how it enters the
    objective. With all weights zero the model is left untouched.
    """
    reg = spec.regularizers
    n = spec.n
    states = range(n)
    sigma = range(len(sample.alphabet))
    penalty = LinExpr()
    if reg.lambda_sink:
        if n < 2:
            raise SinkRequiresTwoStatesError("a sink state needs a DFA with at least two states")
        s = SINK_STATE
        for a in sigma:
            model.add_constraint(LinExpr([(1, d(s, a, s))]), "=", 1, "sink")
        model.add_constraint(LinExpr([(1, f(s))]), "=", 0, "sink")
        # lambda_s * sum_{q,a} (1 - d_{q,a,s})
        penalty += LinExpr(((-reg.lambda_sink, d(q, a, s)) for q in states for a in sigma),
                           reg.lambda_sink * n * len(sigma))
    if reg.lambda_selfloop:
        penalty += LinExpr((reg.lambda_selfloop, d(q, a, q2)) for q in states for a in sigma for q2 in states if q2 != q)
    if reg.lambda_parallel:
        for q in states:
            for q2 in states:
                model.add_var(e(q, q2))
        for q in states:
            for q2 in states:
                model.add_constraint(LinExpr([(1, e(q, q2))] + [(-1, d(q, a, q2)) for a in sigma]), "<=", 0, "edge_link")
                for a in sigma:
                    model.add_constraint(LinExpr([(1, e(q, q2)), (-1, d(q, a, q2))]), ">=", 0, "edge_link")
        penalty += LinExpr((reg.lambda_parallel, e(q, q2)) for q in states for q2 in states)
    return penalty


def encode(sample: Sample, spec: EncodingSpec, tree: Optional[PrefixTree] = None) -> MilpModel:
    """Full model for ``spec``.

    Two-bound: feasibility, or pure penalty minimization when any weight is
    positive. Single-bound: weighted acceptance is the objective; once pinned
    (second phase) the penalty is minimized instead.
    """
    spec.validate(sample)
    tree = build_prefix_tree(sample) if tree is None else tree
    model = encode_automata_constraints(sample, tree, spec.n)
    encode_bound_constraints(model, sample, tree, spec)
    penalty = encode_regularizers(model, sample, spec)
    phase = spec.phase
    if phase == "feasibility":
        model.set_feasibility()
    elif phase == "acceptance":
        encode_acceptance_objective(model, sample, tree, spec)
    else:
        model.set_objective(penalty, "minimize")
    return model


def penalty_expr(sample: Sample, spec: EncodingSpec) -> LinExpr:
    """The penalty term alone, on a scratch model."""
    scratch = encode_automata_constraints(sample, build_prefix_tree(sample), spec.n)
    return encode_regularizers(scratch, sample, spec)


def dfa_penalty(dfa: Dfa, reg: RegularizerSpec) -> Fraction:
    """Penalty of a concrete DFA, computed from its transition table."""
    total = Fraction(0)
    table = dfa.transitions
    if reg.lambda_sink:
        total += reg.lambda_sink * sum(1 for (q, a), t in table.items() if t != SINK_STATE)
    if reg.lambda_selfloop:
        total += reg.lambda_selfloop * sum(1 for (q, a), t in table.items() if t != q)
    if reg.lambda_parallel:
        total += reg.lambda_parallel * len({(q, t) for (q, a), t in table.items()})
    return total


def has_sink(dfa: Dfa) -> bool:
    """Whether state 1 is a non-final state with only self-loops."""
    s = SINK_STATE
    return dfa.n > s and s not in dfa.finals and all(dfa.transitions[(s, a)] == s for a in dfa.alphabet)


def natural_values(dfa: Dfa, sample: Sample, spec: EncodingSpec, tree: Optional[PrefixTree] = None) -> dict:
    """Values of every encoding variable read off a concrete DFA and its runs."""
    if tuple(dfa.alphabet) != tuple(sample.alphabet):
        raise EncodingError("DFA alphabet must equal the sample alphabet")
    if dfa.n != spec.n:
        raise EncodingError(f"DFA has {dfa.n} states, spec expects {spec.n}")
    tree = build_prefix_tree(sample) if tree is None else tree
    n = dfa.n
    states = range(n)
    table = dfa.transitions
    values = {}
    for q in states:
        for ai, a in enumerate(sample.alphabet):
            for q2 in states:
                values[d(q, ai, q2)] = int(table[(q, a)] == q2)
    for q in states:
        values[f(q)] = int(q in dfa.finals)
    reached = [0] * tree.size
    for node in range(1, tree.size):
        reached[node] = table[(reached[tree.parent[node]], tree.symbol[node])]
    for node in range(tree.size):
        for q in states:
            values[x(node, q)] = int(reached[node] == q)
    for word in sample:
        node = tree.word_node[word]
        for q in states:
            values[alpha(node, q)] = int(reached[node] == q and q in dfa.finals)
    if spec.regularizers.lambda_parallel:
        edges = {(q, t) for (q, a), t in table.items()}
        for q in states:
            for q2 in states:
                values[e(q, q2)] = int((q, q2) in edges)
    return values


def natural_assignment(dfa: Dfa, sample: Sample, spec: EncodingSpec, model: MilpModel) -> Assignment:
    return make_assignment(model, natural_values(dfa, sample, spec))


def decode_dfa(assignment: Assignment, sample: Sample, n: int) -> Dfa:
    """Read the DFA off the d and f variables of an integer solution."""
    values = assignment.values
    table = {}
    for ai, a in enumerate(sample.alphabet):
        for q in range(n):
            targets = [q2 for q2 in range(n) if values.get(d(q, ai, q2), 0) == 1]
            if len(targets) != 1:
                raise MalformedAssignmentError(
                    f"state {q} on {a!r} has {len(targets)} successors {targets}; expected exactly one"
                )
            table[(q, a)] = targets[0]
    finals = frozenset(q for q in range(n) if values.get(f(q), 0) == 1)
    return Dfa(n, sample.alphabet, table, finals)
