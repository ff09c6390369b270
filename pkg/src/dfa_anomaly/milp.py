"""Solver-agnostic 0/1 MILP models, CPLEX-LP output and solution parsing.

All variables are binary. Coefficients are kept as :class:`fractions.Fraction`
so that solutions can be re-checked exactly.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

INTEGRALITY_TOL = 1e-6

VAR_KINDS = ("d", "f", "x", "alpha", "e", "v")


class ModelError(ValueError):
    pass


class DuplicateVariableError(ModelError):
    pass


class UndeclaredVariableError(ModelError):
    pass


class SolutionParseError(ValueError):
    pass


class NonIntegralValueError(SolutionParseError):
    pass


class UnknownVariableError(SolutionParseError):
    pass


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ModelError(f"non-finite coefficient {value}")
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True, order=True)
class VarId:
    """Binary variable identified by its kind and integer index tuple.

    Kinds: ``d`` transition (q, a, q'), ``f`` final (q), ``x`` run state
    (prefix, q), ``alpha`` acceptance (word-node, q), ``e`` edge (q, q'), and
    ``v`` for free-form variables. The name is ``kind_i_j_...``, which is
    LP-legal and maps back to the index tuple.
    """

    kind: str
    index: tuple = ()

    def __post_init__(self):
        if self.kind not in VAR_KINDS:
            raise ModelError(f"unknown variable kind {self.kind!r}")

    @property
    def name(self) -> str:
        return "_".join([self.kind, *(str(i) for i in self.index)])

    @classmethod
    def parse(cls, name: str) -> "VarId":
        kind, *rest = name.split("_")
        if kind not in VAR_KINDS:
            kind, rest = "v", [name]
        return cls(kind, tuple(int(i) if i.isdigit() else i for i in rest))

    def __str__(self) -> str:
        return self.name


def var(name_or_id) -> VarId:
    return name_or_id if isinstance(name_or_id, VarId) else VarId.parse(name_or_id)


class LinExpr:
    """Linear expression ``sum(c_i * v_i) + constant`` with aggregated terms."""

    __slots__ = ("terms", "constant")

    def __init__(self, terms: Iterable = (), constant=0):
        self.terms: dict = {}
        self.constant = as_fraction(constant)
        for coef, v in terms:
            self.add(coef, v)

    def add(self, coef, v) -> "LinExpr":
        v = var(v)
        c = self.terms.get(v, Fraction(0)) + as_fraction(coef)
        if c:
            self.terms[v] = c
        else:
            self.terms.pop(v, None)
        return self

    def __add__(self, other: "LinExpr") -> "LinExpr":
        out = LinExpr(((c, v) for v, c in self.terms.items()), self.constant + other.constant)
        for v, c in other.terms.items():
            out.add(c, v)
        return out

    def scaled(self, factor) -> "LinExpr":
        factor = as_fraction(factor)
        return LinExpr(((c * factor, v) for v, c in self.terms.items()), self.constant * factor)

    def value(self, values: Mapping) -> Fraction:
        return self.constant + sum((c * values.get(v, 0) for v, c in self.terms.items()), Fraction(0))

    def __eq__(self, other):
        return isinstance(other, LinExpr) and self.terms == other.terms and self.constant == other.constant

    def __repr__(self):
        body = " + ".join(f"{c}*{v}" for v, c in self.terms.items()) or "0"
        return f"LinExpr({body} + {self.constant})"


RELATIONS = ("<=", ">=", "=")


@dataclass
class Constraint:
    expr: LinExpr
    relation: str
    rhs: Fraction
    family: str = "misc"
    name: str = ""

    def satisfied(self, values: Mapping) -> bool:
        lhs = self.expr.value(values)
        if self.relation == "<=":
            return lhs <= self.rhs
        if self.relation == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass
class MilpModel:
    """Binary MILP: variables, constraints (tagged by family) and an objective.

    A pure feasibility problem is modelled as minimizing the constant 1.
    """

    variables: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: LinExpr = field(default_factory=lambda: LinExpr(constant=1))
    sense: str = "minimize"
    _declared: set = field(default_factory=set, repr=False)
    _family_count: Counter = field(default_factory=Counter, repr=False)

    def add_var(self, v) -> VarId:
        v = var(v)
        if v in self._declared:
            raise DuplicateVariableError(f"variable {v.name} already declared")
        self._declared.add(v)
        self.variables.append(v)
        return v

    def has_var(self, v) -> bool:
        return var(v) in self._declared

    def _check_declared(self, expr: LinExpr):
        for v in expr.terms:
            if v not in self._declared:
                raise UndeclaredVariableError(f"variable {v.name} is not declared")

    def add_constraint(self, expr: LinExpr, relation: str, rhs=0, family: str = "misc") -> Constraint:
        if relation not in RELATIONS:
            raise ModelError(f"unknown relation {relation!r}")
        self._check_declared(expr)
        # constants move to the right-hand side
        rhs = as_fraction(rhs) - expr.constant
        expr = LinExpr(((c, v) for v, c in expr.terms.items()))
        con = Constraint(expr, relation, rhs, family, f"{family}_{self._family_count[family]}")
        self._family_count[family] += 1
        self.constraints.append(con)
        return con

    def set_objective(self, expr: LinExpr, sense: str = "minimize") -> None:
        if sense not in ("minimize", "maximize"):
            raise ModelError(f"unknown sense {sense!r}")
        self._check_declared(expr)
        self.objective = expr
        self.sense = sense

    def set_feasibility(self) -> None:
        self.set_objective(LinExpr(constant=1), "minimize")

    @property
    def is_feasibility(self) -> bool:
        return not self.objective.terms

    def family_counts(self) -> Counter:
        return Counter(self._family_count)

    def violated(self, values: Mapping) -> list:
        """Constraints not satisfied by ``values`` (exact arithmetic)."""
        return [c for c in self.constraints if not c.satisfied(values)]


@dataclass(frozen=True)
class Assignment:
    values: Mapping
    objective_value: Fraction

    def __getitem__(self, v) -> int:
        return self.values[var(v)]

    def ones(self, kind: str) -> list:
        return sorted(v for v, x in self.values.items() if x and v.kind == kind)


def make_assignment(model: MilpModel, values: Mapping) -> Assignment:
    """Complete ``values`` to all model variables (default 0) and evaluate the objective."""
    full = {v: int(values.get(v, 0)) for v in model.variables}
    return Assignment(full, model.objective.value(full))


# LP output

_LINE_WIDTH = 200


def _num(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return format(float(x), ".17g")


def _format_terms(expr: LinExpr) -> list:
    parts = []
    for v, c in expr.terms.items():
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_num(abs(c))} {v.name}")
    if parts and parts[0].startswith("+ "):
        parts[0] = parts[0][2:]
    return parts


def _wrap(head: str, parts: list) -> list:
    lines, current = [], head
    for part in parts:
        if len(current) + len(part) + 1 > _LINE_WIDTH and current.strip():
            lines.append(current)
            current = "   "
        current += " " + part
    lines.append(current)
    return lines


def write_lp(model: MilpModel) -> str:
    out = ["\\ binary MILP model", "Minimize" if model.sense == "minimize" else "Maximize"]
    parts = _format_terms(model.objective)
    const = model.objective.constant
    if not parts:
        parts = [_num(const)]
    elif const:
        parts.append(("- " if const < 0 else "+ ") + _num(abs(const)))
    out.extend(_wrap(" obj:", parts))
    out.append("Subject To")
    for con in model.constraints:
        parts = _format_terms(con.expr)
        if not parts:
            # LP rows need a variable; a constant row is written over the first one
            if not model.variables:
                continue
            parts = [f"0 {model.variables[0].name}"]
        out.extend(_wrap(f" {con.name}:", parts + [f"{con.relation} {_num(con.rhs)}"]))
    out.append("Bounds")
    for v in model.variables:
        out.append(f" 0 <= {v.name} <= 1")
    out.append("Binaries")
    for v in model.variables:
        out.append(f" {v.name}")
    out.append("End")
    return "\n".join(out) + "\n"


# solution files

STATUSES = ("optimal", "feasible", "infeasible", "unbounded", "limit-reached")

_STATUS_TOKENS = {
    "OPTIMAL": "optimal",
    "FEASIBLE": "feasible",
    "INFEASIBLE": "infeasible",
    "UNBOUNDED": "unbounded",
    "LIMIT": "limit-reached",
    "LIMIT-REACHED": "limit-reached",
    "TIME_LIMIT": "limit-reached",
}


@dataclass(frozen=True)
class ParsedSolution:
    status: str
    assignment: Optional[Assignment] = None
    reported_objective: Optional[float] = None


def parse_solution(text: str, model: MilpModel) -> ParsedSolution:
    """Read a plain solution file.

    Format: an optional status token line (``OPTIMAL``, ``FEASIBLE``,
    ``INFEASIBLE``, ``UNBOUNDED``, ``LIMIT``), an optional ``objective <value>``
    line, then ``<name> <value>`` pairs. Variables not listed are 0. Blank
    lines and ``#`` comments are skipped. Without a status line a solution
    with values is taken as feasible.
    """
    status = None
    reported = None
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) == 1 and fields[0].upper() in _STATUS_TOKENS and status is None and not raw:
            status = _STATUS_TOKENS[fields[0].upper()]
            continue
        if len(fields) == 2 and fields[0].lower() == "objective":
            reported = float(fields[1])
            continue
        if len(fields) != 2:
            raise SolutionParseError(f"line {lineno}: expected '<name> <value>', got {line!r}")
        raw[fields[0]] = fields[1]

    if status in ("infeasible", "unbounded") or (status == "limit-reached" and not raw):
        return ParsedSolution(status, None, reported)

    by_name = {v.name: v for v in model.variables}
    values = {}
    for name, text_value in raw.items():
        if name not in by_name:
            raise UnknownVariableError(f"solution mentions unknown variable {name!r}")
        x = float(text_value)
        r = round(x)
        if abs(x - r) > INTEGRALITY_TOL or r not in (0, 1):
            raise NonIntegralValueError(f"variable {name} has non-binary value {text_value}")
        values[by_name[name]] = r
    if status is None or status == "limit-reached":
        # values without a proof of optimality
        status = "feasible"
    return ParsedSolution(status, make_assignment(model, values), reported)


def format_solution(status: str, assignment: Optional[Assignment]) -> str:
    """Inverse of :func:`parse_solution` (nonzero values only)."""
    token = {v: k for k, v in _STATUS_TOKENS.items() if k in ("OPTIMAL", "FEASIBLE", "INFEASIBLE", "UNBOUNDED", "LIMIT")}
    lines = [token[status]]
    if assignment is not None:
        lines.append(f"objective {_num(assignment.objective_value)}")
        lines.extend(f"{v.name} {x}" for v, x in sorted(assignment.values.items()) if x)
    return "\n".join(lines) + "\n"


_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


def is_lp_name(name: str) -> bool:
    return bool(_NAME_RE.match(name))
