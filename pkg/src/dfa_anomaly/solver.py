"""Solver backends: an external MILP process and an exhaustive-enumeration oracle.

Both return a :class:`SolveOutcome`. The external backend writes the model as
an LP file, runs a command, parses the solution file and re-checks every
constraint exactly before trusting it. The enumeration backend never looks at
the MILP; it walks every DFA of the requested size.
"""

from __future__ import annotations

import copy
import importlib.util
import logging
import math
import os
import re
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .automata import Dfa, Sample
from .encoder import SINK_STATE, EncodingSpec, encode, natural_values
from .milp import Assignment, LinExpr, MilpModel, SolutionParseError, parse_solution, write_lp
from .prefix_tree import PrefixTree, build_prefix_tree

logger = logging.getLogger(__name__)

OUTCOME_STATUSES = ("optimal", "feasible", "infeasible", "limit-reached", "backend-error")
DEFAULT_TIME_LIMIT = 100.0
DEFAULT_ENUMERATION_BUDGET = 10**7


class BackendError(RuntimeError):
    """The backend failed to produce a trustworthy answer."""

    size: Optional[int] = None


class VerificationError(BackendError):
    """A reported solution violates the in-memory model."""


class BudgetExceededError(BackendError):
    pass


@dataclass(frozen=True)
class SolveOutcome:
    status: str
    assignment: Optional[Assignment] = None
    wall_time: float = 0.0
    work: Mapping = field(default_factory=dict)
    message: str = ""

    @property
    def has_solution(self) -> bool:
        return self.status in ("optimal", "feasible")

    @property
    def objective_value(self) -> Optional[Fraction]:
        return None if self.assignment is None else self.assignment.objective_value


# external process backend


def find_cbc() -> Optional[str]:
    """Locate a CBC binary: ``$DFA_ANOMALY_CBC``, ``PATH``, then the one bundled with PuLP."""
    env = os.environ.get("DFA_ANOMALY_CBC")
    if env:
        return env
    on_path = shutil.which("cbc")
    if on_path:
        return on_path
    spec = importlib.util.find_spec("pulp")
    if spec is None or not spec.submodule_search_locations:
        return None
    base = Path(list(spec.submodule_search_locations)[0]) / "solverdir" / "cbc"
    for sub in ("linux/i64/cbc", "linux/arm64/cbc", "osx/i64/cbc", "win/i64/cbc.exe"):
        candidate = base / sub
        if candidate.exists() and os.access(candidate, os.X_OK):
            return str(candidate)
    return None


CBC_TEMPLATE = "{cbc} {lp_path} sec {time_limit} randomCbcSeed {cbc_seed} threads 1 solve solu {sol_path}"
HIGHS_TEMPLATE = "{python} -m dfa_anomaly.highs_runner {lp_path} {sol_path} --time-limit {time_limit} --seed {seed}"
SOLVER_TEMPLATES = {"highs": HIGHS_TEMPLATE, "cbc": CBC_TEMPLATE}


def default_command() -> str:
    """HiGHS when highspy is installed, else CBC."""
    if importlib.util.find_spec("highspy") is not None:
        return HIGHS_TEMPLATE
    return CBC_TEMPLATE


@dataclass(frozen=True)
class BackendConfig:
    """How to run an external solver.

    ``command`` is a template (or a name from ``SOLVER_TEMPLATES``), split
    shell-style; each argument is formatted with ``lp_path``, ``sol_path``,
    ``time_limit``, ``seed``, ``cbc_seed`` (``seed + 1``; CBC reads 0 as
    "seed from the clock"), ``cbc`` and ``python``.
    ``solution_format`` is ``"cbc"`` for CBC's ``solu`` output, ``"plain"``
    for the status / objective / name-value format, or ``"auto"`` (cbc iff
    the program is CBC).
    """

    command: str = field(default_factory=default_command)
    time_limit: float = DEFAULT_TIME_LIMIT
    seed: int = 0
    solution_format: str = "auto"
    ok_exit_codes: tuple = (0,)
    env: Optional[Mapping] = None
    keep_files_in: Optional[str] = None

    @property
    def template(self) -> str:
        return SOLVER_TEMPLATES.get(self.command, self.command)

    @property
    def program(self) -> str:
        return shlex.split(self.template)[0]

    @property
    def resolved_format(self) -> str:
        if self.solution_format != "auto":
            return self.solution_format
        prog = self.program
        return "cbc" if prog == "{cbc}" or os.path.basename(prog).startswith("cbc") else "plain"

    @property
    def solver_name(self) -> str:
        template = self.template
        if self.program == "{cbc}":
            return "cbc"
        if "dfa_anomaly.highs_runner" in template:
            return "highs"
        return os.path.basename(self.program)

    def argv(self, lp_path, sol_path) -> list:
        command = self.template
        fields = {
            "lp_path": str(lp_path),
            "sol_path": str(sol_path),
            "time_limit": _fmt_limit(self.time_limit),
            "seed": self.seed,
            "cbc_seed": self.seed + 1,
            "cbc": find_cbc() if "{cbc}" in command else "",
            "python": sys.executable,
        }
        if "{cbc}" in command and not fields["cbc"]:
            raise BackendError("no CBC binary found; install 'pulp' or put 'cbc' on PATH, or pass a command")
        try:
            return [part.format(**fields) for part in shlex.split(command)]
        except (KeyError, IndexError, ValueError) as exc:
            raise BackendError(f"bad solver command template {command!r}: {exc}") from exc


def _fmt_limit(limit: float) -> str:
    return str(int(limit)) if float(limit).is_integer() else repr(float(limit))


_CBC_WORK = {
    "nodes": re.compile(r"Enumerated nodes:\s+(\d+)"),
    "iterations": re.compile(r"Total iterations:\s+(\d+)"),
    "cpu_seconds": re.compile(r"Total time \(CPU seconds\):\s+([\d.]+)"),
}
_PLAIN_WORK = re.compile(r"^work (\w+) ([\d.]+)$", re.M)


def cbc_to_plain(text: str) -> str:
    """Translate a CBC ``solu`` file into the plain solution format."""
    lines = text.splitlines()
    if not lines:
        raise SolutionParseError("empty CBC solution file")
    head = lines[0].strip()
    low = head.lower()
    if low.startswith("optimal"):
        status = "OPTIMAL"
    elif "infeasible" in low:
        return "INFEASIBLE\n"
    elif low.startswith("unbounded"):
        return "UNBOUNDED\n"
    elif low.startswith("stopped"):
        if "no integer solution" in low:
            return "LIMIT\n"
        status = "FEASIBLE"
    else:
        raise SolutionParseError(f"unrecognised CBC status line {head!r}")
    out = [status]
    for line in lines[1:]:
        fields = line.replace("**", " ").split()
        if not fields:
            continue
        if len(fields) < 3:
            raise SolutionParseError(f"malformed CBC row {line!r}")
        out.append(f"{fields[1]} {fields[2]}")
    return "\n".join(out) + "\n"


def solve_external(model: MilpModel, config: BackendConfig = BackendConfig()) -> SolveOutcome:
    start = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="dfa_anomaly_", dir=config.keep_files_in) as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        lp_model = model
        if config.resolved_format == "cbc" and model.variables and not model.constraints:
            # CBC crashes on a model without rows
            lp_model = copy.deepcopy(model)
            lp_model.add_constraint(LinExpr(), ">=", 0, "padding")
        lp_path.write_text(write_lp(lp_model))
        argv = config.argv(lp_path, sol_path)
        env = None if config.env is None else {**os.environ, **config.env}
        logger.debug("running %s", " ".join(argv))
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, env=env, timeout=config.time_limit * 3 + 30
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendError(f"solver process failed: {exc}") from exc
        if proc.returncode not in config.ok_exit_codes:
            raise BackendError(
                f"solver exited with code {proc.returncode}: {(proc.stderr or proc.stdout).strip()[-500:]}"
            )
        if not sol_path.exists():
            raise BackendError(f"solver wrote no solution file; output: {proc.stdout.strip()[-500:]}")
        text = sol_path.read_text()
    work = {}
    fmt = config.resolved_format
    if fmt == "cbc":
        found = ((key, pattern.search(proc.stdout)) for key, pattern in _CBC_WORK.items())
        found = [(key, m.group(1)) for key, m in found if m]
    else:
        found = _PLAIN_WORK.findall(proc.stdout)
    for key, value in found:
        work[key] = float(value) if "." in value else int(value)
    try:
        if fmt == "cbc":
            text = cbc_to_plain(text)
        parsed = parse_solution(text, model)
    except (SolutionParseError, ValueError) as exc:
        raise BackendError(f"unusable solver output: {exc}") from exc
    elapsed = time.perf_counter() - start

    if parsed.status == "unbounded":
        raise BackendError("solver reported an unbounded binary program")
    if parsed.assignment is None:
        return SolveOutcome(parsed.status, None, elapsed, work)
    violated = model.violated(parsed.assignment.values)
    if violated:
        names = ", ".join(c.name for c in violated[:5])
        raise VerificationError(f"solver solution violates {len(violated)} constraint(s): {names}")
    return SolveOutcome(parsed.status, parsed.assignment, elapsed, work)


class ExternalBackend:
    """Encode, write LP, run the configured solver."""

    def __init__(self, config: BackendConfig = BackendConfig()):
        self.config = config

    @property
    def name(self) -> str:
        return "external:" + self.config.solver_name

    def solve(self, sample: Sample, spec: EncodingSpec, tree: Optional[PrefixTree] = None) -> SolveOutcome:
        return solve_external(encode(sample, spec, tree), self.config)


# exhaustive enumeration


def candidate_count(n: int, alphabet_size: int) -> int:
    return n ** (n * alphabet_size) * 2**n


def _table_digits(start: int, stop: int, n: int, m: int) -> np.ndarray:
    """Transition tables start..stop-1 as rows of m base-n digits (first digit most significant)."""
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((stop - start, m), dtype=np.int64)
    for j in range(m - 1, -1, -1):
        digits[:, j] = idx % n
        idx //= n
    return digits


def _scale(weights) -> tuple:
    """Integer multiples of the weights sharing one denominator."""
    den = 1
    for w in weights:
        den = den * w.denominator // math.gcd(den, w.denominator)
    return tuple(int(w * den) for w in weights), den


def solve_enumerate(
    sample: Sample,
    spec: EncodingSpec,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    tree: Optional[PrefixTree] = None,
    chunk_cells: int = 1 << 21,
) -> SolveOutcome:
    """Best DFA of size ``spec.n`` by checking every candidate.

    Candidates are (transition table, final set) pairs in lexicographic
    order, both read as digit strings with state 0 / symbol 0 first. The
    first candidate reaching the optimum wins.
    """
    start = time.perf_counter()
    spec.validate(sample)
    tree = build_prefix_tree(sample) if tree is None else tree
    n, alphabet = spec.n, sample.alphabet
    s = len(alphabet)
    m = n * s
    total = candidate_count(n, s)
    if total > budget:
        raise BudgetExceededError(f"{total} candidate DFAs exceed the enumeration budget {budget}")

    sym = {a: i for i, a in enumerate(alphabet)}
    reg = spec.regularizers
    (w_sink, w_loop, w_par), den = _scale([reg.lambda_sink, reg.lambda_selfloop, reg.lambda_parallel])
    phase = spec.phase
    lower, upper, pinned = spec.active_lower, spec.active_upper, spec.pinned_acceptance
    maximize = spec.mode == "single-bound-upper"

    # finals[fs, q]: state q is final in final set fs (state 0 is the high bit)
    n_fs = 2**n
    finals = ((np.arange(n_fs)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(np.int64)
    word_nodes = [(tree.word_node[w], c) for w, c in sample.entries.items()]
    entry_src = np.repeat(np.arange(n), s)

    n_tables = n**m
    chunk = max(1, chunk_cells // max(n_fs, tree.size, 1))
    best_val = None
    best = None
    visited = 0
    for lo in range(0, n_tables, chunk):
        hi = min(n_tables, lo + chunk)
        rows = np.arange(hi - lo)
        digits = _table_digits(lo, hi, n, m) if m else np.zeros((hi - lo, 0), dtype=np.int64)
        reached = np.zeros((hi - lo, tree.size), dtype=np.int64)
        for node in range(1, tree.size):
            col = reached[:, tree.parent[node]] * s + sym[tree.symbol[node]]
            reached[:, node] = digits[rows, col]
        weight = np.zeros((hi - lo, n), dtype=np.int64)
        for node, count in word_nodes:
            np.add.at(weight, (rows, reached[:, node]), count)
        accepted = weight @ finals.T  # (tables, final sets)

        feasible = np.ones_like(accepted, dtype=bool)
        if lower is not None:
            feasible &= accepted >= lower
        if upper is not None:
            feasible &= accepted <= upper
        if pinned is not None:
            feasible &= accepted == pinned
        if reg.lambda_sink:
            sink_ok = np.all(digits[:, SINK_STATE * s:(SINK_STATE + 1) * s] == SINK_STATE, axis=1)
            feasible &= sink_ok[:, None] & (finals[:, SINK_STATE] == 0)[None, :]

        if phase == "feasibility":
            objective = np.zeros_like(accepted)
        elif phase == "acceptance":
            objective = -accepted if maximize else accepted
        else:
            pen = np.zeros(hi - lo, dtype=np.int64)
            if w_sink:
                pen += w_sink * np.sum(digits != SINK_STATE, axis=1)
            if w_loop:
                pen += w_loop * np.sum(digits != entry_src[None, :], axis=1)
            if w_par:
                masks = np.zeros((hi - lo, n), dtype=np.int64)
                for j in range(m):
                    masks[:, j // s] |= np.left_shift(1, digits[:, j])
                distinct = np.zeros(hi - lo, dtype=np.int64)
                for bit in range(n):
                    distinct += np.sum((masks >> bit) & 1, axis=1)
                pen += w_par * distinct
            objective = np.broadcast_to(pen[:, None], accepted.shape)
        visited += accepted.size

        if not feasible.any():
            continue
        masked = np.where(feasible, objective, np.iinfo(np.int64).max)
        flat = int(np.argmin(masked))
        val = int(masked.flat[flat])
        if best_val is None or val < best_val:
            best_val = val
            t, fs = divmod(flat, n_fs)
            best = (digits[t].tolist(), finals[fs].tolist())

    elapsed = time.perf_counter() - start
    work = {"candidates": visited}
    if best is None:
        return SolveOutcome("infeasible", None, elapsed, work)
    table_digits, final_bits = best
    dfa = Dfa(
        n,
        alphabet,
        {(q, a): table_digits[q * s + i] for q in range(n) for i, a in enumerate(alphabet)},
        frozenset(q for q in range(n) if final_bits[q]),
    )
    values = natural_values(dfa, sample, spec, tree)
    if phase == "feasibility":
        objective_value = Fraction(1)
    elif phase == "acceptance":
        objective_value = Fraction(dfa.count_accepted(sample))
    else:
        objective_value = Fraction(best_val, den)
    return SolveOutcome("optimal", Assignment(values, objective_value), elapsed, work)


class EnumerationBackend:
    """Exhaustive oracle usable wherever a backend is expected."""

    name = "enumerate"

    def __init__(self, budget: int = DEFAULT_ENUMERATION_BUDGET):
        self.budget = budget

    def solve(self, sample: Sample, spec: EncodingSpec, tree: Optional[PrefixTree] = None) -> SolveOutcome:
        return solve_enumerate(sample, spec, self.budget, tree)
