"""Detection metrics, bound estimation and the experiment sweep.

Anomalies are the positive class: a word is flagged iff the DFA accepts it.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .automata import Dfa, Sample, UnknownSymbolError
from .datagen import ANOMALY, NORMAL, GenSpec, LabeledSet, generate, planted_detector, round_half_up, split_counts
from .encoder import RegularizerSpec
from .learner import learn_single_bound, learn_two_bound
from .solver import BackendConfig, EnumerationBackend, ExternalBackend

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("goal", "mode", "states", "bound_relax", "time_s", "f1", "accepted_count", "status")


def _ratio(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def precision(self) -> Fraction:
        return Fraction(self.tp, self.tp + self.fp) if self.tp + self.fp else Fraction(0)

    @property
    def recall(self) -> Fraction:
        return Fraction(self.tp, self.tp + self.fn) if self.tp + self.fn else Fraction(0)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else Fraction(0)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "precision": float(self.precision), "recall": float(self.recall), "f1": float(self.f1),
        }


def evaluate(dfa: Dfa, test: LabeledSet, unknown: str = "error") -> Metrics:
    """Confusion counts of ``dfa`` on labelled words.

    ``unknown`` decides what happens to words with symbols outside the DFA's
    alphabet: ``"error"`` raises, ``"reject"`` treats them as normal.
    """
    if unknown not in ("error", "reject"):
        raise ValueError(f"unknown-symbol policy must be 'error' or 'reject', got {unknown!r}")
    tp = fp = tn = fn = 0
    for word, label in test:
        try:
            flagged = dfa.accepts(word)
        except UnknownSymbolError:
            if unknown == "error":
                raise
            flagged = False
        if label == ANOMALY:
            tp += flagged
            fn += not flagged
        elif label == NORMAL:
            fp += flagged
            tn += not flagged
        else:
            raise ValueError(f"unknown label {label!r}")
    return Metrics(tp, fp, tn, fn)


def bounds_from_ratio(train, ratio) -> tuple:
    """Acceptance bounds from an anomaly-ratio estimate.

    The ratio is floored and ceiled to whole percent; the lower bound is
    floor(low% * |S|) and the upper ceil(high% * |S|).
    """
    total = train.size if isinstance(train, Sample) else int(train)
    r = _ratio(ratio)
    if not 0 <= r <= 1:
        raise ValueError(f"ratio must lie in [0, 1], got {ratio}")
    low = Fraction(math.floor(r * 100), 100)
    high = Fraction(math.ceil(r * 100), 100)
    return math.floor(low * total), min(total, math.ceil(high * total))


def loosen_bounds(bounds: tuple, delta, total: int, mode: str = "two-bound") -> tuple:
    """Widen ``(lower, upper)`` by round(delta * total) in the loosening direction(s)."""
    d = _ratio(delta)
    if not 0 <= d <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    step = round_half_up(d * total)
    lower, upper = bounds
    if mode in ("two-bound", "single-bound-lower") and lower is not None:
        lower = max(0, lower - step)
    if mode in ("two-bound", "single-bound-upper") and upper is not None:
        upper = min(total, upper + step)
    return lower, upper


# sweeps


@dataclass(frozen=True)
class DatasetConfig:
    goal: str
    planted: str = "contains"
    symbol: str = "a"
    alphabet: tuple = ("a", "b", "c", "d")
    n_total: int = 250
    anomaly_ratio: Fraction = Fraction(1, 10)
    min_len: int = 1
    max_len: int = 8
    seed: int = 0

    def gen_spec(self, seed: int) -> GenSpec:
        dfa = planted_detector(self.planted, self.alphabet, self.symbol)
        return GenSpec(dfa, self.n_total, _ratio(self.anomaly_ratio), self.min_len, self.max_len,
                       seed=self.seed * 1_000_003 + seed)


# Seven planted datasets sized like the paper's goal corpora (250 to 370 items).
# Words are at least 4 symbols long: with very short words many unrelated
# 2-state DFAs happen to accept the same number of training words.
PLANTED_SUITE = tuple(
    DatasetConfig(goal=f"g{i}", planted=kind, symbol=sym, n_total=total, seed=i, min_len=4, max_len=10)
    for i, (kind, sym, total) in enumerate(
        [
            ("contains", "a", 250),
            ("ends-with", "b", 352),
            ("odd-count", "c", 336),
            ("contains", "d", 306),
            ("ends-with", "a", 310),
            ("odd-count", "b", 319),
            ("contains", "c", 368),
        ],
        start=1,
    )
)


@dataclass(frozen=True)
class SweepConfig:
    datasets: Sequence[DatasetConfig] = PLANTED_SUITE
    sizes: Sequence[int] = (2,)
    deltas: Sequence = (0,)
    modes: Sequence[str] = ("two-bound",)
    seeds: Sequence[int] = (0,)
    backend: str = "external"
    backend_config: BackendConfig = field(default_factory=BackendConfig)
    regularizers: RegularizerSpec = field(default_factory=RegularizerSpec)
    unknown: str = "reject"
    workers: int = 1

    def validate(self) -> None:
        for name in ("datasets", "sizes", "deltas", "modes", "seeds"):
            if not list(getattr(self, name)):
                raise ValueError(f"sweep needs at least one entry in '{name}'")
        if any(n < 1 for n in self.sizes):
            raise ValueError("sizes must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        data = dict(data)
        if "datasets" in data:
            data["datasets"] = tuple(
                DatasetConfig(**{**d, "goal": str(d["goal"]), "alphabet": tuple(d.get("alphabet", DatasetConfig.alphabet))})
                for d in data["datasets"]
            )
        if "backend_config" in data:
            data["backend_config"] = BackendConfig(**data["backend_config"])
        if "regularizers" in data:
            data["regularizers"] = RegularizerSpec(**data["regularizers"])
        for key in ("sizes", "deltas", "modes", "seeds"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)


@dataclass
class SweepRow:
    goal: str
    mode: str
    states: int
    bound_relax: Fraction
    time_s: float
    f1: Optional[Fraction]
    accepted_count: Optional[int]
    status: str
    seed: int = 0

    def as_csv(self) -> list:
        return [
            self.goal,
            self.mode,
            self.states,
            f"{float(self.bound_relax):.2f}",
            f"{self.time_s:.6f}",
            "" if self.f1 is None else f"{float(self.f1):.6f}",
            "" if self.accepted_count is None else self.accepted_count,
            self.status,
        ]


def _backend(config: SweepConfig):
    if config.backend == "enumerate":
        return EnumerationBackend()
    return ExternalBackend(config.backend_config)


def run_row(config: SweepConfig, dataset: DatasetConfig, mode: str, n: int, delta, seed: int, data=None) -> SweepRow:
    """Generate (or reuse) the dataset, learn, and score one configuration."""
    spec = dataset.gen_spec(seed)
    train, test = generate(spec) if data is None else data
    counts = split_counts(spec)
    est_ratio = Fraction(counts["train_anomaly"], train.size)
    bounds = loosen_bounds(bounds_from_ratio(train, est_ratio), delta, train.size, mode)
    start = time.perf_counter()
    try:
        if mode == "two-bound":
            report = learn_two_bound(train, bounds[0], bounds[1], config.regularizers, _backend(config), start_size=n)
        else:
            bound = bounds[0] if mode == "single-bound-lower" else bounds[1]
            report = learn_single_bound(train, bound, n, mode, config.regularizers, _backend(config))
    except Exception as exc:  # recorded per row, the sweep continues
        logger.warning("row %s/%s/n=%s/delta=%s failed: %s", dataset.goal, mode, n, delta, exc)
        return SweepRow(dataset.goal, mode, n, _ratio(delta), time.perf_counter() - start, None, None,
                        f"error: {type(exc).__name__}", seed)
    elapsed = time.perf_counter() - start
    f1 = evaluate(report.dfa, test, config.unknown).f1 if report.dfa is not None else None
    states = report.dfa.n if report.dfa is not None else n
    return SweepRow(dataset.goal, mode, states, _ratio(delta), elapsed, f1, report.accepted_count, report.status, seed)


def run_sweep(config: SweepConfig) -> list:
    """One row per (dataset, mode, size, delta, seed), in that canonical order."""
    config.validate()
    jobs = [(ds, mode, n, delta, seed)
            for ds in config.datasets for mode in config.modes for n in config.sizes
            for delta in config.deltas for seed in config.seeds]
    cache = {}

    def data_for(ds, seed):
        key = (ds, seed)
        if key not in cache:
            cache[key] = generate(ds.gen_spec(seed))
        return cache[key]

    for ds in config.datasets:
        for seed in config.seeds:
            data_for(ds, seed)
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            return list(pool.map(lambda j: run_row(config, *j, data=data_for(j[0], j[4])), jobs))
    return [run_row(config, *job, data=data_for(job[0], job[4])) for job in jobs]


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()
