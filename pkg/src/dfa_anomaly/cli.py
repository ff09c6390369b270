"""Command-line interface: learn, export-lp, eval, gen, sweep.

Exit codes: 0 success, 1 backend error, 2 usage or input error,
3 no DFA exists (within the searched sizes), 4 solver work limit reached
before an answer.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .automata import DotOptions, Dfa, read_sample, to_dot, write_sample
from .datagen import PLANTED_FAMILIES, DegeneratePlantedDfaError, GenSpec, format_labels, generate, parse_labels, planted_detector
from .encoder import MODES, EncodingError, EncodingSpec, RegularizerSpec, encode
from .eval import SweepConfig, evaluate, rows_to_csv, run_sweep
from .learner import FOUND, NO_DFA, NO_DFA_WITHIN_LIMIT, UNDECIDED, learn_single_bound, learn_two_bound
from .milp import write_lp
from .prefix_tree import EmptySampleError
from .solver import DEFAULT_ENUMERATION_BUDGET, DEFAULT_TIME_LIMIT, BackendConfig, BackendError, EnumerationBackend, ExternalBackend

logger = logging.getLogger("dfa_anomaly")

EXIT_OK = 0
EXIT_BACKEND = 1
EXIT_USAGE = 2
EXIT_NO_DFA = 3
EXIT_LIMIT = 4

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return value


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list:
    return [x.strip() for x in text.split(",") if x.strip()]


def _fraction_list(text: str) -> list:
    return [_fraction(x) for x in _str_list(text)]


# shared option groups


def _add_backend_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("backend")
    g.add_argument("--backend", choices=("external", "enumerate"), default="external")
    g.add_argument("--backend-cmd", default=None,
                   help="solver command template, or 'highs' / 'cbc' (default: highs if installed)")
    g.add_argument("--solution-format", choices=("auto", "cbc", "plain"), default="auto")
    g.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT, help="seconds per solve (default 100)")
    g.add_argument("--budget", type=int, default=DEFAULT_ENUMERATION_BUDGET, help="enumeration backend candidate budget")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)


def _add_regularizer_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("regularizers (a bare flag means weight 1)")
    for name in ("sink", "selfloop", "parallel"):
        g.add_argument(f"--lambda-{name}", type=_fraction, nargs="?", const=Fraction(1), default=Fraction(0))


def _add_problem_args(p: argparse.ArgumentParser, states_required: bool = False) -> None:
    p.add_argument("--sample", required=True, help="sample file, one word per line")
    p.add_argument("--mode", choices=MODES, default="two-bound")
    p.add_argument("--lower", type=int)
    p.add_argument("--upper", type=int)
    p.add_argument("--states", type=int, required=states_required, help="number of states n")


def _make_backend(args):
    if args.backend == "enumerate":
        return EnumerationBackend(args.budget)
    kwargs = {"time_limit": args.time_limit, "seed": args.seed, "solution_format": args.solution_format}
    if args.backend_cmd:
        kwargs["command"] = args.backend_cmd
    return ExternalBackend(BackendConfig(**kwargs))


def _regularizers(args) -> RegularizerSpec:
    return RegularizerSpec(args.lambda_sink, args.lambda_selfloop, args.lambda_parallel)


def _check_bounds(args) -> None:
    if args.mode == "two-bound":
        if args.lower is None or args.upper is None:
            raise UsageError("two-bound mode needs --lower and --upper")
    elif args.mode == "single-bound-lower":
        if args.lower is None or args.upper is not None:
            raise UsageError("single-bound-lower mode takes --lower only")
    elif args.upper is None or args.lower is not None:
        raise UsageError("single-bound-upper mode takes --upper only")


def _read_sample(path):
    try:
        return read_sample(path)
    except OSError as exc:
        raise UsageError(f"cannot read sample: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"bad sample file {path}: {exc}") from None


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


# subcommands


def cmd_learn(args) -> int:
    _check_bounds(args)
    if args.mode == "two-bound":
        if args.states is not None:
            raise UsageError("--states is for single-bound modes; use --start-size / --max-size with two-bound")
    else:
        if args.states is None:
            raise UsageError(f"{args.mode} needs --states")
        if args.start_size is not None or args.max_size is not None:
            raise UsageError("--start-size / --max-size only apply to two-bound mode")
    if args.states is not None and args.states < 1:
        raise UsageError("--states must be >= 1")
    sample = _read_sample(args.sample)
    reg = _regularizers(args)
    backend = _make_backend(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.mode == "two-bound":
        report = learn_two_bound(sample, args.lower, args.upper, reg, backend,
                                 start_size=args.start_size or 1, max_size=args.max_size)
    else:
        bound = args.lower if args.mode == "single-bound-lower" else args.upper
        report = learn_single_bound(sample, bound, args.states, args.mode, reg, backend)

    _write_json(out / "report.json", report.to_dict())
    if report.dfa is not None:
        (out / "dfa.json").write_text(report.dfa.to_json())
        (out / "dfa.dot").write_text(to_dot(report.dfa, DotOptions(omit_self_loops=args.dot_omit_self_loops)))
    else:
        for name in ("dfa.json", "dfa.dot"):
            stale = out / name
            if stale.exists():
                stale.unlink()

    if report.status == FOUND:
        extra = f" penalty={report.penalty_value}" if reg.enabled else ""
        print(f"{report.status}: {report.dfa.n} states, accepts {report.accepted_count}/{sample.size}{extra}")
        return EXIT_OK
    tried = ",".join(str(a.n) for a in report.sizes_tried)
    print(f"{report.status} (sizes tried: {tried or 'none'})")
    if report.status in (NO_DFA, NO_DFA_WITHIN_LIMIT):
        return EXIT_NO_DFA
    assert report.status == UNDECIDED
    return EXIT_LIMIT


def cmd_export_lp(args) -> int:
    _check_bounds(args)
    if args.states < 1:
        raise UsageError("--states must be >= 1")
    sample = _read_sample(args.sample)
    spec = EncodingSpec(args.states, args.mode, args.lower, args.upper, _regularizers(args))
    text = write_lp(encode(sample, spec))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        dfa = Dfa.from_json(Path(args.dfa).read_text())
        test = parse_labels(Path(args.labels).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load inputs: {exc}") from None
    metrics = evaluate(dfa, test, args.unknown)
    result = metrics.to_dict()
    print(f"f1={result['f1']:.6f} precision={result['precision']:.6f} recall={result['recall']:.6f} "
          f"tp={metrics.tp} fp={metrics.fp} tn={metrics.tn} fn={metrics.fn}")
    if args.out:
        _write_json(Path(args.out), result)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.planted_dfa:
        planted = Dfa.from_json(Path(args.planted_dfa).read_text())
    else:
        planted = planted_detector(args.planted, _str_list(args.alphabet), args.symbol)
    spec = GenSpec(planted, args.n_total, args.ratio, args.min_len, args.max_len, seed=args.seed)
    train, test = generate(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_sample(train, out / "train.txt")
    (out / "test.tsv").write_text(format_labels(test))
    (out / "planted.json").write_text(planted.to_json())
    print(f"train: {train.size} words ({len(train)} unique), test: {len(test)} labelled words -> {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read sweep config: {exc}") from None
    for key in ("sizes", "deltas", "modes", "seeds"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    data.setdefault("backend", args.backend)
    data.setdefault("workers", args.workers)
    if args.backend == "external" and "backend_config" not in data:
        cfg = {"time_limit": args.time_limit, "seed": args.seed, "solution_format": args.solution_format}
        if args.backend_cmd:
            cfg["command"] = args.backend_cmd
        data["backend_config"] = cfg
    data.setdefault("regularizers", {
        "lambda_sink": args.lambda_sink, "lambda_selfloop": args.lambda_selfloop, "lambda_parallel": args.lambda_parallel,
    })
    try:
        config = SweepConfig.from_dict(data)
        config.validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    for mode in config.modes:
        if mode not in MODES:
            raise UsageError(f"unknown mode {mode!r}")
    text = rows_to_csv(run_sweep(config))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"{text.count(chr(10)) - 1} rows -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dfa-anomaly", description="Learn minimal DFAs as anomaly detectors via MILP.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a DFA from a sample")
    _add_problem_args(p)
    p.add_argument("--start-size", type=int, help="two-bound: first size to try (default 1)")
    p.add_argument("--max-size", type=int, help="two-bound: give up after this size")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--dot-omit-self-loops", action="store_true")
    _add_regularizer_args(p)
    _add_backend_args(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("export-lp", help="write the MILP for one size without solving")
    _add_problem_args(p, states_required=True)
    _add_regularizer_args(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("eval", help="score a DFA on a labelled test file")
    p.add_argument("--dfa", required=True)
    p.add_argument("--labels", required=True, help="'<anomaly|normal>\\t<word>' per line")
    p.add_argument("--unknown", choices=("error", "reject"), default="error",
                   help="words with symbols outside the DFA alphabet: raise, or predict normal")
    p.add_argument("--out", help="write metrics JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="generate a planted-model dataset")
    p.add_argument("--planted", choices=sorted(PLANTED_FAMILIES), default="contains")
    p.add_argument("--planted-dfa", help="planted DFA JSON (overrides --planted)")
    p.add_argument("--alphabet", default="a,b,c,d")
    p.add_argument("--symbol", default="a")
    p.add_argument("--n-total", type=int, default=250)
    p.add_argument("--ratio", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--min-len", type=int, default=4)
    p.add_argument("--max-len", type=int, default=10)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="run a size / bound-loosening sweep and write CSV")
    p.add_argument("--config", help="JSON sweep config (datasets, sizes, deltas, modes, seeds, ...)")
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--deltas", type=_fraction_list)
    p.add_argument("--modes", type=_str_list)
    p.add_argument("--seeds", type=_int_list)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_regularizer_args(p)
    _add_backend_args(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (EncodingError, EmptySampleError, DegeneratePlantedDfaError) as exc:
        print(f"dfa-anomaly: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        size = f" (n={exc.size})" if exc.size is not None else ""
        print(f"dfa-anomaly: backend error{size}: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except ValueError as exc:
        print(f"dfa-anomaly: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
