"""Run HiGHS on an LP file and write the plain solution format.

Meant to be invoked as a subprocess by the external backend::

    python -m dfa_anomaly.highs_runner model.lp model.sol --time-limit 100 --seed 0

Exit status is 0 whenever a solution file was written (including
infeasible and limit-reached), 1 on solver errors.
"""

from __future__ import annotations

import argparse
import sys


def solve_lp_file(lp_path: str, time_limit: float, seed: int) -> tuple:
    """Return (status token, objective or None, [(name, value)], work dict)."""
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    h.setOptionValue("time_limit", float(time_limit))
    h.setOptionValue("random_seed", int(seed))
    if h.readModel(lp_path) == highspy.HighsStatus.kError:
        raise RuntimeError(f"HiGHS could not read {lp_path}")
    h.run()
    status = h.getModelStatus()
    ms = highspy.HighsModelStatus
    info = h.getInfo()
    work = {"nodes": int(info.mip_node_count), "iterations": int(info.simplex_iteration_count)}
    has_sol = info.primal_solution_status == 2  # kSolutionStatusFeasible
    if status == ms.kOptimal:
        token = "OPTIMAL"
    elif status in (ms.kInfeasible, ms.kUnboundedOrInfeasible):
        return "INFEASIBLE", None, [], work
    elif status == ms.kUnbounded:
        return "UNBOUNDED", None, [], work
    elif status in (ms.kTimeLimit, ms.kIterationLimit, ms.kSolutionLimit, ms.kInterrupt):
        if not has_sol:
            return "LIMIT", None, [], work
        token = "FEASIBLE"
    else:
        raise RuntimeError(f"HiGHS ended with status {h.modelStatusToString(status)}")
    names = h.getLp().col_names_
    values = h.getSolution().col_value
    return token, info.objective_function_value, list(zip(names, values)), work


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m dfa_anomaly.highs_runner", description=__doc__.splitlines()[0])
    parser.add_argument("lp_path")
    parser.add_argument("sol_path")
    parser.add_argument("--time-limit", type=float, default=100.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    try:
        token, objective, values, work = solve_lp_file(args.lp_path, args.time_limit, args.seed)
    except Exception as exc:  # reported through the exit code
        print(f"highs_runner: {exc}", file=sys.stderr)
        return 1
    lines = [token]
    if objective is not None:
        lines.append(f"objective {objective!r}")
    lines.extend(f"{name} {round(v) if abs(v - round(v)) < 1e-9 else v!r}" for name, v in values)
    with open(args.sol_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    for key, value in work.items():
        print(f"work {key} {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
