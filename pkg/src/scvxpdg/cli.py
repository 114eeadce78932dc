"""Command-line entry point: solve one scenario or time a batch of fixtures.

Exit codes: 0 converged, 2 not converged, 3 input error, 4 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .discretize import ReferenceTrajectory, node_times
from .scenario import FIXTURE_DIR, Scenario, ScenarioError, load_scenario
from .scvx import ConvergedSolution, ScvxError, ScvxOptions, scvx_solve
from .three_dof import ThreeDofInitError
from .validation import ValidationError, audit

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3, 4

TRAJECTORY_COLUMNS = (["k", "t", "m", "r_x", "r_y", "r_z", "v_x", "v_y", "v_z",
                       "q0", "q1", "q2", "q3", "w_x", "w_y", "w_z", "u_x", "u_y", "u_z"])
ITERATION_COLUMNS = ["index", "J_vc", "J_tr", "solve_status", "solve_time", "objective", "s", "t_c",
                     "solver_iters"]
INIT_ALIASES = {"straight": "straight_line", "straight_line": "straight_line",
                "3dof": "three_dof", "three_dof": "three_dof"}
METRICS = ("burn_time", "coast_time", "fuel_pct", "e_pos", "e_att", "iterations")


@dataclass
class RunSummary:
    scenario: str
    features: list
    status: str
    converged: bool
    iterations: int
    burn_time: float | None = None
    coast_time: float | None = None
    fuel_pct: float | None = None
    e_pos: float | None = None
    e_att: float | None = None
    max_residuals: dict = field(default_factory=dict)
    solve_times: list = field(default_factory=list)
    total_solve_time: float = 0.0
    message: str = ""


def feature_flags(scenario: Scenario, init: str | None = None) -> list[str]:
    """Problem-feature tags in the B/SA/EA/ST/FI/3I vocabulary."""
    flags = ["B"]
    mode = scenario.environment.aero_mode
    if mode == "spherical":
        flags.append("SA")
    elif mode == "ellipsoidal":
        flags.append("EA")
    if scenario.stc.enabled:
        flags.append("ST")
    if scenario.boundary.free_ignition:
        flags.append("FI")
    if (init or scenario.algorithm.init_mode) == "three_dof":
        flags.append("3I")
    return flags


def write_trajectory_csv(path: Path, traj: ReferenceTrajectory) -> None:
    tau = node_times(traj.K)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for k in range(traj.K):
            # time measured from the initial state, so coast precedes the burn
            t = traj.t_c + traj.s * tau[k]
            w.writerow([k, repr(float(t))] + [repr(float(v)) for v in traj.X[k]]
                       + [repr(float(v)) for v in traj.U[k]])


def read_trajectory_csv(path) -> ReferenceTrajectory:
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
    X, U = data[:, 2:16], data[:, 16:19]
    t = data[:, 1]
    s = (t[-1] - t[0])
    return ReferenceTrajectory(float(t[0]), float(s), X, U)


def write_iterations_csv(path: Path, history: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ITERATION_COLUMNS)
        for rec in history:
            row = asdict(rec)
            w.writerow([row[c] for c in ITERATION_COLUMNS])


def _summarize(scenario: Scenario, flags, sol: ConvergedSolution | None, history, status, message=""):
    summary = RunSummary(scenario=scenario.name, features=flags, status=status,
                         converged=bool(sol is not None and sol.converged), iterations=len(history),
                         solve_times=[r.solve_time for r in history],
                         total_solve_time=float(sum(r.solve_time for r in history)), message=message)
    if sol is not None:
        report = audit(sol.trajectory, scenario)
        summary.burn_time = report.burn_time
        summary.coast_time = report.coast_time
        summary.fuel_pct = report.fuel_consumed_pct
        summary.e_pos = report.e_pos
        summary.e_att = report.e_att
        summary.max_residuals = {n: report.max_residual(n) for n in report.residual_names}
    return summary


def run_once(scenario: Scenario, options: ScvxOptions):
    """Solve and audit; returns (exit code, summary, solution or None, iteration history)."""
    flags = feature_flags(scenario, options.init)
    try:
        sol = scvx_solve(scenario, options)
    except ScvxError as exc:
        summary = _summarize(scenario, flags, None, exc.history, "solver_failure", str(exc))
        return EXIT_SOLVER, summary, None, exc.history
    except ThreeDofInitError as exc:
        return EXIT_SOLVER, _summarize(scenario, flags, None, [], "init_failure", str(exc)), None, []
    try:
        summary = _summarize(scenario, flags, sol, sol.history,
                             "converged" if sol.converged else "not_converged")
    except ValidationError as exc:
        summary = _summarize(scenario, flags, None, sol.history, "validation_failure", str(exc))
        return EXIT_SOLVER, summary, sol, sol.history
    return (EXIT_OK if sol.converged else EXIT_NOT_CONVERGED), summary, sol, sol.history


def timing_stats(times) -> dict:
    times = list(times)
    return {"min": min(times), "max": max(times), "median": statistics.median(times),
            "std": statistics.pstdev(times) if len(times) > 1 else 0.0}


def metric_spread(summaries) -> dict:
    """Population standard deviation of each trajectory metric across repeats."""
    out = {}
    for name in METRICS:
        vals = [getattr(s, name) for s in summaries]
        if all(v is not None for v in vals):
            # exact arithmetic: identical runs give exactly zero
            out[name] = float(statistics.pstdev(float(v) for v in vals))
    return out


def _options(args) -> ScvxOptions:
    return ScvxOptions(max_iters=args.max_iters, init=INIT_ALIASES[args.init] if args.init else None,
                       threads=args.threads)


def _write_outputs(out_dir: Path, summary: RunSummary, sol, history, extra: dict | None = None):
    out_dir.mkdir(parents=True, exist_ok=True)
    if sol is not None:
        write_trajectory_csv(out_dir / "trajectory.csv", sol.trajectory)
    write_iterations_csv(out_dir / "iterations.csv", history)
    doc = asdict(summary)
    if extra:
        doc.update(extra)
    (out_dir / "summary.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def cmd_solve(args) -> int:
    path = Path(args.scenario)
    try:
        scenario = load_scenario(path)
    except (FileNotFoundError, ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out)
    if args.repeats < 1:
        print("error: --repeats must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    options = _options(args)
    dump_dir = out_dir / "subproblems" if args.dump_subproblems else None

    summaries, sol, code = [], None, EXIT_OK
    for i in range(args.repeats):
        options.dump_dir = dump_dir if i == 0 else None
        code, summary, sol, history = run_once(scenario, options)
        summaries.append(summary)
    extra = None
    if args.repeats > 1:
        extra = {"repeats": args.repeats,
                 "timing": timing_stats(s.total_solve_time for s in summaries),
                 "metric_std": metric_spread(summaries)}
    _write_outputs(out_dir, summaries[-1], sol, history, extra)
    s = summaries[-1]
    if code == EXIT_SOLVER:
        print(f"error: {s.message}", file=sys.stderr)
    print(f"{s.scenario} [{'+'.join(s.features)}]: {s.status} after {s.iterations} iterations; "
          f"solve time {s.total_solve_time:.3f} s")
    if s.burn_time is not None:
        print(f"  burn {s.burn_time:.4f} U_T  coast {s.coast_time:.4f} U_T  fuel {s.fuel_pct:.3f}%  "
              f"e_pos {s.e_pos:.2e} U_L  e_att {s.e_att:.2e} deg")
    return code


def cmd_batch(args) -> int:
    fixture_dir = Path(args.fixture_dir) if args.fixture_dir else FIXTURE_DIR
    paths = sorted(fixture_dir.glob("*.json")) if fixture_dir.is_dir() else []
    if not paths:
        print(f"error: no scenario files in {fixture_dir}", file=sys.stderr)
        return EXIT_INPUT
    if args.repeats < 1:
        print("error: --repeats must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, worst = [], EXIT_OK
    for path in paths:
        try:
            scenario = load_scenario(path)
        except (ScenarioError, OSError) as exc:
            print(f"error: {path.name}: {exc}", file=sys.stderr)
            rows.append({"scenario": path.stem, "status": "input_error"})
            worst = max(worst, EXIT_INPUT)
            continue
        options = _options(args)
        summaries, sol, code = [], None, EXIT_OK
        for _ in range(args.repeats):
            code, summary, sol, history = run_once(scenario, options)
            summaries.append(summary)
        last = summaries[-1]
        _write_outputs(out_dir / scenario.name, last, sol, history,
                       {"repeats": args.repeats, "timing": timing_stats(s.total_solve_time for s in summaries),
                        "metric_std": metric_spread(summaries)})
        row = {"scenario": scenario.name, "features": "+".join(last.features), "status": last.status,
               "iterations": last.iterations}
        for name in ("burn_time", "coast_time", "fuel_pct", "e_pos", "e_att"):
            row[name] = getattr(last, name)
        row.update(timing_stats(s.total_solve_time for s in summaries))
        row["metric_std_max"] = max(metric_spread(summaries).values(), default=0.0)
        rows.append(row)
        worst = max(worst, code)
        print(f"{scenario.name:16s} {last.status:14s} iters {last.iterations:3d}  "
              f"median solve {row['median']:.3f} s")
    columns = ["scenario", "features", "status", "iterations", "burn_time", "coast_time", "fuel_pct",
               "e_pos", "e_att", "min", "max", "median", "std", "metric_std_max"]
    with open(out_dir / "timing.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, restval="")
        w.writeheader()
        w.writerows(rows)
    return worst


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scvxpdg", description="6-DoF powered descent guidance by "
                                "successive convexification")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--init", choices=sorted(INIT_ALIASES), default=None,
                        help="initialization (default: the scenario's init_mode)")
        sp.add_argument("--max-iters", type=int, default=None, help="SCvx iteration cap")
        sp.add_argument("--repeats", type=int, default=1, help="runs per scenario, for timing statistics")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for discretization")

    s = sub.add_parser("solve", help="solve one scenario file")
    s.add_argument("scenario", help="scenario JSON file")
    s.add_argument("-o", "--out", default="out", help="output directory")
    s.add_argument("--dump-subproblems", action="store_true", help="write each conic subproblem")
    common(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("batch", help="solve every scenario in a directory and tabulate timing")
    b.add_argument("fixture_dir", nargs="?", default=None, help="directory of scenario files "
                   "(default: the bundled fixtures)")
    b.add_argument("-o", "--out", default="batch_out", help="output directory")
    common(b)
    b.set_defaults(func=cmd_batch)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
