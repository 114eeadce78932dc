"""Successive convexification driver: initialization, propagate/solve loop, history."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conic import solve_conic
from .discretize import DiscretizationError, ReferenceTrajectory, discretize_all
from .dynamics import N_U, N_X
from .scenario import AlgorithmParams, Scenario
from .subproblem import assemble_subproblem, extract_iterate


class ScvxError(RuntimeError):
    """Subproblem or discretization failure; carries the history recorded so far."""

    def __init__(self, message: str, history: list):
        super().__init__(message)
        self.history = history


@dataclass(frozen=True)
class IterationRecord:
    index: int
    J_vc: float
    J_tr: float
    solve_status: str
    solve_time: float
    objective: float  # -m_K of the iterate
    s: float
    t_c: float
    solver_iters: int = 0


@dataclass
class ConvergedSolution:
    trajectory: ReferenceTrajectory
    history: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def total_solve_time(self) -> float:
        return float(sum(r.solve_time for r in self.history))


@dataclass
class ScvxOptions:
    max_iters: int | None = None  # falls back to scenario.algorithm.max_iters
    init: str | None = None       # "straight_line" | "three_dof"; falls back to the scenario
    initial: ReferenceTrajectory | None = None
    threads: int = 1
    solver_tol: float = 1e-9
    solver_max_iters: int = 100
    dump_dir: Path | None = None
    verbose: bool = False


def straight_line_init(scenario: Scenario) -> ReferenceTrajectory:
    """Linear state interpolation between ignition and landing with gravity-opposing thrust."""
    K = scenario.algorithm.K
    bc, veh = scenario.boundary, scenario.vehicle
    g = np.asarray(scenario.environment.g_I, dtype=float)
    q_id = np.array([1.0, 0.0, 0.0, 0.0])
    x_ig = np.concatenate(([bc.m_ig], bc.r_in, bc.v_in, q_id, np.zeros(3)))
    x_f = np.concatenate(([veh.m_dry], np.zeros(3), [-bc.v_d, 0.0, 0.0], q_id, np.zeros(3)))
    a = (K - 1 - np.arange(K)) / (K - 1)  # weight of the ignition end
    X = a[:, None] * x_ig + (1 - a)[:, None] * x_f
    U = -(a * bc.m_ig + (1 - a) * veh.m_dry)[:, None] * g
    return ReferenceTrajectory(0.0, scenario.algorithm.s_init, X, U)


def convergence_check(J_vc: float, J_tr: float, params: AlgorithmParams) -> bool:
    return J_vc < params.eps_vc and J_tr < params.eps_tr


def initial_reference(scenario: Scenario, mode: str | None = None) -> ReferenceTrajectory:
    mode = mode or scenario.algorithm.init_mode
    if mode in ("straight_line", "straight"):
        return straight_line_init(scenario)
    if mode in ("three_dof", "3dof"):
        from .three_dof import three_dof_init
        return three_dof_init(scenario)
    raise ValueError(f"unknown initialization mode {mode!r}")


def scvx_solve(scenario: Scenario, options: ScvxOptions | None = None) -> ConvergedSolution:
    options = options or ScvxOptions()
    scenario.validate()
    alg = scenario.algorithm
    max_iters = options.max_iters if options.max_iters is not None else alg.max_iters
    ref = options.initial.copy() if options.initial is not None else initial_reference(scenario, options.init)
    if ref.X.shape != (alg.K, N_X) or ref.U.shape != (alg.K, N_U):
        raise ValueError("initial trajectory does not match the scenario's node count")

    history: list[IterationRecord] = []
    for it in range(max_iters):
        try:
            disc = discretize_all(ref, scenario, threads=options.threads)
        except (DiscretizationError, ValueError) as exc:
            raise ScvxError(f"iteration {it}: discretization failed: {exc}", history) from exc
        prog, index_map = assemble_subproblem(ref, disc, scenario)
        if options.dump_dir is not None:
            Path(options.dump_dir).mkdir(parents=True, exist_ok=True)
            prog.dump(Path(options.dump_dir) / f"subproblem_{it:03d}.txt")
        t0 = time.perf_counter()
        sol = solve_conic(prog, tol=options.solver_tol, max_iters=options.solver_max_iters)
        solve_time = time.perf_counter() - t0
        if sol.status != "optimal":
            history.append(IterationRecord(it, float("nan"), float("nan"), sol.status, solve_time,
                                           float("nan"), ref.s, ref.t_c, sol.iters))
            raise ScvxError(f"iteration {it}: subproblem solve ended with status '{sol.status}'", history)
        new_ref, _, J_vc, J_tr = extract_iterate(sol, index_map)
        history.append(IterationRecord(it, J_vc, J_tr, sol.status, solve_time,
                                       float(-new_ref.X[-1, 0]), new_ref.s, new_ref.t_c, sol.iters))
        if options.verbose:
            print(f"iter {it}: J_vc={J_vc:.3e} J_tr={J_tr:.3e} s={new_ref.s:.5f} t_c={new_ref.t_c:.5f} "
                  f"m_K={new_ref.X[-1, 0]:.6f} ipm={sol.iters} t={solve_time:.3f}s")
        ref = new_ref
        if convergence_check(J_vc, J_tr, alg):
            return ConvergedSolution(ref, history, True)
    return ConvergedSolution(ref, history, False)
