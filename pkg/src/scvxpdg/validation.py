"""Post-convergence audit: exact nonlinear propagation under the FOH controls.

The integrator here (adaptive Dormand-Prince 8(5,3)) is deliberately different
from the fixed-step RK4 used by the discretizer, so the two cross-check each
other.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import quaternion as qt
from .constraints import RESIDUAL_NAMES, convex_node_constraints, stc_eval_state
from .discretize import ReferenceTrajectory, node_times
from .dynamics import RocketDynamics
from .scenario import Scenario


class ValidationError(RuntimeError):
    pass


@dataclass
class SampledTrajectory:
    tau: np.ndarray  # normalized times of the samples
    X: np.ndarray    # (len(tau), 14)
    node_index: np.ndarray  # rows of X that sit on the temporal nodes

    @property
    def nodes(self) -> np.ndarray:
        return self.X[self.node_index]


@dataclass
class ValidationReport:
    e_pos: float
    e_att: float  # degrees
    fuel_consumed_pct: float
    burn_time: float
    coast_time: float
    residual_names: tuple = field(default_factory=tuple)
    residuals: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))  # (K, len(names))

    def max_residual(self, name: str | None = None) -> float:
        if name is None:
            return float(np.max(self.residuals))
        return float(np.max(self.residuals[:, self.residual_names.index(name)]))

    def to_dict(self) -> dict:
        return {
            "e_pos": self.e_pos,
            "e_att": self.e_att,
            "fuel_consumed_pct": self.fuel_consumed_pct,
            "burn_time": self.burn_time,
            "coast_time": self.coast_time,
            "max_residuals": {n: self.max_residual(n) for n in self.residual_names},
        }


def propagate_nonlinear(sol: ReferenceTrajectory, scenario: Scenario, tol: float = 1e-10,
                        samples_per_interval: int = 1) -> SampledTrajectory:
    """Integrate ``x' = s f(x, u_FOH(tau))`` from the first node across [0, 1].

    Each subinterval is integrated separately so the kinks of the control signal
    fall on integration boundaries, but the state is carried over continuously.
    """
    if not sol.s > 0:
        raise ValidationError("dilation factor must be positive")
    dyn = RocketDynamics(scenario)
    K = sol.K
    tau_nodes = node_times(K)
    x = sol.X[0].copy()
    taus, states, node_rows = [0.0], [x.copy()], [0]
    for k in range(K - 1):
        t0, t1 = tau_nodes[k], tau_nodes[k + 1]
        u0, u1 = sol.U[k], sol.U[k + 1]

        def rhs(tau, xx, t0=t0, t1=t1, u0=u0, u1=u1):
            lam = (tau - t0) / (t1 - t0)
            return sol.s * dyn.f(xx, (1.0 - lam) * u0 + lam * u1)

        t_eval = np.linspace(t0, t1, samples_per_interval + 1)[1:]
        res = solve_ivp(rhs, (t0, t1), x, method="DOP853", t_eval=t_eval, rtol=tol, atol=tol * 1e-2)
        if not res.success:
            raise ValidationError(f"integration failed on subinterval {k}: {res.message}")
        taus.extend(res.t)
        states.extend(res.y.T)
        x = res.y[:, -1].copy()
        node_rows.append(len(taus) - 1)
    return SampledTrajectory(np.array(taus), np.array(states), np.array(node_rows))


def error_metrics(sol: ReferenceTrajectory, propagated) -> tuple[float, float]:
    """Max node-wise position error and attitude error (degrees)."""
    X_prop = propagated.nodes if isinstance(propagated, SampledTrajectory) else np.asarray(propagated)
    if X_prop.shape != sol.X.shape:
        raise ValueError("propagated states do not match the node grid")
    e_pos = float(np.max(np.linalg.norm(X_prop[:, 1:4] - sol.X[:, 1:4], axis=1)))
    e_att = max(qt.attitude_error(a, b) for a, b in zip(X_prop[:, 7:11], sol.X[:, 7:11]))
    return e_pos, float(np.degrees(e_att))


def node_residuals(sol: ReferenceTrajectory, scenario: Scenario) -> tuple[tuple, np.ndarray]:
    names = RESIDUAL_NAMES + (("stc_h",) if scenario.stc.enabled else ())
    table = np.zeros((sol.K, len(names)))
    for k in range(sol.K):
        res = convex_node_constraints(sol.X[k], sol.U[k], scenario)
        row = [res[n] for n in RESIDUAL_NAMES]
        if scenario.stc.enabled:
            row.append(stc_eval_state(sol.X[k], scenario.stc).h)
        table[k] = row
    return names, table


def fuel_consumed_pct(sol: ReferenceTrajectory, scenario: Scenario) -> float:
    m_ig = scenario.boundary.m_ig
    return float(100.0 * (m_ig - sol.X[-1, 0]) / m_ig)


def audit(sol: ReferenceTrajectory, scenario: Scenario, tol: float = 1e-10) -> ValidationReport:
    e_pos, e_att = error_metrics(sol, propagate_nonlinear(sol, scenario, tol))
    names, table = node_residuals(sol, scenario)
    return ValidationReport(e_pos=e_pos, e_att=e_att, fuel_consumed_pct=fuel_consumed_pct(sol, scenario),
                            burn_time=float(sol.s), coast_time=float(sol.t_c),
                            residual_names=names, residuals=table)
