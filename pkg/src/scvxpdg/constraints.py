"""Path constraints: nonlinear residuals and first-order rows for the subproblem.

Rows are expressed over the per-node vector ``z = [t_c, s, x(14), u(3)]`` and
encode ``h0 + grad_z @ (z - z_ref) <= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternion as qt
from .dynamics import Q, R, V, W
from .scenario import Scenario, StcParams

N_Z = 19
Z_TC = 0
Z_S = 1
Z_X = slice(2, 16)
Z_U = slice(16, 19)

# state slices shifted into z coordinates
ZR = slice(2 + R.start, 2 + R.stop)
ZV = slice(2 + V.start, 2 + V.stop)
ZQ = slice(2 + Q.start, 2 + Q.stop)


@dataclass(frozen=True)
class LinearizedRow:
    h0: float
    grad_z: np.ndarray

    def value(self, z: np.ndarray, z_ref: np.ndarray) -> float:
        return float(self.h0 + self.grad_z @ (np.asarray(z) - np.asarray(z_ref)))

    @property
    def is_zero(self) -> bool:
        return self.h0 == 0.0 and not np.any(self.grad_z)


@dataclass(frozen=True)
class StcEval:
    g: float
    f: float
    h: float
    active: bool


def pack_z(t_c: float, s: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.concatenate(([t_c, s], x, u))


def stc_h(g: float, f: float) -> float:
    """Complementarity-resolved product ``-min(g, 0) * f``; ``<= 0`` iff ``g >= 0 or f <= 0``."""
    return -min(g, 0.0) * f


def _stc_vector(x: np.ndarray, stc: StcParams) -> np.ndarray:
    return x[R] if stc.kind == "fov" else x[V]


def aoa_stc_eval(vec: np.ndarray, q: np.ndarray, stc: StcParams) -> StcEval:
    """Evaluate the trigger/constraint pair for velocity (q-alpha) or position (fov).

    ``vec`` is the inertial velocity for ``kind == "q_alpha"`` and the inertial
    position for ``kind == "fov"``.
    """
    vec = np.asarray(vec, dtype=float)
    norm = np.linalg.norm(vec)
    g = stc.trigger_threshold - norm
    q = np.asarray(q, dtype=float)
    # divide by |q|^2 so f depends on attitude only, not on quaternion scale
    f = np.cos(np.deg2rad(stc.cone_limit)) * norm + (qt.quat_to_dcm(q) @ vec)[0] / (q @ q)
    return StcEval(g=float(g), f=float(f), h=float(stc_h(g, f)), active=bool(g < 0.0))


def stc_eval_state(x: np.ndarray, stc: StcParams) -> StcEval:
    return aoa_stc_eval(_stc_vector(x, stc), x[Q], stc)


def aoa_stc_row(z_ref: np.ndarray, stc: StcParams) -> LinearizedRow:
    """Linearized STC row; the zero row whenever the trigger is off (g >= 0) at the reference."""
    z_ref = np.asarray(z_ref, dtype=float)
    x = z_ref[Z_X]
    vec, q = _stc_vector(x, stc), x[Q]
    ev = aoa_stc_eval(vec, q, stc)
    grad = np.zeros(N_Z)
    if not ev.active:
        return LinearizedRow(0.0, grad)
    norm = np.linalg.norm(vec)
    unit = vec / norm
    cos_lim = np.cos(np.deg2rad(stc.cone_limit))
    dg_dvec = -unit
    qq = q @ q
    df_dvec = cos_lim * unit + qt.quat_to_dcm(q)[0] / qq
    df_dq = (qt.rotate_to_body_jacobian(q, vec)[0] - 2.0 * (qt.quat_to_dcm(q) @ vec)[0] * q / qq) / qq
    vec_slice = ZR if stc.kind == "fov" else ZV
    # active branch: h = -g * f
    grad[vec_slice] = -(ev.f * dg_dvec + ev.g * df_dvec)
    grad[ZQ] = -ev.g * df_dq
    return LinearizedRow(ev.h, grad)


def thrust_lb_row(u_ref: np.ndarray, T_min: float) -> LinearizedRow:
    """Supporting-hyperplane linearization of ``T_min <= |u|`` about ``u_ref``."""
    u_ref = np.asarray(u_ref, dtype=float)
    norm = np.linalg.norm(u_ref)
    if norm == 0.0:
        raise ValueError("thrust lower-bound row undefined at zero reference thrust")
    grad = np.zeros(N_Z)
    grad[Z_U] = -u_ref / norm
    return LinearizedRow(float(T_min - norm), grad)


RESIDUAL_NAMES = ("mass", "glide_slope", "tilt", "angular_rate", "thrust_max", "gimbal", "thrust_min")


def convex_node_constraints(x: np.ndarray, u: np.ndarray, scenario: Scenario) -> dict[str, float]:
    """Signed residuals (``<= 0`` satisfied) of the per-node path constraints."""
    veh, bc = scenario.vehicle, scenario.boundary
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    r, q, w = x[R], x[Q], x[W]
    T = np.linalg.norm(u)
    return {
        "mass": veh.m_dry - x[0],
        # gamma_gs is the cone half-angle measured from the vertical axis e1
        "glide_slope": np.linalg.norm(r[1:]) / np.tan(np.deg2rad(bc.gamma_gs)) - r[0],
        "tilt": np.cos(np.deg2rad(veh.theta_max)) - 1.0 + 2.0 * (q[2:] @ q[2:]),  # = cos(theta_max) - cos(theta)
        "angular_rate": np.linalg.norm(w) - np.deg2rad(veh.omega_max),
        "thrust_max": T - veh.T_max,
        "gimbal": np.cos(np.deg2rad(veh.delta_max)) * T - u[0],
        "thrust_min": veh.T_min - T,
    }
