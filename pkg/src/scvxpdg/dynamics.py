"""Nonlinear 6-DoF rigid-body rocket dynamics with aerodynamics.

State layout (14): ``[m, r_I(3), v_I(3), q_BI(4), w_B(3)]``; control (3): body-frame
thrust ``T_B``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternion as qt
from .scenario import EnvironmentParams, Scenario

N_X = 14
N_U = 3

M = 0
R = slice(1, 4)
V = slice(4, 7)
Q = slice(7, 11)
W = slice(11, 14)


@dataclass(frozen=True)
class State:
    m: float
    r_I: np.ndarray
    v_I: np.ndarray
    q_BI: np.ndarray
    w_B: np.ndarray

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("mass must be positive")
        if abs(np.linalg.norm(self.q_BI) - 1.0) > 1e-6:
            raise ValueError("attitude quaternion must have unit norm")

    def to_vector(self) -> np.ndarray:
        return np.concatenate(([self.m], self.r_I, self.v_I, self.q_BI, self.w_B))

    @classmethod
    def from_vector(cls, x) -> "State":
        x = np.asarray(x, dtype=float)
        return cls(float(x[M]), x[R].copy(), x[V].copy(), x[Q].copy(), x[W].copy())


def aero_force_body(v_I: np.ndarray, q: np.ndarray, env: EnvironmentParams) -> np.ndarray:
    """Aerodynamic force in body axes, ``-0.5 rho |v| S_A C_A C_BI(q) v_I``."""
    if env.aero_mode == "none":
        return np.zeros(3)
    speed = np.linalg.norm(v_I)
    if speed == 0.0:
        return np.zeros(3)
    v_B = qt.quat_to_dcm(q) @ v_I
    return -0.5 * env.rho * env.S_A * speed * (env.C_A_matrix @ v_B)


class RocketDynamics:
    """Continuous-time equations of motion bound to one scenario.

    This is the production instance of the dynamics interface consumed by the
    discretizer: ``f(x, u)``, ``jacobians(x, u)`` and ``project(x)``.
    """

    n_x = N_X
    n_u = N_U

    def __init__(self, scenario: Scenario):
        veh, env = scenario.vehicle, scenario.environment
        self.env = env
        self.alpha_m = veh.alpha_m
        self.beta_m = self.alpha_m * env.P_amb * veh.A_noz
        self.g_I = np.asarray(env.g_I, dtype=float)
        self.J = np.asarray(veh.J_B, dtype=float)
        self.J_inv = np.linalg.inv(self.J)
        self.r_T = np.asarray(veh.r_T_B, dtype=float)
        self.r_cp = np.asarray(veh.r_cp_B, dtype=float)
        self.aero = env.aero_mode != "none"
        self.c_aero = 0.5 * env.rho * env.S_A
        self.C_A = env.C_A_matrix

    def _aero(self, v, C_BI):
        if not self.aero:
            return np.zeros(3)
        speed = np.linalg.norm(v)
        return -self.c_aero * speed * (self.C_A @ (C_BI @ v))

    def f(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        m, v, q, w = x[M], x[V], x[Q], x[W]
        if not m > 0:
            raise ValueError(f"nonpositive mass {m!r}")
        C_BI = qt.quat_to_dcm(q)
        A_B = self._aero(v, C_BI)
        dx = np.empty(N_X)
        dx[M] = -self.alpha_m * np.linalg.norm(u) - self.beta_m
        dx[R] = v
        dx[V] = C_BI.T @ (u + A_B) / m + self.g_I
        dx[Q] = 0.5 * qt.omega_matrix(w) @ q
        dx[W] = self.J_inv @ (qt.cross(self.r_T, u) + qt.cross(self.r_cp, A_B)
                              - qt.cross(w, self.J @ w))
        return dx

    def jacobians(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Analytic (df/dx, df/du)."""
        _, A, B = self.f_and_jacobians(x, u)
        return A, B

    def f_and_jacobians(self, x: np.ndarray, u: np.ndarray):
        """``(f, df/dx, df/du)`` sharing the rotation and aerodynamic terms."""
        m, v, q, w = x[M], x[V], x[Q], x[W]
        if not m > 0:
            raise ValueError(f"nonpositive mass {m!r}")
        T_norm = np.linalg.norm(u)
        if T_norm == 0.0:
            raise ValueError("thrust Jacobian undefined at zero thrust")
        C_BI = qt.quat_to_dcm(q)
        C_IB = C_BI.T

        A_B = np.zeros(3)
        dA_dv = np.zeros((3, 3))
        dA_dq = np.zeros((3, 4))
        if self.aero:
            speed = np.linalg.norm(v)
            if speed > 0.0:
                v_B = C_BI @ v
                A_B = -self.c_aero * speed * (self.C_A @ v_B)
                dA_dv = -self.c_aero * (np.outer(self.C_A @ v_B, v) / speed + speed * self.C_A @ C_BI)
                dA_dq = -self.c_aero * speed * self.C_A @ qt.rotate_to_body_jacobian(q, v)

        A = np.zeros((N_X, N_X))
        B = np.zeros((N_X, N_U))

        B[M] = -self.alpha_m * u / T_norm

        A[R, V] = np.eye(3)

        F_B = u + A_B
        A[V, M] = -C_IB @ F_B / m ** 2
        A[V, V] = C_IB @ dA_dv / m
        A[V, Q] = (qt.rotate_to_inertial_jacobian(q, F_B) + C_IB @ dA_dq) / m
        B[V] = C_IB / m

        A[Q, Q] = 0.5 * qt.omega_matrix(w)
        A[Q, W] = 0.5 * qt.xi_matrix(q)

        r_cp_x = qt.skew(self.r_cp)
        A[W, V] = self.J_inv @ r_cp_x @ dA_dv
        A[W, Q] = self.J_inv @ r_cp_x @ dA_dq
        A[W, W] = self.J_inv @ (qt.skew(self.J @ w) - qt.skew(w) @ self.J)
        B[W] = self.J_inv @ qt.skew(self.r_T)

        dx = np.empty(N_X)
        dx[M] = -self.alpha_m * T_norm - self.beta_m
        dx[R] = v
        dx[V] = C_IB @ F_B / m + self.g_I
        dx[Q] = 0.5 * qt.omega_matrix(w) @ q
        dx[W] = self.J_inv @ (qt.cross(self.r_T, u) + qt.cross(self.r_cp, A_B) - qt.cross(w, self.J @ w))
        return dx, A, B

    def project(self, x: np.ndarray) -> np.ndarray:
        """Renormalize the attitude quaternion in place and return ``x``."""
        x[Q] /= np.linalg.norm(x[Q])
        return x


def eom(x, u, scenario: Scenario) -> np.ndarray:
    """State derivative of the 6-DoF model; accepts a :class:`State` or a 14-vector."""
    if isinstance(x, State):
        x = x.to_vector()
    return RocketDynamics(scenario).f(np.asarray(x, dtype=float), np.asarray(u, dtype=float))


def eom_jacobians(x, u, scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, State):
        x = x.to_vector()
    return RocketDynamics(scenario).jacobians(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
