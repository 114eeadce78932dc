"""First-order-hold discretization of the dilated dynamics.

Each subinterval is propagated independently from its reference node (multiple
shooting), so blocks can be computed in any order or in parallel. Node indices
are zero-based here: node ``k`` sits at ``tau_k = k / (K - 1)`` and subinterval
``k`` spans ``[tau_k, tau_{k+1}]`` for ``k = 0 .. K-2``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .dynamics import RocketDynamics
from .scenario import Scenario


class Dynamics(Protocol):
    n_x: int
    n_u: int

    def f(self, x: np.ndarray, u: np.ndarray) -> np.ndarray: ...

    def jacobians(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


class DiscretizationError(RuntimeError):
    def __init__(self, k: int, message: str):
        super().__init__(f"subinterval {k}: {message}")
        self.k = k


@dataclass
class ReferenceTrajectory:
    t_c: float
    s: float
    X: np.ndarray  # (K, n_x)
    U: np.ndarray  # (K, n_u)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.U = np.asarray(self.U, dtype=float)
        if not self.s > 0:
            raise ValueError("dilation factor must be positive")
        if self.X.shape[0] != self.U.shape[0]:
            raise ValueError("state and control node counts differ")

    @property
    def K(self) -> int:
        return self.X.shape[0]

    def copy(self) -> "ReferenceTrajectory":
        return ReferenceTrajectory(self.t_c, self.s, self.X.copy(), self.U.copy())


@dataclass
class DiscreteDynamics:
    A: np.ndarray   # (K-1, n_x, n_x)
    Bm: np.ndarray  # (K-1, n_x, n_u)
    Bp: np.ndarray  # (K-1, n_x, n_u)
    S: np.ndarray   # (K-1, n_x)
    r: np.ndarray   # (K-1, n_x)
    x_prop_end: np.ndarray  # (K-1, n_x)
    r_quadrature: np.ndarray = field(repr=False, default=None)

    @property
    def n_blocks(self) -> int:
        return self.A.shape[0]

    def defects(self, ref: ReferenceTrajectory) -> np.ndarray:
        """``A x_k + Bm u_k + Bp u_{k+1} + S s + r - x_prop_end`` at the reference."""
        X, U = ref.X, ref.U
        lin = (np.einsum("kij,kj->ki", self.A, X[:-1]) + np.einsum("kij,kj->ki", self.Bm, U[:-1])
               + np.einsum("kij,kj->ki", self.Bp, U[1:]) + self.S * ref.s + self.r)
        return lin - self.x_prop_end


def node_times(K: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, K)


def foh_weights(tau: float, k: int, K: int) -> tuple[float, float]:
    """Interpolation weights (lambda_minus, lambda_plus) of subinterval ``k`` at ``tau``."""
    t0, t1 = k / (K - 1), (k + 1) / (K - 1)
    if not (t0 - 1e-12 <= tau <= t1 + 1e-12):
        raise ValueError(f"tau={tau} outside subinterval {k} [{t0}, {t1}]")
    lam_p = (tau - t0) / (t1 - t0)
    lam_p = min(max(lam_p, 0.0), 1.0)
    return 1.0 - lam_p, lam_p


def foh_control(tau: float, U: np.ndarray) -> np.ndarray:
    """Piecewise-linear control signal through the node controls ``U`` at ``tau`` in [0, 1]."""
    K = U.shape[0]
    k = min(int(np.floor(tau * (K - 1))), K - 2)
    k = max(k, 0)
    lm, lp = foh_weights(tau, k, K)
    return lm * U[k] + lp * U[k + 1]


def normalized_eom(x, u, s: float, scenario: Scenario) -> np.ndarray:
    """Dilated dynamics ``s * f(x, u)`` on the normalized interval."""
    if not s > 0:
        raise ValueError("dilation factor must be positive")
    return s * RocketDynamics(scenario).f(np.asarray(x, dtype=float), np.asarray(u, dtype=float))


def _propagate_block(dyn, x0, u0, u1, s, dtau, substeps, k):
    n, m = dyn.n_x, dyn.n_u
    project = getattr(dyn, "project", None)
    combined = getattr(dyn, "f_and_jacobians", None)
    h = dtau / substeps

    def rhs(sigma, x, Phi):
        # sigma: fraction of the subinterval elapsed, i.e. lambda_plus
        lam_m, lam_p = 1.0 - sigma, sigma
        u = lam_m * u0 + lam_p * u1
        if combined is not None:
            fx, Ac, Bc = combined(x, u)
        else:
            fx = dyn.f(x, u)
            Ac, Bc = dyn.jacobians(x, u)
        A = s * Ac
        B = s * Bc
        rr = -A @ x - B @ u
        rhs_mat = np.empty((n, 2 * m + 2))
        rhs_mat[:, :m] = B * lam_m
        rhs_mat[:, m:2 * m] = B * lam_p
        rhs_mat[:, 2 * m] = fx
        rhs_mat[:, 2 * m + 1] = rr
        try:
            integrand = np.linalg.solve(Phi, rhs_mat)
        except np.linalg.LinAlgError as exc:
            raise DiscretizationError(k, f"singular transition matrix ({exc})") from None
        return s * fx, A @ Phi, integrand

    x = np.array(x0, dtype=float)
    Phi = np.eye(n)
    Iq = np.zeros((n, 2 * m + 2))
    for i in range(substeps):
        sg = i / substeps
        ds = 1.0 / substeps
        k1x, k1P, k1I = rhs(sg, x, Phi)
        k2x, k2P, k2I = rhs(sg + 0.5 * ds, x + 0.5 * h * k1x, Phi + 0.5 * h * k1P)
        k3x, k3P, k3I = rhs(sg + 0.5 * ds, x + 0.5 * h * k2x, Phi + 0.5 * h * k2P)
        k4x, k4P, k4I = rhs(sg + ds, x + h * k3x, Phi + h * k3P)
        x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        Phi = Phi + h / 6.0 * (k1P + 2 * k2P + 2 * k3P + k4P)
        Iq = Iq + h / 6.0 * (k1I + 2 * k2I + 2 * k3I + k4I)
        if project is not None:
            x = project(x)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(Phi))):
            raise DiscretizationError(k, "non-finite values during propagation")
    Ak = Phi
    quad = Ak @ Iq
    Bm, Bp = quad[:, :m], quad[:, m:2 * m]
    S, r_quad = quad[:, 2 * m], quad[:, 2 * m + 1]
    # affine term chosen so the linear map reproduces the shooting endpoint exactly
    r = x - (Ak @ x0 + Bm @ u0 + Bp @ u1 + S * s)
    return Ak, Bm, Bp, S, r, x, r_quad


def discretize_subinterval(k: int, ref: ReferenceTrajectory, scenario: Scenario | None = None,
                           dynamics: Dynamics | None = None, substeps: int | None = None):
    """Discrete block ``(A, Bm, Bp, S, r, x_prop_end, r_quadrature)`` of subinterval ``k``."""
    if dynamics is None:
        dynamics = RocketDynamics(scenario)
    if substeps is None:
        substeps = scenario.algorithm.integrator_substeps if scenario is not None else 15
    K = ref.K
    if not 0 <= k < K - 1:
        raise IndexError(f"subinterval {k} out of range for K={K}")
    return _propagate_block(dynamics, ref.X[k], ref.U[k], ref.U[k + 1], ref.s,
                            1.0 / (K - 1), substeps, k)


def discretize_all(ref: ReferenceTrajectory, scenario: Scenario | None = None,
                   dynamics: Dynamics | None = None, substeps: int | None = None,
                   threads: int = 1) -> DiscreteDynamics:
    if dynamics is None:
        dynamics = RocketDynamics(scenario)
    ks = range(ref.K - 1)

    def one(k):
        return discretize_subinterval(k, ref, scenario, dynamics, substeps)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(one, ks))
    else:
        blocks = [one(k) for k in ks]
    parts = [np.array(p) for p in zip(*blocks)]
    return DiscreteDynamics(A=parts[0], Bm=parts[1], Bp=parts[2], S=parts[3], r=parts[4],
                            x_prop_end=parts[5], r_quadrature=parts[6])
