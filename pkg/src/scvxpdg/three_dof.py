"""Convex 3-DoF minimum-fuel initializer lifted to a 6-DoF reference.

The point-mass problem uses the log-mass change of variables ``z = ln m``,
``u = T / m``, ``sigma = Gamma / m`` so that the dynamics are linear and the
relaxed thrust bound ``|u| <= sigma`` is a second-order cone. The mass-dependent
bounds on ``sigma`` are expanded about the extreme mass-depletion profile (second
order below, first order above) so both are conservative.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import quaternion as qt
from .conic import ConicProgram, NonNeg, SecondOrder, Zero, solve_conic
from .discretize import ReferenceTrajectory, discretize_all
from .dynamics import N_X
from .scenario import Scenario

E1 = np.array([1.0, 0.0, 0.0])


class ThreeDofInitError(RuntimeError):
    pass


class PointMassDynamics:
    """Linear dynamics of ``[z, r, v]`` under ``[u, sigma]``: ``z' = -alpha sigma, r' = v, v' = u + g``."""

    n_x = 7
    n_u = 4

    def __init__(self, alpha_m: float, g_I):
        self.g = np.asarray(g_I, dtype=float)
        A = np.zeros((7, 7))
        A[1:4, 4:7] = np.eye(3)
        B = np.zeros((7, 4))
        B[0, 3] = -alpha_m
        B[4:7, 0:3] = np.eye(3)
        self.A, self.B = A, B
        self.c = np.concatenate(([0.0, 0.0, 0.0, 0.0], self.g))

    def f(self, x, u):
        return self.A @ x + self.B @ u + self.c

    def jacobians(self, x, u):
        return self.A, self.B


def _solve_fixed_time(scenario: Scenario, s: float, tol: float = 1e-8):
    """Minimum-fuel 3-DoF solution for burn time ``s``; None when infeasible."""
    K = scenario.algorithm.K
    veh, bc = scenario.vehicle, scenario.boundary
    alpha = veh.alpha_m
    dyn = PointMassDynamics(alpha, scenario.environment.g_I)
    dummy = ReferenceTrajectory(0.0, s, np.zeros((K, 7)), np.zeros((K, 4)))
    disc = discretize_all(dummy, dynamics=dyn, substeps=scenario.algorithm.integrator_substeps)

    nx, nu = 7, 4
    n = K * (nx + nu)

    def xi(k):
        return np.arange(k * nx, (k + 1) * nx)

    def ui(k):
        return K * nx + np.arange(k * nu, (k + 1) * nu)

    rows, cols, vals, b, cones = [], [], [], [], []
    m = 0

    def add(cone, r, c, v, rhs):
        nonlocal m
        rows.append(np.asarray(r) + m)
        cols.append(np.asarray(c))
        vals.append(np.asarray(v, dtype=float))
        b.append(np.atleast_1d(np.asarray(rhs, dtype=float)))
        cones.append(cone)
        m += cone.dim

    eye = np.eye(nx)
    for k in range(K - 1):
        mats = [(eye, xi(k + 1)), (-disc.A[k], xi(k)), (-disc.Bm[k], ui(k)), (-disc.Bp[k], ui(k + 1))]
        r_, c_, v_ = [], [], []
        for mat, idx in mats:
            rr, cc = np.nonzero(mat)
            r_.append(rr)
            c_.append(idx[cc])
            v_.append(mat[rr, cc])
        add(Zero(nx), np.concatenate(r_), np.concatenate(c_), np.concatenate(v_), disc.S[k] * s + disc.r[k])
    x0 = np.concatenate(([np.log(bc.m_ig)], bc.r_in, bc.v_in))
    add(Zero(7), np.arange(7), xi(0), np.ones(7), x0)
    add(Zero(6), np.arange(6), xi(K - 1)[1:], np.ones(6), np.concatenate((np.zeros(3), [-bc.v_d, 0, 0])))

    t = np.linspace(0.0, s, K)
    m_low = np.maximum(bc.m_ig - alpha * veh.T_max * t, veh.m_dry)
    z0 = np.log(m_low)
    z_hi = np.log(np.maximum(bc.m_ig - alpha * veh.T_min * t, veh.m_dry))
    tan_gs = np.tan(np.deg2rad(bc.gamma_gs))
    for k in range(K):
        zk, uk = xi(k)[0], ui(k)
        e0 = np.exp(-z0[k])
        # sigma >= a (1 - d + d^2 / 2) with a = T_min e^{-z0}, d = z - z0 >= 0; this upper-bounds
        # a e^{-d}, so it is conservative. As a rotated cone: d^2 <= w, w = 2 sigma / a - 2 + 2 d,
        # i.e. |(2 d, w - 1)| <= w + 1.
        a = veh.T_min * e0
        add(SecondOrder(3), [0, 0, 1, 2, 2], [uk[3], zk, zk, uk[3], zk],
            [-2.0 / a, -2.0, -2.0, -2.0 / a, -2.0], [-1.0 - 2 * z0[k], -2 * z0[k], -3.0 - 2 * z0[k]])
        # sigma <= T_max e^{-z0} (1 - (z - z0)): the tangent lies below the convex e^{-z}
        add(NonNeg(1), [0, 0], [uk[3], zk], [1.0, veh.T_max * e0], [veh.T_max * e0 * (1 + z0[k])])
        # z0 <= z <= z_hi, z >= ln m_dry
        add(NonNeg(1), [0], [zk], [-1.0], [-max(z0[k], np.log(veh.m_dry))])
        add(NonNeg(1), [0], [zk], [1.0], [z_hi[k]])
        # |u| <= sigma
        add(SecondOrder(4), [0, 1, 2, 3], [uk[3], uk[0], uk[1], uk[2]], [-1.0, -1.0, -1.0, -1.0], np.zeros(4))
        if k < K - 1:
            rk = xi(k)[1:4]
            add(SecondOrder(3), [0, 1, 2], rk, [-tan_gs, -1.0, -1.0], np.zeros(3))

    c = np.zeros(n)
    c[xi(K - 1)[0]] = -1.0  # maximize final log-mass
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, n))
    prog = ConicProgram(c, A, np.concatenate(b), cones)
    sol = solve_conic(prog, tol=tol)
    if sol.status != "optimal":
        return None
    X = sol.x[:K * nx].reshape(K, nx)
    U = sol.x[K * nx:].reshape(K, nu)
    return X, U


def burn_time_grid(s_init: float, n: int = 7) -> np.ndarray:
    return np.linspace(0.5 * s_init, 2.0 * s_init, n)


def solve_point_mass(scenario: Scenario, grid=None):
    """Best (s, X, U) over the burn-time grid; raises when every candidate is infeasible."""
    grid = burn_time_grid(scenario.algorithm.s_init) if grid is None else np.atleast_1d(grid)
    best = None
    for s in grid:
        res = _solve_fixed_time(scenario, float(s))
        if res is None:
            continue
        X, U = res
        if best is None or X[-1, 0] > best[1][-1, 0]:
            best = (float(s), X, U)
    if best is None:
        raise ThreeDofInitError("3-DoF initialization is infeasible over the burn-time grid; "
                                "use the straight-line initialization instead")
    return best


def lift_to_six_dof(scenario: Scenario, s: float, X3: np.ndarray, U3: np.ndarray) -> ReferenceTrajectory:
    K = X3.shape[0]
    mass = np.maximum(np.exp(X3[:, 0]), scenario.vehicle.m_dry)
    u_norm = np.linalg.norm(U3[:, :3], axis=1)
    # the relaxation |u| <= sigma can be slack at isolated nodes, where u carries no direction
    tight = np.flatnonzero(u_norm >= 0.5 * U3[:, 3])
    X = np.zeros((K, N_X))
    U = np.zeros((K, 3))
    X[:, 0] = mass
    X[:, 1:7] = X3[:, 1:7]
    for k in range(K):
        j = tight[np.argmin(np.abs(tight - k))] if tight.size else k
        direction = U3[j, :3] / u_norm[j] if u_norm[j] > 0 else E1
        X[k, 7:11] = qt.minimal_rotation(E1, direction)
        U[k] = max(mass[k] * U3[k, 3], scenario.vehicle.T_min) * E1
    dt = s / (K - 1)
    for k in range(K - 1):
        q, q_next = X[k, 7:11], X[k + 1, 7:11]
        qdot = (q_next - q) / dt
        # q' = 0.5 Xi(q) w with orthonormal columns of Xi for unit q
        X[k, 11:14] = 2.0 * qt.xi_matrix(q).T @ qdot
    X[K - 1, 11:14] = X[K - 2, 11:14]
    return ReferenceTrajectory(0.0, s, X, U)


def three_dof_init(scenario: Scenario, grid=None) -> ReferenceTrajectory:
    s, X3, U3 = solve_point_mass(scenario, grid)
    return lift_to_six_dof(scenario, s, X3, U3)
