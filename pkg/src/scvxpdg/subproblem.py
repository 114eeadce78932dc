"""Assembly of the convexified subproblem into a standard-form cone program.

Decision vector layout (all absolute values, not deviations)::

    [t_c, s, x_0 .. x_{K-1}, u_0 .. u_{K-1}, nu+_0 .. nu+_{K-2}, nu-_0 .. nu-_{K-2}, eta_0 .. eta_{K-1}]

``nu = nu+ - nu-`` is the virtual control on each subinterval and ``eta_k`` bounds
the trust-region penalty ``dz_k' W dz_k`` of node ``k`` through a rotated cone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .conic import ConicProgram, ConicSolution, NonNeg, SecondOrder, Zero
from .constraints import N_Z, aoa_stc_row, pack_z, thrust_lb_row
from .discretize import DiscreteDynamics, ReferenceTrajectory
from .dynamics import N_U, N_X, M, Q, R, V, W
from .scenario import Scenario


class SubproblemError(RuntimeError):
    pass


@dataclass
class SubproblemIndexMap:
    K: int
    t_c: int
    s: int
    x0: int
    u0: int
    nu_p0: int
    nu_m0: int
    eta0: int
    n: int
    reference: ReferenceTrajectory
    w_nu: float
    W_tr: np.ndarray  # diagonal, length N_Z

    @classmethod
    def build(cls, K: int, reference: ReferenceTrajectory, w_nu: float, W_tr: np.ndarray):
        x0 = 2
        u0 = x0 + K * N_X
        nu_p0 = u0 + K * N_U
        nu_m0 = nu_p0 + (K - 1) * N_X
        eta0 = nu_m0 + (K - 1) * N_X
        return cls(K, 0, 1, x0, u0, nu_p0, nu_m0, eta0, eta0 + K, reference, float(w_nu),
                   np.asarray(W_tr, dtype=float))

    def x(self, k: int) -> np.ndarray:
        return np.arange(self.x0 + k * N_X, self.x0 + (k + 1) * N_X)

    def u(self, k: int) -> np.ndarray:
        return np.arange(self.u0 + k * N_U, self.u0 + (k + 1) * N_U)

    def nu_p(self, k: int) -> np.ndarray:
        return np.arange(self.nu_p0 + k * N_X, self.nu_p0 + (k + 1) * N_X)

    def nu_m(self, k: int) -> np.ndarray:
        return np.arange(self.nu_m0 + k * N_X, self.nu_m0 + (k + 1) * N_X)

    def z(self, k: int) -> np.ndarray:
        """Indices of the per-node vector ``[t_c, s, x_k, u_k]``."""
        return np.concatenate(([self.t_c, self.s], self.x(k), self.u(k)))

    def pack(self, ref: ReferenceTrajectory, nu: np.ndarray | None = None,
             eta: np.ndarray | None = None) -> np.ndarray:
        K = self.K
        if ref.K != K:
            raise ValueError(f"trajectory has {ref.K} nodes, map expects {K}")
        out = np.zeros(self.n)
        out[self.t_c] = ref.t_c
        out[self.s] = ref.s
        out[self.x0:self.u0] = ref.X.ravel()
        out[self.u0:self.nu_p0] = ref.U.ravel()
        if nu is not None:
            nu = np.asarray(nu, dtype=float).reshape(K - 1, N_X)
            out[self.nu_p0:self.nu_m0] = np.maximum(nu, 0.0).ravel()
            out[self.nu_m0:self.eta0] = np.maximum(-nu, 0.0).ravel()
        if eta is not None:
            out[self.eta0:] = eta
        return out

    def unpack(self, vec: np.ndarray):
        """(ReferenceTrajectory without renormalization, nu (K-1, 14), eta (K,))."""
        K = self.K
        vec = np.asarray(vec, dtype=float)
        X = vec[self.x0:self.u0].reshape(K, N_X).copy()
        U = vec[self.u0:self.nu_p0].reshape(K, N_U).copy()
        nu = (vec[self.nu_p0:self.nu_m0] - vec[self.nu_m0:self.eta0]).reshape(K - 1, N_X)
        traj = ReferenceTrajectory(float(vec[self.t_c]), float(vec[self.s]), X, U)
        return traj, nu, vec[self.eta0:].copy()


class _Builder:
    """Accumulates constraint rows cone by cone (``A x + s = b``)."""

    def __init__(self, n: int):
        self.n = n
        self.rows, self.cols, self.vals, self.b = [], [], [], []
        self.cones: list = []
        self.m = 0

    def add(self, cone, rows, cols, vals, b):
        rows = np.asarray(rows, dtype=np.int64)
        self.rows.append(rows + self.m)
        self.cols.append(np.asarray(cols, dtype=np.int64))
        self.vals.append(np.asarray(vals, dtype=float))
        self.b.append(np.atleast_1d(np.asarray(b, dtype=float)))
        dim = len(self.b[-1])
        if self.cones and type(cone) is type(self.cones[-1]) and not isinstance(cone, SecondOrder):
            self.cones[-1] = type(cone)(self.cones[-1].dim + dim)
        else:
            self.cones.append(cone)
        self.m += dim

    def equal(self, cols, vals, b):
        """Single row ``sum vals * x[cols] == b``."""
        self.add(Zero(1), np.zeros(len(cols)), cols, vals, [b])

    def fix(self, idx, values):
        idx = np.atleast_1d(idx)
        self.add(Zero(len(idx)), np.arange(len(idx)), idx, np.ones(len(idx)), values)

    def lower(self, idx, lb):
        """``x[idx] >= lb`` elementwise."""
        idx = np.atleast_1d(idx)
        self.add(NonNeg(len(idx)), np.arange(len(idx)), idx, -np.ones(len(idx)),
                 -np.broadcast_to(lb, idx.shape))

    def linear_leq(self, cols, grad, rhs):
        """``grad @ x[cols] <= rhs``."""
        self.add(NonNeg(1), np.zeros(len(cols)), cols, grad, [rhs])

    def soc(self, head_cols, head_coef, head_const, tail_idx, tail_coef=None):
        """``||tail_coef * x[tail_idx]|| <= head_coef @ x[head_cols] + head_const``."""
        tail_idx = np.asarray(tail_idx)
        d = len(tail_idx)
        if tail_coef is None:
            tail_coef = np.ones(d)
        rows = np.concatenate([np.zeros(len(head_cols)), 1 + np.arange(d)])
        cols = np.concatenate([head_cols, tail_idx])
        vals = np.concatenate([-np.asarray(head_coef, dtype=float), -np.asarray(tail_coef)])
        self.add(SecondOrder(d + 1), rows, cols, vals, np.concatenate(([head_const], np.zeros(d))))

    def program(self, c) -> ConicProgram:
        A = sp.csc_matrix((np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
                          shape=(self.m, self.n))
        return ConicProgram(c=c, A=A, b=np.concatenate(self.b), cones=list(self.cones))


def ignition_curve(t_c: float, scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Ballistic coast position and velocity ``(p_r(t_c), p_v(t_c))``."""
    bc, g = scenario.boundary, np.asarray(scenario.environment.g_I, dtype=float)
    r_in, v_in = np.asarray(bc.r_in, dtype=float), np.asarray(bc.v_in, dtype=float)
    return r_in + v_in * t_c + 0.5 * g * t_c ** 2, v_in + g * t_c


def assemble_subproblem(ref: ReferenceTrajectory, disc: DiscreteDynamics,
                        scenario: Scenario) -> tuple[ConicProgram, SubproblemIndexMap]:
    K = ref.K
    alg, veh, bc, stc = scenario.algorithm, scenario.vehicle, scenario.boundary, scenario.stc
    if K != alg.K:
        raise SubproblemError(f"reference has {K} nodes, scenario expects {alg.K}")
    if disc.n_blocks != K - 1 or disc.A.shape[1:] != (N_X, N_X):
        raise SubproblemError(f"discretization has {disc.n_blocks} blocks for {K} nodes")
    if ref.X.shape != (K, N_X) or ref.U.shape != (K, N_U):
        raise SubproblemError("reference trajectory has wrong state/control dimensions")

    W_diag = alg.W_tr_diag()
    idx = SubproblemIndexMap.build(K, ref, alg.w_nu, W_diag)
    B = _Builder(idx.n)

    # dynamics: x_{k+1} - A x_k - Bm u_k - Bp u_{k+1} - S s - nu+ + nu- = r
    eye = np.eye(N_X)
    for k in range(K - 1):
        blocks = [(eye, idx.x(k + 1)), (-disc.A[k], idx.x(k)), (-disc.Bm[k], idx.u(k)),
                  (-disc.Bp[k], idx.u(k + 1)), (-disc.S[k][:, None], np.array([idx.s])),
                  (-eye, idx.nu_p(k)), (eye, idx.nu_m(k))]
        rows, cols, vals = [], [], []
        for mat, cidx in blocks:
            rr, cc = np.nonzero(mat)
            rows.append(rr)
            cols.append(cidx[cc])
            vals.append(mat[rr, cc])
        B.add(Zero(N_X), np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), disc.r[k])

    # boundary conditions
    x_first, x_last = idx.x(0), idx.x(K - 1)
    B.fix(x_first[M], bc.m_ig)
    B.fix(x_first[W], np.zeros(3))
    B.fix(x_last[R], np.zeros(3))
    B.fix(x_last[V], np.array([-bc.v_d, 0.0, 0.0]))
    B.fix(x_last[Q], np.array([1.0, 0.0, 0.0, 0.0]))
    B.fix(x_last[W], np.zeros(3))
    g = np.asarray(scenario.environment.g_I, dtype=float)
    if bc.free_ignition:
        tc_ref = ref.t_c
        p_r, p_v = ignition_curve(tc_ref, scenario)
        slope_r = np.asarray(bc.v_in, dtype=float) + g * tc_ref
        for i in range(3):
            B.equal([x_first[R][i], idx.t_c], [1.0, -slope_r[i]], p_r[i] - slope_r[i] * tc_ref)
        for i in range(3):
            B.equal([x_first[V][i], idx.t_c], [1.0, -g[i]], p_v[i] - g[i] * tc_ref)
    else:
        B.fix(idx.t_c, 0.0)
        B.fix(x_first[R], np.asarray(bc.r_in, dtype=float))
        B.fix(x_first[V], np.asarray(bc.v_in, dtype=float))

    # linear inequalities
    if bc.free_ignition:
        B.lower(idx.t_c, 0.0)
        B.linear_leq([idx.t_c], [1.0], bc.t_c_max)
    B.lower(np.array([idx.x(k)[M] for k in range(K)]), veh.m_dry)
    B.lower(np.arange(idx.nu_p0, idx.eta0), 0.0)
    for k in range(K):
        z_ref = pack_z(ref.t_c, ref.s, ref.X[k], ref.U[k])
        rows = [thrust_lb_row(ref.U[k], veh.T_min)]
        if stc.enabled:
            row = aoa_stc_row(z_ref, stc)
            if not row.is_zero:
                rows.append(row)
        zi = idx.z(k)
        for row in rows:
            nz = np.flatnonzero(row.grad_z)
            B.linear_leq(zi[nz], row.grad_z[nz], row.grad_z[nz] @ z_ref[nz] - row.h0)

    # second-order cones per node
    tan_gs = np.tan(np.deg2rad(bc.gamma_gs))
    # cos(theta) = 1 - 2|H q|^2 for unit q, so the tilt limit is |H q| <= sin(theta_max / 2)
    tilt_bound = np.sqrt((1.0 - np.cos(np.deg2rad(veh.theta_max))) / 2.0)
    cos_delta = np.cos(np.deg2rad(veh.delta_max))
    omega_max = np.deg2rad(veh.omega_max)
    for k in range(K):
        xi, ui = idx.x(k), idx.u(k)
        if k < K - 1:
            # at the last node r = 0 is fixed and the cone is redundant (and has no interior)
            B.soc([xi[R][0]], [tan_gs], 0.0, xi[R][1:])
        B.soc([], [], tilt_bound, xi[Q][2:])
        B.soc([], [], omega_max, xi[W])
        B.soc([], [], veh.T_max, ui)
        B.soc([ui[0]], [1.0 / cos_delta], 0.0, ui)

    # trust region: ||(2 W^1/2 (z - z_ref), eta - 1)|| <= eta + 1
    w_half = np.sqrt(W_diag)
    for k in range(K):
        zi = idx.z(k)
        z_ref = pack_z(ref.t_c, ref.s, ref.X[k], ref.U[k])
        eta = idx.eta0 + k
        rows = np.concatenate([[0], 1 + np.arange(N_Z), [N_Z + 1]])
        cols = np.concatenate([[eta], zi, [eta]])
        vals = np.concatenate([[-1.0], -2.0 * w_half, [-1.0]])
        b = np.concatenate([[1.0], -2.0 * w_half * z_ref, [-1.0]])
        B.add(SecondOrder(N_Z + 2), rows, cols, vals, b)

    c = np.zeros(idx.n)
    c[x_last[M]] = -1.0
    c[idx.nu_p0:idx.eta0] = alg.w_nu
    c[idx.eta0:] = 1.0
    return B.program(c), idx


def virtual_control_cost(nu: np.ndarray, w_nu: float) -> float:
    return float(w_nu * np.sum(np.abs(nu)))


def trust_region_cost(traj: ReferenceTrajectory, ref: ReferenceTrajectory, W_diag: np.ndarray) -> float:
    total = 0.0
    for k in range(ref.K):
        dz = pack_z(traj.t_c, traj.s, traj.X[k], traj.U[k]) - pack_z(ref.t_c, ref.s, ref.X[k], ref.U[k])
        total += float(dz @ (W_diag * dz))
    return total


def extract_iterate(sol: ConicSolution, index_map: SubproblemIndexMap):
    """(new reference with unit quaternions, nu (K-1, 14), J_vc, J_tr)."""
    if sol.status != "optimal":
        raise SubproblemError(f"cannot extract an iterate from a '{sol.status}' solution")
    traj, nu, _ = index_map.unpack(sol.x)
    traj.X[:, Q] /= np.linalg.norm(traj.X[:, Q], axis=1, keepdims=True)
    J_vc = virtual_control_cost(nu, index_map.w_nu)
    J_tr = trust_region_cost(traj, index_map.reference, index_map.W_tr)
    return traj, nu, J_vc, J_tr
