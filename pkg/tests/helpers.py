"""Shared oracles for unit and acceptance tests."""
import numpy as np

from scvxpdg.constraints import N_Z, Z_X, aoa_stc_row, stc_eval_state
from scvxpdg.discretize import ReferenceTrajectory
from scvxpdg.dynamics import RocketDynamics


def random_feasible_point(rng, scenario):
    """Random state/control inside the physical domain (positive mass, unit q, thrust within bounds)."""
    veh = scenario.vehicle
    q = rng.normal(size=4)
    x = np.concatenate(([rng.uniform(veh.m_dry, 2.0)], rng.uniform(-5, 5, 3), rng.uniform(-3, 3, 3),
                        q / np.linalg.norm(q), rng.uniform(-0.5, 0.5, 3)))
    d = rng.normal(size=3)
    u = rng.uniform(veh.T_min, veh.T_max) * d / np.linalg.norm(d)
    return x, u


def jacobian_relative_error(scenario, x, u, h=1e-6):
    """Max relative error of analytic df/dx, df/du against central differences."""
    dyn = RocketDynamics(scenario)
    A, B = dyn.jacobians(x, u)
    fd_A = np.column_stack([(dyn.f(x + e, u) - dyn.f(x - e, u)) / (2 * h) for e in np.eye(14) * h])
    fd_B = np.column_stack([(dyn.f(x, u + e) - dyn.f(x, u - e)) / (2 * h) for e in np.eye(3) * h])
    err = max(np.max(np.abs(A - fd_A)) / max(1.0, np.max(np.abs(fd_A))),
              np.max(np.abs(B - fd_B)) / max(1.0, np.max(np.abs(fd_B))))
    return float(err)


def stc_row_fd_error(z, stc, h=1e-6):
    row = aoa_stc_row(z, stc)

    def hz(zz):
        return stc_eval_state(zz[Z_X], stc).h

    fd = np.array([(hz(z + e) - hz(z - e)) / (2 * h) for e in np.eye(N_Z) * h])
    return float(np.max(np.abs(row.grad_z - fd)) / max(1.0, np.max(np.abs(fd)))), row


class LTI:
    n_x, n_u = 4, 2

    def __init__(self, M, N):
        self.M, self.N = M, N

    def f(self, x, u):
        return self.M @ x + self.N @ u

    def jacobians(self, x, u):
        return self.M, self.N


def lti(rng):
    return LTI(rng.normal(size=(4, 4)) * 0.5, rng.normal(size=(4, 2)))


def lti_ref(rng, K=20, s=5.0):
    # the production grid: K = 20 nodes and a burn time near the initial guess
    return ReferenceTrajectory(0.0, s, rng.normal(size=(K, 4)), rng.normal(size=(K, 2)))
