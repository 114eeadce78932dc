"""Small cone programs with known answers for solver conformance.

Each instance is ``(name, ConicProgram, expected)`` where ``expected`` is either
an optimal objective value or one of the infeasibility status strings.
"""
import numpy as np
import scipy.sparse as sp

from scvxpdg.conic import ConicProgram, NonNeg, SecondOrder, Zero


def _p(c, rows, b, cones):
    return ConicProgram(np.asarray(c, float), sp.csc_matrix(np.asarray(rows, float)), np.asarray(b, float),
                        cones)


def _soc_rows(n_var, head, tail_vars, tail_shift=None):
    """Rows for ``|x[tail_vars] - shift| <= x[head]`` written as ``b - A x in SOC``."""
    k = len(tail_vars)
    A = np.zeros((k + 1, n_var))
    b = np.zeros(k + 1)
    A[0, head] = -1.0
    for i, j in enumerate(tail_vars):
        A[i + 1, j] = -1.0
        if tail_shift is not None:
            b[i + 1] = -tail_shift[i]
    return A, b


def instances():
    out = []
    # 1: min x s.t. x >= 1
    out.append(("lp_1var", _p([1.0], [[-1.0]], [-1.0], [NonNeg(1)]), 1.0))
    # 2: min t s.t. |(x, y) - (3, 4)| <= t
    A, b = _soc_rows(3, 0, [1, 2], [3.0, 4.0])
    out.append(("soc_projection", _p([1, 0, 0], A, b, [SecondOrder(3)]), 0.0))
    # 3: min -x s.t. |(x, y)| <= 1, y = 0.6   (vars x, y, one = fixed 1)
    rows = [[0, 1, 0], [0, 0, 1], [0, 0, -1], [-1, 0, 0], [0, -1, 0]]
    out.append(("soc_pythagoras", _p([-1, 0, 0], rows, [0.6, 1.0, 0, 0, 0], [Zero(2), SecondOrder(3)]), -0.8))
    # 4: min x + y s.t. x + 2y >= 2, 2x + y >= 2, x, y >= 0
    rows = [[-1, -2], [-2, -1], [-1, 0], [0, -1]]
    out.append(("lp_two_cuts", _p([1, 1], rows, [-2, -2, 0, 0], [NonNeg(4)]), 4.0 / 3.0))
    # 5: box LP
    c = np.array([1.0, -2.0, 3.0, -1.0])
    rows = np.vstack([-np.eye(4), np.eye(4)])
    out.append(("lp_box", _p(c, rows, np.r_[np.zeros(4), np.ones(4)], [NonNeg(8)]), -3.0))
    # 6: distance from (3, 4, 0) to the unit ball; vars t, x(3), one
    A1, b1 = _soc_rows(5, 0, [1, 2, 3], [3.0, 4.0, 0.0])
    A2 = np.zeros((4, 5))
    A2[0, 4] = -1.0
    A2[1:, 1:4] = -np.eye(3)
    eq = np.zeros((1, 5))
    eq[0, 4] = 1.0
    out.append(("soc_ball_distance", _p([1, 0, 0, 0, 0], np.vstack([eq, A1, A2]), np.r_[1.0, b1, np.zeros(4)],
                                        [Zero(1), SecondOrder(4), SecondOrder(4)]), 4.0))
    # 7: min |x| s.t. a.x = b
    a, bb = np.array([1.0, 2.0, 2.0]), 6.0
    A1, b1 = _soc_rows(4, 0, [1, 2, 3])
    eq = np.r_[0.0, a][None, :]
    out.append(("soc_min_norm", _p([1, 0, 0, 0], np.vstack([eq, A1]), np.r_[bb, b1], [Zero(1), SecondOrder(4)]),
                2.0))
    # 8: max t s.t. t <= x_i, sum x = 1, x >= 0
    n = 4
    rows = [np.r_[0.0, np.ones(n)]]
    for i in range(n):
        r = np.zeros(n + 1)
        r[0], r[1 + i] = 1.0, -1.0
        rows.append(r)
    for i in range(n):
        r = np.zeros(n + 1)
        r[1 + i] = -1.0
        rows.append(r)
    out.append(("lp_maxmin", _p(np.r_[-1.0, np.zeros(n)], rows, np.r_[1.0, np.zeros(2 * n)],
                                [Zero(1), NonNeg(2 * n)]), -0.25))
    # 9: min t s.t. x^2 <= t (rotated form |(2x, t - 1)| <= t + 1), x = 3; vars t, x
    rows = [[0, 1], [-1, 0], [0, -2], [-1, 0]]
    out.append(("soc_square", _p([1, 0], rows, [3.0, 1.0, 0.0, -1.0], [Zero(1), SecondOrder(3)]), 9.0))
    # 10: min -(x1 + x2) s.t. |x| <= 2; vars x1, x2
    rows = [[0, 0], [-1, 0], [0, -1]]
    out.append(("soc_disc", _p([-1, -1], rows, [2.0, 0, 0], [SecondOrder(3)]), -2.0 * np.sqrt(2.0)))
    # 11: equalities pin x1 = 0.75
    rows = [[1, 1], [1, -1], [-1, 0], [0, -1]]
    out.append(("lp_equalities", _p([1, 0], rows, [1.0, 0.5, 0, 0], [Zero(2), NonNeg(2)]), 0.75))
    # 12: min |x - a| + |x - b| -> |a - b|; vars t1, t2, x(2)
    A1, b1 = _soc_rows(4, 0, [2, 3], [0.0, 0.0])
    A2, b2 = _soc_rows(4, 1, [2, 3], [3.0, 4.0])
    out.append(("soc_two_points", _p([1, 1, 0, 0], np.vstack([A1, A2]), np.r_[b1, b2],
                                     [SecondOrder(3), SecondOrder(3)]), 5.0))
    # 13: min |x - (1, 1)| s.t. x1 + x2 = 0 -> sqrt(2); vars t, x(2)
    A1, b1 = _soc_rows(3, 0, [1, 2], [1.0, 1.0])
    out.append(("soc_line_distance", _p([1, 0, 0], np.vstack([[0, 1, 1], A1]), np.r_[0.0, b1],
                                        [Zero(1), SecondOrder(3)]), np.sqrt(2.0)))
    # 14: min c.x s.t. |x| <= r
    c, r = np.array([1.0, -2.0, 2.0]), 1.5
    rows = np.vstack([np.zeros(3), -np.eye(3)])
    out.append(("soc_trust_region", _p(c, rows, np.r_[r, 0, 0, 0], [SecondOrder(4)]), -r * 3.0))
    # 15: largest disc in the box [0, 2] x [0, 4]; vars rad, x, y
    rows = [[1, -1, 0], [1, 1, 0], [1, 0, -1], [1, 0, 1]]
    out.append(("lp_chebyshev", _p([-1, 0, 0], rows, [0, 2, 0, 4], [NonNeg(4)]), -1.0))
    # 16: mixed cones: min t1 + t2 + s, |x| <= t1, |x - (4, 0)| <= t2, s >= x1 - 1, s >= 0
    A1, b1 = _soc_rows(5, 0, [3, 4])
    A2, b2 = _soc_rows(5, 1, [3, 4], [4.0, 0.0])
    lin = np.array([[0, 0, -1, 1, 0], [0, 0, -1, 0, 0]], float)
    out.append(("mixed_cones", _p([1, 1, 1, 0, 0], np.vstack([lin, A1, A2]), np.r_[1.0, 0.0, b1, b2],
                                  [NonNeg(2), SecondOrder(3), SecondOrder(3)]), 4.0))
    # 17: x >= 1 and x <= 0
    out.append(("lp_infeasible", _p([1.0], [[-1.0], [1.0]], [-1.0, 0.0], [NonNeg(2)]), "primal_infeasible"))
    # 18: |(x, y)| <= 1 and x >= 2
    rows = [[-1, 0], [0, 0], [-1, 0], [0, -1]]
    out.append(("soc_infeasible", _p([0, 0], rows, [-2.0, 1.0, 0, 0], [NonNeg(1), SecondOrder(3)]),
                "primal_infeasible"))
    # 19: min -x s.t. x >= 0
    out.append(("lp_unbounded", _p([-1.0], [[-1.0]], [0.0], [NonNeg(1)]), "dual_infeasible"))
    # 20: min -t s.t. |x| <= t, x1 = 1
    rows = [[0, 1, 0], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]
    out.append(("soc_unbounded", _p([-1, 0, 0], rows, [1.0, 0, 0, 0], [Zero(1), SecondOrder(3)]),
                "dual_infeasible"))
    return out


def kkt_residuals(p, sol):
    """(primal residual, dual residual, |complementarity|, cone violation) on the original data."""
    from scvxpdg.conic import SecondOrder as _S

    x, y, s = sol.x, sol.y, sol.s
    pres = np.max(np.abs(p.A @ x + s - p.b)) / (1.0 + np.max(np.abs(p.b)))
    dres = np.max(np.abs(p.c + p.A.T @ y)) / (1.0 + np.max(np.abs(p.c)))
    comp = abs(s @ y)
    viol, i = 0.0, 0
    for cone in p.cones:
        d = cone.dim
        if isinstance(cone, _S):
            for v in (s[i:i + d], y[i:i + d]):
                viol = max(viol, np.linalg.norm(v[1:]) - v[0])
        elif type(cone).__name__ == "NonNeg":
            viol = max(viol, -np.min(s[i:i + d]), -np.min(y[i:i + d]))
        i += d
    return float(pres), float(dres), float(comp), float(viol)
