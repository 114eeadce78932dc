import numpy as np
import pytest
import scipy.sparse as sp

from scvxpdg.conic import ConicProgram, NonNeg, SecondOrder, Zero, solve_conic
from socp_instances import instances, kkt_residuals

INSTANCES = instances()


@pytest.mark.parametrize("name,prog,expected", INSTANCES, ids=[i[0] for i in INSTANCES])
def test_conformance(name, prog, expected):
    sol = solve_conic(prog)
    if isinstance(expected, str):
        assert sol.status == expected
        return
    assert sol.status == "optimal"
    assert abs(sol.objective - expected) <= 1e-7 * (1.0 + abs(expected))
    pres, dres, comp, viol = kkt_residuals(prog, sol)
    assert max(pres, dres, comp) <= 1e-8
    assert viol <= 1e-10


def test_lp_minimizer():
    p = ConicProgram(np.array([1.0]), sp.csc_matrix([[-1.0]]), np.array([-1.0]), [NonNeg(1)])
    sol = solve_conic(p)
    assert sol.x[0] == pytest.approx(1.0, abs=1e-8)


def test_soc_projection_minimizer():
    name, p, _ = INSTANCES[1]
    sol = solve_conic(p)
    assert np.allclose(sol.x[1:], [3.0, 4.0], atol=1e-7)


def test_pythagoras_minimizer():
    sol = solve_conic(INSTANCES[2][1])
    assert sol.x[:2] == pytest.approx([0.8, 0.6], abs=1e-8)


def test_primal_certificate():
    _, p, _ = next(i for i in INSTANCES if i[0] == "lp_infeasible")
    sol = solve_conic(p)
    # Farkas: A^T y = 0, b^T y < 0, y >= 0
    y = sol.y
    assert sol.status == "primal_infeasible"
    assert np.all(y >= -1e-12)
    assert np.max(np.abs(p.A.T @ y)) <= 1e-8 * np.max(np.abs(y))
    assert p.b @ y < 0


def test_dual_certificate():
    _, p, _ = next(i for i in INSTANCES if i[0] == "lp_unbounded")
    sol = solve_conic(p)
    # improving ray: A x + s = 0, s >= 0, c^T x < 0
    x = sol.x
    assert sol.status == "dual_infeasible"
    assert p.c @ x < 0
    assert np.all(-(p.A @ x) >= -1e-10 * np.max(np.abs(x)))


@pytest.mark.parametrize("equilibrate", [True, False])
def test_equilibration_does_not_change_answer(equilibrate):
    _, p, expected = INSTANCES[5]
    sol = solve_conic(p, equilibrate=equilibrate)
    assert sol.objective == pytest.approx(expected, abs=1e-7)


def test_badly_scaled_lp():
    # the same LP with rows scaled by 1e4 and 1e-3
    D = np.diag([1e4, 1e-3, 1.0, 1.0])
    rows = np.array([[-1, -2], [-2, -1], [-1, 0], [0, -1]], float)
    p = ConicProgram(np.array([1.0, 1.0]), sp.csc_matrix(D @ rows), D @ np.array([-2, -2, 0, 0.0]), [NonNeg(4)])
    sol = solve_conic(p)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(4.0 / 3.0, abs=1e-7)


def test_random_feasible_socps_are_optimal(rng):
    # feasible and bounded by construction: x0 strictly feasible, y0 strictly dual feasible
    for _ in range(5):
        n, soc = 6, [4, 3]
        m_lin = 5
        m = m_lin + sum(soc)
        A = rng.normal(size=(m, n))
        x0 = rng.normal(size=n)
        s0 = np.concatenate([rng.uniform(0.5, 1.5, m_lin)] + [np.r_[2.0, rng.uniform(-0.5, 0.5, d - 1)] for d in soc])
        y0 = np.concatenate([rng.uniform(0.5, 1.5, m_lin)] + [np.r_[2.0, rng.uniform(-0.5, 0.5, d - 1)] for d in soc])
        p = ConicProgram(-A.T @ y0, sp.csc_matrix(A), A @ x0 + s0, [NonNeg(m_lin)] + [SecondOrder(d) for d in soc])
        sol = solve_conic(p)
        assert sol.status == "optimal"
        pres, dres, comp, viol = kkt_residuals(p, sol)
        assert max(pres, dres, comp) <= 1e-8


def test_validation_errors():
    with pytest.raises(ValueError):
        ConicProgram(np.ones(2), sp.csc_matrix(np.ones((2, 2))), np.ones(3), [NonNeg(3)])
    with pytest.raises(ValueError):
        ConicProgram(np.ones(2), sp.csc_matrix(np.ones((2, 2))), np.ones(2), [NonNeg(1)])
    with pytest.raises(ValueError):
        ConicProgram(np.ones(2), sp.csc_matrix(np.ones((1, 2))), np.ones(1), [SecondOrder(1)])


def test_zero_cone_only():
    p = ConicProgram(np.array([1.0, 1.0]), sp.csc_matrix([[1.0, 0.0], [0.0, 1.0]]), np.array([2.0, 3.0]),
                     [Zero(2)])
    sol = solve_conic(p)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(5.0, abs=1e-8)


def test_dump_round_trip(tmp_path):
    _, p, _ = INSTANCES[5]
    path = tmp_path / "prog.txt"
    p.dump(path)
    lines = path.read_text().splitlines()
    n, m, nnz = (int(lines[i].split()[1]) for i in range(3))
    assert (m, n) == p.A.shape
    assert lines[3] == "cones Zero:1 SecondOrder:4 SecondOrder:4"
    c = np.array([float(v) for v in lines[5:5 + n]])
    b = np.array([float(v) for v in lines[6 + n:6 + n + m]])
    trip = np.array([[float(t) for t in ln.split()] for ln in lines[7 + n + m:]])
    A = sp.coo_matrix((trip[:, 2], (trip[:, 0].astype(int), trip[:, 1].astype(int))), shape=(m, n))
    assert len(trip) == nnz
    assert np.array_equal(c, p.c) and np.array_equal(b, p.b)
    assert np.array_equal(A.toarray(), p.A.toarray())


def test_deterministic():
    _, p, _ = INSTANCES[11]
    a, b = solve_conic(p), solve_conic(p)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)


def test_scvx_subproblem_matches_clarabel():
    clarabel = pytest.importorskip("clarabel")
    from scvxpdg.discretize import discretize_all
    from scvxpdg.scenario import load_fixture
    from scvxpdg.scvx import straight_line_init
    from scvxpdg.subproblem import assemble_subproblem

    sc = load_fixture("B_EA_ST")
    ref = straight_line_init(sc)
    prog, _ = assemble_subproblem(ref, discretize_all(ref, sc), sc)
    mapping = {Zero: clarabel.ZeroConeT, NonNeg: clarabel.NonnegativeConeT, SecondOrder: clarabel.SecondOrderConeT}
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    n = prog.shape[1]
    other = clarabel.DefaultSolver(sp.csc_matrix((n, n)), prog.c, sp.csc_matrix(prog.A), prog.b,
                                   [mapping[type(k)](k.dim) for k in prog.cones], settings).solve()
    ours = solve_conic(prog)
    assert ours.status == "optimal"
    assert ours.objective == pytest.approx(other.obj_val, abs=1e-6 * (1 + abs(other.obj_val)))
