import numpy as np
import pytest

from conftest import solved
from scvxpdg import quaternion as qt
from scvxpdg.discretize import ReferenceTrajectory, discretize_all
from scvxpdg.scenario import default_scenario
from scvxpdg.validation import (SampledTrajectory, ValidationError, audit, error_metrics, fuel_consumed_pct,
                                node_residuals, propagate_nonlinear)


def ballistic(K=6, s=2.0):
    sc = default_scenario()
    g = np.asarray(sc.environment.g_I)
    r0, v0 = np.array([6.0, 1.0, -0.5]), np.array([0.5, -0.3, 0.2])
    t = np.linspace(0.0, s, K)
    X = np.zeros((K, 14))
    X[:, 0] = 2.0
    X[:, 1:4] = r0 + np.outer(t, v0) + 0.5 * np.outer(t * t, g)
    X[:, 4:7] = v0 + np.outer(t, g)
    X[:, 7] = 1.0
    return sc, ReferenceTrajectory(0.0, s, X, np.zeros((K, 3)))


def test_ballistic_matches_closed_form():
    sc, ref = ballistic()
    prop = propagate_nonlinear(ref, sc, samples_per_interval=4)
    assert isinstance(prop, SampledTrajectory)
    assert prop.X.shape == (1 + 4 * (ref.K - 1), 14)
    assert np.array_equal(prop.tau[prop.node_index], np.linspace(0, 1, ref.K))
    e_pos, e_att = error_metrics(ref, prop)
    assert e_pos <= 1e-9 and e_att <= 1e-9


def test_zero_metrics_on_identical_states():
    sc, ref = ballistic()
    assert error_metrics(ref, ref.X) == (0.0, 0.0)


def test_metric_examples():
    sc, ref = ballistic()
    other = ref.X.copy()
    other[3, 1:4] += [3e-3, 4e-3, 0.0]
    other[2, 7:11] = qt.quat_multiply(qt.from_axis_angle([0, 1, 0], np.radians(1.0)), other[2, 7:11])
    e_pos, e_att = error_metrics(ref, other)
    assert e_pos == pytest.approx(5e-3, rel=1e-12)
    assert e_att == pytest.approx(1.0, rel=1e-9)


def test_attitude_error_sign_invariant():
    sc, ref = ballistic()
    flipped = ref.X.copy()
    flipped[:, 7:11] *= -1.0
    assert error_metrics(ref, flipped)[1] == 0.0


def test_shape_mismatch():
    sc, ref = ballistic()
    with pytest.raises(ValueError):
        error_metrics(ref, ref.X[:-1])


def test_nonpositive_dilation():
    sc, ref = ballistic()
    ref.s = 0.0
    with pytest.raises(ValidationError):
        propagate_nonlinear(ref, sc)


def test_discretizer_endpoints_agree():
    # independent integrators on each subinterval, restarted from the node
    sc, sol = solved("B")
    traj = sol.trajectory
    disc = discretize_all(traj, sc)
    dt = traj.s / (traj.K - 1)
    worst = 0.0
    for k in range(traj.K - 1):
        piece = ReferenceTrajectory(0.0, dt, traj.X[k:k + 2], traj.U[k:k + 2])
        end = propagate_nonlinear(piece, sc).nodes[-1]
        worst = max(worst, np.max(np.abs(end - disc.x_prop_end[k])))
    assert worst <= 1e-7


def test_audit_of_converged_baseline():
    sc, sol = solved("B")
    report = audit(sol.trajectory, sc)
    assert report.e_pos <= 1e-3 and report.e_att <= 1e-2
    assert report.max_residual() <= 1e-6
    d = report.to_dict()
    assert set(d["max_residuals"]) == set(report.residual_names)
    assert d["burn_time"] == sol.trajectory.s and d["coast_time"] == 0.0
    assert report.fuel_consumed_pct == pytest.approx(fuel_consumed_pct(sol.trajectory, sc))


def test_fuel_metric():
    sc, ref = ballistic()
    ref.X[-1, 0] = 1.5
    assert fuel_consumed_pct(ref, sc) == pytest.approx(25.0)


def test_stc_column_only_when_enabled():
    sc, ref = ballistic()
    names, table = node_residuals(ref, sc)
    assert "stc_h" not in names and table.shape == (ref.K, len(names))
    names, _ = node_residuals(ref, sc.replace(stc={"enabled": True}))
    assert names[-1] == "stc_h"
