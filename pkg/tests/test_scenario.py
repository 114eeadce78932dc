import json

import numpy as np
import pytest

from scvxpdg.scenario import (Scenario, ScenarioError, default_scenario, fixture_names, load_fixture,
                              load_scenario, save_scenario)


def test_default_values():
    s = default_scenario()
    v, e, b, st, a = s.vehicle, s.environment, s.boundary, s.stc, s.algorithm
    assert v.T_max == 6.5 and v.T_min == 1.5 and v.m_dry == 1.0 and v.I_sp == 30.0
    assert np.allclose(v.J_B, 0.168 * np.diag([2e-2, 1, 1]))
    assert v.r_cp_B == (0.05, 0, 0) and v.r_T_B == (-0.25, 0, 0)
    assert v.theta_max == 90.0 and v.omega_max == 28.6 and v.delta_max == 20.0
    assert e.g_I == (-1.0, 0.0, 0.0) and e.rho == 1.0 and e.P_amb == 0.0 and v.A_noz == 0.0
    assert b.gamma_gs == 75.0 and b.m_ig == 2.0 and b.v_d == 0.1 and b.t_c_max == 2.0
    assert st.trigger_threshold == 2.0 and st.cone_limit == 3.0
    assert a.K == 20 and a.w_nu == 1e4 and a.W_tr == 0.5
    assert a.eps_vc == 1e-8 and a.eps_tr == 5e-4 and a.s_init == 5.0
    assert v.alpha_m == pytest.approx(1.0 / 30.0)


def test_round_trip(tmp_path):
    s = default_scenario().replace(boundary={"free_ignition": True}, environment={"aero_mode": "ellipsoidal",
                                                                                  "C_A": (0.2, 1.0)})
    path = tmp_path / "s.json"
    save_scenario(s, path)
    assert load_scenario(path) == s


def _write(tmp_path, data):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    return path


def test_invariant_errors_name_the_field(tmp_path):
    with pytest.raises(ScenarioError, match="T_min"):
        load_scenario(_write(tmp_path, {"vehicle": {"T_min": 0.0}}))
    with pytest.raises(ScenarioError, match="C_A"):
        load_scenario(_write(tmp_path, {"environment": {"aero_mode": "ellipsoidal", "C_A": [1.0, 0.2]}}))
    with pytest.raises(ScenarioError, match="C_A"):
        load_scenario(_write(tmp_path, {"environment": {"aero_mode": "spherical", "C_A": [0.2, 1.0]}}))
    with pytest.raises(ScenarioError, match="bogus"):
        load_scenario(_write(tmp_path, {"vehicle": {"bogus": 1.0}}))
    with pytest.raises(ScenarioError, match="m_ig"):
        load_scenario(_write(tmp_path, {"boundary": {"m_ig": 0.5}}))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "nope.json")


def test_fixtures_cover_the_ten_cases():
    names = fixture_names()
    assert len(names) == 10
    for n in names:
        s = load_fixture(n)
        assert s.name == n
        flags = set(n.split("_"))
        assert s.stc.enabled == ("ST" in flags)
        assert s.boundary.free_ignition == ("FI" in flags)
        assert (s.algorithm.init_mode == "three_dof") == ("3I" in flags)
        mode = {"SA": "spherical", "EA": "ellipsoidal"}
        expected = next((mode[f] for f in flags if f in mode), "none")
        assert s.environment.aero_mode == expected


def test_case_b_initial_state():
    b = load_fixture("B").boundary
    assert b.r_in == (5.33, 4.5, 0.0) and b.v_in == (-0.5, -2.5, 0.25)


def test_scenario_is_immutable():
    s = Scenario()
    with pytest.raises(Exception):
        s.name = "x"
