"""Problem parameterization and scenario file I/O.

All quantities are in the non-dimensional unit system (U_L, U_T, U_M). Angles
are stored in degrees, exactly as they appear in scenario files; use the
``*_rad`` helpers for computation.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

AERO_MODES = ("none", "spherical", "ellipsoidal")
STC_KINDS = ("q_alpha", "fov")
INIT_MODES = ("straight_line", "three_dof")

FIXTURE_DIR = Path(__file__).parent / "scenarios"


class ScenarioError(ValueError):
    """Raised for malformed scenario files or parameter invariant violations."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _vec(x, n=3):
    return tuple(float(v) for v in np.asarray(x, dtype=float).reshape(n))


def _mat(x):
    return tuple(_vec(row) for row in np.asarray(x, dtype=float).reshape(3, 3))


@dataclass(frozen=True)
class VehicleParams:
    m_dry: float = 1.0
    J_B: tuple = _mat(0.168 * np.diag([2e-2, 1.0, 1.0]))
    r_T_B: tuple = (-0.25, 0.0, 0.0)
    r_cp_B: tuple = (0.05, 0.0, 0.0)
    I_sp: float = 30.0
    g0: float = 1.0
    A_noz: float = 0.0
    T_min: float = 1.5
    T_max: float = 6.5
    delta_max: float = 20.0
    theta_max: float = 90.0
    omega_max: float = 28.6

    @property
    def alpha_m(self) -> float:
        return 1.0 / (self.I_sp * self.g0)

    def validate(self) -> None:
        if not self.m_dry > 0:
            raise ScenarioError("m_dry", "must be positive")
        if not self.T_min > 0:
            raise ScenarioError("T_min", "must be positive")
        if not self.T_max >= self.T_min:
            raise ScenarioError("T_max", "must be >= T_min")
        J = np.asarray(self.J_B)
        if not np.allclose(J, J.T) or np.any(np.linalg.eigvalsh(J) <= 0):
            raise ScenarioError("J_B", "must be symmetric positive definite")
        if not 0.0 <= self.delta_max <= 90.0:
            raise ScenarioError("delta_max", "must lie in [0, 90] deg")
        if not 0.0 < self.theta_max <= 90.0:
            raise ScenarioError("theta_max", "must lie in (0, 90] deg")
        if not self.omega_max > 0:
            raise ScenarioError("omega_max", "must be positive")
        if not self.I_sp > 0 or not self.g0 > 0:
            raise ScenarioError("I_sp", "I_sp and g0 must be positive")
        if self.A_noz < 0:
            raise ScenarioError("A_noz", "must be nonnegative")


@dataclass(frozen=True)
class EnvironmentParams:
    g_I: tuple = (-1.0, 0.0, 0.0)
    rho: float = 1.0
    P_amb: float = 0.0
    S_A: float = 1.0
    C_A: tuple = (0.2, 0.2)  # (c_ax, c_ayz)
    aero_mode: str = "none"

    @property
    def C_A_matrix(self) -> np.ndarray:
        return np.diag([self.C_A[0], self.C_A[1], self.C_A[1]])

    def validate(self) -> None:
        if self.aero_mode not in AERO_MODES:
            raise ScenarioError("aero_mode", f"must be one of {AERO_MODES}")
        if self.rho < 0:
            raise ScenarioError("rho", "must be nonnegative")
        if self.P_amb < 0:
            raise ScenarioError("P_amb", "must be nonnegative")
        if self.aero_mode != "none":
            c_ax, c_ayz = self.C_A
            if not (c_ax > 0 and c_ayz > 0):
                raise ScenarioError("C_A", "must be positive definite")
            if not self.S_A > 0:
                raise ScenarioError("S_A", "must be positive")
            if self.aero_mode == "spherical" and c_ax != c_ayz:
                raise ScenarioError("C_A", "spherical mode requires c_ax == c_ayz")
            if self.aero_mode == "ellipsoidal" and not c_ax < c_ayz:
                raise ScenarioError("C_A", "ellipsoidal mode requires c_ax < c_ayz")


@dataclass(frozen=True)
class BoundaryConditions:
    m_ig: float = 2.0
    r_in: tuple = (5.33, 4.5, 0.0)
    v_in: tuple = (-0.5, -2.5, 0.25)
    v_d: float = 0.1
    free_ignition: bool = False
    t_c_max: float = 2.0
    gamma_gs: float = 75.0

    def validate(self, vehicle: VehicleParams) -> None:
        if not self.m_ig > vehicle.m_dry:
            raise ScenarioError("m_ig", "must exceed m_dry")
        if self.t_c_max < 0:
            raise ScenarioError("t_c_max", "must be nonnegative")
        if not 0.0 < self.gamma_gs < 90.0:
            raise ScenarioError("gamma_gs", "must lie in (0, 90) deg")
        if self.v_d < 0:
            raise ScenarioError("v_d", "must be nonnegative")


@dataclass(frozen=True)
class StcParams:
    enabled: bool = False
    kind: str = "q_alpha"
    trigger_threshold: float = 2.0
    cone_limit: float = 3.0

    def validate(self) -> None:
        if self.kind not in STC_KINDS:
            raise ScenarioError("kind", f"must be one of {STC_KINDS}")
        if not self.trigger_threshold > 0:
            raise ScenarioError("trigger_threshold", "must be positive")
        if not 0.0 < self.cone_limit < 90.0:
            raise ScenarioError("cone_limit", "must lie in (0, 90) deg")


@dataclass(frozen=True)
class AlgorithmParams:
    K: int = 20
    w_nu: float = 1e4
    W_tr: float | tuple = 0.5  # scalar multiple of I, or the 19-entry diagonal
    eps_vc: float = 1e-8
    eps_tr: float = 5e-4
    s_init: float = 5.0
    max_iters: int = 30
    init_mode: str = "straight_line"
    integrator_substeps: int = 15

    def W_tr_diag(self, n: int = 19) -> np.ndarray:
        w = np.asarray(self.W_tr, dtype=float)
        return np.full(n, float(w)) if w.ndim == 0 else w.reshape(n)

    def validate(self) -> None:
        if int(self.K) != self.K or self.K < 2:
            raise ScenarioError("K", "must be an integer >= 2")
        if not self.w_nu > 0:
            raise ScenarioError("w_nu", "must be positive")
        w = np.asarray(self.W_tr, dtype=float)
        if w.ndim not in (0, 1) or (w.ndim == 1 and w.size != 19) or np.any(w <= 0):
            raise ScenarioError("W_tr", "must be a positive scalar or 19 positive entries")
        if not self.eps_vc > 0:
            raise ScenarioError("eps_vc", "must be positive")
        if not self.eps_tr > 0:
            raise ScenarioError("eps_tr", "must be positive")
        if not self.s_init > 0:
            raise ScenarioError("s_init", "must be positive")
        if self.max_iters < 1:
            raise ScenarioError("max_iters", "must be >= 1")
        if self.init_mode not in INIT_MODES:
            raise ScenarioError("init_mode", f"must be one of {INIT_MODES}")
        if self.integrator_substeps < 1:
            raise ScenarioError("integrator_substeps", "must be >= 1")


@dataclass(frozen=True)
class Scenario:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    environment: EnvironmentParams = field(default_factory=EnvironmentParams)
    boundary: BoundaryConditions = field(default_factory=BoundaryConditions)
    stc: StcParams = field(default_factory=StcParams)
    algorithm: AlgorithmParams = field(default_factory=AlgorithmParams)
    name: str = "default"

    def validate(self) -> "Scenario":
        self.vehicle.validate()
        self.environment.validate()
        self.boundary.validate(self.vehicle)
        self.stc.validate()
        self.algorithm.validate()
        return self

    def replace(self, **sections) -> "Scenario":
        """Return a copy with fields replaced, e.g. ``s.replace(boundary={"free_ignition": True})``."""
        changes = {}
        for key, value in sections.items():
            current = getattr(self, key)
            if isinstance(value, dict) and dataclasses.is_dataclass(current):
                value = dataclasses.replace(current, **value)
            changes[key] = value
        return dataclasses.replace(self, **changes).validate()

    def to_dict(self) -> dict[str, Any]:
        return _to_plain(dataclasses.asdict(self))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Scenario":
        sections = {
            "vehicle": VehicleParams,
            "environment": EnvironmentParams,
            "boundary": BoundaryConditions,
            "stc": StcParams,
            "algorithm": AlgorithmParams,
        }
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if key == "name":
                kwargs["name"] = str(value)
                continue
            if key not in sections:
                raise ScenarioError(key, "unknown section")
            if not isinstance(value, dict):
                raise ScenarioError(key, "section must be a mapping")
            section_cls = sections[key]
            known = {f.name: f for f in dataclasses.fields(section_cls)}
            parsed = {}
            for fname, fval in value.items():
                if fname not in known:
                    raise ScenarioError(fname, f"unknown field in section '{key}'")
                parsed[fname] = _coerce(fname, fval, known[fname].default)
            kwargs[key] = section_cls(**parsed)
        return cls(**kwargs).validate()


def _to_plain(obj):
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def _coerce(name: str, value, default):
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError("expected a boolean")
            return value
        if isinstance(default, int) and not isinstance(default, bool):
            if isinstance(value, bool) or int(value) != value:
                raise TypeError("expected an integer")
            return int(value)
        if isinstance(default, str):
            if not isinstance(value, str):
                raise TypeError("expected a string")
            return value
        if isinstance(default, tuple) and default and isinstance(default[0], tuple):
            return _mat(value)
        if isinstance(default, tuple):
            vals = tuple(float(v) for v in value)
            if len(vals) != len(default):
                raise ValueError(f"expected {len(default)} entries")
            return vals
        if isinstance(value, (list, tuple)):
            return tuple(float(v) for v in value)
        if isinstance(value, bool):
            raise TypeError("expected a number")
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(name, f"invalid value {value!r} ({exc})") from None


def default_scenario() -> Scenario:
    """Scenario with the published baseline parameters and out-of-plane initial state."""
    return Scenario().validate()


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"scenario file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError("<file>", f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError("<file>", "top level must be a mapping")
    return Scenario.from_dict(data)


def fixture_names() -> list[str]:
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.json"))


def load_fixture(name: str) -> Scenario:
    return load_scenario(FIXTURE_DIR / f"{name}.json")
