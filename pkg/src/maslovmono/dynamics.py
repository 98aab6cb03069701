"""Champagne-bottle system on the cotangent bundle of the plane.

The Hamiltonian is ``H = |p|^2 / 2 + V(r)`` with ``V(r) = a r^4 + b r^2``
(``a > 0``, ``b < 0``) and the second integral is the angular momentum
``J = x p_y - y p_x``.  The origin is a focus-focus equilibrium with critical
value ``(j, h) = (0, 0)``.  All flows are computed in Cartesian coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError


@dataclass(frozen=True)
class SystemSpec:
    a: float = 1.0
    b: float = -1.0
    tol: float = 1e-10

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if not self.b < 0:
            raise ValueError(f"b must be negative, got {self.b}")
        if not 0 < self.tol < 1:
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tol}")

    # per-step tolerances sit two decades below ``tol`` so that H and J drift
    # over runs of ~100 time units stays within ``tol``
    @property
    def rtol(self) -> float:
        return self.tol * 1e-2

    @property
    def atol(self) -> float:
        return self.tol * 1e-5

    def V(self, r: float) -> float:
        r2 = r * r
        return self.a * r2 * r2 + self.b * r2

    def dV(self, r: float) -> float:
        return 4 * self.a * r ** 3 + 2 * self.b * r

    def V_eff(self, r: float, j: float) -> float:
        return j * j / (2 * r * r) + self.V(r)

    def V_eff_dd(self, r: float, j: float) -> float:
        return 3 * j * j / r ** 4 + 12 * self.a * r * r + 2 * self.b


class TorusPoint(NamedTuple):
    x: float
    y: float
    px: float
    py: float

    @property
    def q(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def p(self) -> tuple[float, float]:
        return (self.px, self.py)

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)


class RegularValue(NamedTuple):
    j: float
    h: float


def energy_momentum(state, sys: SystemSpec) -> RegularValue:
    """``(j, h) = (J, H)`` at a phase-space point ``(x, y, px, py)``."""
    x, y, px, py = state
    h = 0.5 * (px * px + py * py) + sys.V(math.hypot(x, y))
    return RegularValue(x * py - y * px, h)


def vector_fields(state, sys: SystemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian vector fields ``X_H`` and ``X_J`` at ``state``."""
    x, y, px, py = state
    f = 4 * sys.a * (x * x + y * y) + 2 * sys.b
    return np.array([px, py, -f * x, -f * y]), np.array([-y, x, -py, px])


def poisson_bracket_HJ(state, sys: SystemSpec) -> float:
    x, y, px, py = state
    f = 4 * sys.a * (x * x + y * y) + 2 * sys.b
    # {H, J} = dH/dq . dJ/dp - dH/dp . dJ/dq
    return (f * x) * (-y) + (f * y) * x - (px * py + py * (-px))


def _rhs_H(sys: SystemSpec):
    a4, b2 = 4 * sys.a, 2 * sys.b

    def rhs(t, s):
        x, y, px, py = s
        f = a4 * (x * x + y * y) + b2
        return [px, py, -f * x, -f * y]

    return rhs


def rotate(state, angle: float) -> np.ndarray:
    """Time-``angle`` map of the J-flow: rigid rotation of q and p."""
    x, y, px, py = state
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * x - s * y, s * x + c * y, c * px - s * py, s * px + c * py])


Field = Union[str, tuple[float, float]]


def flow(state, field: Field, time: float, sys: SystemSpec) -> np.ndarray:
    """Flow ``state`` for ``time`` along ``X_H``, ``X_J`` or ``c_H X_H + c_J X_J``.

    The J-flow is the closed-form rotation.  Since the two flows commute, a
    mixed field is the H-flow for ``c_H t`` followed by rotation by ``c_J t``.
    """
    if not math.isfinite(time):
        raise ValueError("time must be finite")
    if field == "H":
        c_h, c_j = 1.0, 0.0
    elif field == "J":
        c_h, c_j = 0.0, 1.0
    else:
        c_h, c_j = field
    out = np.asarray(state, dtype=float)
    if c_h and time:
        sol = solve_ivp(_rhs_H(sys), (0.0, c_h * time), out, method="DOP853",
                        rtol=sys.rtol, atol=sys.atol)
        if sol.status != 0:
            raise IntegrationError(f"H-flow failed at t = {sol.t[-1]}: {sol.message}")
        out = sol.y[:, -1]
    if c_j and time:
        out = rotate(out, c_j * time)
    return out


def r_star(j: float, sys: SystemSpec) -> float:
    """Radius of the minimum of the effective potential."""
    if j == 0:
        return math.sqrt(-sys.b / (2 * sys.a))
    # V_eff'(r) = 0  <=>  4a u^3 + 2b u^2 - j^2 = 0 with u = r^2; one positive root
    f = lambda u: (4 * sys.a * u + 2 * sys.b) * u * u - j * j
    hi = max(1.0, -sys.b / sys.a)
    while f(hi) < 0:
        hi *= 2
    return math.sqrt(brentq(f, 0.0, hi, xtol=1e-300, rtol=1e-15))


def effective_minimum(j: float, sys: SystemSpec) -> float:
    return sys.V_eff(r_star(j, sys), j)


def is_regular(v, sys: SystemSpec) -> bool:
    j, h = v
    if j == 0 and h == 0:
        return False
    return h > effective_minimum(j, sys)


def _require_regular(v, sys: SystemSpec) -> RegularValue:
    v = RegularValue(*map(float, v))
    if not is_regular(v, sys):
        raise DomainError(f"(j, h) = ({v.j}, {v.h}) is not a regular value")
    return v


def turning_points(v, sys: SystemSpec) -> tuple[float, float]:
    """Radii where ``V_eff(r) = h`` bracketing the effective minimum.

    For ``j = 0`` above the central maximum the inner turning point is 0.
    """
    j, h = _require_regular(v, sys)
    rs = r_star(j, sys)
    g = lambda r: sys.V_eff(r, j) - h
    hi = 2 * rs
    while g(hi) < 0:
        hi *= 2
    try:
        r_max = brentq(g, rs, hi, xtol=1e-15, rtol=1e-15)
        if j == 0 and h >= 0:
            r_min = 0.0
        else:
            lo = rs / 2
            while g(lo) < 0:
                lo /= 2
            r_min = brentq(g, lo, rs, xtol=1e-15, rtol=1e-15)
    except ValueError as exc:
        raise DomainError(f"cannot bracket turning points at ({j}, {h})") from exc
    return r_min, r_max


def seed_torus_point(v, sys: SystemSpec) -> TorusPoint:
    """Deterministic starting point on the torus over ``v``.

    For ``j != 0``: on the positive x-axis at the effective minimum, moving
    outward.  For ``j = 0``: at rest at the outer turning point.
    """
    j, h = _require_regular(v, sys)
    if j == 0:
        r = turning_points(v, sys)[1]
        return TorusPoint(r, 0.0, 0.0, 0.0)
    rs = r_star(j, sys)
    pr = math.sqrt(2 * (h - sys.V_eff(rs, j)))
    return TorusPoint(rs, 0.0, pr, j / rs)
