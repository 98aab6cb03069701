"""Continuation of torus cycles, actions and Maslov indices around a loop.

Basis cycles on the torus over a regular value ``(j, h)``:

* ``gamma1`` is the J-orbit (rotation by ``2 pi``);
* ``gamma2`` follows the H-flow for one radial period ``T_rad`` and closes up
  with the J-flow by ``-Theta``, where ``Theta`` is the polar angle advanced
  during that period.

Going around a loop of regular values, ``Theta`` is continued without jumps.
If it comes back shifted by ``2 pi k`` the closing segment of ``gamma2`` has
picked up ``-k`` turns of ``gamma1``, so ``gamma2 -> gamma2 - k gamma1`` and
the monodromy acting on the column ``(gamma1, gamma2)`` is
``[[1, 0], [-k, 1]]``.

Maslov indices are windings of ``det(Z)^2`` with ``Z = Q - iP`` built from
the tangent frame ``(X_H, X_J)``; with this orientation each caustic met along
the H-flow counts +1.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from . import exact_int as ei
from .dynamics import (
    RegularValue,
    SystemSpec,
    _require_regular,
    r_star,
    rotate,
    seed_torus_point,
    turning_points,
)
from .errors import (
    DomainError,
    IntegrationError,
    MaslovMonoError,
    NearCriticalError,
    ResolutionError,
)
from .normal_forms import ClassificationResult, Verdict, classify, verify_theorem1

TWO_PI = 2 * math.pi
INTEGER_TOLERANCE = 0.05
# largest accepted change of the continued rotation angle between samples
CONTINUITY_THRESHOLD = 1.0
_CHUNK = TWO_PI
_T_CAP = 400.0
_T_MIN = 1e-8


def _augmented_rhs(sys: SystemSpec):
    """H-flow plus accumulators for ``|p|^2`` and ``arg det(Q - iP)``.

    The polar angle and ``p_r^2`` are deliberately not integrated here: both
    spike over a time of order ``j / |p|^2`` when the orbit grazes the origin,
    which no step controller can resolve for small ``j``.
    """
    a8, a4, b2 = 8 * sys.a, 4 * sys.a, 2 * sys.b

    def rhs(t, s):
        x, y, px, py = s[0], s[1], s[2], s[3]
        f = a4 * (x * x + y * y) + b2
        qp = x * px + y * py
        w = a8 * qp
        # columns X_H, X_J of Z = Q - iP and their time derivatives
        z11, z21 = complex(px, f * x), complex(py, f * y)
        z12, z22 = complex(-y, py), complex(x, -px)
        d11, d21 = complex(-f * x, f * px + w * x), complex(-f * y, f * py + w * y)
        d12, d22 = complex(-py, -f * y), complex(px, f * x)
        det = z11 * z22 - z12 * z21
        tr = z22 * d11 - z12 * d21 - z21 * d12 + z11 * d22
        return [px, py, -f * x, -f * y, px * px + py * py, (tr / det).imag]

    return rhs


# a jump this close to pi between angle samples is a pass by the origin
_ANTIPODAL = 0.5
_SUBSTEPS = 4


def _angle_step(prev: float, cur: float, sign: float) -> float:
    """Polar-angle change between two samples.

    Nearest branch, except for nearly antipodal samples (a pass close to the
    origin), where the sign of ``j`` fixes the direction: the angle is
    monotone in time with the sign of ``j``.
    """
    d = -((prev - cur + math.pi) % TWO_PI - math.pi)  # in (-pi, pi]
    if sign and abs(d) > math.pi - _ANTIPODAL and d * sign < 0:
        d += math.copysign(TWO_PI, sign)
    return d


def _track_angle(angle: float, prev: float, sol, t_stop: float, sign: float):
    """Accumulate the polar angle over the accepted steps of ``sol`` up to ``t_stop``."""
    ts = sol.t[sol.t <= t_stop]
    grid = [ts[0]]
    for a, b in zip(ts[:-1], ts[1:]):
        grid.extend(a + (b - a) * np.arange(1, _SUBSTEPS + 1) / _SUBSTEPS)
    if grid[-1] < t_stop:
        grid.extend(grid[-1] + (t_stop - grid[-1]) * np.arange(1, _SUBSTEPS + 1) / _SUBSTEPS)
    pts = sol.sol(np.asarray(grid))
    for x, y in zip(pts[0], pts[1]):
        cur = math.atan2(y, x)
        angle += _angle_step(prev, cur, sign)
        prev = cur
    return angle, prev


def frame_det(state, sys: SystemSpec) -> complex:
    """``det(Q - iP)`` for the frame ``(X_H, X_J)``."""
    x, y, px, py = state
    f = 4 * sys.a * (x * x + y * y) + 2 * sys.b
    return complex(px, f * x) * complex(x, -px) - complex(-y, py) * complex(py, f * y)


def _rotation_phase(state, angle: float, sys: SystemSpec, steps: int = 128) -> float:
    """Change of ``arg det Z`` along the J-flow by ``angle``."""
    phases = [np.angle(frame_det(rotate(state, angle * k / steps), sys))
              for k in range(steps + 1)]
    return float(np.unwrap(phases)[-1] - phases[0])


def _qp(t, s):
    return s[0] * s[2] + s[1] * s[3]


def _qp_down(t, s):
    return _qp(t, s)


def _qp_up(t, s):
    return _qp(t, s)


_qp_down.direction = -1
_qp_up.direction = 1


class RadialOrbit(NamedTuple):
    """One radial period of the H-flow started at the seed point."""

    j: float
    h: float
    seed: tuple
    t_rad: float
    theta: float
    action_full: float
    phase: float
    caustics: int
    end_state: tuple


def _integrate(state, t_end: float, sys: SystemSpec, events=None):
    rhs = _augmented_rhs(sys)
    return solve_ivp(rhs, (0.0, t_end), state, method="DOP853", rtol=sys.rtol,
                     atol=sys.atol, events=events, dense_output=events is not None)


@lru_cache(maxsize=4096)
def radial_orbit(v: RegularValue, sys: SystemSpec) -> RadialOrbit:
    """Integrate until the radial state ``(r, p_r)`` first returns to the seed."""
    j, h = _require_regular(v, sys)
    seed = seed_torus_point((j, h), sys)
    rs2 = r_star(j, sys) ** 2

    def ret(t, s):
        return s[0] * s[0] + s[1] * s[1] - rs2

    ret.direction = 1
    events = [_qp_down, _qp_up, ret]
    names = ("down", "up", "ret")
    # j != 0 starts at r* moving outward: outer turn, inner turn, back to r*.
    # j == 0 starts at rest at the outer turn: inner turn (or origin), outer turn.
    stages = ["down", "up", "ret"] if j != 0 else ["up", "down"]

    y = np.concatenate([seed, np.zeros(2)])
    t0 = 0.0
    sign = math.copysign(1.0, j) if j else 0.0
    angle, prev = 0.0, math.atan2(seed[1], seed[0])
    caustic_times = []
    while t0 < _T_CAP:
        sol = solve_ivp(_augmented_rhs(sys), (t0, t0 + _CHUNK), y, method="DOP853",
                        rtol=sys.rtol, atol=sys.atol, events=events, dense_output=True)
        if sol.status == -1:
            raise IntegrationError(f"integration failed near t = {sol.t[-1]:.6g} "
                                   f"for (j, h) = ({j}, {h}): {sol.message}")
        found = sorted((t, name) for name, ts in zip(names, sol.t_events) for t in ts
                       if t > _T_MIN)
        for t, name in found:
            if name != "ret":
                caustic_times.append(t)
            if stages and name == stages[0]:
                stages.pop(0)
                if not stages:
                    angle, _ = _track_angle(angle, prev, sol, t, sign)
                    end = sol.sol(t)
                    n_caustics = sum(1 for c in caustic_times if c <= t * (1 + 1e-12))
                    return RadialOrbit(j, h, tuple(seed), float(t), angle, float(end[4]),
                                       float(end[5]), n_caustics,
                                       tuple(float(e) for e in end[:4]))
        angle, prev = _track_angle(angle, prev, sol, sol.t[-1], sign)
        y = sol.y[:, -1]
        t0 = sol.t[-1]
    raise IntegrationError(f"no radial return before t = {_T_CAP} for (j, h) = ({j}, {h})")


def radial_action_quadrature(v, sys: SystemSpec) -> float:
    """``oint p_r dr = 2 int p_r dr`` between the turning points, by quadrature in r.

    With ``r = c + w sin(phi)`` the square-root endpoint behaviour of ``p_r``
    is absorbed by ``dr = w cos(phi) dphi``.
    """
    j, h = _require_regular(v, sys)
    r_min, r_max = turning_points((j, h), sys)
    c, w = (r_max + r_min) / 2, (r_max - r_min) / 2

    def integrand(phi):
        r = c + w * math.sin(phi)
        if r <= 0.0:
            return 0.0
        return math.sqrt(max(0.0, 2 * (h - sys.V_eff(r, j)))) * w * math.cos(phi)

    val, _ = quad(integrand, -math.pi / 2, math.pi / 2, epsabs=1e-13, epsrel=1e-12,
                  limit=200)
    return 2 * val


def first_return(v, sys: SystemSpec) -> tuple[float, float]:
    """Radial first-return time and the polar angle advanced meanwhile."""
    orb = radial_orbit(RegularValue(*map(float, v)), sys)
    return orb.t_rad, orb.theta


def actions(v, sys: SystemSpec, theta: Optional[float] = None) -> tuple[float, float]:
    """Actions ``(I1, I2)`` of the cycles ``gamma1`` and ``gamma2``.

    ``I2`` is ``(1/2pi)`` times the integral of ``p dq`` over ``gamma2``: the
    H-flow part ``int |p|^2 dt`` plus ``-j * theta`` from the closing J-flow.
    ``theta`` defaults to the local rotation angle; a continued value selects
    a different closing segment.  With the local angle the angular terms
    cancel and what remains must be the radial action ``oint p_r dr``; this
    is checked against a quadrature in r.
    """
    orb = radial_orbit(RegularValue(*map(float, v)), sys)
    residual = orb.action_full - orb.j * orb.theta - radial_action_quadrature(v, sys)
    if abs(residual) > 1e-6 * (1 + abs(orb.action_full)):
        raise IntegrationError(f"angular action terms do not cancel (residual {residual:.3g})")
    th = orb.theta if theta is None else theta
    return orb.j, (orb.action_full - orb.j * th) / TWO_PI


def maslov_winding(v, cycle: int, sys: SystemSpec, reverse: bool = False,
                   check: bool = True) -> float:
    """Winding of ``det(Z)^2`` along ``gamma1`` (``cycle=1``) or ``gamma2``."""
    v = RegularValue(*map(float, v))
    if cycle == 1:
        seed = seed_torus_point(v, sys)
        dphase = _rotation_phase(seed, -TWO_PI if reverse else TWO_PI, sys)
    elif cycle == 2:
        orb = radial_orbit(v, sys)
        if not reverse:
            dphase = orb.phase + _rotation_phase(orb.end_state, -orb.theta, sys)
        else:
            start = rotate(orb.seed, orb.theta)
            dphase = _rotation_phase(orb.seed, orb.theta, sys)
            sol = _integrate(np.concatenate([start, np.zeros(2)]), -orb.t_rad, sys)
            if sol.status != 0:
                raise IntegrationError(sol.message)
            dphase += sol.y[5, -1]
    else:
        raise ValueError("cycle must be 1 or 2")
    w = dphase / math.pi
    if check and abs(w - round(w)) > INTEGER_TOLERANCE:
        raise ResolutionError(f"Maslov winding {w:.4f} of cycle {cycle} at {tuple(v)} "
                              "is not within tolerance of an integer")
    return w


def caustic_count(v, sys: SystemSpec) -> int:
    """Zeros of ``det Q = q.p`` met along the H-flow part of ``gamma2``.

    Along a Hamiltonian flow with positive kinetic energy every caustic is
    crossed in the positive direction, so this equals the Maslov index of
    ``gamma2``; the J-flow part keeps ``det Q`` constant.
    """
    return radial_orbit(RegularValue(*map(float, v)), sys).caustics


# -- continuation around a loop ------------------------------------------------

@dataclass(frozen=True)
class LoopSpec:
    center: tuple[float, float] = (0.0, 0.0)
    radii: tuple[float, float] = (0.1, 0.1)
    samples: int = 64
    orientation: str = "ccw"

    def __post_init__(self):
        if self.samples < 16:
            raise ValueError(f"need at least 16 samples, got {self.samples}")
        if self.orientation not in ("ccw", "cw"):
            raise ValueError(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")
        if not (self.radii[0] > 0 and self.radii[1] > 0):
            raise ValueError("loop radii must be positive")

    def point(self, s: float) -> RegularValue:
        sign = 1.0 if self.orientation == "ccw" else -1.0
        return RegularValue(self.center[0] + self.radii[0] * math.cos(TWO_PI * s),
                            self.center[1] + sign * self.radii[1] * math.sin(TWO_PI * s))

    def parameters(self) -> list[float]:
        """``s_i = i / N`` for ``i = 0..N``; the last repeats the start."""
        return [i / self.samples for i in range(self.samples + 1)]

    def as_dict(self) -> dict:
        return {"center": list(self.center), "radii": list(self.radii),
                "samples": self.samples, "orientation": self.orientation}


class CycleData(NamedTuple):
    s: float
    j: float
    h: float
    t_rad: float
    theta: float
    theta_unwrapped: float
    I1: float
    I2: float
    w1: float
    w2: float


class _Sample(NamedTuple):
    orbit: RadialOrbit
    w1: float
    w2: float


def _sample(args) -> _Sample:
    v, sys = args
    orb = radial_orbit(v, sys)
    actions(v, sys)  # cancellation check
    return _Sample(orb, maslov_winding(v, 1, sys, check=False),
                   maslov_winding(v, 2, sys, check=False))


@dataclass
class MonodromyReport:
    loop: LoopSpec
    system: SystemSpec
    monodromy: ei.Matrix
    maslov: list[int]
    winding_k: int
    winding_residual: float
    action_residual: float
    theorem: Verdict
    classification: ClassificationResult
    cycles: list[CycleData] = field(repr=False)

    @property
    def actions_start(self) -> list[float]:
        return [self.cycles[0].I1, self.cycles[0].I2]

    @property
    def actions_end(self) -> list[float]:
        return [self.cycles[-1].I1, self.cycles[-1].I2]

    def to_dict(self) -> dict:
        c = self.classification
        return {
            "loop": self.loop.as_dict(),
            "monodromy": self.monodromy,
            "maslov": self.maslov,
            "winding_k": self.winding_k,
            "action_residual": self.action_residual,
            "theorem": self.theorem.value,
            "classification": {
                "form": c.form.value,
                "conjugator": c.conjugator,
                "normal_form": c.normal_form,
                "signature": c.signature.as_dict(),
            },
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "j", "h", "theta_unwrapped", "I1", "I2", "w1", "w2"])
            for c in self.cycles:
                w.writerow([repr(x) for x in (c.s, c.j, c.h, c.theta_unwrapped,
                                              c.I1, c.I2, c.w1, c.w2)])


def _nearest_integer(x: float, what: str) -> int:
    n = round(x)
    if abs(x - n) > INTEGER_TOLERANCE:
        raise ResolutionError(f"{what} = {x:.4f} is not within {INTEGER_TOLERANCE} "
                              "of an integer; refine sampling or tolerance")
    return int(n)


def continue_loop(loop: LoopSpec, sys: SystemSpec,
                  workers: Optional[int] = None) -> MonodromyReport:
    """Continue the cycle basis around ``loop`` and extract ``M`` and ``mu``.

    Samples are independent and may be evaluated by ``workers`` processes; the
    unwrapping that follows is a sequential pass, so results do not depend on
    ``workers``.
    """
    params = loop.parameters()
    values = [loop.point(s) for s in params]
    for s, v in zip(params, values):
        try:
            _require_regular(v, sys)
        except DomainError as exc:
            raise NearCriticalError(f"sample s = {s}: {exc}", s) from exc
    jobs = [(v, sys) for v in values]
    samples = []
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            it = pool.map(_sample, jobs)
            for s in params:
                try:
                    samples.append(next(it))
                except MaslovMonoError as exc:
                    raise NearCriticalError(f"sample s = {s}: {exc}", s) from exc
    else:
        for s, job in zip(params, jobs):
            try:
                samples.append(_sample(job))
            except MaslovMonoError as exc:
                raise NearCriticalError(f"sample s = {s}: {exc}", s) from exc

    unwrapped = [samples[0].orbit.theta]
    for i, smp in enumerate(samples[1:], start=1):
        th = smp.orbit.theta
        th += TWO_PI * round((unwrapped[-1] - th) / TWO_PI)
        if abs(th - unwrapped[-1]) > CONTINUITY_THRESHOLD:
            raise ResolutionError(f"rotation angle jumps by {th - unwrapped[-1]:.3f} "
                                  f"at s = {params[i]}; increase samples")
        unwrapped.append(th)

    k_real = (unwrapped[-1] - samples[0].orbit.theta) / TWO_PI
    k = _nearest_integer(k_real, "rotation winding")

    w1 = [_nearest_integer(smp.w1, f"Maslov winding of gamma1 at s = {s}")
          for s, smp in zip(params, samples)]
    w2 = [_nearest_integer(smp.w2, f"Maslov winding of gamma2 at s = {s}")
          for s, smp in zip(params, samples)]
    if len(set(w1)) != 1 or len(set(w2)) != 1:
        raise ResolutionError("rounded Maslov windings vary along the loop")
    mu = [w1[0], w2[0]]

    cycles = []
    for s, smp, th in zip(params, samples, unwrapped):
        orb = smp.orbit
        i1, i2 = actions((orb.j, orb.h), sys, theta=th)
        cycles.append(CycleData(s, orb.j, orb.h, orb.t_rad, orb.theta, th, i1, i2,
                                smp.w1, smp.w2))

    m = [[1, 0], [-k, 1]]
    predicted = ei.matvec(m, [cycles[0].I1, cycles[0].I2])
    action_residual = max(abs(a - b) for a, b in zip([cycles[-1].I1, cycles[-1].I2],
                                                      predicted))
    return MonodromyReport(
        loop=loop,
        system=sys,
        monodromy=m,
        maslov=mu,
        winding_k=k,
        winding_residual=abs(k_real - k),
        action_residual=action_residual,
        theorem=verify_theorem1(m, mu),
        classification=classify(m),
        cycles=cycles,
    )
