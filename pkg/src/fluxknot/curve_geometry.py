"""Parametric space curves, Frenet frames, curvature and torsion.

Frames are built from finite-difference derivatives of the position map
(central stencils plus one Richardson step), so any smooth evaluator works
without symbolic input. Queries are always made in arclength ``s``; the
parameter ``t`` is an implementation detail of each curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateFrameError, DomainError, ZeroSpeedError

KAPPA_MIN = 1e-12

# Stencil width multipliers for derivative orders 1, 2, 3. Higher orders
# divide by h**k, so they need wider stencils to keep roundoff below the
# O(h**6) truncation error of the twice-extrapolated estimate.
_STENCIL_SCALE = (8.0, 40.0, 64.0)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ArclengthTable:
    """Monotone table of cumulative arclength ``s(t)`` with its inverse."""

    t: np.ndarray
    s: np.ndarray

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @cached_property
    def _forward(self):
        return PchipInterpolator(self.t, self.s, extrapolate=True)

    @cached_property
    def _inverse(self):
        return PchipInterpolator(self.s, self.t, extrapolate=True)

    def s_of_t(self, t):
        return self._forward(t)

    def t_of_s(self, s):
        return self._inverse(s)


@dataclass(frozen=True)
class SpaceCurve:
    """A regular, C3 parametric curve ``t -> x(t)`` on ``[t_min, t_max]``.

    ``func`` must accept scalars and 1-D arrays, returning shape ``(3,)`` or
    ``(3, n)``. ``velocity`` is optional and only used for arclength; when
    ``speed`` is given the curve has constant speed and arclength is exact.
    """

    func: Callable
    t_min: float
    t_max: float
    preset: str = "custom"
    params: dict = field(default_factory=dict)
    velocity: Optional[Callable] = None
    speed: Optional[float] = None

    def __call__(self, t):
        return np.asarray(self.func(t), dtype=float)

    @cached_property
    def table(self) -> ArclengthTable:
        return arclength_reparam(self, 4097)

    @property
    def length(self) -> float:
        if self.speed is not None:
            return self.speed * (self.t_max - self.t_min)
        return self.table.length

    def t_of_s(self, s):
        if self.speed is not None:
            return self.t_min + np.asarray(s, dtype=float) / self.speed
        return self.table.t_of_s(s)

    def s_of_t(self, t):
        if self.speed is not None:
            return (np.asarray(t, dtype=float) - self.t_min) * self.speed
        return self.table.s_of_t(t)

    def default_step(self) -> float:
        return 1e-4 * self.length


# -- presets -----------------------------------------------------------------


def line(direction=(1.0, 0.0, 0.0), origin=(0.0, 0.0, 0.0), t_min=0.0, t_max=1.0):
    d = np.asarray(direction, dtype=float)
    o = np.asarray(origin, dtype=float)

    def func(t):
        t = np.asarray(t, dtype=float)
        return o.reshape((3,) + (1,) * t.ndim) + np.multiply.outer(d, t)

    def velocity(t):
        t = np.asarray(t, dtype=float)
        return np.multiply.outer(d, np.ones_like(t))

    return SpaceCurve(func, t_min, t_max, "line", {"direction": tuple(d)},
                      velocity, float(np.linalg.norm(d)))


def circle(a=1.0):
    if a <= 0:
        raise DomainError(f"circle radius must be positive, got {a}")

    def func(t):
        t = np.asarray(t, dtype=float)
        return np.array([a * np.cos(t), a * np.sin(t), np.zeros_like(t)])

    def velocity(t):
        t = np.asarray(t, dtype=float)
        return np.array([-a * np.sin(t), a * np.cos(t), np.zeros_like(t)])

    return SpaceCurve(func, 0.0, 2 * np.pi, "circle", {"a": a}, velocity, float(a))


def helix(a=1.0, c=1.0, turns=1.0):
    """Circular helix of radius ``a`` and pitch ``2*pi*c``.

    Closed forms: ``kappa = a/(a^2+c^2)``, ``tau = c/(a^2+c^2)``.
    """
    if a <= 0:
        raise DomainError(f"helix radius must be positive, got {a}")

    def func(t):
        t = np.asarray(t, dtype=float)
        return np.array([a * np.cos(t), a * np.sin(t), c * t])

    def velocity(t):
        t = np.asarray(t, dtype=float)
        return np.array([-a * np.sin(t), a * np.cos(t), c * np.ones_like(t)])

    return SpaceCurve(func, 0.0, 2 * np.pi * turns, "helix", {"a": a, "c": c},
                      velocity, float(np.hypot(a, c)))


def helix_from_curvature(kappa, tau, turns=1.0):
    """Helix with prescribed constant curvature and torsion."""
    k2 = kappa * kappa + tau * tau
    return helix(kappa / k2, tau / k2, turns)


def torus_knot(p=2, q=3, R_major=2.0, r_minor=1.0):
    """(p, q) torus knot on a torus with radii ``R_major > r_minor``."""
    if not R_major > r_minor > 0:
        raise DomainError("torus knot needs R_major > r_minor > 0")

    def func(t):
        t = np.asarray(t, dtype=float)
        rho = R_major + r_minor * np.cos(q * t)
        return np.array([rho * np.cos(p * t), rho * np.sin(p * t), r_minor * np.sin(q * t)])

    def velocity(t):
        t = np.asarray(t, dtype=float)
        rho = R_major + r_minor * np.cos(q * t)
        drho = -q * r_minor * np.sin(q * t)
        return np.array([
            drho * np.cos(p * t) - p * rho * np.sin(p * t),
            drho * np.sin(p * t) + p * rho * np.cos(p * t),
            q * r_minor * np.cos(q * t),
        ])

    return SpaceCurve(func, 0.0, 2 * np.pi, "torus_knot",
                      {"p": p, "q": q, "R_major": R_major, "r_minor": r_minor}, velocity)


PRESETS = {"line": line, "circle": circle, "helix": helix, "torus_knot": torus_knot}


def make_curve(name: str, **params) -> SpaceCurve:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown curve preset {name!r}; choose from {sorted(PRESETS)}")
    return factory(**params)


# -- derivatives ---------------------------------------------------------------


def _central(f, t, h, order):
    if order == 1:
        return (f(t + h) - f(t - h)) / (2 * h)
    if order == 2:
        return (f(t + h) - 2 * f(t) + f(t - h)) / (h * h)
    return ((f(t + 2 * h) - f(t - 2 * h)) - 2 * (f(t + h) - f(t - h))) / (2 * h ** 3)


def _richardson(f, t, h, order):
    d0, d1, d2 = (_central(f, t, h / 2 ** i, order) for i in range(3))
    r0 = (4 * d1 - d0) / 3
    r1 = (4 * d2 - d1) / 3
    return (16 * r1 - r0) / 15


def parameter_derivatives(curve: SpaceCurve, t: float, ht: float):
    """First three derivatives of ``x(t)`` (Richardson-extrapolated)."""
    return tuple(_richardson(curve, t, ht * _STENCIL_SCALE[k - 1], k) for k in (1, 2, 3))


# -- Frenet frames -------------------------------------------------------------


@dataclass(frozen=True)
class FrenetData:
    s: float
    t_hat: np.ndarray
    n_hat: np.ndarray
    b_hat: np.ndarray
    kappa: float
    tau: float
    t: float = float("nan")
    point: Optional[np.ndarray] = None

    @property
    def frame(self) -> np.ndarray:
        """Rows ``(t, n, b)``."""
        return np.vstack([self.t_hat, self.n_hat, self.b_hat])


def frenet_at(curve: SpaceCurve, s: float, h: Optional[float] = None) -> FrenetData:
    """Frenet triad, curvature and torsion at arclength ``s``.

    ``h`` is the arclength step of the derivative stencils (default
    ``1e-4 * length``). Raises :class:`ZeroSpeedError` at non-regular points
    and :class:`DegenerateFrameError` where the curvature is numerically zero.
    """
    if h is None:
        h = curve.default_step()
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    t = float(curve.t_of_s(s))
    x = curve(t)
    speed0 = np.linalg.norm(_central(curve, t, h * 1e-3, 1))
    if not speed0 > 0:
        raise ZeroSpeedError(f"zero speed at s={s:.6g}")
    ht = h / speed0
    x1, x2, x3 = parameter_derivatives(curve, t, ht)

    speed = np.linalg.norm(x1)
    scale = max(np.linalg.norm(x), speed * ht, np.finfo(float).tiny)
    if speed <= 1e3 * _EPS * scale / ht:
        raise ZeroSpeedError(f"zero speed at s={s:.6g}")
    cross = np.cross(x1, x2)
    cross_norm = np.linalg.norm(cross)
    kappa = cross_norm / speed ** 3

    # roundoff floor of the second-derivative estimate, in curvature units
    h2 = ht * _STENCIL_SCALE[1]
    kappa_floor = 100 * _EPS * scale / (h2 * h2 * speed * speed)
    if kappa < max(KAPPA_MIN, kappa_floor):
        raise DegenerateFrameError(kappa, s)

    t_hat = x1 / speed
    b_hat = cross / cross_norm
    n_hat = np.cross(b_hat, t_hat)
    tau = float(np.dot(cross, x3) / cross_norm ** 2)
    return FrenetData(float(s), t_hat, n_hat, b_hat, float(kappa), tau, t, x)


def frenet_serret_residual(curve: SpaceCurve, s: float, h: Optional[float] = None,
                           stencil: Optional[float] = None) -> np.ndarray:
    """Norms of the three Frenet-Serret residuals at ``s``.

    Frame derivatives are central differences of step ``h`` in arclength;
    ``stencil`` is passed through to :func:`frenet_at` as its step.
    Returns ``[|t' - k n|, |n' + k t - tau b|, |b' + tau n|]``.
    """
    if h is None:
        h = curve.default_step()
    mid = frenet_at(curve, s, stencil)
    lo = frenet_at(curve, s - h, stencil)
    hi = frenet_at(curve, s + h, stencil)
    dt = (hi.t_hat - lo.t_hat) / (2 * h)
    dn = (hi.n_hat - lo.n_hat) / (2 * h)
    db = (hi.b_hat - lo.b_hat) / (2 * h)
    k, tau = mid.kappa, mid.tau
    return np.array([
        np.linalg.norm(dt - k * mid.n_hat),
        np.linalg.norm(dn + k * mid.t_hat - tau * mid.b_hat),
        np.linalg.norm(db + tau * mid.n_hat),
    ])


def arclength_reparam(curve: SpaceCurve, n_samples: int = 4097) -> ArclengthTable:
    """Cumulative arclength on ``n_samples`` parameter nodes (composite Simpson)."""
    if n_samples < 16:
        raise DomainError(f"n_samples must be >= 16, got {n_samples}")
    if n_samples % 2 == 0:
        n_samples += 1
    t = np.linspace(curve.t_min, curve.t_max, n_samples)
    if curve.velocity is not None:
        vel = np.asarray(curve.velocity(t), dtype=float)
    else:
        ht = 1e-4 * (curve.t_max - curve.t_min)
        vel = _richardson(curve, t, ht, 1)
    speed = np.linalg.norm(vel, axis=0)
    s = cumulative_simpson(speed, x=t, initial=0.0)
    if np.any(np.diff(s) <= 0):
        bad = t[1:][np.diff(s) <= 0][0]
        raise ZeroSpeedError(f"non-monotone arclength near t={bad:.6g}")
    return ArclengthTable(t, s)
