"""Reduced kinematic dynamo on circular cross-section tubes.

Diffusionless regime. With ``R_phi = 0``, ``tau* = 0``, equal flow moduli and
field equipartition ``B^1 = B^3``, the induction equation reduces to

* ``2 R_ss v3 + lam R_s = 0``                      (radius profile)
* ``lam (1 - R kappa0 cos(theta)) - kappa0 = 0``   (growth-rate constraint)
* ``[R_s + (lam / v1) R] B3 + d_s B3 = 0``         (field transport)

The ODEs are authoritative here. The typeset closed-form solutions are
evaluated next to the exact ones so their discrepancies can be reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, SolenoidalError, UnphysicalRadiusError, ValidityBoundaryError
from .quadrature import integrate_1d

FIELD_MODES = ("as-printed", "exact")


@dataclass(frozen=True)
class DynamoParams:
    lam: float = 0.5
    v1: float = 1.0
    v3: float = 1.0
    kappa0: float = 0.5
    B0: float = 1.0
    A0: float = -0.1
    R0: float = 1.0
    theta: float = 0.0
    omega_s: float = 1.0
    omega_theta: float = 1.0
    eta: float = 0.0  # stored only; diffusive evolution is not modelled
    equipartition: bool = True

    def __post_init__(self):
        if not (self.v1 > 0 and self.v3 > 0):
            raise DomainError(f"flow moduli must be positive, got v1={self.v1}, v3={self.v3}")
        if not self.R0 > 0:
            raise DomainError(f"R0 must be positive, got {self.R0}")

    @property
    def classification(self) -> str:
        return classify(self.lam)


def classify(lam: float) -> str:
    if lam > 0:
        return "grow"
    if lam < 0:
        return "decay"
    return "marginal"


# -- resonance and frequencies -------------------------------------------------------


def resonance_torsion(R: float) -> float:
    """Base torsion for which poloidal and toroidal frequencies coincide: ``-1/R``."""
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    return -1.0 / R


def poloidal_frequency(tau0, R, omega_s):
    """``omega_theta = -tau0 R omega_s``."""
    return -tau0 * R * omega_s


def linking_density(tau0: float) -> float:
    """``N / L`` that cancels ``tau0`` in the effective torsion."""
    return tau0 / (2 * np.pi)


@dataclass(frozen=True)
class FrequencyRelation:
    omega_theta: float
    ratio: float
    operator_factor: float


def frequency_operator_relation(tau0: float, R: float, omega_s: float = 1.0) -> FrequencyRelation:
    """Poloidal frequency, its ratio to ``omega_s``, and the factor ``-omega_s / kappa_R``.

    ``kappa_R = 1/R`` is the curvature of the cross-section, so the operator
    factor is ``-omega_s R``.
    """
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    om = poloidal_frequency(tau0, R, omega_s)
    return FrequencyRelation(om, om / omega_s, -omega_s * R)


# -- growth rate ---------------------------------------------------------------


def growth_rate_from_constraint(R: float, kappa0: float, theta: float) -> float:
    """``lam = kappa0 / (1 - R kappa0 cos(theta))``."""
    den = 1 - R * kappa0 * np.cos(theta)
    if abs(den) < 1e-14:
        raise ValidityBoundaryError(
            f"tube-validity boundary: 1 - R kappa0 cos(theta) = {den:.3e} at R={R}, theta={theta}")
    return kappa0 / den


@dataclass(frozen=True)
class GrowthSensitivity:
    lam: float
    dlam_dR: float
    shrinking_enhances_growth: bool


def growth_rate_sensitivity(R, kappa0, theta) -> GrowthSensitivity:
    """``d lam / d R = kappa0^2 cos(theta) / (1 - R kappa0 cos(theta))^2``.

    Shrinking (``dR < 0``) increases ``lam`` only where ``d lam / d R < 0``,
    i.e. ``cos(theta) < 0``.
    """
    lam = growth_rate_from_constraint(R, kappa0, theta)
    den = 1 - R * kappa0 * np.cos(theta)
    d = kappa0 ** 2 * np.cos(theta) / den ** 2
    return GrowthSensitivity(lam, float(d), bool(d < 0))


# -- radius profile ------------------------------------------------------------


@dataclass(frozen=True)
class RadiusProfile:
    """Exact solution of ``2 R_ss v3 + lam R_s = 0`` with ``R(0) = R0``, ``R_s(0) = A0``."""

    R0: float
    A0: float
    lam: float
    v3: float

    @property
    def rate(self) -> float:
        return self.lam / (2 * self.v3)

    def R_s(self, s):
        return self.A0 * np.exp(-self.rate * np.asarray(s, dtype=float))

    def R_ss(self, s):
        return -self.rate * self.R_s(s)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        r = self.rate
        if r == 0:
            return self.R0 + self.A0 * s
        return self.R0 - self.A0 * np.expm1(-r * s) / r

    def integral(self, s):
        """``int_0^s R(u) du`` in closed form."""
        s = np.asarray(s, dtype=float)
        r = self.rate
        if r == 0:
            return self.R0 * s + 0.5 * self.A0 * s * s
        return self.R0 * s + self.A0 / r * (s + np.expm1(-r * s) / r)

    @property
    def R_inf(self) -> float:
        if self.rate > 0:
            return self.R0 + self.A0 / self.rate
        return float("inf") if self.A0 > 0 else (self.R0 if self.A0 == 0 else float("-inf"))

    def printed_R_s(self, s, v1):
        """Slope with the typeset decay constant ``lam / v1``."""
        return self.A0 * np.exp(-self.lam / v1 * np.asarray(s, dtype=float))


@dataclass(frozen=True)
class ProfileResult:
    s: np.ndarray
    R: np.ndarray
    R_s: np.ndarray
    R_inf: float
    profile: RadiusProfile
    excluded_branch: bool
    decay_rate: float
    printed_decay_rate: float

    @property
    def decay_factor(self) -> float:
        """Typeset decay constant over the one implied by the ODE."""
        if self.decay_rate == 0:
            return float("nan")
        return self.printed_decay_rate / self.decay_rate


def radius_profile(params: DynamoParams, s) -> ProfileResult:
    """Sample the shrinking-radius solution on the grid ``s``.

    ``excluded_branch`` marks ``A0 > 0`` with ``lam > 0``, the growing-radius
    branch that the sign argument rules out.
    """
    if params.lam < 0:
        raise DomainError(f"radius profile requires lam >= 0, got {params.lam}")
    prof = RadiusProfile(params.R0, params.A0, params.lam, params.v3)
    s = np.asarray(s, dtype=float)
    R = prof(s)
    if np.any(R <= 0):
        raise UnphysicalRadiusError(float(s[np.argmax(R <= 0)]))
    return ProfileResult(s, R, prof.R_s(s), prof.R_inf, prof,
                         params.lam > 0 and params.A0 > 0,
                         prof.rate, params.lam / params.v1)


# -- field solution -------------------------------------------------------------


def _profile_callables(profile):
    if isinstance(profile, RadiusProfile):
        return profile, profile.R_s, profile.integral
    if isinstance(profile, ProfileResult):
        return _profile_callables(profile.profile)
    R, R_s = profile

    def integral(s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.array([integrate_1d(R, 0.0, x, "gauss", 32, max(1, int(np.ceil(abs(x))))) if x else 0.0
                        for x in s_arr])
        return out.reshape(np.shape(s))

    return R, R_s, integral


def _d_ds(f, s, h=1e-3):
    def c(h):
        return (f(s + h) - f(s - h)) / (2 * h)
    return (4 * c(h / 2) - c(h)) / 3


@dataclass(frozen=True)
class FieldSolution:
    """Poloidal field ``B3(s, t)`` for one radius profile."""

    params: DynamoParams
    mode: str
    R: Callable
    R_s: Callable
    integral: Callable

    def log_space(self, s):
        """Spatial part of ``log(B3 / B0)``."""
        p = self.params
        I = self.integral(s)
        if self.mode == "as-printed":
            return -p.lam * I / p.v1
        return -(self.R(s) - p.R0) - p.lam / p.v1 * I

    def __call__(self, s, t=0.0):
        p = self.params
        return p.B0 * np.exp(p.lam * np.asarray(t, dtype=float)) * np.exp(self.log_space(s))

    def residual(self, s, t=0.0):
        """``[R_s + (lam/v1) R] B3 + d_s B3`` with ``d_s B3`` by finite differences."""
        s = np.asarray(s, dtype=float)
        p = self.params
        B = self(s, t)
        dB = _d_ds(lambda x: self(x, t), s)
        return (self.R_s(s) + p.lam / p.v1 * self.R(s)) * B + dB


def field_solution(params: DynamoParams, profile, mode="exact") -> FieldSolution:
    """``B3(s, t)`` for a radius profile.

    ``profile`` is a :class:`RadiusProfile`, a :class:`ProfileResult`, or a pair
    of callables ``(R, R_s)``. ``mode="as-printed"`` gives
    ``B0 exp(lam [t - int R / v1])``; ``mode="exact"`` adds the ``-[R(s) - R(0)]``
    term that the transport equation requires.
    """
    if mode not in FIELD_MODES:
        raise DomainError(f"unknown field mode {mode!r}; choose from {FIELD_MODES}")
    R, R_s, integral = _profile_callables(profile)
    if isinstance(profile, tuple):
        params = replace(params, R0=float(R(0.0)))
    return FieldSolution(params, mode, R, R_s, integral)


# -- the scalar system --------------------------------------------------------------


@dataclass(frozen=True)
class InductionResiduals:
    eq67: float
    eq68: float
    eq69: float
    reduced70: float
    reduced71: float


def induction_scalar_system(params: DynamoParams, profile, s, theta=None, t=0.0,
                            B1=None, B3=None) -> InductionResiduals:
    """Residuals of the three scalar induction equations at ``(s, t)``.

    ``B3`` is a :class:`FieldSolution` (default: exact mode on ``profile``);
    ``B1`` is a callable ``(s, t)`` or ``None`` for equipartition ``B1 = B3``.
    ``reduced70`` and ``reduced71`` are the equipartition forms divided by the
    field, so they vanish on a solution regardless of amplitude.
    """
    p = params
    theta = p.theta if theta is None else theta
    if isinstance(profile, ProfileResult):
        profile = profile.profile
    if B3 is None:
        B3 = field_solution(p, profile, "exact")
    R, R_s = profile(s), profile.R_s(s)
    R_ss = profile.R_ss(s)
    b3 = B3(s, t)
    db3 = _d_ds(lambda x: B3(x, t), s)
    b1 = b3 if B1 is None else B1(s, t)
    K = 1 - R * p.kappa0 * np.cos(theta)
    eq67 = (R_ss * (p.v1 + p.v3) + p.lam * R_s) * b1 - (b3 * p.v1 - p.v3 * b1) * R_ss
    eq68 = (R_s + p.lam / p.v1 * R) * b3 + db3
    eq69 = p.lam * K * b1 - p.kappa0 * b3
    return InductionResiduals(float(eq67), float(eq68), float(eq69),
                              float(2 * R_ss * p.v3 + p.lam * R_s),
                              float(p.lam * K - p.kappa0))


# -- full solve -------------------------------------------------------------------


@dataclass(frozen=True)
class DynamoSolution:
    s: np.ndarray
    R: np.ndarray
    R_s: np.ndarray
    R_inf: float
    B3: FieldSolution
    classification: str
    profile: ProfileResult = field(repr=False, default=None)


def solve(params: DynamoParams, s, mode="exact") -> DynamoSolution:
    prof = radius_profile(params, s)
    sol = field_solution(params, prof.profile, mode)
    return DynamoSolution(prof.s, prof.R, prof.R_s, prof.R_inf, sol, classify(params.lam), prof)


def discrepancy_summary(params: DynamoParams, s) -> dict:
    """Typeset closed forms against the ODEs they are meant to solve."""
    prof = radius_profile(params, s)
    printed = field_solution(params, prof.profile, "as-printed")
    exact = field_solution(params, prof.profile, "exact")
    res_p = printed.residual(prof.s)
    res_e = exact.residual(prof.s)
    predicted = prof.R_s * printed(prof.s)
    slope_dev = np.abs(prof.profile.printed_R_s(prof.s, params.v1) - prof.R_s)
    return {
        "radius_decay": {
            "ode_rate": prof.decay_rate,
            "printed_rate": prof.printed_decay_rate,
            "factor": prof.decay_factor,
            "max_abs_dev": float(np.max(slope_dev)),
            "verdict": "consistent" if np.max(slope_dev) <= 1e-12 else "inconsistent",
        },
        "field_transport": {
            "max_abs_residual_printed": float(np.max(np.abs(res_p))),
            "max_abs_residual_exact": float(np.max(np.abs(res_e))),
            "max_abs_dev": float(np.max(np.abs(res_p))),
            "residual_minus_Rs_B3": float(np.max(np.abs(res_p - predicted))),
            "verdict": "consistent" if np.max(np.abs(res_p)) <= 1e-10 else "inconsistent",
        },
    }


# -- curl identity -----------------------------------------------------------------


@dataclass(frozen=True)
class CartesianGrid:
    """Uniform grid with ``n`` points per axis on ``[lo, hi)^3`` (periodic) or ``[lo, hi]^3``."""

    n: int = 32
    lo: float = 0.0
    hi: float = 2 * np.pi
    periodic: bool = True

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n if self.periodic else self.n - 1)

    def coords(self):
        x = self.lo + self.h * np.arange(self.n)
        return np.meshgrid(x, x, x, indexing="ij")


def central_weights(order: int) -> np.ndarray:
    """Weights ``w_k`` (k = 1..order/2) of the antisymmetric first-derivative stencil.

    ``f'(x) ~ sum_k w_k (f(x + k h) - f(x - k h)) / h``.
    """
    if order < 2 or order % 2:
        raise DomainError(f"stencil order must be even and >= 2, got {order}")
    m = order // 2
    k = np.arange(1, m + 1, dtype=float)
    # match odd Taylor moments: sum_k w_k 2 k^(2q-1) = delta_{q1}
    A = np.array([2 * k ** (2 * q - 1) for q in range(1, m + 1)])
    rhs = np.zeros(m)
    rhs[0] = 1.0
    return np.linalg.solve(A, rhs)


def _derivative(f, axis, grid, w):
    out = np.zeros_like(f)
    for k, wk in enumerate(w, start=1):
        out += wk * (np.roll(f, -k, axis=axis) - np.roll(f, k, axis=axis))
    return out / grid.h


def _interior(grid, m):
    if grid.periodic:
        return (slice(None),) * 3
    return (slice(m, grid.n - m),) * 3


@dataclass(frozen=True)
class CurlIdentityResult:
    max_deviation: float
    max_divergence: float
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)


def curl_advective_identity_check(v, B, grid: CartesianGrid = CartesianGrid(), order=12,
                                  div_tol=1e-8) -> CurlIdentityResult:
    """Compare ``curl(v x B)`` with ``(B.grad) v - (v.grad) B`` on a grid.

    ``v`` and ``B`` are callables ``(x, y, z) -> (3, ...)``. Derivatives use the
    central stencil of the given ``order``; on non-periodic grids only points
    at least ``order/2`` away from the boundary are compared. Raises
    :class:`SolenoidalError` if either discrete divergence exceeds ``div_tol``.
    """
    w = central_weights(order)
    X = grid.coords()
    V = np.asarray(v(*X), dtype=float)
    Bf = np.asarray(B(*X), dtype=float)
    V = np.broadcast_to(V, (3,) + X[0].shape)
    Bf = np.broadcast_to(Bf, (3,) + X[0].shape)
    inner = _interior(grid, len(w))

    def grad(F):  # grad(F)[i, j] = d_j F_i
        return np.array([[_derivative(F[i], j, grid, w) for j in range(3)] for i in range(3)])

    gV, gB = grad(V), grad(Bf)
    div = max(float(np.max(np.abs(np.trace(g)[inner]))) for g in (gV, gB))
    if div > div_tol:
        raise SolenoidalError(f"fields are not solenoidal: max |div| = {div:.3e} > {div_tol:.0e}")

    cross = np.cross(V, Bf, axis=0)
    gc = grad(cross)
    lhs = np.array([gc[2, 1] - gc[1, 2], gc[0, 2] - gc[2, 0], gc[1, 0] - gc[0, 1]])
    rhs = np.einsum("j...,ij...->i...", Bf, gV) - np.einsum("j...,ij...->i...", V, gB)
    dev = float(np.max(np.abs((lhs - rhs)[(slice(None),) + inner])))
    return CurlIdentityResult(dev, div, lhs, rhs)


def abc_field(A, Bc, C, k=1):
    """Arnold-Beltrami-Childress field; each component is independent of its own coordinate."""
    def f(x, y, z):
        return np.array([A * np.sin(k * z) + C * np.cos(k * y),
                         Bc * np.sin(k * x) + A * np.cos(k * z),
                         C * np.sin(k * y) + Bc * np.cos(k * x)])
    return f


def random_solenoidal_field(rng, k=1, n_modes=4):
    """Random sum of solenoidal plane waves ``a cos(k.x + p)`` with ``a . k = 0``.

    Wavevector components are drawn from ``{-k, 0, k}``. Every non-zero
    component then has the same magnitude, so central-difference stencils
    scale all of them by one common factor and the discrete divergence
    vanishes to roundoff, while products of modes still exercise the
    stencil's product-rule error.
    """
    modes = []
    while len(modes) < n_modes:
        kv = k * rng.integers(-1, 2, 3).astype(float)
        if not kv.any():
            continue
        a = rng.normal(size=3)
        a -= kv * (a @ kv) / (kv @ kv)
        modes.append((kv, a, rng.uniform(0, 2 * np.pi)))

    def f(x, y, z):
        out = np.zeros((3,) + np.shape(x))
        for kv, a, ph in modes:
            out = out + np.multiply.outer(a, np.cos(kv[0] * x + kv[1] * y + kv[2] * z + ph))
        return out
    return f
