"""Magnetic energy and magnetic-surface volumes of a knotted tube.

Integrals run over ``s in [0, L]``, ``chi in [0, chi0]``, ``phi in [0, 2 pi]``
with the volume element ``sqrt(g) ds dchi dphi`` of the tube metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidMetricError, NoDynamoError
from .quadrature import QuadratureSpec, tensor_integrate
from .rotation_coefficients import unstretch_ratio
from .tube_metric import TWO_PI, TubeConfig, tube_metric

EPSILON_MODES = ("as-printed", "one-third")


def _bounds(cfg, chi0):
    return ((0.0, cfg.length), (0.0, chi0), (0.0, TWO_PI))


def _metric_checked(shape, cfg, s, chi, phi):
    m = tube_metric(shape, cfg, s, chi, phi)
    if not np.all(m.valid):
        bad = np.argwhere(~m.valid)[:10]
        pts = [(float(s[tuple(k)]), float(chi[tuple(k)]), float(phi[tuple(k)])) for k in bad]
        raise InvalidMetricError(
            f"metric invalid (1 - R kappa cos(theta) <= 0) at {int(np.sum(~m.valid))} "
            f"grid points, e.g. (s, chi, phi) = {pts[:3]}", pts)
    return m


def surface_volume(shape, cfg: TubeConfig, chi0: float, quad: QuadratureSpec = QuadratureSpec()):
    """Volume enclosed by the magnetic surface ``chi = chi0``."""
    if chi0 == 0:
        return 0.0

    def integrand(s, chi, phi):
        return _metric_checked(shape, cfg, s, chi, phi).sqrt_g

    return tensor_integrate(integrand, _bounds(cfg, chi0), quad)


def _b_values(b, s, chi, phi):
    return b(s, chi, phi) if callable(b) else b


def energy_density(shape, cfg, b, s, chi, phi, B3=None):
    """``sqrt(g) [g11 b^2 + g33 - 2 b g13] / 2``, times ``(B^3)^2`` if given."""
    m = _metric_checked(shape, cfg, s, chi, phi)
    bb = _b_values(b, s, chi, phi)
    g = m.g
    dens = 0.5 * m.sqrt_g * (g[0, 0] * bb * bb + g[2, 2] - 2 * bb * g[0, 2])
    if B3 is not None:
        dens = dens * np.asarray(B3(s, chi, phi), dtype=float) ** 2
    return dens


def knot_energy(shape, cfg: TubeConfig, b=0.0, B3=None,
                quad: QuadratureSpec = QuadratureSpec(), chi0: float = 1.0):
    """Knot magnetic energy ``M``.

    ``b`` is the ratio ``-B^1/B^3``: a number or a callable of
    ``(s, chi, phi)``. ``B3`` is an optional poloidal profile; without it the
    integrand is normalised to ``B^3 = 1``.
    """
    return tensor_integrate(lambda s, chi, phi: energy_density(shape, cfg, b, s, chi, phi, B3),
                            _bounds(cfg, chi0), quad)


def metric_moment(shape, cfg: TubeConfig, entry=(0, 0), quad=QuadratureSpec(), chi0=1.0):
    """``int sqrt(g) g_ij`` over the tube up to ``chi0``."""
    a, c = entry

    def integrand(s, chi, phi):
        m = _metric_checked(shape, cfg, s, chi, phi)
        return m.sqrt_g * m.g[a, c]

    return tensor_integrate(integrand, _bounds(cfg, chi0), quad)


def epsilon_factor(V_T, L, mode="as-printed"):
    """Geometric factor from the tube volume: ``(V_T / (pi L^3))^p``.

    ``p = 3`` as typeset; ``p = 1/3`` reads it as a length ratio.
    """
    ratio = V_T / (np.pi * L ** 3)
    if mode == "as-printed":
        return ratio ** 3
    if mode == "one-third":
        return ratio ** (1.0 / 3.0)
    raise DomainError(f"unknown epsilon mode {mode!r}; choose from {EPSILON_MODES}")


def mean_energy(V_T, L, V_chi, B3_sq_mean, exponent_mode="as-printed"):
    """Mean-field energy ``<M> = eps^3 L^2 V(chi) <(B^3)^2> / 2``.

    Returns ``(mean_M, eps)``.
    """
    for name, val in (("V_T", V_T), ("L", L), ("V_chi", V_chi)):
        if not val > 0:
            raise DomainError(f"{name} must be positive, got {val}")
    if B3_sq_mean < 0:
        raise DomainError(f"<(B3)^2> must be non-negative, got {B3_sq_mean}")
    eps = epsilon_factor(V_T, L, exponent_mode)
    return 0.5 * eps ** 3 * L ** 2 * V_chi * B3_sq_mean, eps


@dataclass
class EnergyReport:
    M: float
    levels: list = field(default_factory=list)
    V_T: float = 0.0
    mean_M: float = 0.0
    epsilon: float = 0.0
    epsilon_mode: str = "as-printed"

    def to_dict(self):
        return {"M": self.M, "V_levels": [{"chi": c, "V": v} for c, v in self.levels],
                "V_T": self.V_T, "mean_M": self.mean_M,
                "epsilon_mode": self.epsilon_mode, "epsilon": self.epsilon}


def energy_report(shape, cfg: TubeConfig, b=0.0, levels=(0.25, 0.5, 0.75, 1.0),
                  quad=QuadratureSpec(), B3_sq_mean=1.0, epsilon_mode="as-printed"):
    """Energy, volumes at each level, and the mean-field estimate.

    The mean-field estimate uses the outermost level as ``V(chi)`` and the
    whole tube (``chi = 1``) as ``V_T``.
    """
    levels = sorted(float(c) for c in levels)
    vols = [(c, surface_volume(shape, cfg, c, quad)) for c in levels]
    V_T = surface_volume(shape, cfg, 1.0, quad)
    M = knot_energy(shape, cfg, b, None, quad)
    mean_M, eps = mean_energy(V_T, cfg.length, vols[-1][1], B3_sq_mean, epsilon_mode)
    return EnergyReport(M, vols, V_T, mean_M, eps, epsilon_mode)


@dataclass(frozen=True)
class MarginalCheck:
    constant: bool
    max_relative_drift: float
    energies: tuple
    b_mode: str


def unstretched_b(shape, cfg):
    """Point-wise ``b = -B^1/B^3`` solving the unstretching constraint; zero when ``tau* = 0``."""
    try:
        unstretch_ratio(shape, cfg, 0.0, 0.5, 0.0)
    except NoDynamoError:
        return 0.0, "B1=0 (tau*=0)"
    return (lambda s, chi, phi: -unstretch_ratio(shape, cfg, s, chi, phi).field_ratio), "unstretch_ratio"


def marginal_energy_check(shape, cfg: TubeConfig, quad=QuadratureSpec(), times=(0.0, 1.0, 2.0),
                          B3=None, tol=1e-10, stretch_tol=1e-14):
    """Energy of an unstretched, constant cross-section tube at several times.

    ``B3`` may be a callable ``(t, s, chi, phi)``; by default the poloidal
    field is uniform. Raises :class:`DomainError` if the tube is stretched
    (``R_s`` or ``R_phi`` non-zero on the quadrature grid).
    """
    from .quadrature import nodes_weights

    axes = [nodes_weights(quad.rule, n, a, b_)[0] for n, (a, b_) in zip(quad.counts, _bounds(cfg, 1.0))]
    j = shape.jet(*np.meshgrid(*axes, indexing="ij"))
    scale = max(1.0, float(np.max(np.abs(j.R))))
    if np.max(np.abs(j.R_s)) > stretch_tol * scale or np.max(np.abs(j.R_phi)) > stretch_tol * scale:
        raise DomainError("stretched tube: marginal check requires R_s = R_phi = 0")

    b, mode = unstretched_b(shape, cfg)
    energies = []
    for t in times:
        prof = None if B3 is None else (lambda s, chi, phi, t=t: B3(t, s, chi, phi))
        energies.append(knot_energy(shape, cfg, b, prof, quad))
    E = np.array(energies)
    ref = max(abs(E[0]), np.finfo(float).tiny)
    drift = float(np.max(np.abs(E - E[0])) / ref)
    return MarginalCheck(drift < tol, drift, tuple(energies), mode)
