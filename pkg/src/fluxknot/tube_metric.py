"""Non-orthogonal flux-tube coordinates ``(s, chi, phi)`` and their metric.

The tube is ``x = X(s) + R(s, chi, phi) (cos(theta) n + sin(theta) b)`` with
the twisted angle ``phi = theta + 2 pi N s / L``. All vectors are expressed
by their components in the local Frenet frame ``(t, n, b)``; a triad is an
array ``E[i, alpha]`` with ``e_i = E[i, alpha] E_alpha``.

Every function broadcasts over array-valued ``s, chi, phi``: triads then have
shape ``(3, 3) + grid_shape``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Callable, Optional

import numpy as np

from . import _dd
from .errors import DomainError

TWO_PI = 2 * np.pi


# -- tube configuration -----------------------------------------------------------


@dataclass(frozen=True)
class TubeConfig:
    """Tube length, linking number and (constant) base curvature/torsion."""

    length: float
    linking: int = 0
    kappa0: float = 0.0
    tau0: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"tube length must be positive, got {self.length}")
        if int(self.linking) != self.linking:
            raise DomainError(f"linking number must be an integer, got {self.linking}")

    @property
    def tau_star(self) -> float:
        return effective_torsion(self)

    @property
    def twist_rate(self) -> float:
        """``2 pi N / L``: rate at which ``phi - theta`` grows along the tube."""
        return TWO_PI * self.linking / self.length

    @classmethod
    def from_curve(cls, curve, s: float, linking: int = 0):
        """Sample curvature and torsion of ``curve`` at ``s``; ``L`` is its length."""
        from .curve_geometry import frenet_at

        fr = frenet_at(curve, s)
        return cls(curve.length, linking, fr.kappa, fr.tau)


def effective_torsion(cfg: TubeConfig) -> float:
    """``tau* = tau0 - 2 pi N / L``."""
    return cfg.tau0 - cfg.twist_rate


def twist_angle(theta, s, cfg: TubeConfig):
    return theta + cfg.twist_rate * s


def theta_from_twist(phi, s, cfg: TubeConfig):
    return phi - cfg.twist_rate * s


# -- shape functions ---------------------------------------------------------------


@dataclass(frozen=True)
class ShapeJet:
    """Values of ``R`` and its partials up to second order at some points.

    A jet can stand in for a shape function: :meth:`jet` returns itself,
    broadcast against the query points.
    """

    R: object
    R_s: object = 0.0
    R_chi: object = 0.0
    R_phi: object = 0.0
    R_ss: object = 0.0
    R_schi: object = 0.0
    R_sphi: object = 0.0
    R_chichi: object = 0.0
    R_chiphi: object = 0.0
    R_phiphi: object = 0.0

    def jet(self, s, chi, phi) -> "ShapeJet":
        shape = np.broadcast(np.asarray(s), np.asarray(chi), np.asarray(phi)).shape
        return ShapeJet(*(np.broadcast_to(np.asarray(getattr(self, f.name), dtype=float), shape)
                          for f in fields(self)))

    def __call__(self, s, chi, phi):
        return self.jet(s, chi, phi).R


class ShapeFunction:
    """Tube radius field ``R(s, chi, phi)``.

    ``jet_func`` returns a :class:`ShapeJet` with analytic partials. Without
    it, first partials come from central differences with step ``1e-5 * scale``
    and second partials with step ``1e-3 * scale``.
    """

    def __init__(self, func: Callable, jet_func: Optional[Callable] = None,
                 scale: float = 1.0, name: str = "custom", params: Optional[dict] = None):
        self.func = func
        self.jet_func = jet_func
        self.scale = scale
        self.name = name
        self.params = dict(params or {})

    def __repr__(self):
        return f"ShapeFunction({self.name!r}, {self.params})"

    def __call__(self, s, chi, phi):
        return np.asarray(self.func(s, chi, phi), dtype=float)

    def jet(self, s, chi, phi) -> ShapeJet:
        s, chi, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, chi, phi)))
        if self.jet_func is not None:
            return self.jet_func(s, chi, phi).jet(s, chi, phi)
        return _difference_jet(self.func, s, chi, phi, 1e-5 * self.scale, 1e-3 * self.scale)

    def check(self, s, chi, phi):
        """Raise :class:`DomainError` unless ``R > 0`` and ``R_chi > 0`` at all points."""
        j = self.jet(s, chi, phi)
        if np.any(j.R <= 0):
            raise DomainError(f"shape {self.name}: R <= 0 on the domain")
        if np.any(j.R_chi <= 0):
            raise DomainError(f"shape {self.name}: R_chi <= 0, magnetic surfaces are not nested")


def _difference_jet(f, s, chi, phi, h, h2):
    x = [s, chi, phi]

    def at(*offsets):
        return f(*(xi + o for xi, o in zip(x, offsets)))

    def d1(i):
        e = [0.0] * 3
        e[i] = h
        m = [-v for v in e]
        return (at(*e) - at(*m)) / (2 * h)

    def d2(i, j):
        h = h2
        if i == j:
            e = [0.0] * 3
            e[i] = h
            m = [-v for v in e]
            return (at(*e) - 2 * at(0, 0, 0) + at(*m)) / (h * h)
        pp = [0.0] * 3
        pp[i] = h
        pp[j] = h
        pm = list(pp)
        pm[j] = -h
        mp = list(pp)
        mp[i] = -h
        mm = [-v for v in pp]
        return (at(*pp) - at(*pm) - at(*mp) + at(*mm)) / (4 * h * h)

    return ShapeJet(np.asarray(at(0, 0, 0), dtype=float), d1(0), d1(1), d1(2),
                    d2(0, 0), d2(0, 1), d2(0, 2), d2(1, 1), d2(1, 2), d2(2, 2))


def constant(R0: float) -> ShapeFunction:
    """``R = R0`` everywhere (a single surface; ``R_chi = 0``)."""
    return ShapeFunction(lambda s, chi, phi: R0 + 0.0 * (s + chi + phi),
                         lambda s, chi, phi: ShapeJet(R0), R0, "constant", {"R0": R0})


def linear_in_chi(a: float = 1.0, r0: float = 0.0) -> ShapeFunction:
    """``R = r0 + a chi``: uniform circular tube whose surfaces are nested circles."""
    return ShapeFunction(lambda s, chi, phi: r0 + a * chi + 0.0 * (s + phi),
                         lambda s, chi, phi: ShapeJet(r0 + a * chi, R_chi=a),
                         max(abs(a), abs(r0), 1e-300), "linear_in_chi", {"a": a, "r0": r0})


def separable(f, g, df, dg, d2f, d2g, name="separable", params=None) -> ShapeFunction:
    """``R = f(s) g(chi)`` with analytic first and second derivatives."""

    def jet(s, chi, phi):
        F, G = f(s), g(chi)
        Fs, Gc = df(s), dg(chi)
        return ShapeJet(F * G, Fs * G, F * Gc, 0.0, d2f(s) * G, Fs * Gc, 0.0, F * d2g(chi))

    return ShapeFunction(lambda s, chi, phi: f(s) * g(chi) + 0.0 * phi, jet, 1.0, name, params)


def modulated(a=0.3, r0=0.05, eps_s=0.2, k_s=1.0, eps_phi=0.1, m=2) -> ShapeFunction:
    """``R = (r0 + a chi)(1 + eps_s sin(k_s s))(1 + eps_phi cos(m phi))``.

    Depends on all three coordinates, so every metric entry is exercised.
    """

    def parts(s, chi, phi):
        A = r0 + a * chi
        S = 1 + eps_s * np.sin(k_s * s)
        Ss = eps_s * k_s * np.cos(k_s * s)
        Sss = -eps_s * k_s * k_s * np.sin(k_s * s)
        P = 1 + eps_phi * np.cos(m * phi)
        Pp = -eps_phi * m * np.sin(m * phi)
        Ppp = -eps_phi * m * m * np.cos(m * phi)
        return A, S, Ss, Sss, P, Pp, Ppp

    def func(s, chi, phi):
        A, S, _, _, P, _, _ = parts(s, chi, phi)
        return A * S * P

    def jet(s, chi, phi):
        A, S, Ss, Sss, P, Pp, Ppp = parts(s, chi, phi)
        return ShapeJet(A * S * P, A * Ss * P, a * S * P, A * S * Pp,
                        A * Sss * P, a * Ss * P, A * Ss * Pp, 0.0, a * S * Pp, A * S * Ppp)

    return ShapeFunction(func, jet, max(a, r0), "modulated",
                         {"a": a, "r0": r0, "eps_s": eps_s, "k_s": k_s, "eps_phi": eps_phi, "m": m})


def from_function(func, scale=1.0, name="custom") -> ShapeFunction:
    """User-supplied radius field; partials by central differences."""
    return ShapeFunction(func, None, scale, name)


def exponential_in_chi(c0=0.1, rate=1.0) -> ShapeFunction:
    """``R = c0 exp(rate chi)``: smooth, non-polynomial in ``chi``."""
    return ShapeFunction(
        lambda s, chi, phi: c0 * np.exp(rate * chi) + 0.0 * (s + phi),
        lambda s, chi, phi: ShapeJet(c0 * np.exp(rate * chi), R_chi=rate * c0 * np.exp(rate * chi),
                                     R_chichi=rate * rate * c0 * np.exp(rate * chi)),
        c0, "exponential_in_chi", {"c0": c0, "rate": rate})


SHAPES = {
    "constant": constant,
    "linear_in_chi": linear_in_chi,
    "modulated": modulated,
    "exponential_in_chi": exponential_in_chi,
}


def make_shape(name: str, **params) -> ShapeFunction:
    try:
        factory = SHAPES[name]
    except KeyError:
        raise DomainError(f"unknown shape preset {name!r}; choose from {sorted(SHAPES)}")
    return factory(**params)


# -- triad and metric ---------------------------------------------------------------


def _jet_theta(shape, cfg, s, chi, phi):
    s, chi, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s, chi, phi)))
    return shape.jet(s, chi, phi), theta_from_twist(phi, s, cfg)


def triad_from_jet(j: ShapeJet, cfg: TubeConfig, theta, printed_eq10=False) -> np.ndarray:
    """Triad components from a jet and the polar angle.

    ``printed_eq10`` reproduces the tangent row exactly as typeset in the
    source (``1 - kappa cos(theta)`` and ``R_s (cos(theta) - R tau* sin(theta))``),
    which differs from the derivative of the embedding.
    """
    c, sn = np.cos(theta), np.sin(theta)
    k, ts = cfg.kappa0, cfg.tau_star
    R = j.R
    if printed_eq10:
        e1 = [1 - k * c, j.R_s * (c - R * ts * sn), j.R_s * sn + R * ts * c]
    else:
        e1 = [1 - R * k * c, j.R_s * c - R * ts * sn, j.R_s * sn + R * ts * c]
    zero = np.zeros_like(np.asarray(R, dtype=float) * c)
    e2 = [zero, j.R_chi * c, j.R_chi * sn]
    e3 = [zero, j.R_phi * c - R * sn, R * c + j.R_phi * sn]
    return np.array([[np.broadcast_to(x, zero.shape) for x in row] for row in (e1, e2, e3)],
                    dtype=float)


def basis_triad(shape, cfg: TubeConfig, s, chi, phi) -> np.ndarray:
    """``E[i, alpha]`` with ``e_1 = dx/ds``, ``e_2 = dx/dchi``, ``e_3 = dx/dphi``."""
    j, theta = _jet_theta(shape, cfg, s, chi, phi)
    return triad_from_jet(j, cfg, theta)


@dataclass(frozen=True)
class MetricBundle:
    triad: np.ndarray
    g: np.ndarray
    det_g: np.ndarray
    triple: np.ndarray
    sqrt_g: np.ndarray
    valid: np.ndarray

    @property
    def shape(self):
        return self.g.shape[2:]


def triple_product(triad):
    return np.einsum("a...,a...->...", triad[0], np.cross(triad[1], triad[2], axis=0))


def metric_from_triad(triad) -> MetricBundle:
    """Gram matrix ``g_ij = e_i . e_j`` and derived quantities.

    ``det_g`` is the cofactor determinant of the Gram matrix and ``sqrt_g``
    the triple product, so the two are independent routes to the same
    number. Both are accumulated in double-double arithmetic: near the
    validity boundary ``g`` is badly conditioned and rounding its entries to
    float would cost several digits of the determinant.
    The bundle is valid where the tangent coefficient ``1 - R kappa cos(theta)``
    (the first triad component) is positive.
    """
    triad = np.asarray(triad, dtype=float)
    upper = {(i, j): _dd.dot3(triad[i], triad[j]) for i in range(3) for j in range(i, 3)}
    gdd = [[upper[min(i, j), max(i, j)] for j in range(3)] for i in range(3)]
    g = np.array([[_dd.value(gdd[i][j]) for j in range(3)] for i in range(3)])
    det_g = _dd.value(_dd.det3(gdd))
    cross = [_dd.add(_dd.two_prod(triad[1][b], triad[2][c]), _dd.neg(_dd.two_prod(triad[1][c], triad[2][b])))
             for b, c in ((1, 2), (2, 0), (0, 1))]
    acc = _dd.mul(_dd.lift(triad[0][0]), cross[0])
    for a in (1, 2):
        acc = _dd.add(acc, _dd.mul(_dd.lift(triad[0][a]), cross[a]))
    triple = _dd.value(acc)
    return MetricBundle(triad, g, det_g, triple, np.abs(triple), triad[0, 0] > 0)


def tube_metric(shape, cfg: TubeConfig, s, chi, phi) -> MetricBundle:
    return metric_from_triad(basis_triad(shape, cfg, s, chi, phi))


def orthogonal_limit_metric(r, theta, s, kappa):
    """Diagonal metric of orthogonal tube coordinates ``(r, theta, s)``.

    ``dl^2 = dr^2 + r^2 dtheta^2 + K^2 ds^2`` with ``K = 1 - kappa r cos(theta)``.
    ``s`` is accepted for signature symmetry; the metric does not depend on it
    when ``kappa`` is constant.
    """
    r, theta, s = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (r, theta, s)))
    K = 1 - kappa * r * np.cos(theta)
    g = np.zeros((3, 3) + r.shape)
    g[0, 0] = 1.0
    g[1, 1] = r * r
    g[2, 2] = K * K
    return g


# -- the printed matrix ----------------------------------------------------------


def printed_matrix(j: ShapeJet, cfg: TubeConfig, theta) -> np.ndarray:
    """Matrix entries exactly as typeset (including the asymmetric ones)."""
    R, Rs, Rc, Rp = j.R, j.R_s, j.R_chi, j.R_phi
    ts2 = cfg.tau_star ** 2
    K = 1 - R * cfg.kappa0 * np.cos(theta)
    rows = [
        [K * K + R * R * ts2 + Rs * Rs, Rc * Rs, R * R * ts2 + Rs * Rp],
        [Rc * Rs, Rc * Rc, Rc * Rp],
        [R * R * ts2 + Rs * Rs, Rc * Rp * R * R + Rp * Rp, R * R + Rp * Rp],
    ]
    shape = np.shape(K)
    return np.array([[np.broadcast_to(x, shape) for x in row] for row in rows], dtype=float)


def circular_section_matrix(j: ShapeJet, cfg: TubeConfig, theta) -> np.ndarray:
    """Reduced matrix for ``R_phi = 0``, ``tau* = 0`` as typeset (no ``R_s^2`` in g11)."""
    K = 1 - j.R * cfg.kappa0 * np.cos(theta)
    zero = np.zeros(np.shape(K))
    rows = [[K * K, j.R_chi * j.R_s, zero],
            [j.R_chi * j.R_s, j.R_chi ** 2, zero],
            [zero, zero, j.R ** 2]]
    return np.array([[np.broadcast_to(x, zero.shape) for x in row] for row in rows], dtype=float)


def sample_grid(cfg: TubeConfig, n=(9, 5, 8), chi_range=(0.1, 1.0)):
    """Tensor grid over one tube length, a chi band and a full phi period."""
    ns, nc, nphi = n
    s = np.linspace(0.0, cfg.length, ns)
    chi = np.linspace(chi_range[0], chi_range[1], nc)
    phi = np.linspace(0.0, TWO_PI, nphi, endpoint=False)
    return np.meshgrid(s, chi, phi, indexing="ij")


ENTRY_NAMES = [f"g{i + 1}{j + 1}" for i in range(3) for j in range(3)]


def printed_matrix_report(shape, cfg: TubeConfig, grid=None, tol=1e-12):
    """Entry-by-entry comparison of the typeset matrix with the Gram matrix.

    Returns a list of rows, one per entry, with the max absolute deviation,
    the grid point where it occurs, whether it exceeds ``tol`` (relative to
    the Gram magnitude), and the deviation against the triad variant built
    from the tangent row as typeset.
    """
    if grid is None:
        grid = sample_grid(cfg)
    s, chi, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in grid))
    j, theta = _jet_theta(shape, cfg, s, chi, phi)
    gram = metric_from_triad(triad_from_jet(j, cfg, theta)).g
    gram_printed_triad = metric_from_triad(triad_from_jet(j, cfg, theta, printed_eq10=True)).g
    printed = printed_matrix(j, cfg, theta)
    scale = max(1.0, float(np.max(np.abs(gram))))

    rows = []
    for a in range(3):
        for b in range(3):
            dev = np.abs(printed[a, b] - gram[a, b])
            k = np.unravel_index(np.argmax(dev), dev.shape) if dev.size else ()
            max_dev = float(dev[k]) if dev.size else 0.0
            rows.append({
                "entry": f"g{a + 1}{b + 1}",
                "max_abs_dev": max_dev,
                "where": {"s": float(s[k]), "chi": float(chi[k]), "phi": float(phi[k])},
                "flagged": max_dev > tol * scale,
                "max_abs_dev_printed_triad": float(np.max(np.abs(printed[a, b] - gram_printed_triad[a, b]))),
            })
    return rows


def circular_section_report(shape, cfg: TubeConfig, grid=None, tol=1e-12):
    """Same comparison for the reduced circular-section matrix.

    The shape and configuration are coerced to the reduced setting
    (``R_phi = 0`` and ``tau* = 0``) before comparison.
    """
    if grid is None:
        grid = sample_grid(cfg)
    s, chi, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in grid))
    cfg0 = replace(cfg, tau0=cfg.twist_rate)
    j, theta = _jet_theta(shape, cfg0, s, chi, phi)
    j = replace(j, R_phi=np.zeros_like(j.R))
    gram = metric_from_triad(triad_from_jet(j, cfg0, theta)).g
    printed = circular_section_matrix(j, cfg0, theta)
    dev = np.abs(printed - gram)
    scale = max(1.0, float(np.max(np.abs(gram))))
    return [{"entry": ENTRY_NAMES[3 * a + b],
             "max_abs_dev": float(np.max(dev[a, b])),
             "flagged": bool(np.max(dev[a, b]) > tol * scale)}
            for a in range(3) for b in range(3)]
