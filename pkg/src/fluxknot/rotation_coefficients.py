"""Rotation coefficients of the Frenet frame and of the tube triad.

Conventions
-----------
Frame derivatives are taken along the coordinate slots ``A`` of the chart
``(s, chi, phi)`` (indices 0, 1, 2 here, 1, 2, 3 in the usual notation).

* ``dtriad[A, i, alpha]`` -- Frenet components of ``d_A e_i``; contracting
  with a probe vector gives ``probe . d_A e_i``.
* ``mixed[A, j, i]`` -- ``Gamma^j_{A i}`` with ``d_A e_i = Gamma^j_{A i} e_j``.
* ``lowered[i, A, j]`` -- ``Gamma_{i A j} = e_i . d_A e_j``.

The base curve has constant curvature ``kappa0`` and torsion ``tau0``
(helical tubes), so the Frenet frame rotates uniformly along ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .errors import NoDynamoError
from .tube_metric import TubeConfig, _jet_theta, triad_from_jet

SLOTS = {"s": 0, "chi": 1, "phi": 2}
FRENET = {"t": 0, "n": 1, "b": 2}
TAU_STAR_MIN = 1e-12


# -- Frenet frame -----------------------------------------------------------------


def frenet_rrc(kappa, tau):
    """``(Gamma_nss, Gamma_nsb, Gamma_ssn, Gamma_bsn)`` as tabulated: ``(k, -tau, -k, -tau)``.

    The last entry carries the tabulated sign. The frame itself gives
    ``b . dn/ds = +tau``; see :func:`frenet_connection`.
    """
    return (kappa, -tau, -kappa, -tau)


def frenet_connection(kappa, tau) -> np.ndarray:
    """``C[j, i] = E_j . dE_i/ds`` for ``E = (t, n, b)``; exactly antisymmetric."""
    return np.array([[0.0, -kappa, 0.0],
                     [kappa, 0.0, -tau],
                     [0.0, tau, 0.0]])


def frenet_generator(kappa, tau) -> np.ndarray:
    """``dE_alpha/ds = A[alpha, beta] E_beta`` (rows t, n, b)."""
    return np.array([[0.0, kappa, 0.0],
                     [-kappa, 0.0, tau],
                     [0.0, -tau, 0.0]])


# -- triad derivatives ---------------------------------------------------------------


def _component_derivative(j, cfg, theta, wrt):
    """Derivative of the triad components at fixed Frenet frame."""
    c, sn = np.cos(theta), np.sin(theta)
    R, Rs, Rc, Rp = j.R, j.R_s, j.R_chi, j.R_phi
    if wrt == "s":
        dR, dRs, dRc, dRp, dth = Rs, j.R_ss, j.R_schi, j.R_sphi, -cfg.twist_rate
    elif wrt == "chi":
        dR, dRs, dRc, dRp, dth = Rc, j.R_schi, j.R_chichi, j.R_chiphi, 0.0
    elif wrt == "phi":
        dR, dRs, dRc, dRp, dth = Rp, j.R_sphi, j.R_chiphi, j.R_phiphi, 1.0
    else:
        raise ValueError(f"unknown derivative slot {wrt!r}")
    k, ts = cfg.kappa0, cfg.tau_star
    dc, ds_ = -sn * dth, c * dth
    zero = np.zeros(np.shape(R * c))
    de1 = [-k * (dR * c + R * dc),
           dRs * c + Rs * dc - ts * (dR * sn + R * ds_),
           dRs * sn + Rs * ds_ + ts * (dR * c + R * dc)]
    de2 = [zero, dRc * c + Rc * dc, dRc * sn + Rc * ds_]
    de3 = [zero, dRp * c + Rp * dc - dR * sn - R * ds_, dR * c + R * dc + dRp * sn + Rp * ds_]
    return np.array([[np.broadcast_to(x, zero.shape) for x in row] for row in (de1, de2, de3)],
                    dtype=float)


def triad_derivative(shape, cfg: TubeConfig, s, chi, phi, wrt="s") -> np.ndarray:
    """Frenet components of ``d_A e_i`` (analytic chain rule)."""
    j, theta = _jet_theta(shape, cfg, s, chi, phi)
    d = _component_derivative(j, cfg, theta, wrt)
    if wrt == "s":
        triad = triad_from_jet(j, cfg, theta)
        d = d + np.einsum("ia...,ab->ib...", triad, frenet_generator(cfg.kappa0, cfg.tau0))
    return d


def triad_derivative_fd(shape, cfg: TubeConfig, s, chi, phi, wrt="s", h=1e-4) -> np.ndarray:
    """Same as :func:`triad_derivative` by central differences.

    For ``wrt="s"`` the triad at ``s +- h`` is carried back to the frame at
    ``s`` with the exact rotation ``expm(+-h A)`` of a constant-curvature
    Frenet frame, then differenced.
    """
    def triad_at(ds, dchi, dphi):
        j, theta = _jet_theta(shape, cfg, np.add(s, ds), np.add(chi, dchi), np.add(phi, dphi))
        return triad_from_jet(j, cfg, theta)

    if wrt == "s":
        gen = frenet_generator(cfg.kappa0, cfg.tau0)
        plus = np.einsum("ia...,ab->ib...", triad_at(h, 0, 0), expm(h * gen))
        minus = np.einsum("ia...,ab->ib...", triad_at(-h, 0, 0), expm(-h * gen))
    elif wrt == "chi":
        plus, minus = triad_at(0, h, 0), triad_at(0, -h, 0)
    elif wrt == "phi":
        plus, minus = triad_at(0, 0, h), triad_at(0, 0, -h)
    else:
        raise ValueError(f"unknown derivative slot {wrt!r}")
    return (plus - minus) / (2 * h)


def _probe_vector(probe):
    if isinstance(probe, str):
        v = np.zeros(3)
        v[FRENET[probe]] = 1.0
        return v
    return np.asarray(probe, dtype=float)


def triad_rrc(shape, cfg: TubeConfig, s, chi, phi, probe, i, wrt="s", method="analytic"):
    """``probe . d_A e_i`` for triad index ``i`` in {1, 2, 3}.

    ``probe`` is ``"t"``, ``"n"``, ``"b"`` or a vector of Frenet components.
    ``method="fd"`` uses :func:`triad_derivative_fd` instead.
    """
    if method == "analytic":
        d = triad_derivative(shape, cfg, s, chi, phi, wrt)
    elif method == "fd":
        d = triad_derivative_fd(shape, cfg, s, chi, phi, wrt)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.einsum("a,a...->...", _probe_vector(probe), d[i - 1])


def gamma_components(shape, cfg: TubeConfig, s, chi, phi) -> np.ndarray:
    """``gamma[i, alpha]``: the triad written on the Frenet frame."""
    j, theta = _jet_theta(shape, cfg, s, chi, phi)
    return triad_from_jet(j, cfg, theta)


def printed_gamma_components(shape, cfg: TubeConfig, s, chi, phi) -> np.ndarray:
    """The seven tabulated non-zero components (valid for ``R_s = R_phi = 0``)."""
    j, theta = _jet_theta(shape, cfg, s, chi, phi)
    c, sn = np.cos(theta), np.sin(theta)
    R, ts = j.R, cfg.tau_star
    g = np.zeros((3, 3) + np.shape(theta))
    g[0, 0] = 1 - cfg.kappa0 * R * c
    g[0, 1] = -R * ts * sn
    g[0, 2] = R * ts * c
    g[1, 1] = j.R_chi * c
    g[1, 2] = j.R_chi * sn
    g[2, 1] = -R * sn
    g[2, 2] = R * c
    return g


# -- tables -----------------------------------------------------------------------


@dataclass(frozen=True)
class RRCTable:
    """Triad, its derivatives along the three slots, and the Frenet scalars."""

    triad: np.ndarray
    dtriad: np.ndarray
    kappa: float = 0.0
    tau: float = 0.0

    def frenet(self, wrt, probe, i):
        """``probe . d_A e_i`` with a Frenet probe name and triad index 1..3."""
        return self.dtriad[SLOTS[wrt], i - 1, FRENET[probe]]

    @property
    def mixed(self) -> np.ndarray:
        """``mixed[A, j, i] = Gamma^j_{A i}``."""
        # d_A e_i = Gamma^j_{A i} e_j  <=>  dtriad[A, i, :] = Gamma[A, :, i] @ triad
        sol = np.linalg.solve(self.triad.T, np.moveaxis(self.dtriad, 2, 1))
        return sol

    @property
    def lowered(self) -> np.ndarray:
        """``lowered[i, A, j] = e_i . d_A e_j``."""
        return np.einsum("ia,Aja->iAj", self.triad, self.dtriad)

    @property
    def frenet_entries(self):
        return frenet_rrc(self.kappa, self.tau)

    @property
    def frenet_table(self) -> np.ndarray:
        return frenet_connection(self.kappa, self.tau)


def rrc_table(shape, cfg: TubeConfig, s, chi, phi) -> RRCTable:
    """Point-wise table (scalar ``s, chi, phi``)."""
    triad = gamma_components(shape, cfg, s, chi, phi)
    d = np.array([triad_derivative(shape, cfg, s, chi, phi, w) for w in SLOTS])
    return RRCTable(triad, d, cfg.kappa0, cfg.tau0)


# -- the unstretching constraint ---------------------------------------------------


@dataclass(frozen=True)
class FieldState:
    """Contravariant field components on a magnetic surface (``B^2 = 0``)."""

    B1: float
    B3: float

    @property
    def b(self) -> float:
        return -self.B1 / self.B3

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.B1, 0.0, self.B3])


class Stretching(NamedTuple):
    frenet: np.ndarray
    triad: np.ndarray
    covariant: np.ndarray


def stretching_term(field: FieldState, v, rrc: RRCTable) -> Stretching:
    """``(B . grad) v = B^A v^i d_A e_i`` for constant flow moduli ``v^i``.

    Returned in Frenet components, triad components (the ``Gamma^j_{A i}``
    contraction) and covariant components ``e_j . (B . grad) v``.
    A zero vector is the unstretched state.
    """
    B = field.vector if isinstance(field, FieldState) else np.asarray(field, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.einsum("A,i,Aia->a", B, v, rrc.dtriad)
    return Stretching(w, np.einsum("A,i,Aji->j", B, v, rrc.mixed), rrc.triad @ w)


class Gamma112(NamedTuple):
    as_printed: float
    derivative_form: float
    connection: float

    @property
    def difference(self):
        return self.as_printed - self.derivative_form


def gamma_112(shape, cfg: TubeConfig, s, chi, phi) -> Gamma112:
    """Three readings of ``Gamma_112`` at a point.

    * ``as_printed``: ``(K^2 + tau*^2 R^2) / 2`` (the algebraic closed form),
    * ``derivative_form``: ``d_s (gamma_11^2 + gamma_12^2 + gamma_13^2) / 2``,
    * ``connection``: ``e_1 . d_s e_2`` from the index convention.
    """
    j, theta = _jet_theta(shape, cfg, s, chi, phi)
    K = 1 - j.R * cfg.kappa0 * np.cos(theta)
    as_printed = 0.5 * (K * K + cfg.tau_star ** 2 * j.R ** 2)
    triad = triad_from_jet(j, cfg, theta)
    d = triad_derivative(shape, cfg, s, chi, phi, "s")
    deriv = np.einsum("a...,a...->...", triad[0], d[0])
    conn = np.einsum("a...,a...->...", triad[0], d[1])
    return Gamma112(as_printed[()], deriv[()], conn[()])


def gamma_132(shape, cfg: TubeConfig, s, chi, phi):
    """``Gamma_132 = R R_chi tau*``."""
    j, _ = _jet_theta(shape, cfg, s, chi, phi)
    return (j.R * j.R_chi * cfg.tau_star)[()]


class UnstretchRatio(NamedTuple):
    b: float
    field_ratio: float
    gamma_112: float
    gamma_132: float
    approx_field_ratio: float
    printed_field_ratio: float


def unstretch_ratio(shape, cfg: TubeConfig, s, chi, phi) -> UnstretchRatio:
    """Toroidal/poloidal ratio imposed by ``B^1 G_112 + B^3 G_132 = 0``.

    ``b = G_112 / G_132`` is the ratio as usually quoted, with the algebraic
    ``G_112``. The constraint itself is solved by
    ``field_ratio = B^1/B^3 = -G_132 / G_112``; ``printed_field_ratio = -b``
    is the reciprocal reading and does not satisfy the constraint unless
    ``G_112 = +-G_132``. ``approx_field_ratio`` is the thin-tube estimate
    ``-2 R R_chi tau*``, which approximates ``field_ratio`` when
    ``G_112 ~ 1/2``; it is kept for comparison only.
    Raises :class:`NoDynamoError` when ``tau* = 0``: the toroidal component
    is then forced to zero.
    """
    if abs(cfg.tau_star) < TAU_STAR_MIN:
        raise NoDynamoError(
            "degenerate: tau*=0, toroidal component forced to zero under unstretching "
            "(no dynamo action)")
    g112 = gamma_112(shape, cfg, s, chi, phi).as_printed
    g132 = gamma_132(shape, cfg, s, chi, phi)
    j, _ = _jet_theta(shape, cfg, s, chi, phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = np.divide(g112, g132)[()]  # infinite where R_chi = 0
    return UnstretchRatio(b, -g132 / g112, g112, g132,
                          (-2 * j.R * j.R_chi * cfg.tau_star)[()], -b)


def constraint_residual(ratio: UnstretchRatio, field_ratio=None):
    """``B^1 G_112 + B^3 G_132`` with ``B^3 = 1`` and ``B^1`` = the given ratio."""
    r = ratio.field_ratio if field_ratio is None else field_ratio
    return r * ratio.gamma_112 + ratio.gamma_132


# -- typeset coefficient formulas -------------------------------------------------


def printed_rrc(shape, cfg: TubeConfig, s, chi, phi) -> dict:
    """Typeset closed forms for ``n.d_s e_{1,2,3}`` and ``t.d_s e_2``.

    The bracket structure of the typeset expressions is ambiguous; each is
    read left to right with brackets closed at the nearest operator that
    keeps the expression well formed.
    """
    j, theta = _jet_theta(shape, cfg, s, chi, phi)
    c, sn = np.cos(theta), np.sin(theta)
    k, ts, w = cfg.kappa0, cfg.tau_star, np.pi * cfg.linking / cfg.length
    R, Rs, Rc, Rp = j.R, j.R_s, j.R_chi, j.R_phi
    return {
        "n.ds_e1": k + (2 * Rs * w + ts * (Rs + R * w)) * sn + ts * (Rs + R * w) * c,
        "n.ds_e2": -j.R_schi * c - Rc * (2 * w + ts) * c,
        "n.ds_e3": (j.R_sphi + R * (2 * w - ts)) * c - (Rp * (2 * w + ts) + Rs) * sn,
        "t.ds_e2": -Rc * k * c,
    }


def rrc_check_report(shape, cfg: TubeConfig, grid, tol=1e-10):
    """Typeset coefficient formulas against direct differentiation."""
    s, chi, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in grid))
    d = triad_derivative(shape, cfg, s, chi, phi, "s")
    direct = {"n.ds_e1": d[0, 1], "n.ds_e2": d[1, 1], "n.ds_e3": d[2, 1], "t.ds_e2": d[1, 0]}
    printed = printed_rrc(shape, cfg, s, chi, phi)
    rows = []
    for key in direct:
        dev = float(np.max(np.abs(printed[key] - direct[key])))
        rows.append({"quantity": key, "max_abs_dev": dev,
                     "verdict": "consistent" if dev <= tol else "inconsistent"})
    return rows


def frenet_sign_report(kappa, tau):
    """Tabulated Frenet coefficients against the frame's own connection."""
    C = frenet_connection(kappa, tau)
    truth = (C[1, 0], C[1, 2], C[0, 1], C[2, 1])
    names = ("Gamma_nss", "Gamma_nsb", "Gamma_ssn", "Gamma_bsn")
    return [{"quantity": n, "tabulated": p, "frame": float(t), "max_abs_dev": abs(p - t),
             "verdict": "consistent" if p == t else "inconsistent"}
            for n, p, t in zip(names, frenet_rrc(kappa, tau), truth)]
