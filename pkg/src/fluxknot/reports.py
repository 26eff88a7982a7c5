"""Conformance report: typeset formulas checked against direct computation.

Each section carries ``max_abs_dev`` and a ``verdict`` (``consistent`` when
the deviation is at roundoff level, ``inconsistent`` otherwise), plus
section-specific details.
"""

from __future__ import annotations

import numpy as np

from . import dynamo_solver as dyn
from .errors import NoDynamoError
from .knot_energy import mean_energy, surface_volume
from .quadrature import QuadratureSpec
from .rotation_coefficients import (constraint_residual, frenet_sign_report, gamma_112,
                                    rrc_check_report, unstretch_ratio)
from .tube_metric import (TubeConfig, circular_section_report, printed_matrix_report,
                          sample_grid)

TOL = 1e-10


def _verdict(dev, tol=TOL):
    return "consistent" if dev <= tol else "inconsistent"


def _section(rows, key="max_abs_dev", **extra):
    dev = max((r[key] for r in rows), default=0.0)
    return {"max_abs_dev": dev, "verdict": _verdict(dev), **extra, "rows": rows}


def metric_matrix_section(shape, cfg, grid):
    rows = printed_matrix_report(shape, cfg, grid)
    flagged = [r["entry"] for r in rows if r["flagged"]]
    return _section(rows, flagged=flagged)


def circular_section(shape, cfg, grid):
    rows = circular_section_report(shape, cfg, grid)
    return _section(rows, flagged=[r["entry"] for r in rows if r["flagged"]])


def gamma_112_section(shape, cfg, grid):
    g = gamma_112(shape, cfg, *grid)
    dev = float(np.max(np.abs(g.as_printed - g.derivative_form)))
    dev_conn = float(np.max(np.abs(g.as_printed - g.connection)))
    return {"max_abs_dev": dev, "verdict": _verdict(dev),
            "max_abs_dev_vs_connection": dev_conn,
            "max_abs_as_printed": float(np.max(np.abs(g.as_printed))),
            "max_abs_derivative_form": float(np.max(np.abs(g.derivative_form)))}


def rrc_section(shape, cfg, grid):
    return _section(rrc_check_report(shape, cfg, grid, TOL))


def frenet_sign_section(cfg):
    rows = frenet_sign_report(cfg.kappa0, cfg.tau0)
    return _section(rows)


def unstretch_section(shape, cfg, grid):
    try:
        u = unstretch_ratio(shape, cfg, *grid)
    except NoDynamoError as exc:
        return {"max_abs_dev": 0.0, "verdict": "degenerate", "message": str(exc)}
    dev = float(np.max(np.abs(u.printed_field_ratio - u.field_ratio)))
    return {"max_abs_dev": dev, "verdict": _verdict(dev),
            "max_abs_constraint_residual": float(np.max(np.abs(constraint_residual(u)))),
            "max_abs_constraint_residual_printed": float(np.max(np.abs(
                constraint_residual(u, u.printed_field_ratio)))),
            "max_abs_dev_approx": float(np.max(np.abs(u.approx_field_ratio - u.field_ratio))),
            "max_abs_field_ratio": float(np.max(np.abs(u.field_ratio))),
            "max_abs_printed_field_ratio": float(np.max(np.abs(u.printed_field_ratio)))}


def epsilon_section(shape, cfg, quad, B3_sq_mean=1.0, chi=1.0):
    V_T = surface_volume(shape, cfg, 1.0, quad)
    V = surface_volume(shape, cfg, chi, quad)
    out = {}
    for mode in ("as-printed", "one-third"):
        M, eps = mean_energy(V_T, cfg.length, V, B3_sq_mean, mode)
        out[mode] = {"epsilon": eps, "mean_M": M}
    ratio = V_T / (np.pi * cfg.length ** 3)
    dev = abs(out["as-printed"]["mean_M"] - out["one-third"]["mean_M"])
    return {"max_abs_dev": dev, "verdict": _verdict(dev), "V_T": V_T, "volume_ratio": ratio,
            "mode_factor": ratio ** 8, "modes": out}


def dynamo_sections(params, s):
    summ = dyn.discrepancy_summary(params, s)
    return summ["radius_decay"], summ["field_transport"]


def conformance_report(shape, cfg: TubeConfig, params: dyn.DynamoParams, s_grid,
                       quad: QuadratureSpec = QuadratureSpec(), grid_counts=(9, 5, 8)):
    """All discrepancy sections for one scenario, keyed by section name."""
    grid = sample_grid(cfg, grid_counts)
    radius, field = dynamo_sections(params, s_grid)
    return {
        "metric_matrix": metric_matrix_section(shape, cfg, grid),
        "circular_section_matrix": circular_section(shape, cfg, grid),
        "gamma_112_derivative_vs_algebraic": gamma_112_section(shape, cfg, grid),
        "rrc_printed_forms": rrc_section(shape, cfg, grid),
        "frenet_coefficient_signs": frenet_sign_section(cfg),
        "unstretch_ratio": unstretch_section(shape, cfg, grid),
        "radius_decay_constant": radius,
        "field_transport_solution": field,
        "epsilon_exponent_modes": epsilon_section(shape, cfg, quad),
    }
