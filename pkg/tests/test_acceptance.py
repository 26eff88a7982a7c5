"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
quantities, then asserts. Run ``python tests/test_acceptance.py`` to get only
the summary lines.
"""

import math
import os
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

from fluxknot import dynamo_solver as dyn
from fluxknot.curve_geometry import frenet_at, frenet_serret_residual, helix
from fluxknot.errors import NoDynamoError
from fluxknot.knot_energy import knot_energy, marginal_energy_check, surface_volume
from fluxknot.quadrature import QuadratureSpec
from fluxknot.rotation_coefficients import (constraint_residual, frenet_connection, frenet_rrc,
                                            rrc_table, triad_derivative, triad_derivative_fd,
                                            unstretch_ratio)
from fluxknot.tube_metric import (ShapeJet, TubeConfig, linear_in_chi, metric_from_triad,
                                  modulated, orthogonal_limit_metric, printed_matrix_report,
                                  theta_from_twist, triad_from_jet)

sys.path.insert(0, os.path.dirname(__file__))
from oracles import random_valid_draw  # noqa: E402

HELIX_L = 2 * math.pi * math.sqrt(2)


def _line(n, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {n} {name}: {detail}"


def criterion_1():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_k = worst_t = worst_r = 0.0
    for a, c in rng.uniform(0.5, 2.0, (100, 2)):
        curve = helix(a, c)
        s = rng.uniform(0, curve.length)
        fr = frenet_at(curve, s)
        d = a * a + c * c
        worst_k = max(worst_k, abs(fr.kappa / (a / d) - 1))
        worst_t = max(worst_t, abs(fr.tau / (c / d) - 1))
        worst_r = max(worst_r, float(np.max(frenet_serret_residual(curve, s, 1e-4))))
    dt = time.perf_counter() - t0
    ok = worst_k < 1e-6 and worst_t < 1e-6 and worst_r < 1e-6 and dt < 5
    return ok, (f"max rel err kappa={worst_k:.2e} tau={worst_t:.2e}, max residual={worst_r:.2e}, "
                f"{dt:.2f}s")


def criterion_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    sym = pd = True
    det_err = circ_err = 0.0
    for _ in range(1000):
        cfg, j, (s, chi, phi) = random_valid_draw(rng)
        th = theta_from_twist(phi, s, cfg)
        m = metric_from_triad(triad_from_jet(j, cfg, th))
        sym &= bool(np.array_equal(m.g, m.g.T))
        pd &= bool(np.all(np.linalg.eigvalsh(m.g) > 0))
        det_err = max(det_err, abs(m.det_g - m.triple ** 2) / m.triple ** 2)
        # circular section: R_phi = 0, tau* = 0
        c0 = TubeConfig(cfg.length, cfg.linking, cfg.kappa0, cfg.twist_rate)
        jc = ShapeJet(j.R, j.R_s, j.R_chi, 0.0)
        g = metric_from_triad(triad_from_jet(jc, c0, th)).g
        K = 1 - j.R * cfg.kappa0 * math.cos(th)
        ref = np.array([[K * K + j.R_s ** 2, j.R_chi * j.R_s, 0], [j.R_chi * j.R_s, j.R_chi ** 2, 0],
                        [0, 0, j.R ** 2]])
        circ_err = max(circ_err, float(np.max(np.abs(g - ref))))
    # straight tube: (s, chi=r, phi=theta) metric is diag(1, r^2, K^2) reordered
    orth_err = 0.0
    for _ in range(200):
        r, th, s, k = rng.uniform(0.1, 1), rng.uniform(0, 2 * np.pi), rng.uniform(0, 5), rng.uniform(0, 0.9)
        g = metric_from_triad(triad_from_jet(ShapeJet(r, R_chi=1.0), TubeConfig(10.0, 0, k, 0.0), th)).g
        perm = [1, 2, 0]
        orth_err = max(orth_err, float(np.max(np.abs(g[np.ix_(perm, perm)]
                                                      - orthogonal_limit_metric(r, th, s, k)))))
    dt = time.perf_counter() - t0
    ok = sym and pd and det_err < 1e-12 and circ_err < 1e-14 and orth_err < 1e-14 and dt < 5
    return ok, (f"symmetric={sym}, pos.def={pd}, det rel err={det_err:.1e}, "
                f"circular-section err={circ_err:.1e}, straight-tube err={orth_err:.1e}, {dt:.2f}s")


def criterion_3():
    orth = printed_matrix_report(linear_in_chi(1.0, 0.2), TubeConfig(10.0, 0, 0.0, 0.0))
    orth_dev = max(r["max_abs_dev"] for r in orth)
    orth_ok = orth_dev <= 1e-15 and not any(r["flagged"] for r in orth)
    rows = {r["entry"]: r for r in printed_matrix_report(modulated(), TubeConfig(HELIX_L, 1, 0.5, 0.5))}
    flagged = sorted(e for e, r in rows.items() if r["flagged"])
    helical_ok = {"g13", "g31", "g32"} <= set(flagged) and all(
        rows[e]["max_abs_dev"] > 0 for e in ("g13", "g31", "g32"))
    return orth_ok and helical_ok, (
        f"orthogonal limit max dev={orth_dev:.1e} over 9 entries; helical flagged={flagged} "
        f"(g13 {rows['g13']['max_abs_dev']:.3g}, g31 {rows['g31']['max_abs_dev']:.3g}, "
        f"g32 {rows['g32']['max_abs_dev']:.3g})")


def criterion_4():
    rng = np.random.default_rng(99)
    anti = True
    for k, t in rng.uniform(-5, 5, (100, 2)):
        nss, _, ssn, _ = frenet_rrc(k, t)
        C = frenet_connection(k, t)
        anti &= bool(nss == -ssn and np.array_equal(C, -C.T))
    shape = modulated()
    fd_err = 0.0
    for _ in range(200):
        cfg = TubeConfig(rng.uniform(3, 12), int(rng.integers(-2, 3)), rng.uniform(0, 1), rng.uniform(-1, 1))
        p = (rng.uniform(0, cfg.length), rng.uniform(0.1, 1), rng.uniform(0, 2 * np.pi))
        probe, i = rng.normal(size=3), int(rng.integers(0, 3))
        probe /= np.linalg.norm(probe)
        a = triad_derivative(shape, cfg, *p, "s")[i] @ probe
        f = triad_derivative_fd(shape, cfg, *p, "s")[i] @ probe
        fd_err = max(fd_err, abs(a - f))
    g32_err = g132_err = con_err = 0.0
    for _ in range(200):
        cfg, j, p = random_valid_draw(rng)
        th = theta_from_twist(p[2], p[0], cfg)
        d = triad_derivative(j, cfg, *p, "s")
        g32_err = max(g32_err, abs(d[1, 0] - (-j.R_chi * cfg.kappa0 * math.cos(th))))
        jc = ShapeJet(j.R, j.R_s, j.R_chi, 0.0, j.R_ss, j.R_schi, 0.0, j.R_chichi, 0.0, 0.0)
        low = rrc_table(jc, cfg, *p).lowered
        g132_err = max(g132_err, abs(low[0, 2, 1] - j.R * j.R_chi * cfg.tau_star))
        if abs(cfg.tau_star) > 1e-6:
            u = unstretch_ratio(jc, cfg, *p)
            con_err = max(con_err, abs(constraint_residual(u)))
    try:
        unstretch_ratio(shape, TubeConfig(2 * math.pi, 1, 0.5, 1.0), 0.0, 0.5, 0.0)
        degenerate = False
    except NoDynamoError:
        degenerate = True
    ok = anti and fd_err < 1e-6 and g32_err < 1e-10 and g132_err < 1e-12 and con_err < 1e-12 and degenerate
    return ok, (f"antisymmetry exact={anti}, analytic-vs-fd={fd_err:.1e}, Gamma^s_s2 err={g32_err:.1e}, "
                f"Gamma_132 err={g132_err:.1e}, constraint residual={con_err:.1e}, "
                f"tau*=0 raises={degenerate}")


def criterion_5():
    t0 = time.perf_counter()
    q64 = QuadratureSpec("simpson", 64, 64, 64)
    straight, shape = TubeConfig(1.0), linear_in_chi(1.0)
    V = surface_volume(shape, straight, 1.0, q64)
    M = knot_energy(shape, straight, 0.0, quad=q64)
    helical = TubeConfig(HELIX_L, 1, 0.5, 0.5)
    Ms = knot_energy(modulated(), helical, 0.3, quad=q64)
    Mg = knot_energy(modulated(), helical, 0.3, quad=QuadratureSpec("gauss", 32, 32, 32))
    drift = marginal_energy_check(linear_in_chi(0.3, 0.05), helical, q64, (0.0, 1.0, 10.0)).max_relative_drift
    dt = time.perf_counter() - t0
    ok = (abs(V - math.pi) < 1e-8 and abs(M - math.pi / 4) < 1e-8 and abs(Ms - Mg) < 1e-7
          and drift == 0 and dt < 10)
    return ok, (f"|V-pi|={abs(V - math.pi):.1e}, |M-pi/4|={abs(M - math.pi / 4):.1e}, "
                f"|Simpson-Gauss|={abs(Ms - Mg):.1e}, marginal drift={drift:g}, {dt:.2f}s")


def criterion_6():
    s = np.linspace(0.0, 20.0, 81)
    res_exact = 0.0
    for lam, A0, v1, v3 in [(0.5, -0.1, 1, 1), (1.3, -0.05, 0.7, 1.4), (0.2, 0.03, 2.0, 0.5)]:
        sol = dyn.solve(dyn.DynamoParams(lam=lam, A0=A0, v1=v1, v3=v3), s, "exact")
        res_exact = max(res_exact, float(np.max(np.abs(sol.B3.residual(s)))))
    p = dyn.DynamoParams()
    scale_err = 0.0
    for mode in dyn.FIELD_MODES:
        f = dyn.solve(p, s, mode).B3
        scale_err = max(scale_err, float(np.max(np.abs(f(s, 1.7) / (math.exp(p.lam * 1.2) * f(s, 0.5)) - 1))))
    prof = dyn.radius_profile(p, s)
    r = p.lam / (2 * p.v3)
    oracle = p.R0 + p.A0 / r * (1 - np.exp(-r * s))
    prof_err = float(np.max(np.abs(prof.R - oracle)))
    shrinks = bool(np.all(np.diff(prof.R) < 0) and np.all(prof.R > prof.R_inf) and prof.R_inf > 0)
    pc = dyn.DynamoParams(lam=0.4, A0=0.0, R0=1.3, B0=2.0, v1=1.7)
    const_err = max(float(np.max(np.abs(dyn.solve(pc, s, m).B3(s, 0.9) / (2 * np.exp(0.4 * (0.9 - 1.3 * s / 1.7))) - 1)))
                    for m in dyn.FIELD_MODES)
    summ = dyn.discrepancy_summary(p, s)
    printed = dyn.field_solution(p, prof, "as-printed")
    rs_err = float(np.max(np.abs(printed.residual(s) - prof.R_s * printed(s))))
    factor = summ["radius_decay"]["factor"]
    ok = (res_exact < 1e-10 and scale_err < 1e-14 and prof_err < 1e-12 and shrinks
          and const_err < 1e-13 and rs_err < 1e-10 and abs(factor - 2) < 1e-15)
    return ok, (f"exact residual={res_exact:.1e}, time-scaling err={scale_err:.1e}, profile err={prof_err:.1e}, "
                f"shrinks to R_inf={prof.R_inf:g}: {shrinks}, constant-R err={const_err:.1e}, "
                f"printed residual - R_s B3={rs_err:.1e}, decay factor={factor:g}")


def criterion_7():
    t0 = time.perf_counter()
    rng = np.random.default_rng(17)
    v, B = dyn.random_solenoidal_field(rng), dyn.random_solenoidal_field(rng)
    dev = dyn.curl_advective_identity_check(v, B, dyn.CartesianGrid(32)).max_deviation
    e2 = [dyn.curl_advective_identity_check(v, B, dyn.CartesianGrid(n), order=2).max_deviation for n in (16, 32)]
    order2 = math.log2(e2[0] / e2[1])
    ed = [dyn.curl_advective_identity_check(v, B, dyn.CartesianGrid(n)).max_deviation for n in (16, 32)]
    order_default = math.log2(ed[0] / ed[1])
    dt = time.perf_counter() - t0
    ok = dev < 1e-6 and order2 >= 1.8 and order_default >= 1.8 and dt < 10
    return ok, (f"32^3 max deviation={dev:.1e}; observed order {order2:.2f} (2nd-order stencil), "
                f"{order_default:.1f} (default stencil), {dt:.2f}s")


def criterion_8():
    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        for n in ("1", "8"):
            path = os.path.join(tmp, f"validate_{n}.json")
            env = dict(os.environ, FLUXKNOT_THREADS=n)
            subprocess.run([sys.executable, "-m", "fluxknot.cli", "validate", "--out", path],
                           check=True, env=env, capture_output=True)
            with open(path, "rb") as fh:
                outs.append(fh.read())
    same = outs[0] == outs[1]
    return same, f"FLUXKNOT_THREADS=1 vs 8 byte-identical={same} ({len(outs[0])} bytes)"


CRITERIA = [
    (1, "frenet oracle", criterion_1),
    (2, "metric gram identity", criterion_2),
    (3, "printed matrix report", criterion_3),
    (4, "rotation coefficient suite", criterion_4),
    (5, "energy quadrature", criterion_5),
    (6, "dynamo suite", criterion_6),
    (7, "curl identity", criterion_7),
    (8, "determinism", criterion_8),
]


@pytest.mark.parametrize("n,name,func", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(n, name, func, capsys):
    ok, detail = func()
    with capsys.disabled():
        print("\n" + _line(n, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for n, name, func in CRITERIA:
        ok, detail = func()
        results.append(ok)
        print(_line(n, name, ok, detail))
    sys.exit(0 if all(results) else 1)
