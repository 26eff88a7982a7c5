"""Command-line entry point: ``fluxknot <subcommand> [flags]``.

Machine-readable output goes to ``--out`` (CSV or JSON); stdout only gets a
one-line human summary. Exit status is 0 on success, 2 for configuration
errors and 3 for numerical-domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from . import config as C
from . import dynamo_solver as dyn
from .curve_geometry import frenet_at, frenet_serret_residual, make_curve
from .errors import ConfigError, DomainError
from .knot_energy import energy_report
from .quadrature import QuadratureSpec
from .reports import conformance_report
from .rotation_coefficients import rrc_check_report, rrc_table
from .tube_metric import TubeConfig, make_shape, sample_grid, tube_metric, printed_matrix_report

SUBCOMMANDS = ("frenet", "metric", "rrc", "energy", "dynamo", "validate")

# short flags per subcommand, on top of the canonical --section-key flags
_TUBE_ALIASES = {"shape.preset": ["--shape"], "tube.length": ["--length"],
                 "tube.linking": ["--linking"], "tube.kappa0": ["--kappa0"],
                 "tube.tau0": ["--tau0"]}
ALIASES = {
    "frenet": {"curve.preset": ["--curve"], "curve.a": ["--a"], "curve.c": ["--c"],
               "curve.turns": ["--turns"], "curve.p": ["--p"], "curve.q": ["--q"],
               "curve.R_major": ["--R-major"], "curve.r_minor": ["--r-minor"],
               "curve.n_samples": ["--n-samples"], "curve.h": ["--h"]},
    "metric": _TUBE_ALIASES,
    "rrc": _TUBE_ALIASES,
    "energy": dict(_TUBE_ALIASES, **{"quadrature.rule": ["--rule"], "energy.b": ["--b"]}),
    "dynamo": {"dynamo.lam": ["--lambda"], "dynamo.v1": ["--v1"], "dynamo.v3": ["--v3"],
               "dynamo.kappa0": ["--kappa0"], "dynamo.A0": ["--A0"], "dynamo.R0": ["--R0"],
               "dynamo.B0": ["--B0"], "dynamo.theta": ["--theta"], "dynamo.s_max": ["--s-max"],
               "dynamo.n_samples": ["--n-samples"], "dynamo.mode": ["--mode"],
               "dynamo.t0": ["--t0"], "dynamo.t1": ["--t1"]},
    "validate": _TUBE_ALIASES,
}


def canonical_flag(key):
    return "--" + key.replace(".", "-").replace("_", "-")


def build_parser():
    parser = argparse.ArgumentParser(prog="fluxknot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fluxknot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI config file; flags override its values")
        p.add_argument("--out", help="output file (default: fluxknot_<subcommand>.<csv|json>)")
        if name in ("metric", "dynamo"):
            p.add_argument("--report", action="store_true", help="emit the discrepancy report instead")
        if name == "rrc":
            p.add_argument("--check", action="store_true", help="emit the printed-formula check instead")
            p.add_argument("--entries", default="112,132",
                           help="comma-separated i A j triples (1-based, A: 1=s 2=chi 3=phi)")
        aliases = ALIASES.get(name, {})
        for key in C.DEFAULTS:
            flags = [canonical_flag(key)] + [a for a in aliases.get(key, []) if a != canonical_flag(key)]
            p.add_argument(*flags, dest=key, default=None, metavar=key.split(".")[1].upper(),
                           help=argparse.SUPPRESS if key not in aliases else None)
    return parser


# -- output helpers -------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def metadata(cfg, grid):
    return {"tool": "fluxknot", "version": __version__, "config_sha256": C.config_hash(cfg),
            "grid": grid, "config": cfg}


def render_json(meta, payload) -> str:
    return json.dumps(_clean({"metadata": meta, **payload}), indent=2, sort_keys=False) + "\n"


def render_csv(meta, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {json.dumps(_clean(meta), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def read_csv(path):
    """Parse an output CSV: ``(metadata, header, rows as str lists)``."""
    with open(path) as fh:
        first = fh.readline()
        meta = json.loads(first[2:])
        rows = list(csv.reader(fh))
    return meta, rows[0], rows[1:]


# -- builders ---------------------------------------------------------------------


def _tube(cfg):
    return TubeConfig(cfg["tube.length"], cfg["tube.linking"], cfg["tube.kappa0"], cfg["tube.tau0"])


def _shape(cfg):
    name = cfg["shape.preset"]
    return make_shape(name, **C.section(cfg, "shape", C.SHAPE_PARAMS[name]))


def _curve(cfg):
    name = cfg["curve.preset"]
    if name is None:
        raise ConfigError("missing required flag --curve (or 'preset' in the [curve] section)")
    return make_curve(name, **C.section(cfg, "curve", C.CURVE_PARAMS[name]))


def _quad(cfg):
    return QuadratureSpec(cfg["quadrature.rule"], cfg["quadrature.n_s"],
                          cfg["quadrature.n_chi"], cfg["quadrature.n_phi"])


def _grid_counts(cfg):
    return (cfg["grid.n_s"], cfg["grid.n_chi"], cfg["grid.n_phi"])


def _grid(cfg):
    return sample_grid(_tube(cfg), _grid_counts(cfg), (cfg["grid.chi_min"], cfg["grid.chi_max"]))


def _dyn_params(cfg):
    return dyn.DynamoParams(lam=cfg["dynamo.lam"], v1=cfg["dynamo.v1"], v3=cfg["dynamo.v3"],
                            kappa0=cfg["dynamo.kappa0"], B0=cfg["dynamo.B0"], A0=cfg["dynamo.A0"],
                            R0=cfg["dynamo.R0"], theta=cfg["dynamo.theta"])


def _s_samples(cfg):
    return np.linspace(0.0, cfg["dynamo.s_max"], cfg["dynamo.n_samples"])


# -- subcommands -------------------------------------------------------------------


def cmd_frenet(cfg, args):
    curve = _curve(cfg)
    h = cfg["curve.h"] or None
    n = cfg["curve.n_samples"]
    s_vals = np.linspace(0.0, curve.length, n)
    rows = []
    for s in s_vals:
        fr = frenet_at(curve, s, h)
        res = frenet_serret_residual(curve, s, h)
        rows.append([float(s), *fr.t_hat, *fr.n_hat, *fr.b_hat, fr.kappa, fr.tau, *res])
    header = ["s", "tx", "ty", "tz", "nx", "ny", "nz", "bx", "by", "bz",
              "kappa", "tau", "res1", "res2", "res3"]
    text = render_csv(metadata(cfg, {"n_samples": n}), header, rows)
    kap = np.array([r[10] for r in rows])
    return text, "csv", f"frenet: {n} samples, kappa in [{kap.min():.6g}, {kap.max():.6g}]"


def cmd_metric(cfg, args):
    shape, tube = _shape(cfg), _tube(cfg)
    grid = _grid(cfg)
    meta = metadata(cfg, {"n": list(_grid_counts(cfg))})
    if args.report:
        rows = printed_matrix_report(shape, tube, grid)
        out = [[r["entry"], r["max_abs_dev"],
                "s={s:.17g};chi={chi:.17g};phi={phi:.17g}".format(**r["where"])] for r in rows]
        flagged = [r["entry"] for r in rows if r["flagged"]]
        return (render_csv(meta, ["entry", "max_abs_dev", "where"], out), "csv",
                f"metric report: flagged entries {flagged or 'none'}")
    s, chi, phi = (a.ravel() for a in grid)
    m = tube_metric(shape, tube, s, chi, phi)
    points = [{"s": s[k], "chi": chi[k], "phi": phi[k], "g": m.g[:, :, k],
               "sqrt_g": m.sqrt_g[k], "valid": m.valid[k]} for k in range(s.size)]
    n_bad = int(np.sum(~m.valid))
    return (render_json(meta, {"points": points}), "json",
            f"metric: {s.size} points, {n_bad} invalid")


def _parse_entries(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if len(tok) != 3 or not tok.isdigit() or any(c not in "123" for c in tok):
            raise ConfigError(f"--entries: {tok!r} is not an 'iAj' triple of digits 1-3")
        out.append(tuple(int(c) - 1 for c in tok))
    if not out:
        raise ConfigError("--entries: no entries given")
    return out


def cmd_rrc(cfg, args):
    shape, tube = _shape(cfg), _tube(cfg)
    grid = _grid(cfg)
    meta = metadata(cfg, {"n": list(_grid_counts(cfg))})
    if args.check:
        rows = rrc_check_report(shape, tube, grid)
        out = [[r["quantity"], r["max_abs_dev"], r["verdict"]] for r in rows]
        return (render_csv(meta, ["quantity", "max_abs_dev", "verdict"], out), "csv",
                f"rrc check: {sum(r['verdict'] != 'consistent' for r in rows)} inconsistent")
    entries = _parse_entries(args.entries)
    rows = []
    for s, chi, phi in zip(*(a.ravel() for a in grid)):
        low = rrc_table(shape, tube, s, chi, phi).lowered
        rows.append([float(s), float(chi), float(phi), *(float(low[e]) for e in entries)])
    header = ["s", "chi", "phi"] + [f"G{i + 1}{a + 1}{j + 1}" for i, a, j in entries]
    return render_csv(meta, header, rows), "csv", f"rrc: {len(rows)} points"


def cmd_energy(cfg, args):
    shape, tube, quad = _shape(cfg), _tube(cfg), _quad(cfg)
    rep = energy_report(shape, tube, cfg["energy.b"], C.levels(cfg), quad,
                        cfg["energy.B3_sq_mean"], cfg["energy.epsilon_mode"])
    d = rep.to_dict()
    payload = {k: d[k] for k in ("M", "V_levels", "mean_M", "epsilon_mode", "epsilon")}
    payload["V_T"] = d["V_T"]
    meta = metadata(cfg, {"quadrature": {"rule": quad.rule, "n": list(quad.counts)}})
    return render_json(meta, payload), "json", f"energy: M={rep.M:.10g}, V_T={rep.V_T:.10g}"


def cmd_dynamo(cfg, args):
    params = _dyn_params(cfg)
    s = _s_samples(cfg)
    meta = metadata(cfg, {"n_samples": cfg["dynamo.n_samples"]})
    if args.report:
        summ = dyn.discrepancy_summary(params, s)
        return (render_json(meta, summ), "json",
                f"dynamo report: decay factor {summ['radius_decay']['factor']:.6g}")
    mode = "as-printed" if cfg["dynamo.mode"] in ("printed", "as-printed") else "exact"
    sol = dyn.solve(params, s, mode)
    t0, t1 = cfg["dynamo.t0"], cfg["dynamo.t1"]
    B0, B1 = sol.B3(s, t0), sol.B3(s, t1)
    res = sol.B3.residual(s, t0)
    rows = [list(map(float, r)) for r in zip(s, sol.R, sol.R_s, B0, B1, res)]
    header = ["s", "R", "R_s", "B3_t0", "B3_t1", "residual_eq68"]
    return (render_csv(meta, header, rows), "csv",
            f"dynamo ({mode}): {sol.classification}, R_inf={sol.R_inf:.6g}, "
            f"max |residual|={np.max(np.abs(res)):.3g}")


def cmd_validate(cfg, args):
    report = conformance_report(_shape(cfg), _tube(cfg), _dyn_params(cfg), _s_samples(cfg),
                                _quad(cfg), _grid_counts(cfg))
    meta = metadata(cfg, {"n": list(_grid_counts(cfg)),
                          "quadrature": list(_quad(cfg).counts),
                          "n_samples": cfg["dynamo.n_samples"]})
    bad = [k for k, v in report.items() if v["verdict"] == "inconsistent"]
    return (render_json(meta, {"sections": report}), "json",
            f"validate: {len(report)} sections, {len(bad)} inconsistent")


COMMANDS = {"frenet": cmd_frenet, "metric": cmd_metric, "rrc": cmd_rrc,
            "energy": cmd_energy, "dynamo": cmd_dynamo, "validate": cmd_validate}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = C.read_file(args.config) if args.config else {}
        overrides = {k: getattr(args, k) for k in C.DEFAULTS if getattr(args, k, None) is not None}
        cfg = C.effective_config(file_values, overrides)
        text, ext, summary = COMMANDS[args.command](cfg, args)
        path = args.out or f"fluxknot_{args.command}.{ext}"
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write output {path}: {exc}")
    except ConfigError as exc:
        print(f"fluxknot: config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"fluxknot: domain error: {exc}", file=sys.stderr)
        return 3
    print(f"{summary} -> {path}")
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
