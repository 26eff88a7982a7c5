"""Tensor-product quadrature with partition-independent reductions.

Integrands are evaluated in slabs along the first axis, optionally on a
thread pool capped by ``FLUXKNOT_THREADS``. The weighted values are summed
with :func:`math.fsum`, which is exactly rounded, so the result does not
depend on how the grid was split or on the number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

RULES = ("simpson", "gauss")


def worker_count() -> int:
    raw = os.environ.get("FLUXKNOT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FLUXKNOT_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise ConfigError(f"FLUXKNOT_THREADS must be a positive integer, got {raw!r}")
    return n


def nodes_weights(rule: str, n: int, a: float, b: float):
    """Nodes and weights on ``[a, b]``.

    For ``simpson`` ``n`` is the (even) number of intervals, giving ``n + 1``
    nodes; for ``gauss`` it is the number of Gauss-Legendre nodes.
    """
    if rule == "simpson":
        if n < 2 or n % 2:
            raise ConfigError(f"composite Simpson needs an even interval count, got {n}")
        x = np.linspace(a, b, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return x, w * (b - a) / (3 * n)
    if rule == "gauss":
        t, w = np.polynomial.legendre.leggauss(n)
        return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w
    raise ConfigError(f"unknown quadrature rule {rule!r}; choose from {RULES}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Rule and per-axis resolution for ``(s, chi, phi)`` integrals."""

    rule: str = "simpson"
    n_s: int = 32
    n_chi: int = 32
    n_phi: int = 32

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigError(f"unknown quadrature rule {self.rule!r}; choose from {RULES}")
        for name in ("n_s", "n_chi", "n_phi"):
            n = getattr(self, name)
            if n < 4:
                raise ConfigError(f"{name} must be >= 4, got {n}")
            if self.rule == "simpson" and n % 2:
                raise ConfigError(f"{name} must be even for Simpson, got {n}")

    @property
    def counts(self):
        return (self.n_s, self.n_chi, self.n_phi)

    def refined(self, factor=2) -> "QuadratureSpec":
        return QuadratureSpec(self.rule, self.n_s * factor, self.n_chi * factor, self.n_phi * factor)


def exact_sum(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel())


def evaluate_grid(func, axes, workers=None) -> np.ndarray:
    """Evaluate ``func(x0, x1, ...)`` on the tensor grid of ``axes``.

    The first axis is split into contiguous slabs, one per worker.
    """
    workers = worker_count() if workers is None else workers
    n0 = len(axes[0])
    slabs = np.array_split(np.arange(n0), min(workers, n0))

    def run(idx):
        grids = np.meshgrid(axes[0][idx], *axes[1:], indexing="ij")
        return np.broadcast_to(np.asarray(func(*grids), dtype=float), grids[0].shape)

    if len(slabs) == 1:
        return np.array(run(slabs[0]))
    with ThreadPoolExecutor(max_workers=len(slabs)) as pool:
        parts = list(pool.map(run, slabs))
    return np.concatenate(parts, axis=0)


def tensor_integrate(func, bounds, spec: QuadratureSpec, workers=None) -> float:
    """Integral of ``func(s, chi, phi)`` over the box ``bounds``."""
    axes, weights = zip(*(nodes_weights(spec.rule, n, a, b)
                          for n, (a, b) in zip(spec.counts, bounds)))
    values = evaluate_grid(func, axes, workers)
    w = np.einsum("i,j,k->ijk", *weights)
    return exact_sum(values * w)


def integrate_1d(func, a, b, rule="gauss", n=32, panels=1) -> float:
    """Composite 1-D integral with ``panels`` equal sub-intervals."""
    edges = np.linspace(a, b, panels + 1)
    terms = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = nodes_weights(rule, n, lo, hi)
        terms.append(np.asarray(func(x), dtype=float) * w)
    return exact_sum(np.concatenate(terms))
