"""Vectorised double-double arithmetic for small ill-conditioned reductions.

Values are ``(hi, lo)`` pairs of float arrays with ``hi + lo`` carrying about
106 bits. Only what the Gram determinant needs is provided.
"""
import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def add(x, y):
    s, e = two_sum(x[0], y[0])
    e = e + x[1] + y[1]
    return two_sum(s, e)


def neg(x):
    return -x[0], -x[1]


def mul(x, y):
    p, e = two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return two_sum(p, e)


def lift(a):
    a = np.asarray(a, dtype=float)
    return a, np.zeros_like(a)


def dot3(u, v):
    """``sum_k u[k] v[k]`` over the leading axis of two float arrays."""
    acc = two_prod(u[0], v[0])
    for k in (1, 2):
        acc = add(acc, two_prod(u[k], v[k]))
    return acc


def det3(m):
    """Cofactor determinant of a 3x3 nested list of double-double entries."""
    def minor(a, b, c, d):
        return add(mul(a, d), neg(mul(b, c)))
    t0 = mul(m[0][0], minor(m[1][1], m[1][2], m[2][1], m[2][2]))
    t1 = mul(m[0][1], minor(m[1][0], m[1][2], m[2][0], m[2][2]))
    t2 = mul(m[0][2], minor(m[1][0], m[1][1], m[2][0], m[2][1]))
    return add(add(t0, neg(t1)), t2)


def value(x):
    return x[0] + x[1]
