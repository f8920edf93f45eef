"""Vectorized composite Gauss-Legendre quadrature with panel bisection.

Used by the verification paths (moments of the spectral density, Hardy-space
pairings). The integrand receives a 1-D array of nodes and returns an array
whose leading axis runs over the nodes.
"""
from __future__ import annotations

import numpy as np

from friedrichs.errors import NoConvergence

_X20, _W20 = np.polynomial.legendre.leggauss(20)
_X10, _W10 = np.polynomial.legendre.leggauss(10)


def _panel_sums(f, a, b, x, w):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
    vals = np.asarray(f(nodes))
    vals = vals.reshape((a.size, x.size) + vals.shape[1:])
    wts = half[:, None] * w[None, :]
    return np.einsum("pk,pk...->p...", wts, vals)


def adaptive_gl(f, edges, atol=1e-12, rtol=1e-12, max_panels=200000):
    """Integrate `f` over ``[edges[0], edges[-1]]``.

    Every panel is accepted when its 20-point and 10-point Gauss-Legendre
    values agree to within its length share of the tolerance, or to rounding
    of the panel value; otherwise it is bisected.

    Parameters
    ----------
    f : callable
        Vectorized integrand.
    edges : array_like
        Initial, increasing panel boundaries.
    atol, rtol : float
        Absolute and relative tolerance on the whole integral.

    Returns
    -------
    value : np.ndarray or complex
    err : float
        Sum of the accepted panel error estimates.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    total_len = edges[-1] - edges[0]
    accepted = None
    err_total = 0.0
    npanels = a.size
    scale = None
    while a.size:
        fine = _panel_sums(f, a, b, _X20, _W20)
        coarse = _panel_sums(f, a, b, _X10, _W10)
        if scale is None:
            scale = float(np.max(np.abs(fine.sum(axis=0)))) if fine.size else 0.0
        diff = np.abs(fine - coarse).reshape(a.size, -1).max(axis=1)
        tol = max(atol, rtol * scale)
        share = tol * (b - a) / total_len
        # a panel whose two rules agree to rounding cannot be improved by bisection
        floor = 64 * np.finfo(float).eps * np.abs(fine).reshape(a.size, -1).max(axis=1)
        ok = (diff <= np.maximum(share, floor)) | ((b - a) <= 1e-15 * np.maximum(1.0, np.abs(a)))
        part = fine[ok].sum(axis=0)
        accepted = part if accepted is None else accepted + part
        err_total += float(diff[ok].sum())
        mid = 0.5 * (a[~ok] + b[~ok])
        a, b = np.concatenate([a[~ok], mid]), np.concatenate([mid, b[~ok]])
        npanels += a.size
        if npanels > max_panels:
            raise NoConvergence(f"adaptive quadrature exceeded {max_panels} panels")
    return accepted, err_total


def half_line(f, breaks, X, atol=1e-12, rtol=1e-12):
    """Integrate `f` over ``[0, inf)``: panels on ``[0, X]`` plus ``lam = X/u``."""
    edges = np.unique(np.concatenate([[0.0, X], [b for b in breaks if 0 < b < X]]))
    head, e1 = adaptive_gl(f, edges, atol, rtol)

    def mapped(u):
        lam = X / u
        vals = np.asarray(f(lam))
        jac = (X / u ** 2).reshape((-1,) + (1,) * (vals.ndim - 1))
        return vals * jac

    tail, e2 = adaptive_gl(mapped, np.linspace(0.0, 1.0, 9), atol, rtol)
    return head + tail, e1 + e2


def graded_breaks(center, width, X):
    """Breakpoints clustering geometrically at `center` with finest scale `width`."""
    out = []
    step = max(width, 1e-300)
    while step < X:
        out.extend([center - step, center + step])
        step *= 2.0
    return [x for x in out if 0 < x < X]
