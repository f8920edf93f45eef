"""Closed-form Stieltjes transform of the jump density and its continuations.

``Phi(z) = int_0^inf G(lam) / (z - lam) dlam`` with ``G(lam) = M(lam)^* M(lam)``
is assembled from term pairs of ``M(z̄)^*`` and ``M(z)``. Each pair reduces to
the scalar kernel :func:`cauchy_kernel`, in which the only multivalued piece
is ``log(-z)``. Choosing the branch of that logarithm selects the sheet:

* ``FIRST``: principal branch, cut along ``[0, inf)``.
* ``PLUS``: the boundary value from above continued through ``(0, inf)`` into
  the lower half plane, which gives ``Phi - 2 pi i G`` there.
* ``MINUS``: the boundary value from below continued into the upper half
  plane, ``Phi + 2 pi i G``.

On the real axis a ``side`` of ``+1`` or ``-1`` picks ``lam + i0`` or
``lam - i0`` where the sheet has a cut.
"""
from __future__ import annotations

import enum
import logging
from functools import lru_cache

import numpy as np

from friedrichs._backend import cauchy_pairs
from friedrichs.errors import DegenerateConfluence, NonConvergent, OnBranchCut, PoleHit
from friedrichs.model import ModelSpec

LOGGER = logging.getLogger(__name__)

CONFLUENCE_TOL = 1e-10


class SheetTag(enum.Enum):
    FIRST = "first"
    PLUS = "plus"
    MINUS = "minus"


def log_minus_z(z, sheet: SheetTag = SheetTag.FIRST, side=None):
    """Branch of ``log(-z)`` belonging to `sheet`.

    Parameters
    ----------
    z : complex or array_like
    sheet : SheetTag
    side : {None, +1, -1}
        Needed only for points exactly on a cut of the chosen sheet.

    Raises
    ------
    OnBranchCut
        For ``z = 0`` or a cut point without a side.
    """
    z = np.asarray(z, dtype=complex)
    re, im = z.real, z.imag
    real = im == 0
    if np.any(real & (re == 0)):
        raise OnBranchCut("log(-z) evaluated at the branch point z = 0")
    out = np.log(-z)
    pos = real & (re > 0)
    neg = real & (re < 0)
    with np.errstate(divide="ignore"):
        loga = np.log(np.abs(re))
    if sheet is SheetTag.FIRST:
        if np.any(pos):
            if side not in (1, -1):
                raise OnBranchCut("first sheet on (0, inf) needs side=+1 or -1")
            out = np.where(pos, loga - 1j * np.pi * side, out)
        out = np.where(neg, loga + 0j, out)
    elif sheet is SheetTag.PLUS:
        out = np.where(im < 0, out - 2j * np.pi, out)
        out = np.where(pos, loga - 1j * np.pi, out)
        if np.any(neg):
            if side not in (1, -1):
                raise OnBranchCut("plus sheet on (-inf, 0) needs side=+1 or -1")
            out = np.where(neg, loga + (0 if side == 1 else -2j * np.pi), out)
    elif sheet is SheetTag.MINUS:
        out = np.where(im > 0, out + 2j * np.pi, out)
        out = np.where(pos, loga + 1j * np.pi, out)
        if np.any(neg):
            if side not in (1, -1):
                raise OnBranchCut("minus sheet on (-inf, 0) needs side=+1 or -1")
            out = np.where(neg, loga + (0 if side == -1 else 2j * np.pi), out)
    else:  # pragma: no cover
        raise ValueError(f"unknown sheet {sheet!r}")
    return out


def cauchy_kernel(p, j, q, k, z, sheet: SheetTag = SheetTag.FIRST, side=None) -> complex:
    """``int_0^inf dlam / ((z - lam)(lam - p)^j (lam - q)^k)`` in closed form.

    Equal poles ``p == q`` are merged into one pole of order ``j + k``.

    Raises
    ------
    NonConvergent
        If ``j + k < 2``.
    DegenerateConfluence
        If `z` is within 1e-10 of `p` or `q`, or ``0 < |p - q| < 1e-10``.
    """
    p, q, z = complex(p), complex(q), complex(z)
    if j + k < 2 or j < 0 or k < 0:
        raise NonConvergent(f"kernel orders j={j}, k={k} give a divergent integral")
    for w in (p, q):
        if w.imag == 0 and w.real >= 0:
            raise OnBranchCut(f"pole {w} lies on the integration path")
    if abs(z - p) < CONFLUENCE_TOL or abs(z - q) < CONFLUENCE_TOL:
        raise DegenerateConfluence(f"z={z} is within {CONFLUENCE_TOL} of a kernel pole")
    if 0 < abs(p - q) < CONFLUENCE_TOL:
        raise DegenerateConfluence(f"poles {p} and {q} nearly coincide")
    if k == 0:
        q, k = p, 0
    if j == 0:
        p, j = q, 0
    lz = log_minus_z(np.array([z]), sheet, side)
    val = cauchy_pairs(np.array([z]), lz, np.array([p]), np.array([j]),
                       np.array([q]), np.array([k]))
    return complex(val[0, 0])


@lru_cache(maxsize=128)
def _pair_table(spec: ModelSpec):
    """Pole pairs and coefficient products for all (s of M*, t of M) pairs."""
    adj, M = spec.M_adj, spec.M
    ps, js, qs, ks, cs = [], [], [], [], []
    for s in adj.terms:
        for t in M.terms:
            if 0 < abs(s.pole - t.pole) < CONFLUENCE_TOL:
                raise DegenerateConfluence(f"poles {s.pole} and {t.pole} nearly coincide")
            ps.append(s.pole)
            js.append(s.order)
            qs.append(t.pole)
            ks.append(t.order)
            cs.append(s.coeff @ t.coeff)
    n = spec.n
    if not cs:
        return (np.zeros(0, complex), np.zeros(0, np.int64), np.zeros(0, complex),
                np.zeros(0, np.int64), np.zeros((0, n, n), complex))
    return (np.array(ps), np.array(js, dtype=np.int64), np.array(qs),
            np.array(ks, dtype=np.int64), np.stack(cs))


def phi(spec: ModelSpec, z, sheet: SheetTag = SheetTag.FIRST, side=None) -> np.ndarray:
    """Stieltjes transform ``Phi`` on the requested sheet.

    Parameters
    ----------
    spec : ModelSpec
    z : complex or array_like
        Evaluation point(s).
    sheet : SheetTag
    side : {None, +1, -1}
        Side of the cut for real `z` (see :func:`log_minus_z`).

    Returns
    -------
    np.ndarray
        ``(n, n)`` for scalar `z`, ``z.shape + (n, n)`` otherwise.

    Raises
    ------
    PoleHit
        If a point lies within 1e-10 of the pole set.
    """
    zz = np.asarray(z, dtype=complex)
    flat = zz.reshape(-1)
    n = spec.n
    p, j, q, k, coef = _pair_table(spec)
    if coef.shape[0] == 0:
        return np.zeros(zz.shape + (n, n), dtype=complex)
    poles = spec.pole_set
    dist = np.abs(flat[:, None] - poles[None, :])
    if np.any(dist < CONFLUENCE_TOL):
        bad = flat[np.any(dist < CONFLUENCE_TOL, axis=1)][0]
        raise PoleHit(f"Phi evaluated at {bad}, on top of a form-factor pole")
    lz = log_minus_z(flat, sheet, side)
    kern = cauchy_pairs(flat, lz, p, j, q, k)
    out = np.einsum("zp,pij->zij", kern, coef)
    return out.reshape(zz.shape + (n, n))
