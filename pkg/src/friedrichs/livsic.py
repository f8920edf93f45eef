"""The Livšic matrix ``L(z) = z - A - Phi(z)`` and quantities built from it.

``L_+`` is :data:`SheetTag.PLUS`, ``L_-`` is :data:`SheetTag.MINUS`; at real
``lam > 0`` they are the boundary values from above and below. Its inverse is
the ``E``-block of the resolvent of the full Hamiltonian.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from friedrichs.errors import IdentityViolation, NearSingular
from friedrichs.model import ModelSpec, eval_G
from friedrichs.quadrature import graded_breaks, half_line
from friedrichs.stieltjes import SheetTag, phi

LOGGER = logging.getLogger(__name__)

SINGULAR_TOL = 1e-12
DENSITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LivsicValue:
    z: complex
    sheet: SheetTag
    L: np.ndarray
    det: complex
    sigma_min: float


def livsic_matrix(spec: ModelSpec, z, sheet: SheetTag = SheetTag.PLUS, side=None) -> np.ndarray:
    """Vectorized ``z I - A - Phi_sheet(z)``; shape ``z.shape + (n, n)``."""
    zz = np.asarray(z, dtype=complex)
    eye = np.eye(spec.n)
    return zz[..., None, None] * eye - spec.A - phi(spec, zz, sheet, side)


def L(spec: ModelSpec, z, sheet: SheetTag = SheetTag.PLUS, side=None) -> LivsicValue:
    """Livšic matrix at a single point with determinant and smallest singular value."""
    mat = livsic_matrix(spec, complex(z), sheet, side)
    sv = np.linalg.svd(mat, compute_uv=False)
    return LivsicValue(complex(z), sheet, mat, complex(np.linalg.det(mat)), float(sv[-1]))


def L_inverse(spec: ModelSpec, z, sheet: SheetTag = SheetTag.PLUS, side=None,
              tol: float = SINGULAR_TOL) -> np.ndarray:
    """Partial resolvent ``L(z)^{-1}``.

    Raises
    ------
    NearSingular
        If the smallest singular value of ``L(z)`` is at most `tol`.
    """
    val = L(spec, z, sheet, side)
    if val.sigma_min <= tol:
        raise NearSingular(f"L is numerically singular at z={z}", sigma_min=val.sigma_min)
    inv = np.linalg.inv(val.L)
    resid = np.linalg.norm(val.L @ inv - np.eye(spec.n))
    if resid > 1e-10:
        raise NearSingular(f"inverse residual {resid:.2e} at z={z}", sigma_min=val.sigma_min)
    return inv


def _density_parts(spec: ModelSpec, lam):
    lam = np.asarray(lam, dtype=float)
    inv_p = np.linalg.inv(livsic_matrix(spec, lam, SheetTag.PLUS))
    inv_m = np.linalg.inv(livsic_matrix(spec, lam, SheetTag.MINUS))
    G = eval_G(spec.M, lam)
    return inv_p, inv_m, G


def density_forms(spec: ModelSpec, lam):
    """The three expressions for the spectral density at ``lam > 0``.

    Returns ``(L+^-1 G L-^-1, (L-^-1 - L+^-1) / 2 pi i, L-^-1 G L+^-1)``,
    each of shape ``lam.shape + (n, n)``.
    """
    inv_p, inv_m, G = _density_parts(spec, lam)
    return inv_p @ G @ inv_m, (inv_m - inv_p) / (2j * np.pi), inv_m @ G @ inv_p


def spectral_density(spec: ModelSpec, lam, check: bool = True, tol: float = DENSITY_TOL):
    """Density of the sandwiched spectral measure ``P_E E(dlam) P_E`` on ``(0, inf)``.

    With `check` the two alternative forms are evaluated too; the tolerance
    is absolute, scaled by ``max(1, |L+^-1| |L-^-1|)`` so that sharp
    resonance peaks do not trip it through rounding alone.

    Raises
    ------
    IdentityViolation
        If the three forms disagree beyond tolerance.
    """
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise ValueError("spectral density is defined for lam > 0 only")
    if not check:
        inv_p, inv_m, G = _density_parts(spec, lam_arr)
        return inv_p @ G @ inv_m
    d1, d2, d3 = density_forms(spec, lam_arr)
    inv_p, inv_m, _ = _density_parts(spec, lam_arr)
    scale = np.maximum(1.0, np.linalg.norm(inv_p, 2, axis=(-2, -1))
                       * np.linalg.norm(inv_m, 2, axis=(-2, -1)))
    gap = np.maximum(np.abs(d1 - d2).max(axis=(-2, -1)), np.abs(d1 - d3).max(axis=(-2, -1)))
    if np.any(gap > tol * scale):
        worst = float(np.max(gap / scale))
        raise IdentityViolation(f"spectral density forms disagree by {worst:.3e} (scaled)")
    return d1


# ------------------------------------------------------------- bound states


@dataclass(frozen=True)
class BoundState:
    """Negative eigenvalue of ``H`` and its ``E``-block spectral weight."""

    energy: float
    weight: np.ndarray


def _first_sheet_eigs(spec, lam):
    mat = livsic_matrix(spec, lam, SheetTag.FIRST)
    mat = 0.5 * (mat + mat.conj().T)
    return np.linalg.eigh(mat)


def bound_states(spec: ModelSpec, log_lo: float = -700.0) -> list:
    """Eigenvalues of ``H`` on the negative axis with their weights.

    On ``(-inf, 0)`` the first-sheet ``L`` is Hermitian with increasing
    eigenvalue branches; ``-inf`` at ``-inf`` and ``+inf`` at ``0-`` whenever
    ``M(0)`` is invertible. Each branch has one zero, located by bracketing
    on ``s = log(-lam)``. The weight of the zero ``lam_b`` with eigenvector
    ``v`` is ``v v^* / (v^* L'(lam_b) v)``, the residue of ``L^{-1}``.

    Zeros closer to the origin than ``exp(log_lo)`` are not resolved and are
    reported as missing through a warning.
    """
    n = spec.n
    if not spec.M.terms:
        return []
    hi_s = np.log(2.0 + max(spec.a) + np.linalg.norm(phi(spec, -1.0)))
    while _first_sheet_eigs(spec, -np.exp(hi_s))[0][-1] >= 0:
        hi_s += 1.0
    out = []
    for branch in range(n):
        def g(s, b=branch):
            return _first_sheet_eigs(spec, -np.exp(s))[0][b]
        if g(log_lo) <= 0:
            LOGGER.warning("bound state branch %d not resolved above exp(%g)", branch, log_lo)
            continue
        s_root = brentq(g, log_lo, hi_s, xtol=1e-15, rtol=1e-15, maxiter=500)
        lam_b = -np.exp(s_root)
        _, vecs = _first_sheet_eigs(spec, lam_b)
        v = vecs[:, branch]
        h = abs(lam_b) * 1e-4
        dphi = (phi(spec, lam_b + h, SheetTag.FIRST) - phi(spec, lam_b - h, SheetTag.FIRST)) / (2 * h)
        deriv = np.real(v.conj() @ (np.eye(n) - dphi) @ v)
        out.append(BoundState(float(lam_b), np.outer(v, v.conj()) / deriv))
    return sorted(out, key=lambda b: b.energy)


def density_moments(spec: ModelSpec, atol: float = 1e-11, extra_breaks=(), features=()):
    """Zeroth and first moments of the spectral density over ``(0, inf)``.

    `features` are ``(center, width)`` pairs, typically resonances close to
    the axis, around which the panels are graded.

    Returns
    -------
    m0, m1 : np.ndarray
        ``int D`` and ``int lam D``.
    err : float
        Quadrature error estimate.
    """
    n = spec.n

    def f(lam):
        d = spectral_density(spec, lam, check=False)
        return np.stack([d, lam[:, None, None] * d], axis=1)

    scale = max([1.0, *spec.a, *np.abs(spec.pole_set)])
    X = 8.0 * scale
    breaks = [10.0 ** (-k) for k in range(1, 40)]
    for a in spec.a:
        breaks += graded_breaks(a, 1e-4, X)
    for center, width in features:
        if center > 0:
            breaks += graded_breaks(center, 0.1 * width, X)
    breaks += list(extra_breaks)
    val, err = half_line(f, breaks, X, atol=atol, rtol=0.0)
    return val[0].reshape(n, n), val[1].reshape(n, n), err


def completeness_defect(spec: ModelSpec, with_bound_states: bool = True, features=()):
    """``(int D + sum W_b - I, int lam D + sum lam_b W_b - A)``."""
    m0, m1, _ = density_moments(spec, features=features)
    if with_bound_states:
        for b in bound_states(spec):
            m0 = m0 + b.weight
            m1 = m1 + b.energy * b.weight
    return m0 - np.eye(spec.n), m1 - spec.A
