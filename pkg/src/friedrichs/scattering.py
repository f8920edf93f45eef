"""Scattering matrices on the half line and their continuation into the lower half plane.

``S_K(z) = 1 - 2 pi i M(z) L_+(z)^{-1} M(z̄)^*`` is evaluated on the
``PLUS`` sheet, which is the first sheet in the upper half plane and the
continuation through ``(0, inf)`` below it; its only cut is ``(-inf, 0]``.
``S_E(z) = L_+(z)^{-1} L_-(z)`` uses the ``MINUS`` sheet for ``L_-``.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from friedrichs.contour import circle, laurent_coefficient
from friedrichs.errors import HigherOrderPole, IdentityViolation, NoPole, PoleHit
from friedrichs.livsic import livsic_matrix
from friedrichs.model import ModelSpec, eval_M
from friedrichs.resonances import Resonance, residue_radius
from friedrichs.stieltjes import SheetTag

LOGGER = logging.getLogger(__name__)

RESIDUE_FLOOR = 1e-10
ORDER2_RTOL = 1e-8


class Side(enum.Enum):
    ON_AXIS = "on_axis"
    CONTINUED_MINUS = "continued_minus"
    BOUNDARY_PLUS = "boundary_plus"
    BOUNDARY_MINUS = "boundary_minus"


class ResidueSource(enum.Enum):
    RESONANCE = "resonance"
    FORM_FACTOR_POLE = "form_factor_pole"


@dataclass(frozen=True, eq=False)
class ScatteringResidue:
    zeta: complex
    S_minus1: np.ndarray
    source: ResidueSource
    order2: float = 0.0

    def record(self):
        return {"zeta": [self.zeta.real, self.zeta.imag], "source": self.source.value,
                "residue_norm": float(np.linalg.norm(self.S_minus1, 2)),
                "order2_rel": self.order2}


def _side_flag(side: Side):
    if side is Side.BOUNDARY_PLUS:
        return 1
    if side is Side.BOUNDARY_MINUS:
        return -1
    return None


def _check_domain(z: np.ndarray, side: Side):
    if side is Side.ON_AXIS and np.any((z.imag != 0) | (z.real <= 0)):
        raise ValueError("ON_AXIS needs real z > 0")
    if side is Side.CONTINUED_MINUS and np.any(z.imag >= 0):
        raise ValueError("CONTINUED_MINUS needs Im z < 0")
    if side in (Side.BOUNDARY_PLUS, Side.BOUNDARY_MINUS) and np.any((z.imag != 0) | (z.real >= 0)):
        raise ValueError("boundary values need real z < 0")


def S_K_values(spec: ModelSpec, z, side=None) -> np.ndarray:
    """``S_K`` on the ``PLUS`` sheet at arbitrary points, vectorized.

    `side` (+1/-1) is needed only for points on ``(-inf, 0)``.
    """
    zz = np.asarray(z, dtype=complex)
    n = spec.n
    if not spec.M.terms:
        return np.broadcast_to(np.eye(n, dtype=complex), zz.shape + (n, n)).copy()
    Lp = livsic_matrix(spec, zz, SheetTag.PLUS, side)
    Mz = eval_M(spec.M, zz)
    Madj = eval_M(spec.M_adj, zz)
    return np.eye(n) - 2j * np.pi * Mz @ np.linalg.solve(Lp, Madj)


def S_K(spec: ModelSpec, z, side: Side = Side.ON_AXIS) -> np.ndarray:
    """Scattering matrix on ``K`` on the requested branch.

    Raises
    ------
    PoleHit
        Near the form-factor poles.
    """
    zz = np.asarray(z, dtype=complex)
    _check_domain(zz.reshape(-1), side)
    return S_K_values(spec, zz, _side_flag(side))


def S_E(spec: ModelSpec, lam, tol: float = 1e-10) -> np.ndarray:
    """``S_E(lam) = L_+^{-1} L_- = L_+^{-1} L_+^*`` for ``lam > 0``.

    Raises
    ------
    IdentityViolation
        If the two forms differ by more than `tol`.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("S_E is defined on the positive half line")
    Lp = livsic_matrix(spec, lam, SheetTag.PLUS)
    Lm = livsic_matrix(spec, lam, SheetTag.MINUS)
    a = np.linalg.solve(Lp, Lm)
    b = np.linalg.solve(Lp, np.conj(np.swapaxes(Lp, -1, -2)))
    gap = float(np.max(np.abs(a - b))) if a.size else 0.0
    if gap > tol * max(1.0, float(np.max(np.abs(a)))):
        raise IdentityViolation(f"S_E forms differ by {gap:.3e}")
    return a


def S_E_values(spec: ModelSpec, z) -> np.ndarray:
    """Continued ``S_E(z) = L_+(z)^{-1} L_-(z)`` off the axes."""
    zz = np.asarray(z, dtype=complex)
    return np.linalg.solve(livsic_matrix(spec, zz, SheetTag.PLUS),
                           livsic_matrix(spec, zz, SheetTag.MINUS))


def unitarity_defect(spec: ModelSpec, lam) -> np.ndarray:
    """``|S_K S_K^* - I|_F`` at each ``lam > 0``."""
    S = S_K(spec, lam, Side.ON_AXIS)
    prod = S @ np.conj(np.swapaxes(S, -1, -2))
    return np.linalg.norm(prod - np.eye(spec.n), axis=(-2, -1))


def symmetry_defect(spec: ModelSpec, z) -> np.ndarray:
    """``|S_K(z)^{-1} - S_K(z̄)^*|`` for ``z`` in the lower half plane."""
    z = np.asarray(z, dtype=complex)
    S = S_K_values(spec, z)
    Sc = S_K_values(spec, np.conj(z))
    return np.abs(np.linalg.inv(S) - np.conj(np.swapaxes(Sc, -1, -2))).max(axis=(-2, -1))


def negative_axis_symmetry_defect(spec: ModelSpec, lam) -> np.ndarray:
    """``|S_K(lam+i0)^{-1} - S_K(lam-i0)^*|`` for ``lam < 0``."""
    up = S_K(spec, lam, Side.BOUNDARY_PLUS)
    down = S_K(spec, lam, Side.BOUNDARY_MINUS)
    return np.abs(np.linalg.inv(up) - np.conj(np.swapaxes(down, -1, -2))).max(axis=(-2, -1))


def intertwining_defect(spec: ModelSpec, lam, f: np.ndarray) -> np.ndarray:
    """``|S_K M f - M S_E f|`` at each ``lam`` for a fixed vector `f`."""
    lam = np.asarray(lam, dtype=float)
    Mz = eval_M(spec.M, lam)
    lhs = S_K(spec, lam) @ Mz @ f
    rhs = Mz @ S_E(spec, lam) @ f
    return np.linalg.norm(lhs - rhs, axis=-1)


def negative_axis_margin(spec: ModelSpec, lo: float = -50.0, hi: float = -0.01,
                         samples: int = 2000) -> tuple:
    """Minimum of ``sigma_min(L_+(lam - i0))`` over ``[lo, hi]`` and where it occurs.

    A zero there would put a pole of ``S_K`` on the negative axis.
    """
    lam = -np.geomspace(-hi, -lo, samples)
    sv = np.linalg.svd(livsic_matrix(spec, lam, SheetTag.PLUS, -1), compute_uv=False)[:, -1]
    i = int(np.argmin(sv))
    return float(sv[i]), float(lam[i])


# ------------------------------------------------------------------ residues


def residue_SK(spec: ModelSpec, zeta: complex, others=(), radius=None,
               source: ResidueSource = ResidueSource.RESONANCE) -> ScatteringResidue:
    """Residue of ``S_K`` at an isolated point of the lower half plane.

    Raises
    ------
    NoPole
        If the residue norm is at most 1e-10.
    HigherOrderPole
        If the ``(z - zeta)^-2`` coefficient exceeds 1e-8 of the residue.
    """
    zeta = complex(zeta)
    r = residue_radius(spec, zeta, others) if radius is None else radius
    nodes, weights = circle(zeta, r)
    vals = S_K_values(spec, nodes)
    c1 = laurent_coefficient(vals, nodes, weights, zeta, 1)
    c2 = laurent_coefficient(vals, nodes, weights, zeta, 2)
    n1 = float(np.linalg.norm(c1, 2))
    if n1 <= RESIDUE_FLOOR:
        raise NoPole(f"S_K has no pole at {zeta} (residue norm {n1:.2e})")
    rel = float(np.linalg.norm(c2, 2)) / n1
    if rel > ORDER2_RTOL:
        raise HigherOrderPole(f"order-2 Laurent coefficient at {zeta} is {rel:.2e} of the residue")
    return ScatteringResidue(zeta, c1, source, rel)


def residue_SK_algebraic(spec: ModelSpec, res: Resonance) -> np.ndarray:
    """``-2 pi i M(zeta) Res L_+^{-1} M(zeta̅)^*`` from the resonance data."""
    z = res.zeta
    return -2j * np.pi * eval_M(spec.M, z) @ res.residue_Linv @ eval_M(spec.M_adj, z)


def collect_residues(spec: ModelSpec, resonances) -> list:
    """Nonzero residues of ``S_K`` over resonances and lower form-factor poles."""
    points = [r.zeta for r in resonances]
    out = []
    for r in resonances:
        try:
            out.append(residue_SK(spec, r.zeta, points, source=ResidueSource.RESONANCE))
        except NoPole:
            LOGGER.warning("resonance %s carries no scattering pole", r.zeta)
    for p in spec.lower_poles:
        others = points + [q for q in spec.pole_set if q != p]
        radius = min([1e-2, *[0.5 * abs(p - w) for w in others],
                      0.5 * (abs(p) if p.real >= 0 else abs(p.imag))])
        try:
            out.append(residue_SK(spec, p, radius=radius, source=ResidueSource.FORM_FACTOR_POLE))
        except NoPole:
            LOGGER.info("S_K is regular at the form-factor pole %s", p)
    return sorted(out, key=lambda s: (s.zeta.real, s.zeta.imag))


def laurent_split(spec: ModelSpec, residues, z) -> tuple:
    """Pole part and holomorphic remainder of ``S_K`` at ``z``."""
    z = complex(z)
    if z.imag >= 0:
        raise ValueError("laurent_split evaluates in the lower half plane")
    for r in residues:
        if abs(z - r.zeta) < 1e-13:
            raise PoleHit(f"z={z} coincides with a pole")
    main = sum((r.S_minus1 / (z - r.zeta) for r in residues),
               np.zeros((spec.n, spec.n), dtype=complex))
    return main, S_K_values(spec, z) - main


def holo_contour_norm(spec: ModelSpec, residues, zeta: complex, radius: float = 0.05,
                      m: int = 128) -> float:
    """``|(1/2 pi i) oint H_K dz|`` over a circle around `zeta`.

    The radius is reduced so the circle stays off the cut ``(-inf, 0]``.
    """
    cut = abs(zeta) if zeta.real >= 0 else abs(zeta.imag)
    r = min(radius, 0.5 * cut)
    nodes, weights = circle(zeta, r, m)
    S = S_K_values(spec, nodes)
    main = np.zeros_like(S)
    for res in residues:
        main += res.S_minus1[None, :, :] / (nodes - res.zeta)[:, None, None]
    holo = S - main
    return float(np.linalg.norm(laurent_coefficient(holo, nodes, weights, zeta, 1), 2))


def prop1_check(spec: ModelSpec, res: Resonance, others=()) -> float:
    """Largest principal angle between ``ker L_+(zeta)`` and the range of ``Res S_E``."""
    zeta = res.zeta
    r = residue_radius(spec, zeta, others)
    nodes, weights = circle(zeta, r)
    vals = S_E_values(spec, nodes)
    residue = laurent_coefficient(vals, nodes, weights, zeta, 1)
    u, s, _ = np.linalg.svd(residue)
    d = res.geometric_multiplicity
    rng = u[:, :d]
    return float(np.max(subspace_angles(rng, res.kernel_basis)))
