"""Gamov vectors, Hardy-space projections and the truncated decay semigroup.

Functions on the real line are carried by :class:`GridFunction`: samples on a
grid symmetric about zero, quadrature weights for that grid, and a declared
algebraic decay rate used by the tail corrections.

For the semigroup the grid is uniform and the function is stored as its full
``H^2_+`` representative, so the inverse of the restriction ``P_+`` is the
negative half of the samples. Boundary values of ``Q_+`` on the grid use the
odd-even principal-value rule, evaluated as an FFT convolution, after a
one-pole model of the function has been split off and integrated exactly.

Inner products are antilinear in the second slot.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sp_fft

from friedrichs.errors import ExtensionIllposed, TailTooFat
from friedrichs.model import ModelSpec, eval_M
from friedrichs.quadrature import adaptive_gl, graded_breaks
from friedrichs.resonances import Resonance
from friedrichs.scattering import S_K, Side

LOGGER = logging.getLogger(__name__)

TAIL_FRACTION = 0.01
EXTENSION_TOL = 1e-6
TAIL_FIT_TERMS = 5


def inner(u, v):
    """``(u, v) = sum u_i conj(v_i)``."""
    return complex(np.vdot(v, u))


# ------------------------------------------------------------------ Gamov vectors


@dataclass(frozen=True, eq=False)
class GamovVector:
    zeta: complex
    e0: np.ndarray
    k0: np.ndarray

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        return self.k0[None, :] / (self.zeta - lam)[:, None]

    def record(self):
        return {"zeta": [self.zeta.real, self.zeta.imag],
                "e0": [[c.real, c.imag] for c in self.e0],
                "k0": [[c.real, c.imag] for c in self.k0]}


def gamov(spec: ModelSpec, res: Resonance, column: int = 0) -> GamovVector:
    """Gamov vector for a kernel direction of ``L_+(zeta)``."""
    if not 0 <= column < res.geometric_multiplicity:
        raise IndexError(f"column {column} outside kernel of dimension {res.geometric_multiplicity}")
    e0 = np.asarray(res.kernel_basis[:, column], dtype=complex)
    e0 = e0 / np.linalg.norm(e0)
    k0 = eval_M(spec.M, res.zeta) @ e0
    return GamovVector(res.zeta, e0, k0)


# ------------------------------------------------------------------ Dirac pairing


def _pair_tail(a: complex, b: complex, cutoff: float, rtol: float = 1e-17) -> complex:
    """``(int_{-inf}^{-L} + int_L^inf) dlam / ((lam - a)(lam - b))`` as a series in ``1/L``."""
    if max(abs(a), abs(b)) >= 0.5 * cutoff:
        raise TailTooFat("cutoff too small for the tail expansion")
    total = 0.0 + 0.0j
    h = 1.0 + 0.0j  # h_m = sum_i a^i b^(m-i)
    apow = 1.0 + 0.0j
    m = 0
    while True:
        if m % 2 == 0:
            term = 2.0 * h * cutoff ** (-m - 1) / (m + 1)
            total += term
            if abs(term) <= rtol * abs(total) and m > 2:
                break
        m += 1
        apow = apow * a
        h = h * b + apow
        if m > 400:
            break
    return total


@dataclass(frozen=True)
class PairingResult:
    lhs: complex
    rhs: complex
    sign: int
    rel_err: float
    tail: complex


def dirac_pairing_check(g: GamovVector, w: complex, k, cutoff: float = 200.0,
                        tol: float = 1e-11) -> PairingResult:
    """Compare ``2 pi i (s(zeta̅), k0)`` with ``int (s(lam), k0 / (zeta - lam)) dlam``.

    The test function is ``s(lam) = k / (lam - w)`` with ``w`` in the lower
    half plane. The integral is computed by adaptive quadrature on
    ``[-cutoff, cutoff]`` plus a series for the two tails. The returned
    `sign` is the one for which ``rhs = sign * lhs``.

    Raises
    ------
    TailTooFat
        If the tail exceeds 1% of the integral.
    """
    w = complex(w)
    if w.imag >= 0:
        raise ValueError("test functions need their pole in the lower half plane")
    k = np.asarray(k, dtype=complex)
    zb = np.conj(g.zeta)
    lhs = 2j * np.pi * inner(k / (zb - w), g.k0)
    c = inner(k, g.k0)
    if c == 0:
        return PairingResult(0j, 0j, 1, 0.0, 0j)

    def f(lam):
        return c / ((lam - w) * (zb - lam))

    breaks = [-cutoff, cutoff]
    for center, width in ((w.real, abs(w.imag)), (g.zeta.real, abs(g.zeta.imag))):
        breaks += [x - cutoff for x in graded_breaks(center + cutoff, width, 2 * cutoff)]
        breaks.append(center)
    edges = np.unique(np.clip(breaks, -cutoff, cutoff))
    body, _ = adaptive_gl(f, edges, atol=tol * abs(lhs), rtol=0.0)
    tail = -c * _pair_tail(w, zb, cutoff)
    rhs = complex(body + tail)
    if abs(tail) > TAIL_FRACTION * abs(rhs):
        raise TailTooFat(f"tail {abs(tail):.2e} exceeds 1% of the pairing {abs(rhs):.2e}")
    ratio = rhs / lhs
    sign = 1 if ratio.real >= 0 else -1
    return PairingResult(complex(lhs), rhs, sign, float(abs(rhs - sign * lhs) / abs(lhs)), tail)


def dirac_closed_form(g: GamovVector, w: complex, k) -> complex:
    """Residue evaluation of the pairing integral: ``-2 pi i (s(zeta̅), k0)``."""
    k = np.asarray(k, dtype=complex)
    return -2j * np.pi * inner(k / (np.conj(g.zeta) - w), g.k0)


# ------------------------------------------------------------------ grid functions


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a ``K``-valued function on a grid symmetric about zero.

    Attributes
    ----------
    grid : (N,) float array
        Strictly increasing, symmetric nodes.
    values : (N, n) complex array
    tail_decay_exponent : float
        Declared decay ``|f(lam)| ~ |lam|^-p`` beyond the grid.
    weights : (N,) float array
        Quadrature weights; for a uniform grid these are the spacing.
    """

    grid: np.ndarray
    values: np.ndarray
    tail_decay_exponent: float = 1.0
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if grid.ndim != 1 or vals.shape[0] != grid.size:
            raise ValueError("grid and values do not match")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.allclose(grid, -grid[::-1], rtol=0, atol=1e-9 * max(1.0, grid[-1])):
            raise ValueError("grid must be symmetric about zero")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        w = self.weights
        if w is None:
            w = np.gradient(grid) if not self.uniform_spacing(grid) else np.full(grid.size, grid[1] - grid[0])
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weights", np.asarray(w, dtype=float))

    @staticmethod
    def uniform_spacing(grid) -> bool:
        d = np.diff(grid)
        # spacings of a large uniform grid carry rounding of order eps * |grid|
        atol = 64 * np.finfo(float).eps * float(np.max(np.abs(grid), initial=1.0))
        return bool(d.size and np.allclose(d, d[0], rtol=1e-10, atol=atol))

    @property
    def cutoff(self) -> float:
        # the weights integrate 1 over [-L, L], whatever the node placement
        return 0.5 * float(np.sum(self.weights))

    @property
    def is_uniform(self) -> bool:
        return self.uniform_spacing(self.grid)

    @property
    def positive(self) -> np.ndarray:
        return self.grid > 0

    def norm(self, half: bool = True) -> float:
        """Grid ``L^2`` norm, over ``lam > 0`` when `half`."""
        mask = self.positive if half else np.ones(self.grid.size, bool)
        return float(np.sqrt(np.sum(self.weights[mask] * np.sum(np.abs(self.values[mask]) ** 2, axis=1))))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.tail_decay_exponent, self.weights)


def uniform_grid(cutoff: float, points: int) -> np.ndarray:
    """Cell midpoints of ``points`` equal cells on ``[-cutoff, cutoff]``."""
    if points % 2:
        points += 1
    h = 2.0 * cutoff / points
    return -cutoff + h * (np.arange(points) + 0.5)


def graded_gl_grid(cutoff: float, features=(), nodes_per_panel: int = 10):
    """Composite Gauss-Legendre nodes and weights on ``[-cutoff, cutoff]``.

    Panels are geometric toward zero (from 1e-12, ratio 2, up to 0.5),
    width 0.125 on ``[0.5, 10]`` and geometric with ratio 1.2 beyond, mirrored
    to the negative side. ``features`` are ``(center, width)`` pairs around
    which panels are graded further (resonance peaks near the axis).
    """
    pos = [0.0]
    x = 1e-12
    while x < 0.5:
        pos.append(x)
        x *= 2.0
    pos += list(np.arange(0.5, 10.0, 0.125))
    x = 10.0
    while x < cutoff:
        pos.append(x)
        x *= 1.2
    pos.append(cutoff)
    edges = set(pos) | {-p for p in pos}
    for center, width in features:
        if width >= 0.5:
            continue
        for b in graded_breaks(abs(center) + cutoff, width, 2 * cutoff):
            edges.update((b - cutoff, cutoff - b))
    edges = np.array(sorted(e for e in edges if -cutoff <= e <= cutoff))
    gx, gw = np.polynomial.legendre.leggauss(nodes_per_panel)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).reshape(-1)
    weights = (half[:, None] * gw[None, :]).reshape(-1)
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    # symmetrize against rounding in the mirrored edges
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def rational_grid_function(grid, k, w, power: int = 1, weights=None) -> GridFunction:
    """``k / (lam - w)^power`` sampled on `grid`."""
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(k, dtype=complex)[None, :] / ((grid - w) ** power)[:, None]
    return GridFunction(grid, vals, float(power), weights)


def gamov_grid_function(g: GamovVector, cutoff: float = 500.0, points: int = 20000,
                        spacing_factor: float = 5.0, max_points: int = 2 ** 19) -> GridFunction:
    """``k0 / (lam - zeta)`` on a uniform grid fine enough for the resonance width.

    The spacing is reduced to at most ``|Im zeta| / spacing_factor``; if that
    needs more than `max_points` samples the cutoff shrinks instead, but not
    below ``4 |zeta|``.

    Note the sign: the eigenvectors of the semigroup are ``k (lam - zeta)^-1``,
    which differ from the Gamov vector ``k0 / (zeta - lam)`` by a factor -1.
    """
    h = 2.0 * cutoff / points
    hmax = abs(g.zeta.imag) / spacing_factor
    if h > hmax:
        points = int(np.ceil(2.0 * cutoff / hmax))
        if points > max_points:
            cutoff = max(0.5 * max_points * hmax, 4.0 * abs(g.zeta))
            points = int(np.ceil(2.0 * cutoff / hmax))
            LOGGER.info("cutoff reduced to %.4g", cutoff)
        LOGGER.info("grid refined to %d points for resonance width %.3e", points, abs(g.zeta.imag))
    grid = uniform_grid(cutoff, points)
    return GridFunction(grid, -g(grid), 1.0)


# ------------------------------------------------------------------ Q_+ off the axis


def _tail_fit(f: GridFunction, sign: int, terms: int = TAIL_FIT_TERMS):
    """Coefficients ``c_j`` of ``f(lam) ~ sum_j c_j (L / |lam|)^(p + j)`` on one side."""
    L = f.cutoff
    p = f.tail_decay_exponent
    sel = (sign * f.grid >= 0.5 * L)
    x = L / np.abs(f.grid[sel])
    V = np.stack([x ** (p + j) for j in range(terms)], axis=1)
    coef, *_ = np.linalg.lstsq(V, f.values[sel], rcond=None)
    return coef  # (terms, n)


def _cauchy_tail(f: GridFunction, z: complex) -> np.ndarray:
    """``(int_L^inf + int_-inf^-L) f(lam) / (lam - z) dlam`` from the fitted tail model."""
    L = f.cutoff
    p = f.tail_decay_exponent
    if abs(z) >= 0.5 * L:
        raise TailTooFat("evaluation point too far out for the tail expansion")
    out = np.zeros(f.values.shape[1], dtype=complex)
    for sign in (1, -1):
        coef = _tail_fit(f, sign)
        u = sign * z / L
        for j in range(coef.shape[0]):
            s, m, term = 0.0 + 0.0j, 0, 1.0 + 0.0j
            while True:
                add = term / (p + j + m)
                s += add
                if abs(add) < 1e-18 * max(abs(s), 1e-300) or m > 200:
                    break
                m += 1
                term *= u
            # right tail: +s c_j ; left tail: substitution lam = -mu flips the sign
            out += sign * s * coef[j]
    return out


def project_plus(f: GridFunction, z) -> np.ndarray:
    """``(Q_+ f)(z) = (1 / 2 pi i) int f(lam) / (lam - z) dlam`` for ``Im z > 0``.

    Raises
    ------
    TailTooFat
        If the tail contribution exceeds 1% of the result.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("project_plus evaluates in the upper half plane")
    hmax = float(np.max(f.weights))
    if f.is_uniform and z.imag < 2 * hmax:
        raise ValueError("evaluation point too close to the grid")
    kern = f.weights / (f.grid - z)
    body = kern @ f.values
    tail = _cauchy_tail(f, z)
    total = (body + tail) / (2j * np.pi)
    scale = max(float(np.linalg.norm(total)),
                float(np.abs(kern) @ np.linalg.norm(f.values, axis=1)) / (2 * np.pi))
    tnorm = float(np.linalg.norm(tail)) / (2 * np.pi)
    if tnorm > TAIL_FRACTION * scale:
        raise TailTooFat(f"tail {tnorm:.2e} exceeds 1% of the projection scale {scale:.2e}")
    return total


# ------------------------------------------------------------------ Q_+ on the axis


@lru_cache(maxsize=8)
def _odd_even_kernel_fft(N: int):
    """FFT of the odd-even kernel ``2/m`` (odd ``m``), padded for linear convolution."""
    size = sp_fft.next_fast_len(2 * N - 1)
    m = np.arange(-(N - 1), N)
    kern = np.zeros(m.size)
    odd = (m % 2) != 0
    kern[odd] = 2.0 / m[odd]
    return size, sp_fft.fft(kern, size)


def _odd_even_pv(values: np.ndarray) -> np.ndarray:
    """``PV int G(lam) / (lam - x_j) dlam`` on a uniform grid, odd-even rule."""
    N = values.shape[0]
    size, khat = _odd_even_kernel_fft(N)
    conv = sp_fft.ifft(sp_fft.fft(values, size, axis=0) * khat[:, None], axis=0)
    # PV_j = sum_k G_k K(k - j) = -(G * K)_j
    return -conv[N - 1:2 * N - 1]


def _pole_model(f: GridFunction):
    """Per component, ``c / (lam - beta)`` matching `f` at both grid ends.

    An ``H^2_+`` function with rational decay has the same ``1/lam`` and
    ``1/lam^2`` coefficients at both ends, so the remainder decays like
    ``lam^-3``. A fitted pole too close to the grid falls back to
    ``beta = -i cutoff / 10``.
    """
    x = f.grid
    L = f.cutoff
    Fp, Fm = f.values[-1], f.values[0]
    xp, xm = x[-1], x[0]
    den = Fp - Fm
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = (Fp * xp - Fm * xm) / den
    h = float(np.max(f.weights))
    bad = ~np.isfinite(beta) | (np.abs(beta.imag) < h) | (np.abs(beta) > 0.5 * L)
    beta = np.where(bad, -0.1j * L, beta)
    c = np.where(bad, 0.5 * (Fp * (xp - beta) + Fm * (xm - beta)), Fp * (xp - beta))
    return beta, c


def _pole_model_pv(beta, c, x, t: float) -> np.ndarray:
    """``PV int_R e^{-i lam t} c / ((lam - beta)(lam - x)) dlam`` in closed form."""
    beta, c = beta[None, :], c[None, :]
    x = x[:, None]
    lower = beta.imag < 0
    if t == 0:
        full = np.where(lower, -1j * np.pi, 1j * np.pi)
        return c * (0.0 - full) / (x - beta)
    pv_x = -1j * np.pi * np.exp(-1j * x * t)
    full = np.where(lower, -2j * np.pi * np.exp(-1j * beta * t), 0.0)
    return c * (pv_x - full) / (x - beta)


def q_plus_boundary(f: GridFunction, t: float = 0.0) -> np.ndarray:
    """Boundary values on the grid of ``Q_+ (e^{-i lam t} f)``.

    A one-pole model (:func:`_pole_model`) is subtracted and integrated in
    closed form over the whole line; the remainder, which decays like
    ``lam^-3``, goes through the odd-even principal value rule and is
    truncated at the grid ends.
    """
    if not f.is_uniform:
        raise ValueError("boundary projection needs a uniform grid")
    beta, c = _pole_model(f)
    x = f.grid
    phase = np.exp(-1j * x * t)[:, None]
    model = c[None, :] / (x[:, None] - beta[None, :])
    G = f.values * phase
    pv = _odd_even_pv((f.values - model) * phase) + _pole_model_pv(beta, c, x, t)
    return 0.5 * G + pv / (2j * np.pi)


def extension_residual(f: GridFunction) -> float:
    """``|Q_+ F - F| / |F|`` over ``lam > 0`` for the stored full-line samples."""
    q = q_plus_boundary(f, 0.0)
    mask = f.positive
    diff = f.with_values(np.where(mask[:, None], q - f.values, 0))
    return diff.norm() / max(f.norm(), 1e-300)


def extend_plus(f: GridFunction) -> GridFunction:
    """``P_+^{-1}`` for data given only on ``lam > 0``.

    The data are Cauchy projected, ``Q_+ (1_{lam > 0} f)``, and its boundary
    values fill ``lam < 0``. Recovering an ``H^2_+`` function from half-line
    data is an unstable continuation, so the result is accepted only if it
    reproduces the data; rational test functions should be sampled on the
    full line instead, where the extension is exact.

    Raises
    ------
    ExtensionIllposed
        If the residual on ``lam > 0`` exceeds 1e-6.
    """
    mask = f.positive[:, None]
    half = f.with_values(np.where(mask, f.values, 0))
    q = q_plus_boundary(half, 0.0)
    F = f.with_values(np.where(mask, f.values, q))
    resid = extension_residual(F)
    if resid > EXTENSION_TOL:
        raise ExtensionIllposed(f"H2+ extension residual {resid:.2e} exceeds {EXTENSION_TOL}")
    return F


def semigroup_apply(f: GridFunction, t: float, check: bool = True) -> GridFunction:
    """Truncated decay semigroup ``T_+(t) = P_+ Q_+ e^{-i t lam} P_+^{-1}``.

    `f` must carry its ``H^2_+`` representative on the full uniform grid. The
    result again carries the full-line values ``Q_+ e^{-i t lam} F``, which
    is the ``H^2_+`` extension of its restriction to ``lam > 0``.

    Raises
    ------
    ExtensionIllposed
        If `check` and the samples on ``lam > 0`` are not the restriction of
        an ``H^2_+`` function to within 1e-6.
    """
    if t < 0:
        raise ValueError("semigroup time must be nonnegative")
    if check:
        resid = extension_residual(f)
        if resid > EXTENSION_TOL:
            raise ExtensionIllposed(f"input is not in P+ H2+: residual {resid:.2e}")
    if t == 0:
        return f
    return f.with_values(q_plus_boundary(f, t))


def eigen_defect(f: GridFunction, zeta: complex, t: float) -> float:
    """``|T_+(t) f - e^{-i zeta t} f| / |f|`` over ``lam > 0``."""
    Tf = semigroup_apply(f, t)
    diff = Tf.with_values(Tf.values - np.exp(-1j * zeta * t) * f.values)
    return diff.norm() / f.norm()


# ------------------------------------------------------------------ residue expansion


@dataclass(frozen=True)
class ResidueExpansionResult:
    lhs: np.ndarray
    rhs: np.ndarray
    rel_err: float
    points: int = 0


def theorem3_check(spec: ModelSpec, residues, w: complex, k, z: complex,
                   cutoff: float = 200.0, nodes_per_panel: int = 10,
                   min_points: int = 4000) -> ResidueExpansionResult:
    """``Q_+ (S_- - 1) g`` at ``z`` against the pole sum over ``S_K`` residues.

    ``g(lam) = k / (lam - w)`` with ``w`` in the upper half plane, so
    ``Q_+ g = 0`` and subtracting the identity is exact. The nodes per
    panel are raised until the grid holds at least `min_points` nodes.
    """
    w, z = complex(w), complex(z)
    if w.imag <= 0 or z.imag <= 0:
        raise ValueError("w and z must lie in the upper half plane")
    k = np.asarray(k, dtype=complex)
    feats = [(r.zeta.real, abs(r.zeta.imag)) for r in residues]
    grid, weights = graded_gl_grid(cutoff, feats, nodes_per_panel)
    while grid.size < min_points:
        nodes_per_panel += 1
        grid, weights = graded_gl_grid(cutoff, feats, nodes_per_panel)
    S = np.empty((grid.size, spec.n, spec.n), dtype=complex)
    pos = grid > 0
    S[pos] = S_K(spec, grid[pos])
    S[~pos] = S_K(spec, grid[~pos], Side.BOUNDARY_MINUS)
    g = k[None, :] / (grid - w)[:, None]
    F = np.einsum("nij,nj->ni", S - np.eye(spec.n), g)
    f = GridFunction(grid, F, 5.0, weights)
    lhs = project_plus(f, z)
    rhs = np.zeros(spec.n, dtype=complex)
    for r in residues:
        rhs += r.S_minus1 @ (k / (r.zeta - w)) / (z - r.zeta)
    denom = max(float(np.linalg.norm(rhs)), 1e-300)
    return ResidueExpansionResult(lhs, rhs, float(np.linalg.norm(lhs - rhs)) / denom, int(grid.size))
