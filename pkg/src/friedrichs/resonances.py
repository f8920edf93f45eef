"""Resonances: zeros of ``det L_+`` on the continued sheet in the lower half plane.

Zeros are counted with the argument principle along rectangle boundaries,
isolated by bisection, refined by Newton's method on the determinant and
characterized by the kernel of ``L_+`` and the residue of ``L_+^{-1}``.

On the continued sheet ``det L_+`` has poles at the form-factor poles in the
lower half plane, so the winding number of a rectangle equals zeros minus
poles. Pole orders are measured by small-circle windings and added back.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from friedrichs.contour import circle, laurent_coefficient
from friedrichs.errors import (BoundaryZero, ContinuationLost, MaxDepthExceeded,
                               NumericalError)
from friedrichs.livsic import livsic_matrix
from friedrichs.model import ModelSpec
from friedrichs.stieltjes import SheetTag

LOGGER = logging.getLogger(__name__)

KERNEL_TOL = 1e-8
BOUNDARY_SIGMA_TOL = 1e-9
POLE_MARGIN = 1e-3


@dataclass(frozen=True)
class Rect:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def split(self, avoid=()):
        """Two parts across the longer side, left/bottom first.

        The cut sits at the midpoint unless a point of `avoid` lies within 5%
        of the side length of it; then the nearest clear fraction is used.
        """
        across_re = self.width >= self.height
        lo, hi = (self.re_min, self.re_max) if across_re else (self.im_min, self.im_max)
        coords = [(p.real if across_re else p.imag) for p in avoid if self.contains(p)]
        side = hi - lo
        for frac in (0.5, 0.45, 0.55, 0.4, 0.6, 0.35, 0.65, 0.3, 0.7):
            mid = lo + frac * side
            if all(abs(c - mid) > 0.05 * side for c in coords):
                break
        if across_re:
            return (replace(self, re_max=mid), replace(self, re_min=mid))
        return (replace(self, im_max=mid), replace(self, im_min=mid))

    def as_list(self):
        return [self.re_min, self.re_max, self.im_min, self.im_max]


@dataclass(frozen=True)
class SearchRegion:
    """Rectangle in the lower half plane plus solver controls."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    max_depth: int = 24
    newton_tol: float = 1e-14
    boundary_samples_per_edge: int = 32

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("degenerate search rectangle")
        if self.im_max > -1e-8:
            raise ValueError("search rectangle must satisfy im_max <= -1e-8")

    @property
    def rect(self) -> Rect:
        return Rect(self.re_min, self.re_max, self.im_min, self.im_max)


@dataclass(frozen=True, eq=False)
class Resonance:
    zeta: complex
    kernel_basis: np.ndarray
    geometric_multiplicity: int
    winding_multiplicity: int
    residue_Linv: np.ndarray
    newton_residual: float
    sigma_min: float = 0.0
    contour_radius: float = 0.0

    def record(self):
        return {
            "zeta": [self.zeta.real, self.zeta.imag],
            "d": self.geometric_multiplicity,
            "winding": self.winding_multiplicity,
            "residue_norm": float(np.linalg.norm(self.residue_Linv, 2)),
            "newton_residual": self.newton_residual,
            "sigma_min": self.sigma_min,
        }


# ------------------------------------------------------------ evaluators


def det_Lplus(spec: ModelSpec, z) -> np.ndarray:
    return np.linalg.det(livsic_matrix(spec, z, SheetTag.PLUS))


def sigma_min_Lplus(spec: ModelSpec, z) -> np.ndarray:
    return np.linalg.svd(livsic_matrix(spec, z, SheetTag.PLUS), compute_uv=False)[..., -1]


def _phase_sum(func, pts, max_rounds=60, min_step=1e-13):
    """Total phase change of `func` along the closed polyline `pts`.

    Segments whose phase increment reaches pi/2 are bisected.
    """
    pts = np.asarray(pts, dtype=complex)
    vals = func(pts)
    scale = float(np.max(np.abs(np.diff(pts))))
    for _ in range(max_rounds):
        inc = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(inc) >= 0.5 * np.pi
        if not np.any(bad):
            return float(np.sum(inc))
        idx = np.nonzero(bad)[0]
        seglen = np.abs(pts[idx + 1] - pts[idx])
        if np.any(seglen < min_step * max(scale, 1.0)):
            raise BoundaryZero("phase jumps on an unresolvably short boundary segment")
        mids = 0.5 * (pts[idx] + pts[idx + 1])
        mvals = func(mids)
        pts = np.insert(pts, idx + 1, mids)
        vals = np.insert(vals, idx + 1, mvals)
    raise BoundaryZero("boundary refinement did not settle")


def _rect_boundary(rect: Rect, per_edge: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, per_edge, endpoint=False)
    c = [complex(rect.re_min, rect.im_min), complex(rect.re_max, rect.im_min),
         complex(rect.re_max, rect.im_max), complex(rect.re_min, rect.im_max)]
    edges = [c[i] + t * (c[(i + 1) % 4] - c[i]) for i in range(4)]
    pts = np.concatenate(edges)
    return np.append(pts, pts[0])


def _dilate(rect: Rect, k: int) -> Rect:
    f = 0.01 * k
    return Rect(rect.re_min - f * rect.width, rect.re_max + f * rect.width,
                rect.im_min - f * rect.height, rect.im_max * (1.0 - f))


def _winding(func, rect: Rect, per_edge: int = 32, sigma_fn=None,
             sigma_tol: float = BOUNDARY_SIGMA_TOL, dilations: int = 3):
    """Winding number of `func` around `rect` and the rectangle actually used."""
    current = rect
    for attempt in range(dilations + 1):
        if attempt:
            current = _dilate(rect, attempt)
            LOGGER.warning("boundary of %s too close to a zero, dilating to %s",
                           rect.as_list(), current.as_list())
        pts = _rect_boundary(current, per_edge)
        try:
            if sigma_fn is not None and np.any(sigma_fn(pts[:-1]) <= sigma_tol):
                raise BoundaryZero("singular value below threshold on the boundary")
            total = _phase_sum(func, pts)
        except (BoundaryZero, NumericalError) as exc:
            LOGGER.debug("winding attempt %d failed: %s", attempt, exc)
            continue
        w = total / (2.0 * np.pi)
        if abs(w - round(w)) > 1e-3:
            LOGGER.debug("non-integer winding %.6f", w)
            continue
        return int(round(w)), current
    raise BoundaryZero(f"winding number undefined for {rect.as_list()} after {dilations} dilations")


def winding_number(spec: ModelSpec, rect, func=None, per_edge: int = 32) -> int:
    """Winding number of ``det L_+`` (or of `func`) around a rectangle.

    Parameters
    ----------
    spec : ModelSpec
    rect : Rect or SearchRegion or sequence
        ``(re_min, re_max, im_min, im_max)``.
    func : callable, optional
        Vectorized replacement for ``det L_+``; the singular-value check is
        skipped for it.

    Raises
    ------
    BoundaryZero
        If a zero sits on the boundary even after three 1% dilations.
    """
    rect = _as_rect(rect)
    if func is None:
        w, _ = _winding(lambda z: det_Lplus(spec, z), rect, per_edge,
                        sigma_fn=lambda z: sigma_min_Lplus(spec, z))
    else:
        w, _ = _winding(func, rect, per_edge)
    return w


def _as_rect(rect) -> Rect:
    if isinstance(rect, Rect):
        return rect
    if isinstance(rect, SearchRegion):
        return rect.rect
    return Rect(*[float(x) for x in rect])


# ------------------------------------------------------------ pole handling


def _det_pole_order(spec: ModelSpec, p: complex, radius: float) -> int:
    nodes = p + radius * np.exp(2j * np.pi * np.arange(256) / 256)
    total = _phase_sum(lambda z: det_Lplus(spec, z), np.append(nodes, nodes[0]))
    return -int(round(total / (2 * np.pi)))


class _PoleBook:
    """Orders of the poles of ``det L_+`` at the lower form-factor poles."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        self.poles = list(spec.lower_poles)
        self._orders = {}

    def order(self, p: complex) -> int:
        if p not in self._orders:
            others = [abs(p - q) for q in self.spec.pole_set if q != p]
            radius = min([1e-4, *[0.25 * d for d in others]])
            self._orders[p] = _det_pole_order(self.spec, p, radius)
        return self._orders[p]

    def inside(self, rect: Rect) -> int:
        return sum(self.order(p) for p in self.poles if rect.contains(p))


def avoid_poles(spec: ModelSpec, rect: Rect, margin: float = POLE_MARGIN) -> Rect:
    """Move rectangle edges so no pole of the model lies within `margin` of the boundary."""
    r = rect
    for p in spec.pole_set:
        for _ in range(4):
            dists = {"re_min": abs(p.real - r.re_min), "re_max": abs(p.real - r.re_max),
                     "im_min": abs(p.imag - r.im_min), "im_max": abs(p.imag - r.im_max)}
            near = {k: v for k, v in dists.items() if v < margin and r.contains(p, pad=margin)}
            if not near:
                break
            edge = min(near, key=near.get)
            coord = p.real if edge.startswith("re") else p.imag
            shift = margin if edge.endswith("min") else -margin
            r = replace(r, **{edge: coord + shift})
            LOGGER.warning("search rectangle moved away from pole %s: %s", p, r.as_list())
    return r


# ------------------------------------------------------------ Newton & characterization


def newton_det(spec: ModelSpec, z0: complex, tol: float = 1e-14, maxiter: int = 60):
    """Newton iteration on ``det L_+`` with a central-difference derivative.

    Returns ``(zeta, converged, last_step)``.
    """
    z = complex(z0)
    step = np.inf
    for _ in range(maxiter):
        h = 1e-6 * max(1.0, abs(z))
        pts = np.array([z, z + h, z - h, z + 1j * h, z - 1j * h])
        try:
            f = det_Lplus(spec, pts)
        except NumericalError:
            return z, False, step
        deriv = 0.5 * ((f[1] - f[2]) / (2 * h) - 1j * (f[3] - f[4]) / (2 * h))
        if deriv == 0 or not np.isfinite(deriv):
            return z, False, step
        dz = f[0] / deriv
        if not np.isfinite(dz):
            return z, False, step
        z = z - dz
        step = abs(dz)
        if step <= tol * max(1.0, abs(z)):
            return z, True, step
    return z, step <= 1e-10 * max(1.0, abs(z)), step


def _feature_distance(spec: ModelSpec, zeta: complex, others) -> float:
    d = [abs(zeta - w) for w in others if w != zeta]
    d += [abs(zeta - p) for p in spec.pole_set]
    # the continued sheet is cut along (-inf, 0]
    d.append(abs(zeta) if zeta.real >= 0 else abs(zeta.imag))
    return min(d)


def residue_radius(spec: ModelSpec, zeta: complex, others=()) -> float:
    return min(1e-2, 0.5 * _feature_distance(spec, zeta, others))


def characterize(spec: ModelSpec, zeta: complex, others=(), newton_step: float = 0.0,
                 kernel_tol: float = KERNEL_TOL) -> Resonance:
    """Kernel, multiplicities and ``L_+^{-1}`` residue at a refined zero."""
    mat = livsic_matrix(spec, zeta, SheetTag.PLUS)
    _, s, vh = np.linalg.svd(mat)
    mask = s <= kernel_tol
    if not np.any(mask):
        LOGGER.warning("no singular value below %g at %s (min %.3e)", kernel_tol, zeta, s[-1])
        mask = s == s[-1]
    basis = vh.conj().T[:, mask]
    r = residue_radius(spec, zeta, others)
    nodes, weights = circle(zeta, r)
    inv = np.linalg.inv(livsic_matrix(spec, nodes, SheetTag.PLUS))
    residue = laurent_coefficient(inv, nodes, weights, zeta, 1)
    ring = np.append(nodes, nodes[0])
    wind = int(round(_phase_sum(lambda z: det_Lplus(spec, z), ring) / (2 * np.pi)))
    return Resonance(complex(zeta), basis, int(basis.shape[1]), wind, residue,
                     float(newton_step), float(s[-1]), float(r))


def _accept(spec, zeta, rect, sigma_tol=KERNEL_TOL):
    if not rect.contains(zeta, pad=1e-9 * max(1.0, abs(zeta))):
        return False
    if zeta.imag >= 0:
        return False
    return float(sigma_min_Lplus(spec, zeta)) <= sigma_tol


def _local_winding(spec: ModelSpec, zeta: complex) -> int:
    nodes, _ = circle(zeta, residue_radius(spec, zeta), 128)
    ring = np.append(nodes, nodes[0])
    return int(round(_phase_sum(lambda z: det_Lplus(spec, z), ring) / (2 * np.pi)))


def find_resonances(spec: ModelSpec, region: SearchRegion) -> list:
    """All resonances inside `region`, sorted by ``(Re, Im)``.

    Raises
    ------
    MaxDepthExceeded
        If some sub-rectangle keeps a count above one, or Newton cannot
        confirm its single zero, at the maximal depth.
    """
    if not spec.M.terms:
        return []
    poles = _PoleBook(spec)
    det = lambda z: det_Lplus(spec, z)  # noqa: E731
    sig = lambda z: sigma_min_Lplus(spec, z)  # noqa: E731
    start = avoid_poles(spec, region.rect)
    found = []  # (zeta, count, step)
    unresolved = []
    stack = [(start, 0)]
    while stack:
        rect, depth = stack.pop(0)
        w, used = _winding(det, rect, region.boundary_samples_per_edge, sigma_fn=sig)
        count = w + poles.inside(used)
        LOGGER.debug("rect %s depth %d: %d zeros", used.as_list(), depth, count)
        if count < 0:
            raise NumericalError(f"negative zero count {count} in {used.as_list()}")
        if count == 0:
            continue
        has_pole = any(used.contains(p) for p in poles.poles)
        if count == 1 and not has_pole:
            zeta, ok, step = newton_det(spec, used.center, region.newton_tol)
            if ok and _accept(spec, zeta, used):
                found.append((zeta, 1, step))
                continue
        if depth >= region.max_depth:
            zeta, ok, step = newton_det(spec, used.center, region.newton_tol)
            # a multiple root is accepted only if it carries the whole count
            if ok and not has_pole and _accept(spec, zeta, used) and \
                    _local_winding(spec, zeta) == count:
                found.append((zeta, count, step))
                continue
            unresolved.append(used.as_list())
            continue
        a, b = used.split(poles.poles)
        stack.extend([(a, depth + 1), (b, depth + 1)])
    if unresolved:
        raise MaxDepthExceeded(f"{len(unresolved)} sub-rectangles unresolved", unresolved)
    # merge duplicates produced by zeros on shared edges
    roots = []
    for zeta, count, step in sorted(found, key=lambda r: (r[0].real, r[0].imag)):
        if roots and abs(roots[-1][0] - zeta) <= 1e-9 * max(1.0, abs(zeta)):
            continue
        roots.append((zeta, count, step))
    zetas = [r[0] for r in roots]
    out = [characterize(spec, z, zetas, step) for z, _, step in roots]
    return sorted(out, key=lambda r: (r.zeta.real, r.zeta.imag))


def default_search_box(spec: ModelSpec, delta: float = 1e-6) -> Rect:
    """Rectangle that contains every zero of ``det L_+`` in the lower half plane.

    Outside ``|z| > R`` the matrix ``z - A - Phi_+(z)`` is dominated by ``z``;
    `R` is doubled until ``|Phi_+| + |A| < |z| / 2`` on the box boundary.
    """
    R = 2.0 * max([1.0, *spec.a, *np.abs(spec.pole_set)])
    for _ in range(30):
        pts = _rect_boundary(Rect(-R, R, -R, -delta), 64)
        pts = pts[np.abs(pts) >= 0.5 * R]
        mats = livsic_matrix(spec, pts, SheetTag.PLUS) - pts[:, None, None] * np.eye(spec.n)
        if np.all(np.linalg.norm(mats, 2, axis=(-2, -1)) < 0.25 * np.abs(pts)):
            return Rect(-R, R, -R, -delta)
        R *= 2.0
    return Rect(-R, R, -R, -delta)


def global_search(spec: ModelSpec, delta: float = 1e-6, confirm: bool = True) -> list:
    """Resonances in a box large enough to hold all of them.

    With `confirm` the zero count is repeated on the doubled box and a
    mismatch raises :class:`NumericalError`.
    """
    box = default_search_box(spec, delta)
    region = SearchRegion(box.re_min, box.re_max, box.im_min, box.im_max, max_depth=40)
    res = find_resonances(spec, region)
    if confirm and spec.M.terms:
        big = Rect(2 * box.re_min, 2 * box.re_max, 2 * box.im_min, box.im_max)
        poles = _PoleBook(spec)
        w, used = _winding(lambda z: det_Lplus(spec, z), big, 64,
                           sigma_fn=lambda z: sigma_min_Lplus(spec, z))
        total = w + poles.inside(used)
        mine = sum(r.winding_multiplicity for r in res)
        if total != mine:
            raise NumericalError(f"doubled box holds {total} zeros, search found {mine}")
    return res


# ------------------------------------------------------------ trajectories


@dataclass
class TrajectoryPoint:
    epsilon: float
    resonances: list
    events: list = field(default_factory=list)


def trace_trajectory(spec: ModelSpec, eps_grid, seed_region: SearchRegion,
                     merge_tol: float = 1e-6) -> list:
    """Continue resonances from the largest coupling down the grid.

    Each root is seeded from its value at the previous coupling and refined
    with Newton's method. A root that leaves the lower half plane or on
    which Newton stalls raises :class:`ContinuationLost`.

    Returns
    -------
    list of TrajectoryPoint
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be strictly descending")
    if any(not 0 < e <= 1 for e in eps_grid):
        raise ValueError("couplings must lie in (0, 1]")
    first = spec.with_epsilon(eps_grid[0])
    current = find_resonances(first, seed_region)
    out = [TrajectoryPoint(eps_grid[0], current)]
    prev_eps = eps_grid[0]
    for eps in eps_grid[1:]:
        model = spec.with_epsilon(eps)
        roots = []
        events = []
        for res in current:
            seed = _extrapolate_seed(model, res.zeta, prev_eps, eps)
            zeta, ok, step = newton_det(model, seed)
            if not ok or zeta.imag >= 0:
                raise ContinuationLost(
                    f"root {res.zeta} lost between eps={prev_eps} and eps={eps}",
                    last_good=(prev_eps, res.zeta))
            roots.append((zeta, step))
        for i in range(len(roots)):
            for j in range(i):
                if abs(roots[i][0] - roots[j][0]) < merge_tol:
                    events.append({"event": "merge", "epsilon": eps,
                                   "zeta": [roots[i][0].real, roots[i][0].imag]})
        zetas = [z for z, _ in roots]
        current = [characterize(model, z, zetas, s) for z, s in roots]
        out.append(TrajectoryPoint(eps, current, events))
        prev_eps = eps
    return out


def _extrapolate_seed(model: ModelSpec, zeta: complex, eps_old: float, eps_new: float) -> complex:
    """Scale the displacement from the nearest unperturbed limit by ``(eps_new/eps_old)^2``."""
    targets = list(model.a) + list(model.lower_poles)
    anchor = min(targets, key=lambda t: abs(zeta - t))
    if anchor in model.lower_poles:
        # roots born at a form-factor pole move like eps, not eps^2
        return anchor + (zeta - anchor) * (eps_new / eps_old)
    return anchor + (zeta - anchor) * (eps_new / eps_old) ** 2


def trajectory_limit_check(points: list, a_values) -> list:
    """Per trajectory, ``dist(zeta, a) / eps^2`` along the grid for roots tending to ``a``."""
    out = []
    if not points:
        return out
    for idx in range(len(points[0].resonances)):
        zs = [p.resonances[idx].zeta for p in points]
        eps = [p.epsilon for p in points]
        anchor = min(a_values, key=lambda a: abs(zs[-1] - a))
        ratios = [abs(z - anchor) / e ** 2 for z, e in zip(zs, eps)]
        out.append({"anchor": anchor, "ratios": ratios})
    return out
