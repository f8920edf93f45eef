"""Problem instances: the rational form factor, the discrete block and the coupling.

The form factor is stored as a partial-fraction sum

.. math::

   M(z) = \\sum_t C_t (z - p_t)^{-k_t},

so it vanishes at infinity and every quantity downstream (the jump density
``G(z) = M(z̄)^* M(z)``, the Stieltjes transform, the scattering matrix) can
be assembled term by term.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from friedrichs.errors import PoleHit

LOGGER = logging.getLogger(__name__)

#: absolute distance below which an evaluation point counts as sitting on a pole
POLE_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class RationalTerm:
    """One partial-fraction term ``coeff * (z - pole)**(-order)``."""

    pole: complex
    order: int
    coeff: np.ndarray

    def __post_init__(self):
        coeff = np.array(self.coeff, dtype=complex, ndmin=2)
        coeff.setflags(write=False)
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "pole", complex(self.pole))
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"term order must be an integer >= 1, got {self.order}")
        object.__setattr__(self, "order", int(self.order))


@dataclass(frozen=True, eq=False)
class RationalMatrixFunction:
    """Matrix-valued rational function with no polynomial part.

    Attributes
    ----------
    dim_out, dim_in : int
        Shape ``(m, n)`` of the values.
    terms : tuple of RationalTerm
        Partial-fraction terms; an empty tuple is the zero function.
    """

    dim_out: int
    dim_in: int
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.coeff.shape != (self.dim_out, self.dim_in):
                raise ValueError(
                    f"coefficient shape {term.coeff.shape} does not match "
                    f"({self.dim_out}, {self.dim_in})")

    @cached_property
    def poles(self) -> np.ndarray:
        return np.array([t.pole for t in self.terms], dtype=complex)

    @cached_property
    def orders(self) -> np.ndarray:
        return np.array([t.order for t in self.terms], dtype=np.int64)

    @cached_property
    def coeffs(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, self.dim_out, self.dim_in), dtype=complex)
        return np.stack([t.coeff for t in self.terms])

    def distinct_poles(self):
        """Map each distinct pole to the maximal order among its terms."""
        out = {}
        for t in self.terms:
            out[t.pole] = max(out.get(t.pole, 0), t.order)
        return out

    def scaled(self, factor) -> "RationalMatrixFunction":
        """Multiply all coefficients by `factor`; a zero factor gives the zero function."""
        if factor == 0:
            return RationalMatrixFunction(self.dim_out, self.dim_in, ())
        terms = [RationalTerm(t.pole, t.order, factor * t.coeff) for t in self.terms]
        return RationalMatrixFunction(self.dim_out, self.dim_in, terms)

    def __call__(self, z):
        return eval_M(self, z)


def eval_M(M: RationalMatrixFunction, z):
    """Evaluate ``M`` at scalar or array `z`.

    Returns an ``(m, n)`` matrix for scalar `z` and an array of shape
    ``z.shape + (m, n)`` otherwise.

    Raises
    ------
    PoleHit
        If any point lies within ``POLE_TOL`` of a pole.
    """
    zz = np.asarray(z, dtype=complex)
    flat = zz.reshape(-1)
    out = np.zeros((flat.size, M.dim_out, M.dim_in), dtype=complex)
    if M.terms:
        diff = flat[:, None] - M.poles[None, :]
        if np.any(np.abs(diff) < POLE_TOL):
            bad = flat[np.any(np.abs(diff) < POLE_TOL, axis=1)][0]
            raise PoleHit(f"evaluation point {bad} coincides with a pole")
        weights = diff ** (-M.orders[None, :])
        out = np.einsum("zt,tij->zij", weights, M.coeffs)
    return out.reshape(zz.shape + (M.dim_out, M.dim_in))


def conj_adjoint_fn(M: RationalMatrixFunction) -> RationalMatrixFunction:
    """Return the rational function ``z -> M(z̄)^*``."""
    terms = [RationalTerm(np.conj(t.pole), t.order, t.coeff.conj().T) for t in M.terms]
    return RationalMatrixFunction(M.dim_in, M.dim_out, terms)


def eval_G(M: RationalMatrixFunction, z):
    """Jump density ``G(z) = M(z̄)^* M(z)``; Hermitian PSD on the real line."""
    return eval_M(conj_adjoint_fn(M), z) @ eval_M(M, z)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Friedrichs model at finite multiplicity.

    `form_factor` is the unscaled ``M``; the coupling is applied exactly once,
    in :attr:`M`, so code downstream never sees `epsilon`.
    """

    a: tuple
    form_factor: RationalMatrixFunction
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if self.form_factor.dim_in != len(self.a):
            raise ValueError(
                f"form factor acts on dimension {self.form_factor.dim_in}, "
                f"but A has {len(self.a)} eigenvalues")

    @property
    def n(self) -> int:
        return len(self.a)

    @cached_property
    def A(self) -> np.ndarray:
        return np.diag(np.asarray(self.a, dtype=float))

    @cached_property
    def M(self) -> RationalMatrixFunction:
        return self.form_factor.scaled(self.epsilon)

    @cached_property
    def M_adj(self) -> RationalMatrixFunction:
        return conj_adjoint_fn(self.M)

    @cached_property
    def pole_set(self) -> np.ndarray:
        """The pole set of the pair ``{M(z), M(z̄)^*}``, closed under conjugation."""
        if not self.M.terms:
            return np.zeros(0, dtype=complex)
        poles = set(self.M.distinct_poles()) | set(self.M_adj.distinct_poles())
        return np.array(sorted(poles, key=lambda p: (p.real, p.imag)), dtype=complex)

    @cached_property
    def lower_poles(self) -> np.ndarray:
        ps = self.pole_set
        return ps[ps.imag < 0]

    def with_epsilon(self, epsilon: float) -> "ModelSpec":
        return ModelSpec(self.a, self.form_factor, epsilon)

    def G(self, z):
        return eval_M(self.M_adj, z) @ eval_M(self.M, z)


def scalar_example(epsilon=1.0, a=1.0) -> ModelSpec:
    """``a = 1``, ``M(z) = (z + i)^{-2}``."""
    M = RationalMatrixFunction(1, 1, [RationalTerm(-1j, 2, [[1.0]])])
    return ModelSpec((a,), M, epsilon)


def two_by_two_example(epsilon=0.5) -> ModelSpec:
    """``A = diag(1, 3)`` with ``M(z) = diag((z - i)^{-2}, (z + i)^{-2}) B``.

    The row-pole structure keeps ``det M(z) = det B / (z^2 + 1)^2`` nonzero off
    the poles, which the assumptions on ``M`` require.
    """
    B = np.array([[1.0, 0.5], [0.3, 1.0]])
    top = np.zeros((2, 2))
    top[0] = B[0]
    bottom = np.zeros((2, 2))
    bottom[1] = B[1]
    M = RationalMatrixFunction(2, 2, [RationalTerm(1j, 2, top), RationalTerm(-1j, 2, bottom)])
    return ModelSpec((1.0, 3.0), M, epsilon)


# ----------------------------------------------------------------- validation


@dataclass
class CheckItem:
    name: str
    passed: bool
    detail: str = ""
    hard: bool = True


@dataclass
class ValidationReport:
    items: list

    @property
    def ok(self) -> bool:
        return all(item.passed for item in self.items if item.hard)

    def failures(self):
        return [item for item in self.items if item.hard and not item.passed]

    def as_records(self):
        return [{"check": i.name, "passed": i.passed, "hard": i.hard, "detail": i.detail}
                for i in self.items]


def _sample_points(spec: ModelSpec, count: int, seed: int = 20240601) -> np.ndarray:
    rng = np.random.default_rng(seed)
    scale = 2.0 * max([1.0, *np.abs(spec.pole_set), *spec.a])
    pts = []
    while len(pts) < count:
        z = scale * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if spec.pole_set.size and np.min(np.abs(spec.pole_set - z)) < 1e-3:
            continue
        pts.append(z)
    return np.array(pts)


def validate_model(spec: ModelSpec, samples: int = 50, cond_limit: float = 1e12) -> ValidationReport:
    """Check the standing assumptions that are decidable at finite dimension.

    Assumption (ii), absence of real eigenvalues of ``H``, and the type-A
    holomorphy of ``M(z)^{-1}`` are not covered here.
    """
    items = []
    M = spec.form_factor
    items.append(CheckItem(
        "square dimensions", M.dim_out == M.dim_in == spec.n,
        f"M is {M.dim_out}x{M.dim_in}, A is {spec.n}x{spec.n}"))

    neg = [x for x in spec.a if not x > 0]
    items.append(CheckItem("A positive", not neg,
                           "all eigenvalues positive" if not neg else f"non-positive eigenvalues {neg}"))

    real_poles = [t.pole for t in M.terms if abs(t.pole.imag) <= POLE_TOL]
    items.append(CheckItem("no real poles", not real_poles,
                           "ok" if not real_poles else f"poles on the real line: {real_poles}"))

    simple = [p for p, order in M.distinct_poles().items() if order < 2]
    items.append(CheckItem("no simple poles", not simple,
                           "ok" if not simple else f"poles with maximal order 1: {simple}"))

    zero_terms = [i for i, t in enumerate(M.terms) if not np.any(t.coeff)]
    items.append(CheckItem("nonzero coefficients", not zero_terms,
                           "ok" if not zero_terms else f"zero coefficient in terms {zero_terms}"))

    eps_ok = 0 < spec.epsilon <= 1
    items.append(CheckItem("coupling in (0, 1]", eps_ok, f"epsilon = {spec.epsilon}", hard=False))

    if M.dim_out == M.dim_in and M.terms and not real_poles:
        pts = _sample_points(spec, samples)
        conds = np.linalg.cond(eval_M(M, pts))
        worst = float(np.max(conds))
        items.append(CheckItem(
            "M(z) invertible off poles", bool(np.all(np.isfinite(conds)) and worst < cond_limit),
            f"max condition number {worst:.3e} over {samples} samples"))
    else:
        items.append(CheckItem("M(z) invertible off poles", False,
                               "not sampled: M is empty, non-square or has real poles"))
    report = ValidationReport(items)
    for item in report.failures():
        LOGGER.warning("model assumption violated: %s (%s)", item.name, item.detail)
    return report


def make_model(a: Sequence[float], terms: Sequence[tuple], epsilon: float = 1.0) -> ModelSpec:
    """Convenience constructor from ``(pole, order, coeff)`` triples."""
    n = len(a)
    M = RationalMatrixFunction(n, n, [RationalTerm(p, k, c) for p, k, c in terms])
    return ModelSpec(tuple(a), M, epsilon)
