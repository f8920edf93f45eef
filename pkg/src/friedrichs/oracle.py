"""Brute-force cross-checks that share no code with the closed forms.

`phi_quadrature` integrates the defining integral of ``Phi`` numerically and
`discretized_partial_resolvent` builds a finite Hermitian Hamiltonian whose
resolvent block approximates ``L(z)^{-1}``.
"""
from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from friedrichs.errors import NoConvergence
from friedrichs.model import ModelSpec, eval_G, eval_M

LOGGER = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _breakpoints(spec: ModelSpec, z: complex) -> tuple[np.ndarray, float]:
    """Panel edges on ``[0, X]`` graded toward the features of the integrand."""
    scale = max([1.0, abs(z), *np.abs(spec.pole_set)])
    X = 4.0 * scale
    pts = {0.0, X}
    features = [(z.real, abs(z.imag))] + [(p.real, abs(p.imag)) for p in spec.pole_set]
    for c, d in features:
        d = max(d, 1e-14)
        pts.add(min(max(c, 0.0), X))
        step = d
        while step < X:
            for x in (c - step, c + step):
                if 0 < x < X:
                    pts.add(x)
            step *= 2.0
    return np.array(sorted(pts)), X


def _gl_sum(f, edges):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).reshape(-1)
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).reshape(-1)
    vals = f(nodes)
    return np.tensordot(weights, vals, axes=(0, 0))


def _refine(edges):
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(edges.size + mids.size)
    out[0::2] = edges
    out[1::2] = mids
    return out


def phi_quadrature(spec: ModelSpec, z: complex, rtol: float = 1e-11,
                   max_doublings: int = 20) -> np.ndarray:
    """``int_0^inf G(lam) / (z - lam) dlam`` by composite Gauss-Legendre.

    The half line is split at ``X``; ``[X, inf)`` is mapped to ``(0, 1]``
    through ``lam = X / u``. Every panel is halved until the relative change
    drops below `rtol`.

    Raises
    ------
    NoConvergence
        After `max_doublings` refinements without meeting `rtol`.
    """
    z = complex(z)
    n = spec.n
    if not spec.M.terms:
        return np.zeros((n, n), dtype=complex)
    M = spec.M
    edges, X = _breakpoints(spec, z)

    def inner(lam):
        return eval_G(M, lam) / (z - lam)[:, None, None]

    def outer(u):
        lam = X / u
        return eval_G(M, lam) / (z - lam)[:, None, None] * (X / u ** 2)[:, None, None]

    tail_edges = np.linspace(0.0, 1.0, 5)
    prev = _gl_sum(inner, edges) + _gl_sum(outer, tail_edges)
    for it in range(max_doublings):
        edges = _refine(edges)
        tail_edges = _refine(tail_edges)
        cur = _gl_sum(inner, edges) + _gl_sum(outer, tail_edges)
        change = np.linalg.norm(cur - prev)
        if change <= rtol * max(np.linalg.norm(cur), 1e-300):
            LOGGER.debug("phi_quadrature at %s converged after %d doublings", z, it + 1)
            return cur
        prev = cur
    raise NoConvergence(f"phi quadrature at z={z} did not converge in {max_doublings} doublings")


def build_discrete_hamiltonian(spec: ModelSpec, N: int, cutoff: float) -> sp.csr_matrix:
    """Sparse Hermitian ``H_N`` on ``C^(N n) + C^n``.

    Continuum nodes are midpoints of ``N`` equal cells on ``[0, cutoff]``; each
    carries a copy of ``K = C^n`` coupled to ``E`` by ``sqrt(w_i) M(lam_i)``.
    The discrete block occupies the last ``n`` indices.
    """
    n = spec.n
    h = cutoff / N
    lam = (np.arange(N) + 0.5) * h
    diag = np.concatenate([np.repeat(lam, n), np.asarray(spec.a, dtype=float)])
    coupling = np.sqrt(h) * eval_M(spec.M, lam)  # (N, n, n), K <- E
    rows = np.repeat(np.arange(N * n), n)
    cols = N * n + np.tile(np.arange(n), N * n)
    vals = coupling.reshape(-1)
    size = N * n + n
    gamma = sp.coo_matrix((vals, (rows, cols)), shape=(size, size))
    H = sp.diags(diag).astype(complex) + gamma + gamma.conj().T
    return H.tocsc()


def discretized_partial_resolvent(spec: ModelSpec, z: complex, N: int = 4000,
                                  cutoff: float = 100.0) -> np.ndarray:
    """Block ``P_E (z - H_N)^{-1} P_E`` of the discretized Hamiltonian."""
    if N < 100:
        raise ValueError("N must be at least 100")
    if complex(z).imag == 0:
        raise ValueError("z must be off the real axis")
    n = spec.n
    H = build_discrete_hamiltonian(spec, N, cutoff)
    size = H.shape[0]
    lhs = (complex(z) * sp.identity(size, dtype=complex, format="csc") - H).tocsc()
    rhs = np.zeros((size, n), dtype=complex)
    rhs[N * n:, :] = np.eye(n)
    sol = spla.spsolve(lhs, rhs)
    sol = np.asarray(sol).reshape(size, n)
    return sol[N * n:, :]


def discrete_spectrum(spec: ModelSpec, N: int, cutoff: float) -> np.ndarray:
    """All eigenvalues of ``H_N`` from a general (non-Hermitian) dense solver."""
    H = build_discrete_hamiltonian(spec, N, cutoff).toarray()
    return np.linalg.eigvals(H)
