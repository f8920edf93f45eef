"""Invariant suite: every identity of the model checked against a second route.

Each check returns a :class:`CheckResult` holding the measured defect, the
tolerance it is held to and the verdict. :func:`run_suite` runs all checks
that apply to a model; the command line ``verify`` reports them.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from friedrichs.errors import FriedrichsError, HigherOrderPole, NoPole
from friedrichs.hardy import (dirac_pairing_check, eigen_defect, gamov, gamov_grid_function,
                              semigroup_apply, theorem3_check)
from friedrichs.livsic import L_inverse, completeness_defect, density_forms
from friedrichs.model import ModelSpec
from friedrichs.oracle import discretized_partial_resolvent, phi_quadrature
from friedrichs.resonances import global_search
from friedrichs.scattering import (S_K, S_K_values, collect_residues, holo_contour_norm,
                                   negative_axis_margin, prop1_check, residue_SK, residue_SK_algebraic,
                                   symmetry_defect, unitarity_defect)
from friedrichs.stieltjes import SheetTag, phi

LOGGER = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    "phi_oracle": 1e-9,
    "jump": 1e-11,
    "density": 1e-10,
    "moments": 1e-6,
    "partial_resolvent": 1e-2,
    "unitarity": 1e-9,
    "symmetry": 1e-9,
    "negative_axis": 1e-6,
    "order2": 1e-8,
    "holo_contour": 1e-8,
    "residue_routes": 1e-8,
    "kernel_range": 1e-8,
    "dirac": 1e-8,
    "residue_expansion": 1e-5,
    "semigroup_eigen": 1e-3,
    "semigroup_law": 2e-4,
    "contraction": 1e-6,
    "trivial_smatrix": 1e-14,
    "trivial_residues": 1e-12,
}

SEMIGROUP_TIMES = (0.5, 1.0, 2.0, 5.0)


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    # margin checks pass when the value exceeds the tolerance
    lower_bound: bool = False

    def record(self):
        return {"check": self.name, "value": self.value, "tol": self.tol,
                "passed": self.passed, "lower_bound": self.lower_bound,
                "detail": self.detail}


def _result(name, value, tol, detail="", lower_bound=False, seconds=0.0):
    value = float(value)
    ok = value > tol if lower_bound else value <= tol
    return CheckResult(name, value, float(tol), bool(ok and np.isfinite(value)), detail,
                       seconds, lower_bound)


@dataclass
class SuiteContext:
    """Data shared between checks: the resonances and ``S_K`` residues."""

    spec: ModelSpec
    resonances: list = field(default_factory=list)
    residues: list = field(default_factory=list)


def first_sheet_points(spec: ModelSpec, count: int, seed: int = 7) -> np.ndarray:
    """Random points at distance >= 0.05 from ``[0, inf)`` and from the pole set."""
    rng = np.random.default_rng(seed)
    scale = 2.0 * max([1.0, *spec.a, *np.abs(spec.pole_set)])
    pts = []
    while len(pts) < count:
        z = complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale))
        dist_cut = abs(z.imag) if z.real >= 0 else abs(z)
        if dist_cut < 0.05:
            continue
        if spec.pole_set.size and np.min(np.abs(spec.pole_set - z)) < 0.05:
            continue
        pts.append(z)
    return np.array(pts)


# ------------------------------------------------------------------ transforms


def check_phi_oracle(spec: ModelSpec, count: int = 20, tol: float = DEFAULT_TOLERANCES["phi_oracle"]):
    """Closed-form ``Phi`` against adaptive quadrature of its defining integral."""
    pts = first_sheet_points(spec, count)
    worst = 0.0
    for z in pts:
        a = phi(spec, z)
        b = phi_quadrature(spec, z)
        worst = max(worst, float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)))
    return _result("phi_oracle", worst, tol, f"{count} first-sheet points")


def check_jump(spec: ModelSpec, count: int = 50, tol: float = DEFAULT_TOLERANCES["jump"]):
    """``Phi_- - Phi_+ = 2 pi i G`` on ``(0.1, 50)``."""
    lam = np.linspace(0.1, 50.0, count + 2)[1:-1]
    jump = phi(spec, lam, SheetTag.FIRST, -1) - phi(spec, lam, SheetTag.FIRST, 1)
    also = phi(spec, lam, SheetTag.MINUS) - phi(spec, lam, SheetTag.PLUS)
    G = spec.G(lam)
    worst = max(float(np.max(np.abs(jump - 2j * np.pi * G))),
                float(np.max(np.abs(also - 2j * np.pi * G))))
    return _result("jump", worst, tol, f"{count} points on (0.1, 50)")


# ------------------------------------------------------------------ spectral density


def check_density(spec: ModelSpec, count: int = 50, tol: float = DEFAULT_TOLERANCES["density"]):
    """The three forms of the spectral density agree pointwise."""
    lam = np.geomspace(0.01, 50.0, count)
    d1, d2, d3 = density_forms(spec, lam)
    worst = max(float(np.max(np.abs(d1 - d2))), float(np.max(np.abs(d1 - d3))))
    return _result("density", worst, tol, f"{count} points on [0.01, 50]")


def check_moments(spec: ModelSpec, tol: float = DEFAULT_TOLERANCES["moments"],
                  context: SuiteContext | None = None):
    """Zeroth and first moments of the spectral measure, bound states included."""
    feats = [(r.zeta.real, abs(r.zeta.imag)) for r in context.resonances] if context else ()
    d0, d1 = completeness_defect(spec, with_bound_states=True, features=feats)
    worst = max(float(np.max(np.abs(d0))), float(np.max(np.abs(d1))))
    return _result("moments", worst, tol, "int D + bound states = I, int lam D + ... = A")


def check_partial_resolvent(spec: ModelSpec, z: complex = 2 + 1j, N: int = 4000,
                            cutoff: float = 100.0,
                            tol: float = DEFAULT_TOLERANCES["partial_resolvent"]):
    """Discretized-Hamiltonian block resolvent against ``L_+(z)^{-1}``."""
    exact = L_inverse(spec, z)
    approx = discretized_partial_resolvent(spec, z, N, cutoff)
    rel = float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
    return _result("partial_resolvent", rel, tol, f"z={z}, N={N}, cutoff={cutoff}")


# ------------------------------------------------------------------ scattering


def check_unitarity(spec: ModelSpec, count: int = 200, tol: float = DEFAULT_TOLERANCES["unitarity"]):
    lam = np.linspace(0.05, 50.0, count)
    return _result("unitarity", float(np.max(unitarity_defect(spec, lam))), tol,
                   f"{count} points on [0.05, 50]")


def check_symmetry(spec: ModelSpec, count: int = 20, tol: float = DEFAULT_TOLERANCES["symmetry"],
                   context: SuiteContext | None = None):
    """``S_K(z)^{-1} = S_K(z̄)^*`` at points of the lower half plane off the poles."""
    rng = np.random.default_rng(11)
    avoid = list(spec.pole_set)
    if context is not None:
        avoid += [r.zeta for r in context.resonances]
    pts = []
    while len(pts) < count:
        z = complex(rng.uniform(0.05, 5.0), -rng.uniform(0.05, 2.0))
        if avoid and min(abs(z - p) for p in avoid) < 0.05:
            continue
        pts.append(z)
    return _result("symmetry", float(np.max(symmetry_defect(spec, np.array(pts)))), tol,
                   f"{count} points in the lower half plane")


def check_negative_axis(spec: ModelSpec, tol: float = DEFAULT_TOLERANCES["negative_axis"]):
    """``sigma_min(L_+(lam - i0))`` stays above `tol` on ``[-50, -0.01]``."""
    sv, where = negative_axis_margin(spec)
    return _result("negative_axis", sv, tol, f"minimum at lam={where:.6g}", lower_bound=True)


def check_residues(context: SuiteContext, tols=DEFAULT_TOLERANCES):
    """Simple poles of ``S_K``, holomorphic remainder and two residue routes."""
    spec = context.spec
    out = []
    zetas = [r.zeta for r in context.resonances]
    order2, holo, routes = 0.0, 0.0, 0.0
    problems = []
    for res in context.resonances:
        try:
            contour = residue_SK(spec, res.zeta, zetas)
        except HigherOrderPole as exc:
            problems.append(str(exc))
            order2 = np.inf
            continue
        except NoPole:
            continue
        order2 = max(order2, contour.order2)
        alg = residue_SK_algebraic(spec, res)
        scale = max(float(np.linalg.norm(contour.S_minus1, 2)), 1e-300)
        routes = max(routes, float(np.linalg.norm(alg - contour.S_minus1, 2)) / scale)
        holo = max(holo, holo_contour_norm(spec, context.residues, res.zeta))
    detail = f"{len(context.resonances)} resonances" + (f"; {problems}" if problems else "")
    out.append(_result("order2", order2, tols["order2"], detail))
    out.append(_result("holo_contour", holo, tols["holo_contour"], detail))
    out.append(_result("residue_routes", routes, tols["residue_routes"],
                       "contour residue vs -2 pi i M Res(L+^-1) M*"))
    return out


def check_kernel_range(context: SuiteContext, tol: float = DEFAULT_TOLERANCES["kernel_range"]):
    """Kernel of ``L_+`` spans the range of the ``S_E`` residue."""
    zetas = [r.zeta for r in context.resonances]
    worst = 0.0
    for res in context.resonances:
        worst = max(worst, prop1_check(context.spec, res, zetas))
    return _result("kernel_range", worst, tol, f"{len(zetas)} resonances")


# ------------------------------------------------------------------ Hardy space


def check_dirac(context: SuiteContext, draws: int = 10, tol: float = DEFAULT_TOLERANCES["dirac"]):
    """Pairing of Gamov vectors with ``k / (lam - w)``: one global sign, small error."""
    spec = context.spec
    rng = np.random.default_rng(13)
    worst, signs = 0.0, set()
    count = 0
    for res in context.resonances:
        g = gamov(spec, res)
        for _ in range(draws):
            w = complex(rng.uniform(-3, 3), -rng.uniform(0.2, 2.0))
            k = rng.normal(size=spec.n) + 1j * rng.normal(size=spec.n)
            r = dirac_pairing_check(g, w, k)
            if r.lhs == 0:
                continue
            worst = max(worst, r.rel_err)
            signs.add(r.sign)
            count += 1
    ok_sign = len(signs) <= 1
    value = worst if ok_sign else np.inf
    return _result("dirac", value, tol, f"{count} pairings, signs {sorted(signs)}")


def check_residue_expansion(context: SuiteContext, draws: int = 5,
                            tol: float = DEFAULT_TOLERANCES["residue_expansion"]):
    """Cauchy projection of ``(S - 1) g`` against the sum over ``S_K`` residues."""
    spec = context.spec
    rng = np.random.default_rng(17)
    worst, points = 0.0, 0
    for _ in range(draws):
        w = complex(rng.uniform(-2, 4), rng.uniform(0.3, 2.0))
        z = complex(rng.uniform(-2, 4), rng.uniform(0.3, 2.0))
        k = rng.normal(size=spec.n) + 1j * rng.normal(size=spec.n)
        out = theorem3_check(spec, context.residues, w, k, z)
        worst, points = max(worst, out.rel_err), out.points
    return _result("residue_expansion", worst, tol, f"{draws} random (w, k, z), cutoff 200, {points} nodes")


def check_semigroup(context: SuiteContext, tols=DEFAULT_TOLERANCES):
    """Gamov eigenrelation, semigroup law and contraction of the decay semigroup."""
    spec = context.spec
    eig, law, contraction = 0.0, 0.0, -np.inf
    for res in context.resonances:
        g = gamov(spec, res)
        f = gamov_grid_function(g)
        norm = f.norm()
        for t in SEMIGROUP_TIMES:
            eig = max(eig, eigen_defect(f, g.zeta, t))
            contraction = max(contraction, semigroup_apply(f, t).norm() - norm)
        two = semigroup_apply(semigroup_apply(f, 1.0), 2.0)
        three = semigroup_apply(f, 3.0)
        law = max(law, two.with_values(two.values - three.values).norm() / norm)
    n = len(context.resonances)
    if not n:
        contraction = 0.0
    return [
        _result("semigroup_eigen", eig, tols["semigroup_eigen"], f"{n} resonances, t in {SEMIGROUP_TIMES}"),
        _result("semigroup_law", law, tols["semigroup_law"], "T(1) T(2) = T(3)"),
        _result("contraction", max(contraction, 0.0), tols["contraction"], "|T(t) f| - |f|"),
    ]


# ------------------------------------------------------------------ zero coupling


def check_trivial(spec: ModelSpec, tols=DEFAULT_TOLERANCES):
    """At zero coupling: ``S_K = I``, no resonances, no residues."""
    zero = spec.with_epsilon(0.0)
    lam = np.linspace(0.05, 50.0, 200)
    S = S_K(zero, lam)
    smat = float(np.max(np.abs(S - np.eye(spec.n))))
    zl = first_sheet_points(spec, 20) - 10j
    smat = max(smat, float(np.max(np.abs(S_K_values(zero, zl) - np.eye(spec.n)))))
    res = global_search(zero)
    residues = collect_residues(zero, res)
    rnorm = max([0.0, *[float(np.linalg.norm(r.S_minus1, 2)) for r in residues]])
    return [
        _result("trivial_smatrix", smat, tols["trivial_smatrix"], "S_K - I at zero coupling"),
        _result("trivial_resonances", float(len(res)), 0.0, "resonance count at zero coupling"),
        _result("trivial_residues", rnorm, tols["trivial_residues"], "largest residue norm"),
    ]


# ------------------------------------------------------------------ suite


def build_context(spec: ModelSpec) -> SuiteContext:
    res = global_search(spec)
    return SuiteContext(spec, res, collect_residues(spec, res))


def run_suite(spec: ModelSpec, tolerances=None, slack: float = 1.0, include_oracle: bool = True):
    """Run every applicable check and return the list of results.

    Parameters
    ----------
    tolerances : dict, optional
        Overrides of :data:`DEFAULT_TOLERANCES`.
    slack : float
        Factor applied to every tolerance (margins are divided by it).
    include_oracle : bool
        Skip the discretized-Hamiltonian check when False.
    """
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(tolerances or {})
    for key in tols:
        tols[key] = tols[key] / slack if key == "negative_axis" else tols[key] * slack
    results = []

    def run(fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except FriedrichsError as exc:
            LOGGER.error("check %s raised %s", fn.__name__, exc)
            out = _result(fn.__name__.replace("check_", ""), np.inf, 0.0,
                          f"{type(exc).__name__}: {exc}")
        out = out if isinstance(out, list) else [out]
        for r in out:
            r.seconds = time.perf_counter() - t0
        results.extend(out)

    run(check_phi_oracle, spec, tol=tols["phi_oracle"])
    run(check_jump, spec, tol=tols["jump"])
    run(check_density, spec, tol=tols["density"])
    context = None
    try:
        context = build_context(spec)
    except FriedrichsError as exc:
        results.append(_result("resonance_search", np.inf, 0.0, f"{type(exc).__name__}: {exc}"))
    run(check_moments, spec, tol=tols["moments"], context=context)
    if include_oracle:
        run(check_partial_resolvent, spec, tol=tols["partial_resolvent"])
    run(check_unitarity, spec, tol=tols["unitarity"])
    run(check_symmetry, spec, tol=tols["symmetry"], context=context)
    run(check_negative_axis, spec, tol=tols["negative_axis"])
    if context is not None:
        run(check_residues, context, tols)
        run(check_kernel_range, context, tol=tols["kernel_range"])
        run(check_dirac, context, tol=tols["dirac"])
        run(check_residue_expansion, context, tol=tols["residue_expansion"])
        run(check_semigroup, context, tols)
    run(check_trivial, spec, tols)
    return results

