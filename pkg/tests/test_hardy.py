import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from friedrichs.errors import ExtensionIllposed, TailTooFat
from friedrichs.hardy import (GridFunction, dirac_closed_form, dirac_pairing_check, eigen_defect,
                              extend_plus, extension_residual, gamov, gamov_grid_function,
                              graded_gl_grid, project_plus, q_plus_boundary,
                              rational_grid_function, semigroup_apply, theorem3_check,
                              uniform_grid)

from conftest import search

WS = np.array([1 - 0.3j, 2.5 - 0.8j, -1 - 0.5j])
KS = np.array([[1.0, 0.5j], [-0.7 + 0.2j, 1.0], [0.3, -0.4 - 0.1j]])


def multi_pole(grid, t=0.0):
    """``sum_j e^{-i w_j t} k_j / (lam - w_j)``, the exact ``T(t)`` image at ``t``."""
    phase = np.exp(-1j * WS * t)
    return np.einsum("j,jn,xj->xn", phase, KS, 1.0 / (grid[:, None] - WS[None, :]))


_GRID = uniform_grid(400.0, 2 ** 16)
_MULTI = GridFunction(_GRID, multi_pole(_GRID))


@pytest.fixture
def multi():
    return _MULTI


# ------------------------------------------------------------------ Dirac pairing


def test_dirac_sign_consistent_and_closed_form(model, rng):
    res, _ = search(model)
    signs = set()
    for r in res:
        g = gamov(model, r)
        for _ in range(4):
            w = complex(rng.uniform(-3, 3), -rng.uniform(0.2, 2))
            k = rng.normal(size=model.n) + 1j * rng.normal(size=model.n)
            out = dirac_pairing_check(g, w, k)
            assert out.rel_err <= 1e-10
            signs.add(out.sign)
            closed = dirac_closed_form(g, w, k)
            assert abs(out.rhs - closed) <= 1e-10 * abs(closed)
    assert signs == {-1}


def test_dirac_rejects_upper_pole(scalar):
    res, _ = search(scalar)
    with pytest.raises(ValueError):
        dirac_pairing_check(gamov(scalar, res[0]), 1 + 1j, [1.0])


def test_gamov_column_range(scalar):
    res, _ = search(scalar)
    with pytest.raises(IndexError):
        gamov(scalar, res[0], column=1)


# ------------------------------------------------------------------ projections


@given(st.floats(-3, 3), st.floats(0.3, 2.0))
def test_project_plus_reproduces_h2(x, y):
    multi = _MULTI
    z = complex(x, y)
    expect = multi_pole(np.array([z]))[0]
    got = project_plus(multi, z)
    assert np.linalg.norm(got - expect) <= 1e-7 * np.linalg.norm(expect)


def test_project_plus_on_graded_grid():
    grid, weights = graded_gl_grid(200.0)
    f = GridFunction(grid, multi_pole(grid), 1.0, weights)
    z = 0.5 + 1j
    expect = multi_pole(np.array([z]))[0]
    assert np.linalg.norm(project_plus(f, z) - expect) <= 1e-11 * np.linalg.norm(expect)


def test_project_plus_kills_h2_minus(multi):
    f = multi.with_values(np.conj(multi_pole(multi.grid)))
    val = project_plus(f, 0.3 + 1j)
    assert np.linalg.norm(val) <= 1e-7


def test_project_plus_domain(multi):
    with pytest.raises(ValueError):
        project_plus(multi, 1 - 1j)
    with pytest.raises(TailTooFat):
        project_plus(multi, 300 + 10j)


def test_boundary_projection_idempotent(multi):
    q = multi.with_values(q_plus_boundary(multi))
    # full-line comparison, edges included
    assert np.linalg.norm(q.values - multi.values) / np.linalg.norm(multi.values) <= 1e-6
    assert extension_residual(multi) <= 1e-6


def test_boundary_projection_needs_uniform_grid():
    grid, weights = graded_gl_grid(50.0)
    f = GridFunction(grid, multi_pole(grid), 1.0, weights)
    with pytest.raises(ValueError):
        q_plus_boundary(f)


def test_extension_of_half_line_data():
    grid = uniform_grid(400.0, 2 ** 16)
    exact = GridFunction(grid, multi_pole(grid))
    # half-line data of an H2+ function: the extension is only accepted if it reproduces them
    gauss = exact.with_values(np.exp(-(grid[:, None] - 3) ** 2) * np.ones((1, 2)))
    with pytest.raises(ExtensionIllposed):
        extend_plus(gauss)


# ------------------------------------------------------------------ semigroup


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 5.0])
def test_semigroup_on_rational_reference(multi, t):
    got = semigroup_apply(multi, t)
    exact = multi_pole(multi.grid, t)
    diff = multi.with_values(got.values - exact)
    assert diff.norm() / multi.norm() <= 1e-7


def test_semigroup_law(multi):
    a = semigroup_apply(semigroup_apply(multi, 1.0), 2.0)
    b = semigroup_apply(multi, 3.0)
    assert a.with_values(a.values - b.values).norm() / multi.norm() <= 1e-7


@settings(max_examples=10)
@given(st.floats(0.0, 6.0))
def test_contraction(t):
    multi = _MULTI
    assert semigroup_apply(multi, t).norm() <= multi.norm() * (1 + 1e-7)


def test_semigroup_rejects_foreign_input(multi):
    with pytest.raises(ValueError):
        semigroup_apply(multi, -1.0)
    bad = multi.with_values(np.conj(multi.values))
    with pytest.raises(ExtensionIllposed):
        semigroup_apply(bad, 1.0)


def test_gamov_eigenvectors(model):
    res, _ = search(model)
    for r in res:
        f = gamov_grid_function(gamov(model, r))
        for t in (0.5, 2.0):
            assert eigen_defect(f, r.zeta, t) <= 1e-3


# ------------------------------------------------------------------ residue expansion


def test_residue_expansion(model, rng):
    _, residues = search(model)
    for _ in range(2):
        w = complex(rng.uniform(-2, 4), rng.uniform(0.3, 2))
        z = complex(rng.uniform(-2, 4), rng.uniform(0.3, 2))
        k = rng.normal(size=model.n) + 1j * rng.normal(size=model.n)
        assert theorem3_check(model, residues, w, k, z).rel_err <= 1e-5


def test_residue_expansion_domain(scalar):
    with pytest.raises(ValueError):
        theorem3_check(scalar, [], 1 - 1j, [1.0], 1j)


# ------------------------------------------------------------------ grid functions


def test_grid_function_validation():
    g = uniform_grid(10.0, 100)
    with pytest.raises(ValueError):
        GridFunction(g, np.ones(99))
    with pytest.raises(ValueError):
        GridFunction(g[::-1], np.ones(100))
    with pytest.raises(ValueError):
        GridFunction(g + 1.0, np.ones(100))
    with pytest.raises(ValueError):
        GridFunction(g, np.full(100, np.nan))


def test_uniform_grid_and_weights():
    g = uniform_grid(10.0, 101)
    assert g.size == 102 and np.allclose(g, -g[::-1])
    f = rational_grid_function(g, [1.0], -1j)
    assert f.is_uniform and np.isclose(f.cutoff, 10.0)
    # |1/(lam + i)|^2 integrates to pi/2 over the half line
    fine = rational_grid_function(uniform_grid(2000.0, 2 ** 20), [1.0], -1j)
    assert abs(fine.norm() ** 2 - np.pi / 2) <= 1e-3


def test_graded_grid_integrates_exactly():
    x, w = graded_gl_grid(100.0, features=[(1.0, 1e-3)])
    assert np.allclose(x, -x[::-1]) and abs(w.sum() - 200.0) <= 1e-10
    assert abs(w @ (1 / (x ** 2 + 1)) - 2 * np.arctan(100.0)) <= 1e-12
