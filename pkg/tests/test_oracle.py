import numpy as np
import pytest

from friedrichs.errors import NoConvergence
from friedrichs.livsic import L_inverse
from friedrichs.model import scalar_example, two_by_two_example
from friedrichs.oracle import (build_discrete_hamiltonian, discrete_spectrum,
                               discretized_partial_resolvent, phi_quadrature)
from friedrichs.stieltjes import phi
from friedrichs.verify import first_sheet_points


def test_quadrature_scalar_value():
    val = phi_quadrature(scalar_example(1.0), -1.0)[0, 0]
    assert abs(val + (np.pi - 1) / 4) <= 1e-12


@pytest.mark.parametrize("spec", [scalar_example(0.5), two_by_two_example(0.5)])
def test_quadrature_matches_closed_form(spec):
    for z in first_sheet_points(spec, 20, seed=3):
        a, b = phi(spec, z), phi_quadrature(spec, z)
        assert np.linalg.norm(a - b) <= 1e-9 * np.linalg.norm(b)


def test_quadrature_decay_bound():
    spec = scalar_example(1.0)
    total = np.pi / 4  # int_0^inf (lam^2 + 1)^-2
    assert abs(phi_quadrature(spec, 1e6j)[0, 0]) <= 2 * total / 1e6


def test_quadrature_no_convergence():
    with pytest.raises(NoConvergence):
        phi_quadrature(scalar_example(1.0), 1.0 + 1e-3j, rtol=1e-30, max_doublings=2)


def test_zero_coupling_resolvent_is_free():
    spec = two_by_two_example(0.0)
    z = 2 + 1j
    got = discretized_partial_resolvent(spec, z, N=200, cutoff=10)
    assert np.allclose(got, np.linalg.inv(z * np.eye(2) - spec.A), atol=1e-15)


def test_discrete_hamiltonian_hermitian_with_real_spectrum():
    spec = two_by_two_example(0.5)
    H = build_discrete_hamiltonian(spec, 150, 20.0)
    assert abs(H - H.conj().T).max() <= 1e-15
    ev = discrete_spectrum(spec, 150, 20.0)
    assert np.max(np.abs(ev.imag)) <= 1e-10


def test_partial_resolvent_converges_in_N():
    spec = scalar_example(0.5)
    z = 2 + 1j
    exact = L_inverse(spec, z)
    errs = [np.linalg.norm(discretized_partial_resolvent(spec, z, N, 100.0) - exact) / np.linalg.norm(exact)
            for N in (1000, 2000)]
    assert errs[0] <= 1e-2
    assert errs[1] <= 0.5 * errs[0]


def test_argument_checks():
    with pytest.raises(ValueError):
        discretized_partial_resolvent(scalar_example(), 1.0, N=200)
    with pytest.raises(ValueError):
        discretized_partial_resolvent(scalar_example(), 1 + 1j, N=10)
