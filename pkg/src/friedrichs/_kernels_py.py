"""Pure numpy implementation of the Cauchy pair kernel.

Computes, for every evaluation point ``z`` and every pole pair ``(p, j, q, k)``,

.. math::

   I = \\int_0^\\infty \\frac{d\\lambda}{(z-\\lambda)(\\lambda-p)^j(\\lambda-q)^k}

from the partial-fraction decomposition of the integrand. Terms of order
``m >= 2`` integrate to ``(-w)^{1-m}/(m-1)``; the order-one terms are grouped,
their coefficients sum to zero, and they contribute ``-sum c_w Log(-w)``. The
logarithm at ``w = z`` is passed in by the caller, which is how the Riemann
sheet is selected.
"""
import numpy as np


def _inv_power_series(d, r, nterms):
    """Taylor coefficients of ``(d + u)^(-r)`` in ``u``, ``nterms`` of them."""
    coef = d ** (-r)
    out = [coef]
    for n in range(nterms - 1):
        coef = coef * (-(r + n) / ((n + 1) * d))
        out.append(coef)
    return out


def _series_product(a, b, nterms):
    return [sum(a[i] * b[m - i] for i in range(m + 1)) for m in range(nterms)]


def _pole_contribution(w, order, others):
    """Integral contribution of the finite pole `w` of the given order.

    `others` lists ``(distance w - w_i, order_i)`` for the remaining poles,
    the one at ``z`` included. Returns the sum over ``m >= 2`` and the
    order-one coefficient separately.
    """
    series = None
    for d, r in others:
        s = _inv_power_series(d, r, order)
        series = s if series is None else _series_product(series, s, order)
    # h(lambda) = -prod(...) because 1/(z - lambda) = -1/(lambda - z)
    coeffs = [-c for c in series]
    higher = 0.0
    for m in range(2, order + 1):
        higher = higher + coeffs[order - m] * (-w) ** (1 - m) / (m - 1)
    return higher, coeffs[order - 1]


def cauchy_pairs(z, log_mz, p, j, q, k):
    """Kernel values for all points and all pairs.

    Parameters
    ----------
    z, log_mz : (Z,) complex np.ndarray
        Evaluation points and the chosen branch of ``log(-z)``.
    p, q : (P,) complex np.ndarray
        Pole pairs; ``p[i] == q[i]`` is treated as one pole of order ``j + k``.
    j, k : (P,) int np.ndarray
        Pole orders.

    Returns
    -------
    (Z, P) complex np.ndarray
    """
    z = np.asarray(z, dtype=complex)
    log_mz = np.asarray(log_mz, dtype=complex)
    out = np.empty((z.size, len(p)), dtype=complex)
    for col, (pp, jj, qq, kk) in enumerate(zip(p, j, q, k)):
        pp, qq = complex(pp), complex(qq)
        jj, kk = int(jj), int(kk)
        if pp == qq:
            r = jj + kk
            cz = -(z - pp) ** (-r)
            hi_p, c1_p = _pole_contribution(pp, r, [(pp - z, 1)])
            total = -cz * log_mz + hi_p - c1_p * np.log(-pp)
        else:
            cz = -(z - pp) ** (-jj) * (z - qq) ** (-kk)
            hi_p, c1_p = _pole_contribution(pp, jj, [(pp - z, 1), (pp - qq, kk)])
            hi_q, c1_q = _pole_contribution(qq, kk, [(qq - z, 1), (qq - pp, jj)])
            total = (-cz * log_mz + hi_p + hi_q
                     - c1_p * np.log(-pp) - c1_q * np.log(-qq))
        out[:, col] = total
    return out
