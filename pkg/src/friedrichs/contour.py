"""Trapezoidal quadrature on circles, for residues and Laurent coefficients."""
import numpy as np

DEFAULT_NODES = 64


def circle(center: complex, radius: float, m: int = DEFAULT_NODES):
    """Nodes and weights with ``sum w_k f(z_k) ~ (1/2 pi i) oint f(z) dz``.

    The circle is traversed counter-clockwise; the rule is spectrally
    accurate for integrands analytic in an annulus around it.
    """
    theta = 2.0 * np.pi * np.arange(m) / m
    unit = np.exp(1j * theta)
    nodes = center + radius * unit
    weights = radius * unit / m
    return nodes, weights


def laurent_coefficient(values: np.ndarray, nodes: np.ndarray, weights: np.ndarray,
                        center: complex, order: int = 1) -> np.ndarray:
    """Coefficient of ``(z - center)^(-order)`` from samples on a circle.

    `values` has the node axis first.
    """
    fac = (nodes - center) ** (order - 1) * weights
    return np.tensordot(fac, values, axes=(0, 0))
