"""Independent reference values, frozen into the test suite.

Uses only the defining integral ``int_0^inf G(lam) / (z - lam) dlam``
(tanh-sinh quadrature at 30 digits) and root finding on
``det(z - A - [Phi(z) - 2 pi i G(z)])``, the continuation through the
positive axis. Nothing from the package is imported.

For the 2x2 model ``M(lam)^* M(lam) = B^T B / (lam^2 + 1)^2``, so its
transform is the scalar one times ``B^T B``. Run with ``python
tests/oracles/mpmath_oracle.py``; requires mpmath.
"""
import mpmath as mp

mp.mp.dps = 30


def G(lam):
    return 1 / ((lam * lam + 1) ** 2)


def phi_first(z):
    # a break at Re z resolves the peak of the integrand near the axis
    pts = sorted(set([0, 0.5, 1, 2, 5, 20] + ([mp.re(z)] if mp.re(z) > 0 else [])))
    return mp.quad(lambda lam: G(lam) / (z - lam), pts + [mp.inf])


def phi_plus(z):
    return phi_first(z) - 2j * mp.pi * G(z)


def scalar_root(eps, seed):
    return mp.findroot(lambda z: z - 1 - eps ** 2 * phi_plus(z), mp.mpc(seed))


B = mp.matrix([[1, 0.5], [0.3, 1]])
BTB = B.T * B


def two_by_two_root(eps, seed):
    def det(z):
        return mp.det(mp.matrix([[z - 1, 0], [0, z - 3]]) - eps ** 2 * phi_plus(z) * BTB)
    return mp.findroot(det, mp.mpc(seed))


def pv_phi_at_one():
    g1 = G(1)
    return (mp.quad(lambda lam: (G(lam) - g1) / (1 - lam), [0, 1, 2])
            + mp.quad(lambda lam: G(lam) / (1 - lam), [2, 5, mp.inf]))


if __name__ == "__main__":
    print("Phi(-1)          ", phi_first(-1))
    print("Phi(2+0.5i)      ", phi_first(2 + 0.5j))
    print("Phi(-3-2i)       ", phi_first(-3 - 2j))
    print("Phi_+(1+i0)      ", pv_phi_at_one() - 1j * mp.pi * G(1))
    for eps, seed in ((0.5, 1.25 - 0.1j), (0.5, -0.46 - 0.58j), (0.5, 0.089 - 1.387j),
                      (0.05, 1.0026 - 0.00195j), (0.01, 1.0001 - 0.0000785j)):
        print("scalar", eps, scalar_root(eps, seed))
    for eps, seed in ((0.5, 1.2554 - 0.0964j), (0.5, 3.1051 - 0.00866j), (0.05, 3.00107 - 0.0000982j)):
        print("2x2", eps, two_by_two_root(eps, seed))
