# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Cauchy pair kernel; same contract as ``_kernels_py.cauchy_pairs``."""
import numpy as np
cimport numpy as cnp

cdef extern from "<complex.h>" nogil:
    double complex clog(double complex)
    double complex cpow(double complex, double complex)

DEF MAXORD = 64


cdef inline double complex ipow(double complex x, int r) noexcept nogil:
    # x ** r for integer r (possibly negative)
    cdef double complex acc = 1.0
    cdef int i
    cdef int e = r if r >= 0 else -r
    for i in range(e):
        acc = acc * x
    if r < 0:
        return 1.0 / acc
    return acc


cdef inline void inv_power_series(double complex d, int r, int nterms,
                                  double complex* out) noexcept nogil:
    cdef double complex coef = ipow(d, -r)
    cdef int n
    out[0] = coef
    for n in range(nterms - 1):
        coef = coef * (-(r + n) / ((n + 1) * d))
        out[n + 1] = coef


cdef inline void series_mul(double complex* a, double complex* b, int nterms,
                            double complex* out) noexcept nogil:
    cdef int m, i
    cdef double complex acc
    for m in range(nterms):
        acc = 0.0
        for i in range(m + 1):
            acc = acc + a[i] * b[m - i]
        out[m] = acc


cdef inline double complex pole_part(double complex w, int order,
                                     double complex d1, int r1,
                                     double complex d2, int r2, bint two,
                                     double complex logmw) noexcept nogil:
    # higher-order contributions minus c_1 * Log(-w)
    cdef double complex s1[MAXORD]
    cdef double complex s2[MAXORD]
    cdef double complex prod[MAXORD]
    cdef double complex acc = 0.0
    cdef int m
    inv_power_series(d1, r1, order, s1)
    if two:
        inv_power_series(d2, r2, order, s2)
        series_mul(s1, s2, order, prod)
    else:
        for m in range(order):
            prod[m] = s1[m]
    for m in range(2, order + 1):
        acc = acc - prod[order - m] * ipow(-w, 1 - m) / (m - 1)
    return acc + prod[order - 1] * logmw


def cauchy_pairs(z, log_mz, p, j, q, k):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] lz = np.ascontiguousarray(log_mz, dtype=np.complex128).reshape(-1)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] pa = np.ascontiguousarray(p, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] qa = np.ascontiguousarray(q, dtype=np.complex128)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ja = np.ascontiguousarray(j, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ka = np.ascontiguousarray(k, dtype=np.int64)
    cdef Py_ssize_t nz = zz.shape[0], npair = pa.shape[0], iz, ip
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((nz, npair), dtype=np.complex128)
    cdef double complex zi, pp, qq, cz, total, logp, logq
    cdef int jj, kk, r
    if nz and npair and (np.max(ja) + np.max(ka)) >= MAXORD:
        raise ValueError("pole order too large for the compiled kernel")
    with nogil:
        for ip in range(npair):
            pp = pa[ip]
            qq = qa[ip]
            jj = <int>ja[ip]
            kk = <int>ka[ip]
            logp = clog(-pp)
            logq = clog(-qq)
            for iz in range(nz):
                zi = zz[iz]
                if pp == qq:
                    r = jj + kk
                    cz = -ipow(zi - pp, -r)
                    total = -cz * lz[iz] + pole_part(pp, r, pp - zi, 1, 0.0, 0, False, logp)
                else:
                    cz = -ipow(zi - pp, -jj) * ipow(zi - qq, -kk)
                    total = (-cz * lz[iz]
                             + pole_part(pp, jj, pp - zi, 1, pp - qq, kk, True, logp)
                             + pole_part(qq, kk, qq - zi, 1, qq - pp, jj, True, logq))
                out[iz, ip] = total
    return out
