# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled eigenvalue kernels.

Same call signatures and return conventions as ``_kernels_py``; the wrappers in
``nmems.linalg`` choose whichever is importable.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def jacobi_eigh(double[:, ::1] a_in, double tol, int max_sweeps):
    """Cyclic Jacobi on a real symmetric matrix.

    Returns ``(w, v, sweeps, off)``; ``sweeps`` is -1 when ``off`` never fell
    below ``tol``. ``w`` is unsorted, columns of ``v`` are the eigenvectors.
    """
    cdef Py_ssize_t n = a_in.shape[0]
    cdef cnp.ndarray[double, ndim=2, mode="c"] a_arr = np.array(a_in, dtype=np.float64, order="C")
    cdef cnp.ndarray[double, ndim=2, mode="c"] v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double off, apq, theta, t, c, s, akp, akq
    cdef int converged = 0

    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = sqrt(2.0 * off)
        if off < tol:
            converged = 1
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                a[p, p] = a[p, p] - t * apq
                a[q, q] = a[q, q] + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[p, k] = a[k, p]
                        a[k, q] = s * akp + c * akq
                        a[q, k] = a[k, q]
                    akp = v[k, p]
                    akq = v[k, q]
                    v[k, p] = c * akp - s * akq
                    v[k, q] = s * akp + c * akq

    w = np.array([a[k, k] for k in range(n)], dtype=np.float64)
    return w, v_arr, (sweep if converged else -1), off


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def hessenberg_eigvals(double complex[:, ::1] h_in, double eps, int max_iter):
    """Shifted QR iteration on a complex upper Hessenberg matrix.

    Returns ``(eigs, iterations)``; ``iterations`` is -1 on non-convergence and
    ``eigs`` then holds the current diagonal.
    """
    cdef Py_ssize_t n = h_in.shape[0]
    cdef cnp.ndarray[double complex, ndim=2, mode="c"] h_arr = np.array(h_in, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] h = h_arr
    cdef cnp.ndarray[double complex, ndim=1] cs_s = np.zeros(max(n, 1), dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] cs_c = np.zeros(max(n, 1), dtype=np.float64)
    cdef Py_ssize_t hi = n - 1
    cdef Py_ssize_t l, k, j, jmax
    cdef int its = 0, total = 0
    cdef double complex a, b, c_, d, disc, mu, mu1, mu2, x, y, s, t1, t2
    cdef double r, c, ax
    eigs = np.zeros(n, dtype=np.complex128)

    while hi >= 0:
        l = hi
        while l > 0:
            if sqrt(cabs2(h[l, l - 1])) <= eps * (sqrt(cabs2(h[l, l])) + sqrt(cabs2(h[l - 1, l - 1]))):
                h[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            eigs[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > max_iter:
            for k in range(hi + 1):
                eigs[k] = h[k, k]
            return eigs, -1

        if its % 11 == 10:
            mu = h[hi, hi] + sqrt(cabs2(h[hi, hi - 1]))
        else:
            a = h[hi - 1, hi - 1]
            b = h[hi - 1, hi]
            c_ = h[hi, hi - 1]
            d = h[hi, hi]
            disc = ((a - d) * (a - d) / 4.0 + b * c_) ** 0.5
            mu1 = (a + d) / 2.0 + disc
            mu2 = (a + d) / 2.0 - disc
            mu = mu1 if cabs2(mu1 - d) <= cabs2(mu2 - d) else mu2

        for k in range(l, hi + 1):
            h[k, k] = h[k, k] - mu
        for k in range(l, hi):
            x = h[k, k]
            y = h[k + 1, k]
            r = sqrt(cabs2(x) + cabs2(y))
            if r == 0.0:
                c = 1.0
                s = 0.0
            elif cabs2(x) == 0.0:
                c = 0.0
                s = y.conjugate() / r
            else:
                ax = sqrt(cabs2(x))
                c = ax / r
                s = (x / ax) * y.conjugate() / r
            cs_c[k] = c
            cs_s[k] = s
            for j in range(k, n):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = c * t1 + s * t2
                h[k + 1, j] = -s.conjugate() * t1 + c * t2
        for k in range(l, hi):
            c = cs_c[k]
            s = cs_s[k]
            jmax = k + 2 if k + 2 <= hi else hi
            for j in range(0, jmax + 1):
                t1 = h[j, k]
                t2 = h[j, k + 1]
                h[j, k] = c * t1 + s.conjugate() * t2
                h[j, k + 1] = -s * t1 + c * t2
        for k in range(l, hi + 1):
            h[k, k] = h[k, k] + mu

    return eigs, total
