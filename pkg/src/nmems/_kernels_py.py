"""Pure-Python eigenvalue kernels.

Line-for-line twin of the compiled ``_kernels`` module, used when the
extension is unavailable or ``NMEMS_PURE_PYTHON`` is set.
"""
import math

import numpy as np


def jacobi_eigh(a_in, tol, max_sweeps):
    n = len(a_in)
    a = [list(map(float, row)) for row in a_in]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    converged = False
    off = 0.0
    sweep = 0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            row = a[p]
            for q in range(p + 1, n):
                off += row[q] * row[q]
        off = math.sqrt(2.0 * off)
        if off < tol:
            converged = True
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                a[p][p] -= t * apq
                a[q][q] += t * apq
                a[p][q] = a[q][p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k][p]
                        akq = a[k][q]
                        a[k][p] = a[p][k] = c * akp - s * akq
                        a[k][q] = a[q][k] = s * akp + c * akq
                    vk = v[k]
                    akp = vk[p]
                    akq = vk[q]
                    vk[p] = c * akp - s * akq
                    vk[q] = s * akp + c * akq
    w = np.array([a[k][k] for k in range(n)], dtype=np.float64)
    return w, np.array(v, dtype=np.float64), (sweep if converged else -1), off


def hessenberg_eigvals(h_in, eps, max_iter):
    n = len(h_in)
    h = [[complex(x) for x in row] for row in h_in]
    cs_c = [0.0] * max(n, 1)
    cs_s = [0j] * max(n, 1)
    eigs = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        l = hi
        while l > 0:
            if abs(h[l][l - 1]) <= eps * (abs(h[l][l]) + abs(h[l - 1][l - 1])):
                h[l][l - 1] = 0j
                break
            l -= 1
        if l == hi:
            eigs[hi] = h[hi][hi]
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > max_iter:
            for k in range(hi + 1):
                eigs[k] = h[k][k]
            return eigs, -1

        if its % 11 == 10:
            mu = h[hi][hi] + abs(h[hi][hi - 1])
        else:
            a = h[hi - 1][hi - 1]
            b = h[hi - 1][hi]
            c_ = h[hi][hi - 1]
            d = h[hi][hi]
            disc = ((a - d) * (a - d) / 4.0 + b * c_) ** 0.5
            mu1 = (a + d) / 2.0 + disc
            mu2 = (a + d) / 2.0 - disc
            mu = mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2

        for k in range(l, hi + 1):
            h[k][k] -= mu
        for k in range(l, hi):
            x = h[k][k]
            y = h[k + 1][k]
            r = math.sqrt(abs(x) ** 2 + abs(y) ** 2)
            if r == 0.0:
                c, s = 1.0, 0j
            elif x == 0:
                c, s = 0.0, y.conjugate() / r
            else:
                ax = abs(x)
                c = ax / r
                s = (x / ax) * y.conjugate() / r
            cs_c[k] = c
            cs_s[k] = s
            rk, rk1 = h[k], h[k + 1]
            for j in range(k, n):
                t1, t2 = rk[j], rk1[j]
                rk[j] = c * t1 + s * t2
                rk1[j] = -s.conjugate() * t1 + c * t2
        for k in range(l, hi):
            c, s = cs_c[k], cs_s[k]
            jmax = min(k + 2, hi)
            for j in range(jmax + 1):
                row = h[j]
                t1, t2 = row[k], row[k + 1]
                row[k] = c * t1 + s.conjugate() * t2
                row[k + 1] = -s * t1 + c * t2
        for k in range(l, hi + 1):
            h[k][k] += mu
    return eigs, total
