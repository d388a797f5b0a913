"""Compiled Jacobi kernels for small dense complex matrices.

Both routines work on private copies and return plain arrays; ordering,
validation and error translation happen in :mod:`blocknorm.matcore`.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _rotation(app, aqq, apq):
    # unitary G on the (p, q) plane with (G^H M G)_pq = 0 for
    # M = [[app, apq], [conj(apq), aqq]]
    r = abs(apq)
    phase = apq / r
    theta = (aqq - app) / (2.0 * r)
    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
    g_pp = c + 0j
    g_pq = s + 0j
    g_qp = -s * np.conj(phase)
    g_qq = c * np.conj(phase)
    return g_pp, g_pq, g_qp, g_qq


@njit(cache=True)
def jacobi_eigh(m, sweep_tol, max_sweeps):
    """Cyclic Jacobi on a Hermitian matrix.

    Returns ``(w, v, sweeps)`` with unsorted real eigenvalues ``w`` and
    eigenvector columns ``v``. ``sweeps == -1`` signals that the off-diagonal
    mass did not drop below ``sweep_tol * ||m||_F`` within ``max_sweeps``.
    """
    n = m.shape[0]
    a = m.copy()
    v = np.eye(n, dtype=np.complex128)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j].real ** 2 + a[i, j].imag ** 2
    fro = np.sqrt(fro)
    w = np.empty(n)
    if fro == 0.0 or n == 1:
        for i in range(n):
            w[i] = a[i, i].real
        return w, v, 0
    target = sweep_tol * fro
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * (a[i, j].real ** 2 + a[i, j].imag ** 2)
        if np.sqrt(off) <= target:
            for i in range(n):
                w[i] = a[i, i].real
            return w, v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                g_pp, g_pq, g_qp, g_qq = _rotation(app, aqq, apq)
                # columns: a <- a G
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * g_pp + akq * g_qp
                    a[k, q] = akp * g_pq + akq * g_qq
                # rows: a <- G^H a
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(g_pp) * apk + np.conj(g_qp) * aqk
                    a[q, k] = np.conj(g_pq) * apk + np.conj(g_qq) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * g_pp + vkq * g_qp
                    v[k, q] = vkp * g_pq + vkq * g_qq
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, -1


@njit(cache=True)
def one_sided_jacobi(x, sweep_tol, max_sweeps):
    """Hestenes one-sided Jacobi: find unitary ``v`` with ``x @ v`` having
    mutually orthogonal columns.

    Returns ``(xv, v, sweeps)``; the singular values are the column norms of
    ``xv``. ``sweeps == -1`` signals non-convergence.
    """
    n = x.shape[1]
    rows = x.shape[0]
    a = x.copy()
    v = np.eye(n, dtype=np.complex128)
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0j
                for k in range(rows):
                    alpha += a[k, p].real ** 2 + a[k, p].imag ** 2
                    beta += a[k, q].real ** 2 + a[k, q].imag ** 2
                    gamma += np.conj(a[k, p]) * a[k, q]
                if abs(gamma) <= sweep_tol * np.sqrt(alpha * beta) or abs(gamma) == 0.0:
                    continue
                rotated = True
                g_pp, g_pq, g_qp, g_qq = _rotation(alpha, beta, gamma)
                for k in range(rows):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * g_pp + akq * g_qp
                    a[k, q] = akp * g_pq + akq * g_qq
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * g_pp + vkq * g_qp
                    v[k, q] = vkp * g_pq + vkq * g_qq
        if not rotated:
            return a, v, sweep
    return a, v, -1
