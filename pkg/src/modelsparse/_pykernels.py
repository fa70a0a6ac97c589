"""Pure-Python/numpy implementations of the numerical kernels.

These mirror ``_ckernels.pyx`` operation for operation and are used whenever
the compiled extension is unavailable (or ``MODELSPARSE_PURE_PYTHON`` is set).
"""
import math

import numpy as np


def jacobi_eigenvalues(a, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : ndarray of shape (n, n)
        Symmetric matrix. Not modified.
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm is at most
        ``tol * max(1, ||a||_F)``.
    max_sweeps : int
        Hard cap on the number of cyclic sweeps.

    Returns
    -------
    eigenvalues : ndarray of shape (n,)
        Diagonal after convergence, in the original row order (unsorted).
    """
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    if n == 0:
        return np.empty(0)
    thresh = tol * max(1.0, math.sqrt(float(np.sum(a * a))))
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if math.sqrt(2.0 * off) <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                newp = c * colp - s * colq
                newq = s * colp + c * colq
                a[:, p] = newp
                a[:, q] = newq
                a[p, :] = newp
                a[q, :] = newq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
    return np.diag(a).copy()


def topk_stable(values, k):
    """Indices of the ``k`` largest entries, ties going to the smaller index.

    The result is ordered by rank (largest first).
    """
    values = np.asarray(values, dtype=np.float64)
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    order = np.argsort(-values, kind="stable")
    return order[:k].astype(np.int64)


def segment_sq_norms(v, indptr, indices):
    """Squared norms of ``v`` over index segments given in CSR layout.

    Segments must be nonempty.
    """
    v = np.asarray(v, dtype=np.float64)
    indptr = np.asarray(indptr, dtype=np.int64)
    if len(indptr) < 2:
        return np.zeros(0)
    sq = v[np.asarray(indices, dtype=np.int64)] ** 2
    return np.add.reduceat(sq, indptr[:-1])
