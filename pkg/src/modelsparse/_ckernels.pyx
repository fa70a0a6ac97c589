# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels. See ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def jacobi_eigenvalues(a, double tol=1e-12, int max_sweeps=100):
    cdef double[:, ::1] m = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double off, thresh, fro, apq, app, aqq, theta, t, c, s, akp, akq
    if n == 0:
        return np.empty(0)
    fro = 0.0
    for p in range(n):
        for q in range(n):
            fro += m[p, q] * m[p, q]
    fro = sqrt(fro)
    thresh = tol * (fro if fro > 1.0 else 1.0)
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += m[p, q] * m[p, q]
        if sqrt(2.0 * off) <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                app = m[p, p]
                aqq = m[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    if k == p or k == q:
                        continue
                    akp = m[k, p]
                    akq = m[k, q]
                    m[k, p] = c * akp - s * akq
                    m[k, q] = s * akp + c * akq
                    m[p, k] = m[k, p]
                    m[q, k] = m[k, q]
                m[p, p] = app - t * apq
                m[q, q] = aqq + t * apq
                m[p, q] = 0.0
                m[q, p] = 0.0
    out = np.empty(n)
    cdef double[::1] o = out
    for p in range(n):
        o[p] = m[p, p]
    return out


cdef inline bint _before(double va, Py_ssize_t ia, double vb, Py_ssize_t ib):
    # rank order: larger value first, smaller index on ties
    return va > vb or (va == vb and ia < ib)


def topk_stable(values, Py_ssize_t k):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    if k > n:
        k = n
    # min-heap (under rank order) of the current best k
    heap_arr = np.empty(k, dtype=np.int64)
    cdef cnp.int64_t[::1] heap = heap_arr
    cdef Py_ssize_t size = 0, i, pos, parent, child, worst, tmp
    for i in range(n):
        if size < k:
            pos = size
            heap[pos] = i
            size += 1
            while pos > 0:
                parent = (pos - 1) // 2
                if _before(v[heap[parent]], heap[parent], v[heap[pos]], heap[pos]):
                    tmp = heap[parent]; heap[parent] = heap[pos]; heap[pos] = tmp
                    pos = parent
                else:
                    break
        elif _before(v[i], i, v[heap[0]], heap[0]):
            heap[0] = i
            pos = 0
            while True:
                child = 2 * pos + 1
                if child >= size:
                    break
                worst = child
                if child + 1 < size and _before(v[heap[child]], heap[child],
                                                v[heap[child + 1]], heap[child + 1]):
                    worst = child + 1
                if _before(v[heap[pos]], heap[pos], v[heap[worst]], heap[worst]):
                    tmp = heap[pos]; heap[pos] = heap[worst]; heap[worst] = tmp
                    pos = worst
                else:
                    break
    # heap holds the winners; emit them best-first
    idx = np.asarray(heap_arr[:size])
    vals = np.asarray(v)[idx]
    order = np.lexsort((idx, -vals))
    return idx[order].astype(np.int64)


def segment_sq_norms(values, indptr, indices):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.int64_t[::1] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t m = ptr.shape[0] - 1
    if m <= 0:
        return np.zeros(0)
    out = np.empty(m)
    cdef double[::1] o = out
    cdef Py_ssize_t g, j
    cdef double acc, x
    for g in range(m):
        acc = 0.0
        for j in range(ptr[g], ptr[g + 1]):
            x = v[ind[j]]
            acc += x * x
        o[g] = acc
    return out
