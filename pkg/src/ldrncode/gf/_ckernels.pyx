# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled elimination and product kernels over GF(p) / tabled GF(p^k).

Same contract as ``_kernels_py``. All residues are kept in ``[0, p)``;
``cdivision`` is on, so every ``%`` is applied to a non-negative operand.
"""

import numpy as np

ctypedef long long i64


cdef inline i64 _inv_mod(i64 a, i64 p) nogil:
    cdef i64 t = 0, newt = 1, r = p, newr = a, qq, tmp
    while newr != 0:
        qq = r // newr
        tmp = t - qq * newt
        t = newt
        newt = tmp
        tmp = r - qq * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def eliminate(i64[:, ::1] a, Py_ssize_t ncols, int mode, i64 p,
              const i64[:, ::1] addt, const i64[:, ::1] mult,
              const i64[::1] negt, const i64[::1] invt, i64[::1] pivots):
    cdef Py_ssize_t rows = a.shape[0], cols = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef i64 pv, iv, f, nf, tmp, det = 1
    cdef int swaps = 0
    with nogil:
        for c in range(ncols):
            if r >= rows:
                break
            piv = -1
            for i in range(r, rows):
                if a[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(c, cols):
                    tmp = a[r, j]
                    a[r, j] = a[piv, j]
                    a[piv, j] = tmp
                swaps += 1
            pv = a[r, c]
            if mode == 0:
                det = det * pv % p
                iv = _inv_mod(pv, p)
                for j in range(c, cols):
                    a[r, j] = a[r, j] * iv % p
            else:
                det = mult[det, pv]
                iv = invt[pv]
                for j in range(c, cols):
                    a[r, j] = mult[iv, a[r, j]]
            for i in range(rows):
                if i == r:
                    continue
                f = a[i, c]
                if f == 0:
                    continue
                if mode == 0:
                    nf = p - f
                    for j in range(c, cols):
                        a[i, j] = (a[i, j] + nf * a[r, j]) % p
                else:
                    nf = negt[f]
                    for j in range(c, cols):
                        a[i, j] = addt[a[i, j], mult[nf, a[r, j]]]
            pivots[r] = c
            r += 1
    return r, det, swaps


def matmul(const i64[:, ::1] a, const i64[:, ::1] b, int mode, i64 p,
           const i64[:, ::1] addt, const i64[:, ::1] mult):
    cdef Py_ssize_t n = a.shape[0], inner = a.shape[1], m = b.shape[1]
    cdef Py_ssize_t i, t, j
    cdef i64 av
    out = np.zeros((n, m), dtype=np.int64)
    cdef i64[:, ::1] o = out
    with nogil:
        for i in range(n):
            for t in range(inner):
                av = a[i, t]
                if av == 0:
                    continue
                if mode == 0:
                    for j in range(m):
                        o[i, j] = (o[i, j] + av * b[t, j]) % p
                else:
                    for j in range(m):
                        o[i, j] = addt[o[i, j], mult[av, b[t, j]]]
    return out
