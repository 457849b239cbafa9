"""Numpy fallback for the elimination and product kernels.

Signatures mirror ``_ckernels.pyx`` exactly; ``mode`` 0 is arithmetic mod a
prime ``p``, mode 1 uses the add/mul/neg/inv lookup tables.
"""

import numpy as np


def eliminate(a, ncols, mode, p, addt, mult, negt, invt, pivots):
    """Gauss-Jordan reduce ``a`` in place, pivoting only in columns ``[0, ncols)``.

    Pivot rows are normalized to 1 and cleared above and below. Returns
    ``(rank, product of raw pivot values, number of row swaps)``; pivot
    column indices are written to ``pivots[:rank]``.
    """
    rows, cols = a.shape
    r = 0
    det = 1
    swaps = 0
    for c in range(ncols):
        if r >= rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv], c:] = a[[piv, r], c:]
            swaps += 1
        pv = int(a[r, c])
        f = a[:, c].copy()
        f[r] = 0
        others = np.flatnonzero(f)
        if mode == 0:
            det = det * pv % p
            a[r, c:] = a[r, c:] * pow(pv, p - 2, p) % p
            if others.size:
                a[others, c:] = (a[others, c:] - f[others, None] * a[r, c:][None, :]) % p
        else:
            det = int(mult[det, pv])
            a[r, c:] = mult[invt[pv], a[r, c:]]
            if others.size:
                prod = mult[negt[f[others]][:, None], a[r, c:][None, :]]
                a[others, c:] = addt[a[others, c:], prod]
        pivots[r] = c
        r += 1
    return r, det, swaps


def matmul(a, b, mode, p, addt, mult):
    n, inner = a.shape
    m = b.shape[1]
    if mode == 0:
        if inner == 0:
            return np.zeros((n, m), dtype=np.int64)
        if (p - 1) * (p - 1) * inner < (1 << 62):
            return (a @ b) % p
        out = np.zeros((n, m), dtype=np.int64)
        for t in range(inner):
            out = (out + a[:, t, None] * b[None, t, :]) % p
        return out
    out = np.zeros((n, m), dtype=np.int64)
    for t in range(inner):
        out = addt[out, mult[a[:, t, None], b[None, t, :]]]
    return out
