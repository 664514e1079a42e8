"""Pure-Python string kernels.

Reference implementation of the edit-distance kernels, used when the compiled
extension is unavailable (or when ``LOGSPACE_PURE_PYTHON`` is set). The
compiled module in ``_ckernels.pyx`` exposes the same three functions.
"""
import numpy as np


def _trim(a, b):
    # common prefix/suffix never changes the edit distance
    n, m = len(a), len(b)
    i = 0
    while i < n and i < m and a[i] == b[i]:
        i += 1
    j = 0
    while j < n - i and j < m - i and a[n - 1 - j] == b[m - 1 - j]:
        j += 1
    return a[i:n - j], b[i:m - j]


def _peq(a: str) -> dict:
    # bit i of peq[c] is set where a[i] == c
    peq: dict = {}
    for i, c in enumerate(a):
        peq[c] = peq.get(c, 0) | (1 << i)
    return peq


def _lev_bits(peq: dict, m: int, b: str) -> int:
    """Bit-parallel edit distance of a length-``m`` pattern against ``b``.

    Each column of the DP table is held as vertical +1/-1 delta bitmasks in
    two Python ints, so one text character costs a handful of int ops.
    """
    if not m:
        return len(b)
    full = (1 << m) - 1
    top = 1 << (m - 1)
    pv, mv, score = full, 0, m
    for c in b:
        eq = peq.get(c, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & top:
            score += 1
        elif mh & top:
            score -= 1
        ph = ((ph << 1) | 1) & full
        mh = (mh << 1) & full
        pv = mh | (~(xv | ph) & full)
        mv = ph & xv
    return score


def lev(a: str, b: str) -> int:
    """Unit-cost Levenshtein distance (insert, delete, replace)."""
    a, b = _trim(a, b)
    if len(a) > len(b):
        a, b = b, a
    return _lev_bits(_peq(a), len(a), b)


def nlev(a: str, b: str) -> float:
    """Normalized edit distance 2L / (|a| + |b| + L), with ("", "") -> 0."""
    d = lev(a, b)
    if d == 0:
        return 0.0
    return 2.0 * d / (len(a) + len(b) + d)


def nlev_matrix(xs, ys) -> np.ndarray:
    """Matrix of :func:`nlev` over all pairs of ``xs`` and ``ys``."""
    out = np.zeros((len(xs), len(ys)))
    for i, a in enumerate(xs):
        peq, m = _peq(a), len(a)
        for j, b in enumerate(ys):
            d = _lev_bits(peq, m, b)
            if d:
                out[i, j] = 2.0 * d / (m + len(b) + d)
    return out
