# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Bitmask kernels on a small canvas (at most 64 cells).

Bit ``r*cw + c`` is the cell at canvas column c, row r.  The pure-Python
twin lives in ``_kernels_py``; both must return identical results.
"""
from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

DEF MAXC = 64

ctypedef uint64_t u64


cdef inline int pop(u64 x) nogil:
    return __builtin_popcountll(x)


cdef inline u64 row_bits(u64 mask, int r, int cw) nogil:
    return (mask >> (r * cw)) & ((<u64>1 << cw) - 1)


cdef int _perimeter(u64 mask, int cw, u64 hmask) nogil:
    cdef int inner = pop(mask & (mask >> 1) & hmask) + pop(mask & (mask >> cw))
    return 4 * pop(mask) - 2 * inner


cdef inline int _start(int k, bint shifted) nogil:
    if shifted and (k & 1):
        return 1 - (k - 1) // 2
    return -((k - 1) // 2)


cdef u64 _rows_step(u64 mask, int cw, int ch, int ci0) nogil:
    cdef u64 out = 0
    cdef int r, k
    for r in range(ch):
        k = pop(row_bits(mask, r, cw))
        if k:
            out |= (((<u64>1 << k) - 1) << (_start(k, 0) - ci0)) << (r * cw)
    return out


cdef u64 _cols_step(u64 mask, int cw, int ch, int cj0, bint m_even) nogil:
    cdef u64 out = 0
    cdef int c, r, k, s
    for c in range(cw):
        k = 0
        for r in range(ch):
            k += (mask >> (r * cw + c)) & 1
        if k:
            s = _start(k, m_even) - cj0
            for r in range(s, s + k):
                out |= (<u64>1) << (r * cw + c)
    return out


cdef int _max_row(u64 mask, int cw, int ch) nogil:
    cdef int r, k, best = 0
    for r in range(ch):
        k = pop(row_bits(mask, r, cw))
        if k > best:
            best = k
    return best


cdef int _max_col(u64 mask, int cw, int ch) nogil:
    cdef int c, r, k, best = 0
    for c in range(cw):
        k = 0
        for r in range(ch):
            k += (mask >> (r * cw + c)) & 1
        if k > best:
            best = k
    return best


cdef int64_t _weighted(u64 mask, int64_t* w) nogil:
    cdef int64_t s = 0
    cdef int b
    while mask:
        b = __builtin_ctzll(mask)
        s += w[b]
        mask &= mask - 1
    return s


cdef bint _unimodal(int* v, int n, int c) nogil:
    cdef int k
    for k in range(c):
        if v[k] > v[k + 1]:
            return 0
    for k in range(c, n - 1):
        if v[k] < v[k + 1]:
            return 0
    return 1


cdef bint _chain(int* lo, int* hi, int* cnt, int n) nogil:
    cdef int a, b
    for a in range(n):
        if cnt[a] == 0:
            continue
        if hi[a] - lo[a] + 1 != cnt[a]:
            return 0
        for b in range(a + 1, n):
            if cnt[b] == 0:
                continue
            if not ((lo[a] <= lo[b] and hi[b] <= hi[a])
                    or (lo[b] <= lo[a] and hi[a] <= hi[b])):
                return 0
    return 1


cdef bint _rhombus(u64 mask, int cw, int ch, int cc, int cr) nogil:
    cdef int rcnt[MAXC]
    cdef int rlo[MAXC]
    cdef int rhi[MAXC]
    cdef int ccnt[MAXC]
    cdef int clo[MAXC]
    cdef int chi[MAXC]
    cdef int r, c
    for r in range(ch):
        rcnt[r] = 0
        rlo[r] = MAXC
        rhi[r] = -1
    for c in range(cw):
        ccnt[c] = 0
        clo[c] = MAXC
        chi[c] = -1
    for r in range(ch):
        for c in range(cw):
            if (mask >> (r * cw + c)) & 1:
                rcnt[r] += 1
                ccnt[c] += 1
                if c < rlo[r]:
                    rlo[r] = c
                rhi[r] = c
                if r < clo[c]:
                    clo[c] = r
                chi[c] = r
    if not _unimodal(ccnt, cw, cc) or not _unimodal(rcnt, ch, cr):
        return 0
    return _chain(rlo, rhi, rcnt, ch) and _chain(clo, chi, ccnt, cw)


def perimeter(u64 mask, int cw):
    cdef u64 hmask = 0
    cdef int b
    for b in range(MAXC):
        if b % cw != cw - 1:
            hmask |= (<u64>1) << b
    return _perimeter(mask, cw, hmask)


def steiner(u64 mask, int cw, int ch, int ci0, int cj0, bint m_even):
    cdef u64 mid = _rows_step(mask, cw, ch, ci0)
    return mid, _cols_step(mid, cw, ch, cj0, m_even)


def weighted(u64 mask, weights):
    cdef int64_t w[MAXC]
    cdef int b
    for b in range(len(weights)):
        w[b] = weights[b]
    return _weighted(mask, w)


def is_rhombus(u64 mask, int cw, int ch, int cc, int cr):
    return bool(_rhombus(mask, cw, ch, cc, cr))


cdef u64 _deposit(u64 s, int* bits, int nbits) nogil:
    cdef u64 out = 0
    cdef int b
    while s:
        b = __builtin_ctzll(s)
        out |= (<u64>1) << bits[b]
        s &= s - 1
    return out


cdef bint _profiles_unimodal(u64 mask, int cw, int ch, int cc, int cr) nogil:
    cdef int rcnt[MAXC]
    cdef int ccnt[MAXC]
    cdef int r, c
    for r in range(ch):
        rcnt[r] = 0
    for c in range(cw):
        ccnt[c] = 0
    for r in range(ch):
        for c in range(cw):
            if (mask >> (r * cw + c)) & 1:
                rcnt[r] += 1
                ccnt[c] += 1
    return _unimodal(ccnt, cw, cc) and _unimodal(rcnt, ch, cr)


def audit(window_bits, int cw, int ch, int ci0, int cj0, bint m_even,
          u64 ref_mask, weights, int cc, int cr, int lc, int lr):
    """Exhaustive check over every subset of the window.

    Returns (counts, first) where both are 8-lists indexed by
    cardinality, perimeter, dissipation, rhombus, unimodal about (lc, lr),
    identity with max counts of E, identity with the row-symmetrized
    column count, sets.  ``first`` holds the first offending subset
    index or -1.
    """
    cdef int bits[MAXC]
    cdef int64_t w[MAXC]
    cdef int nb = len(window_bits)
    cdef int b
    cdef u64 hmask = 0
    for b in range(nb):
        bits[b] = window_bits[b]
    for b in range(len(weights)):
        w[b] = weights[b]
    for b in range(MAXC):
        if b % cw != cw - 1:
            hmask |= (<u64>1) << b
    cdef long long counts[8]
    cdef long long first[8]
    cdef int k
    for k in range(8):
        counts[k] = 0
        first[k] = -1
    cdef u64 s, e, mid, out
    cdef u64 total = (<u64>1) << nb
    cdef int p0, p1, p2, mr, mc, mcm
    cdef bint bad[8]
    with nogil:
        for s in range(total):
            e = _deposit(s, bits, nb)
            mid = _rows_step(e, cw, ch, ci0)
            out = _cols_step(mid, cw, ch, cj0, m_even)
            p0 = _perimeter(e, cw, hmask)
            p1 = _perimeter(mid, cw, hmask)
            p2 = _perimeter(out, cw, hmask)
            mr = _max_row(e, cw, ch)
            mc = _max_col(e, cw, ch)
            mcm = _max_col(mid, cw, ch)
            bad[0] = pop(e) != pop(mid) or pop(e) != pop(out)
            bad[1] = not (p0 >= p1 and p1 >= p2)
            bad[2] = e != 0 and (_weighted(e ^ ref_mask, w) < _weighted(out ^ ref_mask, w))
            bad[3] = not _rhombus(out, cw, ch, cc, cr)
            bad[4] = not _profiles_unimodal(out, cw, ch, lc, lr)
            bad[5] = p2 != 2 * mr + 2 * mc
            bad[6] = p2 != 2 * mr + 2 * mcm
            bad[7] = 0
            counts[7] += 1
            for k in range(7):
                if bad[k]:
                    counts[k] += 1
                    if first[k] < 0:
                        first[k] = s
    return [counts[k] for k in range(8)], [first[k] for k in range(8)]


def min_energy(window_bits, int n_cells, u64 ref_mask, weights, int cw,
               long long p, long long q):
    """Minimum of p*perimeter + q*weighted(E ^ ref) over subsets of size n.

    Subsets are visited in increasing bitmask order of the window index
    (Gosper's hack), so the reported argmin is the first minimiser.
    """
    cdef int bits[MAXC]
    cdef int64_t w[MAXC]
    cdef int nb = len(window_bits)
    cdef int b
    cdef u64 hmask = 0
    for b in range(nb):
        bits[b] = window_bits[b]
    for b in range(len(weights)):
        w[b] = weights[b]
    for b in range(MAXC):
        if b % cw != cw - 1:
            hmask |= (<u64>1) << b
    if n_cells < 0 or n_cells > nb:
        raise ValueError("cardinality outside the window")
    cdef u64 s, e, c, r, limit = (<u64>1) << nb
    cdef long long best = -1, val, seen = 0
    cdef u64 arg = 0
    if n_cells == 0:
        return p * 0 + q * _weighted(ref_mask, w), 0, 1
    s = ((<u64>1) << n_cells) - 1
    with nogil:
        while s < limit:
            e = _deposit(s, bits, nb)
            val = p * _perimeter(e, cw, hmask) + q * _weighted(e ^ ref_mask, w)
            if best < 0 or val < best:
                best = val
                arg = e
            seen += 1
            c = s & (~s + 1)
            r = s + c
            s = (((r ^ s) >> 2) // c) | r
    return best, arg, seen
