"""Pure-Python twin of the compiled bitmask kernels.

Same canvas convention: bit ``r*cw + c`` is column c, row r.
"""
from __future__ import annotations

MAXC = 64


def _pop(x: int) -> int:
    return bin(x).count("1")


def _hmask(cw: int) -> int:
    return sum(1 << b for b in range(MAXC) if b % cw != cw - 1)


def _row(mask: int, r: int, cw: int) -> int:
    return (mask >> (r * cw)) & ((1 << cw) - 1)


def _col_count(mask: int, c: int, cw: int, ch: int) -> int:
    return sum((mask >> (r * cw + c)) & 1 for r in range(ch))


def _start(k: int, shifted: bool) -> int:
    if shifted and k & 1:
        return 1 - (k - 1) // 2
    return -((k - 1) // 2)


def _perimeter(mask: int, cw: int, hmask: int) -> int:
    inner = _pop(mask & (mask >> 1) & hmask) + _pop(mask & (mask >> cw))
    return 4 * _pop(mask) - 2 * inner


def _rows_step(mask: int, cw: int, ch: int, ci0: int) -> int:
    out = 0
    for r in range(ch):
        k = _pop(_row(mask, r, cw))
        if k:
            out |= (((1 << k) - 1) << (_start(k, False) - ci0)) << (r * cw)
    return out


def _cols_step(mask: int, cw: int, ch: int, cj0: int, m_even: bool) -> int:
    out = 0
    for c in range(cw):
        k = _col_count(mask, c, cw, ch)
        if k:
            s = _start(k, m_even) - cj0
            for r in range(s, s + k):
                out |= 1 << (r * cw + c)
    return out


def _max_row(mask: int, cw: int, ch: int) -> int:
    return max((_pop(_row(mask, r, cw)) for r in range(ch)), default=0)


def _max_col(mask: int, cw: int, ch: int) -> int:
    return max((_col_count(mask, c, cw, ch) for c in range(cw)), default=0)


def _weighted(mask: int, w) -> int:
    s = 0
    while mask:
        low = mask & -mask
        s += w[low.bit_length() - 1]
        mask ^= low
    return s


def _unimodal(v, c: int) -> bool:
    return (all(v[k] <= v[k + 1] for k in range(c))
            and all(v[k] >= v[k + 1] for k in range(c, len(v) - 1)))


def _chain(spans) -> bool:
    for a, (lo, hi, n) in enumerate(spans):
        if hi - lo + 1 != n:
            return False
        for lo2, hi2, _ in spans[a + 1:]:
            if not ((lo <= lo2 and hi2 <= hi) or (lo2 <= lo and hi <= hi2)):
                return False
    return True


def _profiles(mask: int, cw: int, ch: int):
    rows: list[list[int]] = [[] for _ in range(ch)]
    cols: list[list[int]] = [[] for _ in range(cw)]
    for r in range(ch):
        for c in range(cw):
            if (mask >> (r * cw + c)) & 1:
                rows[r].append(c)
                cols[c].append(r)
    return rows, cols


def _rhombus(mask: int, cw: int, ch: int, cc: int, cr: int) -> bool:
    rows, cols = _profiles(mask, cw, ch)
    if not (_unimodal([len(x) for x in cols], cc)
            and _unimodal([len(x) for x in rows], cr)):
        return False
    return (_chain([(x[0], x[-1], len(x)) for x in rows if x])
            and _chain([(x[0], x[-1], len(x)) for x in cols if x]))


def _profiles_unimodal(mask: int, cw: int, ch: int, cc: int, cr: int) -> bool:
    rows, cols = _profiles(mask, cw, ch)
    return (_unimodal([len(x) for x in cols], cc)
            and _unimodal([len(x) for x in rows], cr))


def _deposit(s: int, bits) -> int:
    out = 0
    while s:
        low = s & -s
        out |= 1 << bits[low.bit_length() - 1]
        s ^= low
    return out


def perimeter(mask: int, cw: int) -> int:
    return _perimeter(mask, cw, _hmask(cw))


def steiner(mask: int, cw: int, ch: int, ci0: int, cj0: int, m_even: bool):
    mid = _rows_step(mask, cw, ch, ci0)
    return mid, _cols_step(mid, cw, ch, cj0, m_even)


def weighted(mask: int, weights) -> int:
    return _weighted(mask, list(weights))


def is_rhombus(mask: int, cw: int, ch: int, cc: int, cr: int) -> bool:
    return _rhombus(mask, cw, ch, cc, cr)


def audit(window_bits, cw, ch, ci0, cj0, m_even, ref_mask, weights,
          cc, cr, lc, lr):
    bits = list(window_bits)
    w = list(weights)
    hm = _hmask(cw)
    counts = [0] * 8
    first = [-1] * 8
    for s in range(1 << len(bits)):
        e = _deposit(s, bits)
        mid = _rows_step(e, cw, ch, ci0)
        out = _cols_step(mid, cw, ch, cj0, m_even)
        p0, p1, p2 = (_perimeter(x, cw, hm) for x in (e, mid, out))
        mr = _max_row(e, cw, ch)
        bad = (
            _pop(e) != _pop(mid) or _pop(e) != _pop(out),
            not p0 >= p1 >= p2,
            e != 0 and _weighted(e ^ ref_mask, w) < _weighted(out ^ ref_mask, w),
            not _rhombus(out, cw, ch, cc, cr),
            not _profiles_unimodal(out, cw, ch, lc, lr),
            p2 != 2 * mr + 2 * _max_col(e, cw, ch),
            p2 != 2 * mr + 2 * _max_col(mid, cw, ch),
        )
        counts[7] += 1
        for k, b in enumerate(bad):
            if b:
                counts[k] += 1
                if first[k] < 0:
                    first[k] = s
    return counts, first


def min_energy(window_bits, n_cells, ref_mask, weights, cw, p, q):
    bits = list(window_bits)
    w = list(weights)
    hm = _hmask(cw)
    nb = len(bits)
    if n_cells < 0 or n_cells > nb:
        raise ValueError("cardinality outside the window")
    if n_cells == 0:
        return q * _weighted(ref_mask, w), 0, 1
    best, arg, seen = -1, 0, 0
    s, limit = (1 << n_cells) - 1, 1 << nb
    while s < limit:
        e = _deposit(s, bits)
        val = p * _perimeter(e, cw, hm) + q * _weighted(e ^ ref_mask, w)
        if best < 0 or val < best:
            best, arg = val, e
        seen += 1
        c = s & -s
        r = s + c
        s = (((r ^ s) >> 2) // c) | r
    return best, arg, seen
