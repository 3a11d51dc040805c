"""Lattice sets on eps*Z^2, quasi-rectangles and exact cell-sum geometry.

A cell ``(i, j)`` stands for the closed square of side ``eps`` centred at
``eps*(i, j)``.  Every length, area, perimeter and dissipation returned here
is a :class:`fractions.Fraction`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.ndimage import distance_transform_cdt

Cell = tuple[int, int]

_NEIGHBOURS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings, 'p/q' strings or floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # decimal literal, not the binary expansion: 0.05 -> 1/20
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class LatticeSet:
    eps: Fraction
    cells: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        eps = as_fraction(self.eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(
            self, "cells", frozenset((int(i), int(j)) for i, j in self.cells))

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, cell) -> bool:
        return tuple(cell) in self.cells

    def __iter__(self):
        return iter(sorted(self.cells, key=lambda c: (c[1], c[0])))

    @property
    def area(self) -> Fraction:
        return len(self.cells) * self.eps ** 2

    def with_cells(self, cells: Iterable[Cell]) -> "LatticeSet":
        return LatticeSet(self.eps, frozenset(cells))

    def bbox(self) -> tuple[int, int, int, int]:
        """(imin, imax, jmin, jmax); raises on the empty set."""
        if not self.cells:
            raise ValueError("empty lattice set has no bounding box")
        xs = [c[0] for c in self.cells]
        ys = [c[1] for c in self.cells]
        return min(xs), max(xs), min(ys), max(ys)

    def row_counts(self) -> dict[int, int]:
        """j -> #J(., j), the number of cells in row j."""
        return dict(Counter(j for _, j in self.cells))

    def col_counts(self) -> dict[int, int]:
        """i -> #J(i, .), the number of cells in column i."""
        return dict(Counter(i for i, _ in self.cells))


def perimeter_count(cells) -> int:
    """Number of (inside, outside) nearest-neighbour pairs."""
    count = 0
    for i, j in cells:
        for di, dj in _NEIGHBOURS:
            if (i + di, j + dj) not in cells:
                count += 1
    return count


def perimeter_eps(s: LatticeSet) -> Fraction:
    return s.eps * perimeter_count(s.cells)


def proj_widths(s: LatticeSet) -> tuple[Fraction, Fraction]:
    """(P1, P2): eps times the longest row and the longest column."""
    if not s.cells:
        return Fraction(0), Fraction(0)
    return (s.eps * max(s.row_counts().values()),
            s.eps * max(s.col_counts().values()))


def _ring(p: Cell, r: int):
    i0, j0 = p
    for i in range(i0 - r, i0 + r + 1):
        yield i, j0 - r
        yield i, j0 + r
    for j in range(j0 - r + 1, j0 + r):
        yield i0 - r, j
        yield i0 + r, j


def _spiral_distance(p: Cell, cells, want_inside: bool, limit: int) -> int:
    if (p in cells) == want_inside:
        return 0
    for r in range(1, limit + 1):
        for q in _ring(p, r):
            if (q in cells) == want_inside:
                return r
    raise RuntimeError("spiral search exceeded its bound")


def distance_units(point: Cell, cells) -> int:
    """dist(i, J) + dist(i, Z^2 minus J) in lattice units."""
    if not cells:
        raise ValueError("distance to the empty set is undefined")
    p = (int(point[0]), int(point[1]))
    imin = min(c[0] for c in cells)
    imax = max(c[0] for c in cells)
    jmin = min(c[1] for c in cells)
    jmax = max(c[1] for c in cells)
    limit = max(abs(p[0] - imin), abs(p[0] - imax),
                abs(p[1] - jmin), abs(p[1] - jmax)) + 1
    return (_spiral_distance(p, cells, True, limit)
            + _spiral_distance(p, cells, False, limit))


def dist_inf_eps(point: Cell, s: LatticeSet) -> Fraction:
    return s.eps * distance_units(point, s.cells)


def distance_map(reference, frame: tuple[int, int, int, int]) -> np.ndarray:
    """Lattice-unit distance to the boundary of ``reference`` on a frame.

    ``frame`` is (imin, imax, jmin, jmax); the result is indexed
    ``[j - jmin, i - imin]``.  The frame is padded internally so the
    nearest complement cell of an interior cell is always seen.
    """
    if not reference:
        raise ValueError("distance to the empty set is undefined")
    imin, imax, jmin, jmax = frame
    ri = [c[0] for c in reference]
    rj = [c[1] for c in reference]
    pi0, pi1 = min(imin, min(ri)) - 1, max(imax, max(ri)) + 1
    pj0, pj1 = min(jmin, min(rj)) - 1, max(jmax, max(rj)) + 1
    mask = np.zeros((pj1 - pj0 + 1, pi1 - pi0 + 1), dtype=bool)
    for i, j in reference:
        mask[j - pj0, i - pi0] = True
    inside = distance_transform_cdt(mask, metric="chessboard")
    outside = distance_transform_cdt(~mask, metric="chessboard")
    full = (inside + outside).astype(np.int64)
    return full[jmin - pj0:jmax - pj0 + 1, imin - pi0:imax - pi0 + 1]


def dissipation_units(new_cells, old_cells) -> int:
    """Sum over the symmetric difference of distance_units(., old)."""
    diff = set(new_cells) ^ set(old_cells)
    if not diff:
        return 0
    if not old_cells:
        raise ValueError("dissipation against the empty set is undefined")
    frame = (min(c[0] for c in diff), max(c[0] for c in diff),
             min(c[1] for c in diff), max(c[1] for c in diff))
    dmap = distance_map(old_cells, frame)
    return int(sum(dmap[j - frame[2], i - frame[0]] for i, j in diff))


def dissipation_eps(e: LatticeSet, f: LatticeSet) -> Fraction:
    """D_eps(E, F): cell sum over E delta F of eps^2 times d(cell, dF)."""
    if e.eps != f.eps:
        raise ValueError("lattice spacings differ")
    if not f.cells:
        raise ValueError("reference set is empty")
    return e.eps ** 3 * dissipation_units(e.cells, f.cells)


def centered_run(k: int) -> range:
    """Indices of a run of k cells: odd k about 0, even k as -k/2+1..k/2."""
    if k % 2:
        h = (k - 1) // 2
        return range(-h, h + 1)
    return range(-k // 2 + 1, k // 2 + 1)


def quasi_rect_cells(n: int, m: int, r: int = 0) -> frozenset:
    """Pseudo-axial placement, without the orientation check."""
    rows = centered_run(m)
    out = {(i, j) for i in centered_run(n) for j in rows}
    top = rows[-1] + 1
    out.update((i, top) for i in centered_run(r))
    return frozenset(out)


@dataclass(frozen=True)
class QuasiRect:
    """Rectangle R of n x m cells plus a partial row Q of r cells on top.

    Placement is the pseudo-axial one: R and Q are centred by
    :func:`centered_run` and Q sits in the row right above R.
    """
    eps: Fraction
    n: int
    m: int
    r: int = 0

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.n < 1 or self.m < 1 or self.r < 0:
            raise ValueError("need n, m >= 1 and r >= 0")
        if self.r >= self.n:
            raise ValueError(f"partial row r={self.r} must be shorter than n={self.n}")
        if self.m > self.n:
            raise ValueError(f"orientation requires m <= n (got n={self.n}, m={self.m})")

    @property
    def bar_parity(self) -> tuple[int, int]:
        """Barycentre offset of R in units of eps/2."""
        return (1 - self.n % 2, 1 - self.m % 2)

    @property
    def cols(self) -> range:
        return centered_run(self.n)

    @property
    def rows(self) -> range:
        return centered_run(self.m)

    @property
    def q_cols(self) -> range:
        return centered_run(self.r)

    @property
    def q_row(self) -> int:
        return self.rows[-1] + 1

    @property
    def size(self) -> int:
        return self.n * self.m + self.r

    def cells(self) -> frozenset:
        return quasi_rect_cells(self.n, self.m, self.r)

    def descriptor(self) -> "ShapeDescriptor":
        e = self.eps
        return ShapeDescriptor(e * self.n, e * self.m, e * self.r, e)


@dataclass(frozen=True)
class ShapeDescriptor:
    a: Fraction
    b: Fraction
    c: Fraction
    eps: Fraction

    @property
    def area(self) -> Fraction:
        return self.a * self.b + self.eps * self.c

    @property
    def perimeter(self) -> Fraction:
        return 2 * (self.a + self.b) + (2 * self.eps if self.c > 0 else 0)

    def counts(self) -> tuple[int, int, int]:
        return tuple(int(v / self.eps) for v in (self.a, self.b, self.c))


def quasi_rect_to_set(qr: QuasiRect) -> LatticeSet:
    return LatticeSet(qr.eps, qr.cells())


def _runs_nested(groups: dict[int, list[int]]) -> bool:
    spans = []
    for members in groups.values():
        lo, hi = min(members), max(members)
        if hi - lo + 1 != len(members):
            return False
        spans.append((lo, hi))
    spans.sort(key=lambda s: s[1] - s[0])
    return all(a[0] >= b[0] and a[1] <= b[1] for a, b in zip(spans, spans[1:]))


def _unimodal_about(profile: dict[int, int], centre: int) -> bool:
    if not profile:
        return True
    lo = min(min(profile), centre)
    hi = max(max(profile), centre)
    values = [profile.get(k, 0) for k in range(lo, hi + 1)]
    c = centre - lo
    rising = all(values[k] <= values[k + 1] for k in range(c))
    falling = all(values[k] >= values[k + 1] for k in range(c, len(values) - 1))
    return rising and falling


def is_rhombus_like(s: LatticeSet, centre: Cell = (0, 0),
                    nested: bool = True) -> bool:
    """Unimodal row and column counts about ``centre``.

    With ``nested`` (the default) every row and every column must also be a
    single run, and the runs must be ordered by inclusion; this rejects
    diagonal staircases whose count profiles happen to be flat.
    """
    if not s.cells:
        return True
    if not (_unimodal_about(s.col_counts(), centre[0])
            and _unimodal_about(s.row_counts(), centre[1])):
        return False
    if not nested:
        return True
    by_row: dict[int, list[int]] = {}
    by_col: dict[int, list[int]] = {}
    for i, j in s.cells:
        by_row.setdefault(j, []).append(i)
        by_col.setdefault(i, []).append(j)
    return _runs_nested(by_row) and _runs_nested(by_col)


def dumps(obj) -> str:
    """Line-based text form: 'eps p/q', optional 'qr n m r', then 'i j' lines."""
    if isinstance(obj, QuasiRect):
        head = [f"eps {obj.eps}", f"qr {obj.n} {obj.m} {obj.r}"]
        cells = LatticeSet(obj.eps, obj.cells())
    else:
        head = [f"eps {obj.eps}"]
        cells = obj
    return "\n".join(head + [f"{i} {j}" for i, j in cells]) + "\n"


def loads(text: str):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("eps "):
        raise ValueError("missing 'eps p/q' header")
    eps = Fraction(lines[0].split()[1])
    body = lines[1:]
    qr = None
    if body and body[0].startswith("qr "):
        n, m, r = (int(v) for v in body[0].split()[1:])
        qr = QuasiRect(eps, n, m, r)
        body = body[1:]
    cells = frozenset(tuple(int(v) for v in ln.split()) for ln in body)
    if qr is not None:
        if cells != qr.cells():
            raise ValueError("cell list does not match the quasi-rectangle header")
        return qr
    return LatticeSet(eps, cells)
