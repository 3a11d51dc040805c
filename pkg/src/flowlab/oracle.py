"""Brute-force verifiers: exhaustive enumeration, direct minimisation,
cell-sum and quadrature dissipation, and the rearrangement audit."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import kernels
from .continuum import Rect
from .discrete import FlowParams, area_remainder
from .lattice import (LatticeSet, QuasiRect, as_fraction, centered_run,
                      dissipation_units, distance_map, perimeter_count,
                      quasi_rect_cells)
from .steiner import rhombus_centre

DEFAULT_BUDGET = 2_000_000
RESTRICTIONS = ("all-subsets", "quasi-rectangles-only", "sqr-class-only")


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Cells (i, j) with i0 <= i < i0 + width and j0 <= j < j0 + height."""
    i0: int
    j0: int
    width: int
    height: int

    @classmethod
    def centred(cls, width: int, height: int | None = None) -> "Window":
        height = width if height is None else height
        return cls(-((width - 1) // 2), -((height - 1) // 2), width, height)

    @property
    def size(self) -> int:
        return self.width * self.height

    def cells(self) -> list[tuple[int, int]]:
        """Row-major: j outer, i inner."""
        return [(i, j) for j in range(self.j0, self.j0 + self.height)
                for i in range(self.i0, self.i0 + self.width)]

    def __contains__(self, cell) -> bool:
        i, j = cell
        return (self.i0 <= i < self.i0 + self.width
                and self.j0 <= j < self.j0 + self.height)


@dataclass(frozen=True)
class EnumSpec:
    window: Window
    cardinality: int | None = None
    restrict: str = "all-subsets"
    eps: Fraction = Fraction(1)
    reference: QuasiRect | None = None
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.restrict not in RESTRICTIONS:
            raise ValueError(f"restrict must be one of {RESTRICTIONS}")
        if self.restrict == "sqr-class-only" and self.reference is None:
            raise ValueError("sqr-class-only needs a reference quasi-rectangle")
        object.__setattr__(self, "eps", as_fraction(self.eps))

    def count(self) -> int:
        s = self.window.size
        if self.cardinality is None:
            return 2 ** s
        return math.comb(s, self.cardinality)


class Canvas:
    """Bit layout for the kernels: bit ``(j - j0)*w + (i - i0)``."""

    def __init__(self, imin: int, imax: int, jmin: int, jmax: int):
        self.i0, self.j0 = imin, jmin
        self.w, self.h = imax - imin + 1, jmax - jmin + 1
        if self.w * self.h > 64:
            raise BudgetExceeded(f"canvas {self.w}x{self.h} exceeds 64 cells")

    @classmethod
    def covering(cls, *groups) -> "Canvas":
        cells = [c for g in groups for c in g]
        return cls(min(c[0] for c in cells), max(c[0] for c in cells),
                   min(c[1] for c in cells), max(c[1] for c in cells))

    def bit(self, cell) -> int:
        return (cell[1] - self.j0) * self.w + (cell[0] - self.i0)

    def mask(self, cells) -> int:
        return sum(1 << self.bit(c) for c in cells)

    def cells(self, mask: int) -> frozenset:
        out = []
        while mask:
            low = mask & -mask
            b = low.bit_length() - 1
            out.append((self.i0 + b % self.w, self.j0 + b // self.w))
            mask ^= low
        return frozenset(out)

    def weights(self, reference) -> list[int]:
        frame = (self.i0, self.i0 + self.w - 1, self.j0, self.j0 + self.h - 1)
        return [int(v) for v in distance_map(reference, frame).ravel()]


# -- enumeration --------------------------------------------------------------

def _check_budget(spec: EnumSpec):
    n = spec.count()
    if n > spec.budget:
        raise BudgetExceeded(f"{n} sets exceed the budget of {spec.budget}")


def _quasi_rect_placements(window: Window, total: int | None):
    """Every quasi-rectangle (any translation and admissible Q) in the window."""
    seen = set()
    for n in range(1, window.width + 1):
        for m in range(1, min(n, window.height) + 1):
            for r in range(0, n):
                if total is not None and n * m + r != total:
                    continue
                for i0 in range(window.i0, window.i0 + window.width - n + 1):
                    for j0 in range(window.j0, window.j0 + window.height - m + 1):
                        rect = {(i, j) for i in range(i0, i0 + n)
                                for j in range(j0, j0 + m)}
                        for q in _partial_rows(i0, j0, n, m, r):
                            cells = frozenset(rect | q)
                            if all(c in window for c in cells) and cells not in seen:
                                seen.add(cells)
    return seen


def _partial_rows(i0, j0, n, m, r):
    if r == 0:
        yield set()
        return
    for row in (j0 - 1, j0 + m):
        for s in range(i0, i0 + n - r + 1):
            yield {(i, row) for i in range(s, s + r)}
    if r == 1:
        for col in (i0 - 1, i0 + n):
            for j in range(j0, j0 + m):
                yield {(col, j)}


def _lex_key(cells) -> tuple:
    return tuple(sorted(cells, key=lambda c: (c[1], c[0])))


def enumerate_sets(spec: EnumSpec) -> Iterator[LatticeSet]:
    """Exhaustive, duplicate-free stream in lexicographic order of the
    row-major cell lists."""
    if spec.restrict == "all-subsets":
        _check_budget(spec)
        cells = spec.window.cells()
        sizes = (range(len(cells) + 1) if spec.cardinality is None
                 else [spec.cardinality])
        for k in sizes:
            for combo in itertools.combinations(cells, k):
                yield LatticeSet(spec.eps, frozenset(combo))
    elif spec.restrict == "quasi-rectangles-only":
        for cells in sorted(_quasi_rect_placements(spec.window, spec.cardinality),
                            key=_lex_key):
            yield LatticeSet(spec.eps, cells)
    else:
        for member in sqr_members(spec.reference):
            if all(c in spec.window for c in member.cells):
                yield LatticeSet(spec.eps, member.cells)


# -- the competitor class of the lattice flow ---------------------------------

@dataclass(frozen=True)
class SqrMember:
    X: int
    Y: int
    D: int
    cells: frozenset
    pseudo_axial: bool


def sqr_members(qr: QuasiRect, placements: str = "all") -> list[SqrMember]:
    """Quasi-rectangles with the same area whose rectangle shares the
    barycentre of qr's rectangle and has horizontal count A - 2X.

    The barycentre fixes the vertical count to B + 2Y, so for each X the
    partial row D = C + 2BX - Y(2A - 4X) must satisfy 0 <= D < A - 2X,
    and the horizontal count stays the larger one.
    ``placements="all"`` also lists every admissible position of the
    partial row; ``"pseudo-axial"`` only the centred one on top.
    """
    A, B, C = qr.n, qr.m, qr.r
    cols, rows = qr.cols, qr.rows
    out = []
    for X in range(0, (A + 1) // 2):
        n = A - 2 * X
        Y = (C + 2 * B * X) // (2 * n)
        D = area_remainder(A, B, C, X, Y)
        if not 0 <= D < n or n < B + 2 * Y:
            continue
        lo, hi = cols[0] + X, cols[-1] - X
        bot, top = rows[0] - Y, rows[-1] + Y
        rect = frozenset((i, j) for i in range(lo, hi + 1) for j in range(bot, top + 1))
        axial = _pseudo_axial_row(lo, hi, top, D)
        out.append(SqrMember(X, Y, D, rect | axial, True))
        if placements == "all" and D:
            for q in _partial_rows(lo, bot, n, B + 2 * Y, D):
                if frozenset(q) != axial:
                    out.append(SqrMember(X, Y, D, rect | frozenset(q), False))
    return out


def _pseudo_axial_row(lo: int, hi: int, top: int, d: int) -> frozenset:
    if d == 0:
        return frozenset()
    mid = (lo + hi) // 2  # column 0 for a centred rectangle
    return frozenset((mid + i, top + 1) for i in centered_run(d))


@dataclass
class SqrResult:
    value: Fraction  # min of P + D_eps/(alpha*eps)
    member: SqrMember
    evaluated: int
    tau: Fraction
    energies: dict = field(default_factory=dict)  # X -> best value for that X

    @property
    def flow_energy(self) -> Fraction:
        """Same minimum in the flow normalisation alpha*eps*P + D_eps."""
        return self.tau * self.value


def _frame_of(groups) -> tuple[int, int, int, int]:
    cells = [c for g in groups for c in g]
    return (min(c[0] for c in cells), max(c[0] for c in cells),
            min(c[1] for c in cells), max(c[1] for c in cells))


def sqr_brute_force(qr: QuasiRect, params: FlowParams,
                    placements: str = "all") -> SqrResult:
    """Exact minimum of P + D/(alpha*eps) over the competitor class,
    scored by cell sums (no closed forms involved)."""
    members = sqr_members(qr, placements)
    if not members:
        raise ValueError("competitor class is empty")
    old = qr.cells()
    frame = _frame_of([old, *(m.cells for m in members)])
    i0, _, j0, _ = frame
    dmap = distance_map(old, frame)
    old_mask = np.zeros_like(dmap, dtype=bool)
    for i, j in old:
        old_mask[j - j0, i - i0] = True
    eps, alpha = params.eps, params.alpha
    best, best_key, energies = None, None, {}
    for mem in members:
        new_mask = np.zeros_like(old_mask)
        idx = np.array(sorted(mem.cells))
        new_mask[idx[:, 1] - j0, idx[:, 0] - i0] = True
        diss = int(dmap[new_mask ^ old_mask].sum())
        value = eps * perimeter_count(mem.cells) + eps * eps * diss / alpha
        key = (value, mem.X, mem.Y, not mem.pseudo_axial)
        if mem.X not in energies or value < energies[mem.X]:
            energies[mem.X] = value
        if best_key is None or key < best_key:
            best, best_key = mem, key
    return SqrResult(best_key[0], best, len(members), alpha * eps, energies)


# -- direct minimisation over lattice sets -----------------------------------

def _scaled_weights(eps: Fraction, alpha: Fraction) -> tuple[int, int]:
    """(p, q) with P + D/(alpha*eps) = eps*(p*Pcount + q*Dunits)/p."""
    ratio = eps / alpha
    return ratio.denominator, ratio.numerator


def brute_force_min(qr: QuasiRect, params: FlowParams,
                    spec: EnumSpec) -> tuple[LatticeSet, Fraction]:
    """argmin and exact minimum of P + D_eps/(alpha*eps) over the class."""
    if spec.cardinality != qr.size:
        raise ValueError("enumeration cardinality must equal #qr cells")
    eps, alpha = params.eps, params.alpha
    if spec.restrict == "all-subsets":
        _check_budget(spec)
        old = qr.cells()
        canvas = Canvas.covering(spec.window.cells(), old)
        p, q = _scaled_weights(eps, alpha)
        bits = [canvas.bit(c) for c in spec.window.cells()]
        best, arg, _ = kernels.min_energy(bits, spec.cardinality, canvas.mask(old),
                                          canvas.weights(old), canvas.w, p, q)
        return LatticeSet(eps, canvas.cells(arg)), eps * Fraction(best, p)
    if spec.restrict == "sqr-class-only":
        res = sqr_brute_force(qr, params)
        return LatticeSet(eps, res.member.cells), res.value
    best = None
    for s in enumerate_sets(spec):
        v = set_value(s.cells, qr, params)
        if best is None or v < best[1]:
            best = (s, v)
    if best is None:
        raise ValueError("no competitor fits the window")
    return best


def set_value(cells, qr: QuasiRect, params: FlowParams) -> Fraction:
    eps, alpha = params.eps, params.alpha
    return (eps * perimeter_count(cells)
            + eps * eps * dissipation_units(cells, qr.cells()) / alpha)


def pseudo_axial_min(qr: QuasiRect, params: FlowParams):
    """Minimum of the same functional over pseudo-axial quasi-rectangles
    with qr's cell count (n >= m, r < n)."""
    total = qr.size
    best = None
    for m in range(1, total + 1):
        for n in range(m, total + 1):
            r = total - n * m
            if r < 0 or r >= n:
                continue
            cells = quasi_rect_cells(n, m, r)
            v = set_value(cells, qr, params)
            if best is None or v < best[1]:
                best = ((n, m, r), v)
    return best


# -- continuum quadrature -----------------------------------------------------

def quadrature_dissipation(old: Rect, new: Rect, grid: int) -> float:
    """Midpoint rule for the integral over new delta old of the l-infinity
    distance to the boundary of old, on a grid x grid mesh of the union's
    bounding box.  Both rectangles are centred at the origin."""
    if grid < 64:
        raise ValueError("grid must be at least 64")
    w = max(old.a, new.a) / 2
    h = max(old.b, new.b) / 2
    xs = (np.arange(grid) + 0.5) * (2 * w / grid) - w
    ys = (np.arange(grid) + 0.5) * (2 * h / grid) - h
    ax = np.abs(xs)[None, :]
    ay = np.abs(ys)[:, None]
    in_old = (ax < old.a / 2) & (ay < old.b / 2)
    in_new = (ax < new.a / 2) & (ay < new.b / 2)
    dx, dy = ax - old.a / 2, ay - old.b / 2
    dist = np.where(in_old, np.minimum(-dx, -dy),
                    np.maximum(np.maximum(dx, 0), np.maximum(dy, 0)))
    cell = (2 * w / grid) * (2 * h / grid)
    return float(dist[in_old ^ in_new].sum() * cell)


def moved_rect(a: float, b: float, x: float) -> Rect:
    """Area-preserving move with horizontal retreat x."""
    a2 = a - 2 * x
    return Rect(a2, a * b / a2)


# -- rearrangement audit ------------------------------------------------------

AUDIT_CHECKS = ("cardinality", "perimeter", "dissipation", "rhombus")
AUDIT_EXTRA = ("unimodal_about_origin", "identity_max_counts", "identity_row_symmetrized")


@dataclass
class AuditReport:
    window: Window
    qr: QuasiRect
    sets: int
    violations: dict
    examples: dict
    backend: str

    @property
    def passed(self) -> bool:
        return all(self.violations[k] == 0 for k in AUDIT_CHECKS)

    def format(self) -> str:
        lines = [f"window {self.window.i0} {self.window.j0} "
                 f"{self.window.width} {self.window.height}",
                 f"qr {self.qr.n} {self.qr.m} {self.qr.r}",
                 f"sets {self.sets}", f"backend {self.backend}"]
        for k in AUDIT_CHECKS + AUDIT_EXTRA:
            ex = self.examples.get(k)
            tail = "" if ex is None else " first " + ";".join(
                f"{i},{j}" for i, j in _lex_key(ex))
            lines.append(f"check {k} violations {self.violations[k]}{tail}")
        lines.append("RESULT " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def _rearrangement_extent(window: Window) -> list[tuple[int, int]]:
    cols = centered_run(window.width)
    lo = -((window.height - 1) // 2)
    hi = window.height // 2 + 1
    return [(cols[0], lo), (cols[-1], hi)]


def exhaustive_steiner_audit(window: Window, qr: QuasiRect,
                             budget: int = DEFAULT_BUDGET) -> AuditReport:
    """Every subset E of the window against R(E).

    The primary checks are cardinality, P(E) >= P(E') >= P(R(E)),
    D(E, qr) >= D(R(E), qr) and rhombus-likeness of R(E) about the
    pseudo-axial centre.  Also counted: unimodality about the origin,
    P(R(E)) = 2 P1(E) + 2 P2(E) with P1, P2 the maximal row and column
    counts of E, and the same with P2 taken from the row-symmetrized E'.
    """
    if 2 ** window.size > budget:
        raise BudgetExceeded(f"2^{window.size} subsets exceed the budget")
    old = qr.cells()
    canvas = Canvas.covering(window.cells(), old, _rearrangement_extent(window),
                             [(0, 0), rhombus_centre(qr)])
    bits = [canvas.bit(c) for c in window.cells()]
    cc, cr = rhombus_centre(qr)
    counts, first = kernels.audit(bits, canvas.w, canvas.h, canvas.i0, canvas.j0,
                                  qr.m % 2 == 0, canvas.mask(old),
                                  canvas.weights(old), cc - canvas.i0,
                                  cr - canvas.j0, -canvas.i0, -canvas.j0)
    names = AUDIT_CHECKS + AUDIT_EXTRA
    wcells = window.cells()
    violations = dict(zip(names, counts[:7]))
    examples = {}
    for k, s in zip(names, first[:7]):
        if s >= 0:
            examples[k] = frozenset(wcells[b] for b in range(len(wcells)) if s >> b & 1)
    return AuditReport(window, qr, counts[7], violations, examples, kernels.BACKEND)
