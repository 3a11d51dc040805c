"""Row-then-column rearrangement of lattice sets against a quasi-rectangle."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .lattice import (LatticeSet, QuasiRect, centered_run, dissipation_eps,
                      perimeter_eps)


def column_run(k: int, m_even: bool) -> range:
    """Vertical placement of a column of k cells.

    For even m an odd column is centred on row 1; every other case uses
    :func:`centered_run`.  Columns over Q and elsewhere share one rule.
    """
    if m_even and k % 2:
        h = (k - 1) // 2
        return range(1 - h, 2 + h)
    return centered_run(k)


def symmetrize_rows(e: LatticeSet) -> LatticeSet:
    counts = e.row_counts()
    cells = [(i, j) for j in sorted(counts) for i in centered_run(counts[j])]
    return e.with_cells(cells)


def symmetrize_columns(e_prime: LatticeSet, qr: QuasiRect) -> LatticeSet:
    m_even = qr.m % 2 == 0
    counts = e_prime.col_counts()
    cells = [(i, j) for i in sorted(counts) for j in column_run(counts[i], m_even)]
    return e_prime.with_cells(cells)


def rhombus_centre(qr: QuasiRect) -> tuple[int, int]:
    """Where the count profiles of a rearranged set peak."""
    return (0, 1 if qr.m % 2 == 0 else 0)


@dataclass(frozen=True)
class RearrangeReport:
    input: LatticeSet
    after_rows: LatticeSet
    output: LatticeSet
    perimeter_before: Fraction
    perimeter_mid: Fraction
    perimeter_after: Fraction
    dissipation_before: Fraction | None
    dissipation_after: Fraction | None

    @property
    def monotone(self) -> bool:
        ok = self.perimeter_before >= self.perimeter_mid >= self.perimeter_after
        if self.dissipation_before is not None:
            ok = ok and self.dissipation_before >= self.dissipation_after
        return ok


def rearrange(e: LatticeSet, qr: QuasiRect) -> RearrangeReport:
    if e.eps != qr.eps:
        raise ValueError("set and quasi-rectangle use different eps")
    mid = symmetrize_rows(e)
    out = symmetrize_columns(mid, qr)
    ref = LatticeSet(qr.eps, qr.cells())
    d0 = dissipation_eps(e, ref) if e.cells else None
    d1 = dissipation_eps(out, ref) if e.cells else None
    return RearrangeReport(e, mid, out, perimeter_eps(e), perimeter_eps(mid),
                           perimeter_eps(out), d0, d1)


def profile_runs(s: LatticeSet) -> dict[int, tuple[int, int]]:
    """Row index -> (first, last) column, for sets with contiguous rows."""
    spans: dict[int, list[int]] = defaultdict(list)
    for i, j in s.cells:
        spans[j].append(i)
    return {j: (min(v), max(v)) for j, v in spans.items()}
