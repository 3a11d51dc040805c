"""Lattice flow of quasi-rectangles with time step tau = alpha*eps.

Counts are integers (A, B, C for the current state, X, Y, D for a move);
lengths are ``eps`` times counts.  Energies are exact rationals:

    E = alpha*eps*P(new) + D_eps(new, old)

Dissipation sums are kept in units of eps^3 internally.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .lattice import (QuasiRect, ShapeDescriptor, as_fraction, centered_run,
                      dissipation_units, quasi_rect_cells)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowParams:
    alpha: Fraction
    eps: Fraction
    lam: Fraction | None = None
    steps: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "eps", as_fraction(self.eps))
        if self.lam is not None:
            object.__setattr__(self, "lam", as_fraction(self.lam))
        if self.alpha <= 0 or self.eps <= 0:
            raise ValueError("alpha and eps must be positive")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")

    @property
    def tau(self) -> Fraction:
        return self.alpha * self.eps


@dataclass(frozen=True)
class StepCandidate:
    X: int
    Y: int
    D: int
    energy: Fraction
    overflow: bool
    shape: tuple[int, int, int]  # realised (n, m, r)
    method: str = "closed-form"


class SquareReached(Exception):
    """The chosen move would leave the regime b < a."""

    def __init__(self, candidate: StepCandidate):
        super().__init__(f"square reached at lattice resolution: {candidate.shape}")
        self.candidate = candidate


def drift(a, b, alpha) -> Fraction:
    a, b, alpha = as_fraction(a), as_fraction(b), as_fraction(alpha)
    if a <= 0 or b <= 0:
        raise ValueError("side lengths must be positive")
    return 2 * alpha * (a - b) / (b * (a + b)) - a / (a + b)


def x_initial(a, b, alpha) -> Fraction:
    """Same quantity written as 2*alpha/b - (4*alpha + a)/(a + b)."""
    a, b, alpha = as_fraction(a), as_fraction(b), as_fraction(alpha)
    return 2 * alpha / b - (4 * alpha + a) / (a + b)


def area_remainder(A: int, B: int, C: int, X: int, Y: int) -> int:
    return C + 2 * X * B - Y * (2 * A - 4 * X)


def realize(A: int, B: int, X: int, Y: int, D: int) -> tuple[int, int, int]:
    """Shape (n, m, r) of a move; a remainder of a full row or more is
    stacked as extra full rows, which moves the barycentre by eps/2."""
    n = A - 2 * X
    if n <= 0:
        raise ValueError(f"move X={X} empties the rectangle (A={A})")
    extra, r = divmod(D, n)
    return n, B + 2 * Y + extra, r


# -- dissipation closed forms (units of eps^3) -------------------------------

def _overlap(lo1, hi1, lo2, hi2) -> int:
    return max(0, min(hi1, hi2) - max(lo1, lo2) + 1)


def bottom_strip_units(A: int, X: int, Y: int) -> Fraction:
    """New rows below R: Y rows of A - 2X cells at distances 1..Y."""
    return Fraction((A - 2 * X) * Y * (Y + 1), 2)


def side_columns_units(B: int, X: int) -> Fraction:
    """Both removed side strips of X columns and B rows."""
    if 2 * X <= B:
        return (Fraction(2, 3) * X * (2 * X * X + 3 * X + 1)
                + (B - 2 * X) * X * (X + 1))
    h = B // 2
    core = Fraction(2, 3) * (2 * h * h + 3 * h + 1) * h + 2 * (X - h) * h * (h + 1)
    if B % 2 == 0:
        return core
    # middle row: h cells at 1..h and X - h cells at h + 1, on both sides
    return core + h * (h + 1) + 2 * (X - h) * (h + 1)


def top_region_units(A: int, C: int, X: int, Y: int, D: int) -> int:
    """Everything at or above the old partial row.

    Row k above R sees the old partial row diagonally, so cells within
    horizontal gap k - 1 of it are one step closer.
    """
    W = A - 2 * X
    lo = centered_run(A)[0] + X
    hi = lo + W - 1
    q = centered_run(C)
    p = centered_run(D)
    if Y == 0:
        return len(set(q) ^ set(p))
    total = 0
    for k in range(1, Y + 1):
        total += k * W
        if C:
            total -= _overlap(q[0] - k + 1, q[-1] + k - 1, lo, hi)
    total += (Y + 1) * D
    if C and D:
        total -= _overlap(q[0] - Y, q[-1] + Y, p[0], p[-1])
    if C:
        total += C - _overlap(q[0], q[-1], lo, hi)
    return total


def printed_parts_units(A, B, C, X, Y, D) -> tuple[Fraction, Fraction, Fraction]:
    """The three strip sums exactly as originally tabulated (reference only).

    Known gaps against the cell sum: the odd-B side strip counts the middle
    row once instead of twice, and the top strip ignores diagonal access to
    the old partial row and the Y = 0 case.
    """
    DA = bottom_strip_units(A, X, Y)
    if 2 * X <= B:
        DB = side_columns_units(B, X)
    else:
        h = B // 2
        DB = Fraction(2, 3) * (2 * h * h + 3 * h + 1) * h + 2 * (X - h) * h * (h + 1)
        if B % 2:
            DB += h * (h + 1) + (X - h) * (h + 1)
    DC = (Fraction(D * Y * (Y + 1), 2) + Fraction((C - D) * Y * (Y - 1), 2)
          + Fraction((A - 2 * X - C - 2) * Y * (Y + 1), 2) + Y * (Y + 1))
    return DA, DB, DC


def in_closed_form_domain(A, B, C, X, Y, D) -> bool:
    n = A - 2 * X
    return (X >= 0 and Y >= 0 and n >= 1 and 0 <= D < n and C <= n
            and area_remainder(A, B, C, X, Y) == D)


def dissipation_parts_units(A, B, C, X, Y, D) -> tuple[Fraction, Fraction, int]:
    if not in_closed_form_domain(A, B, C, X, Y, D):
        raise ValueError(f"(A,B,C,X,Y,D)={(A, B, C, X, Y, D)} outside the closed-form domain")
    return (bottom_strip_units(A, X, Y), side_columns_units(B, X),
            top_region_units(A, C, X, Y, D))


def _counts(shape: ShapeDescriptor) -> tuple[int, int, int]:
    A, B, C = shape.counts()
    return A, B, C


def dissipation_closed_form(shape: ShapeDescriptor, X: int, Y: int, D: int,
                            eps=None) -> Fraction:
    eps = shape.eps if eps is None else as_fraction(eps)
    A, B, C = _counts(shape)
    return eps ** 3 * sum(dissipation_parts_units(A, B, C, X, Y, D))


def energy_closed_form(shape: ShapeDescriptor, X: int, Y: int, D: int,
                       params: FlowParams, assembly: str = "perimeter") -> Fraction:
    """alpha*eps*P + dissipation.

    ``assembly="polynomial"`` expands the same quantity as a polynomial in
    x = eps*X, y = eps*Y, d = eps*D.  It is built on the tabulated strip
    sums, so it is only valid for 2X < B and where those sums are exact.
    """
    eps, alpha = params.eps, params.alpha
    A, B, C = _counts(shape)
    chi = 1 if D > 0 else 0
    if assembly == "perimeter":
        per = 2 * (A - 2 * X) + 2 * (B + 2 * Y) + 2 * chi
        return alpha * eps * eps * per + dissipation_closed_form(shape, X, Y, D, eps)
    if assembly != "polynomial":
        raise ValueError(f"unknown assembly {assembly!r}")
    if 2 * X >= B:
        raise ValueError("polynomial assembly needs 2X < B")
    a, b, c = shape.a, shape.b, shape.c
    x, y, d = eps * X, eps * Y, eps * D
    poly = (a * eps * y + a * y * y - 4 * alpha * eps * x + 4 * eps * alpha * y
            + b * eps * x + b * x * x - c * eps * y + d * eps * y
            + Fraction(2, 3) * eps * eps * x - 2 * eps * x * y
            - Fraction(2, 3) * x ** 3 - 2 * x * y * y)
    return poly + alpha * eps * (2 * a + 2 * b + 2 * eps * chi)


# -- candidates and steps -----------------------------------------------------

def _move_energy(qr: QuasiRect, X: int, Y: int, D: int, alpha: Fraction):
    A, B, C = qr.n, qr.m, qr.r
    eps = qr.eps
    n, m, r = realize(A, B, X, Y, D)
    per_units = 2 * n + 2 * m + (2 if r > 0 else 0)
    if in_closed_form_domain(A, B, C, X, Y, D):
        diss = sum(dissipation_parts_units(A, B, C, X, Y, D))
        method = "closed-form"
    else:
        diss = dissipation_units(quasi_rect_cells(n, m, r), qr.cells())
        method = "cell-sum"
    energy = alpha * eps ** 2 * per_units + eps ** 3 * diss
    return energy, (n, m, r), method


def candidates(qr: QuasiRect, params: FlowParams) -> list[StepCandidate]:
    """The clamped floor/ceil moves with their exact energies."""
    if qr.eps != params.eps:
        raise ValueError("state and parameters use different eps")
    A, B, C = qr.n, qr.m, qr.r
    shape = qr.descriptor()
    xp = drift(shape.a, shape.b, params.alpha)
    xs = sorted({max(0, math.floor(xp)), max(0, math.ceil(xp))})
    out = []
    for X in xs:
        if A - 2 * X <= 0:
            raise ValueError(f"candidate X={X} empties the rectangle (A={A})")
        Y = (C + 2 * B * X) // (2 * A - 4 * X)
        D = area_remainder(A, B, C, X, Y)
        energy, real, method = _move_energy(qr, X, Y, D, params.alpha)
        out.append(StepCandidate(X, Y, D, energy, D >= A - 2 * X, real, method))
    return out


def choose(cands: list[StepCandidate]) -> StepCandidate:
    return min(cands, key=lambda c: (c.energy, c.X, c.Y))


def incremental_step(qr: QuasiRect, params: FlowParams):
    """One minimising move; returns (new state, chosen candidate)."""
    best = choose(candidates(qr, params))
    n, m, r = best.shape
    if n <= m:
        raise SquareReached(best)
    if best.overflow:
        log.info("overflow split: D=%d over width %d -> shape %s", best.D,
                 qr.n - 2 * best.X, best.shape)
    return QuasiRect(qr.eps, n, m, r), best


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    chosen: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    status: str = "ok"
    warnings: list = field(default_factory=list)
    discarded: list = field(default_factory=list)

    def record(self, t, qr: QuasiRect):
        d = qr.descriptor()
        self.times.append(t)
        self.states.append(d)
        self.diagnostics.append({"perimeter": d.perimeter, "area": d.area,
                                 "a_plus_b": d.a + d.b, "cells": qr.size})

    @property
    def pinned(self) -> bool:
        return bool(self.chosen) and all(
            c.shape == s.counts() for c, s in zip(self.chosen, self.states))


def _regime_check(traj: Trajectory, qr: QuasiRect):
    d = qr.descriptor()
    if qr.eps > d.b / 10:
        msg = f"eps={qr.eps} exceeds b/10={d.b / 10}: outside the small-eps regime"
        traj.warnings.append(msg)
        log.warning(msg)


def _run(qr0: QuasiRect, params: FlowParams, partial_row: str) -> Trajectory:
    """partial_row: "keep" (symmetric flow), "discard" (dropped from the
    state after every step) or "readout" (kept in the state, dropped from
    the recorded shape)."""
    if partial_row != "keep" and qr0.r:
        raise ValueError("rectangular flow starts from a rectangle (r = 0)")
    traj = Trajectory()
    _regime_check(traj, qr0)
    qr = qr0
    traj.record(Fraction(0), qr)
    for k in range(params.steps):
        try:
            nxt, cand = incremental_step(qr, params)
        except SquareReached as exc:
            traj.status = "square reached at lattice resolution"
            traj.warnings.append(f"step {k}: {exc}")
            break
        if params.lam is not None and nxt.r * nxt.eps > params.lam:
            traj.status = f"guard failure at step {k}: c exceeds lambda"
            break
        traj.chosen.append(cand)
        shown = nxt
        if partial_row != "keep":
            traj.discarded.append(nxt.r)
            shown = QuasiRect(nxt.eps, nxt.n, nxt.m, 0)
        qr = shown if partial_row == "discard" else nxt
        traj.record((k + 1) * params.tau, shown)
    return traj


def run_symmetric_flow(qr0: QuasiRect, params: FlowParams) -> Trajectory:
    return _run(qr0, params, "keep")


def run_rectangular_flow(qr0: QuasiRect, params: FlowParams,
                         keep_in_state: bool = False) -> Trajectory:
    """Same moves, but the partial row is dropped after every step.

    With ``keep_in_state`` the partial row still drives the next move and
    is only left out of the recorded shapes.
    """
    return _run(qr0, params, "readout" if keep_in_state else "discard")


# -- pinning and limit inclusions --------------------------------------------

def pinning_threshold(b) -> Fraction:
    b = as_fraction(b)
    if not 0 < b < 1:
        raise ValueError("pinning threshold needs 0 < b < 1")
    return b ** 3 / (2 * (1 - b * b))


def printed_pinning(b, alpha) -> bool:
    return pinning_threshold(b) < as_fraction(alpha)


def is_pinned_window(a, b, alpha) -> bool:
    x0 = x_initial(a, b, alpha)
    return 0 <= x0 < 1


def derived_pinning_interval(b) -> tuple[Fraction, Fraction]:
    """alpha-range equivalent to 0 <= x(0) < 1 when a = 1/b."""
    b = as_fraction(b)
    if not 0 < b < 1:
        raise ValueError("needs 0 < b < 1")
    den = 2 * (1 - b * b)
    return b / den, b * (2 + b * b) / den


def inclusion_bounds(a, b, c, alpha, rectangular: bool = False):
    """Intervals for (da/dt, db/dt); floor/ceil clamped at zero, widened by
    one on each side when x is an integer."""
    a, b, c, alpha = (as_fraction(v) for v in (a, b, c, alpha))
    x = x_initial(a, b, alpha)
    if x.denominator == 1:
        lo, hi = x - 1, x + 1
    else:
        lo, hi = Fraction(math.floor(x)), Fraction(math.ceil(x))
    lo, hi = max(lo, Fraction(0)), max(hi, Fraction(0))
    da = (-2 * hi / alpha, -2 * lo / alpha)
    shift = Fraction(0) if rectangular else c / (alpha * a)
    db = (shift + 2 * b * lo / (alpha * a), shift + 2 * b * hi / (alpha * a))
    return da, db


def simulated_stationary(A: int, B: int, C: int, eps, alpha) -> bool:
    """True when the first move of the flow is the identity."""
    qr = QuasiRect(as_fraction(eps), A, B, C)
    best = choose(candidates(qr, FlowParams(alpha, eps)))
    return best.shape == (A, B, C)


@dataclass(frozen=True)
class PinningRow:
    b: Fraction
    alpha: Fraction
    counts: tuple[int, int, int]
    drift: Fraction
    printed: bool
    window: bool
    simulated: bool


def unit_area_counts(b, N: int) -> tuple[int, int, int]:
    """(A, B, C) with B = round(b*N), A*B + C = N^2 and 0 <= C < B."""
    B = round(as_fraction(b) * N)
    A, C = divmod(N * N, B)
    return A, B, C


def pinning_map(b_values, alphas, N: int) -> list[PinningRow]:
    """Both stationarity predicates and the simulated first step at eps = 1/N."""
    eps = Fraction(1, N)
    rows = []
    for b in b_values:
        A, B, C = unit_area_counts(b, N)
        a_len, b_len = eps * A, eps * B
        for alpha in alphas:
            alpha = as_fraction(alpha)
            rows.append(PinningRow(b_len, alpha, (A, B, C),
                                   drift(a_len, b_len, alpha),
                                   printed_pinning(b_len, alpha),
                                   is_pinned_window(a_len, b_len, alpha),
                                   simulated_stationary(A, B, C, eps, alpha)))
    return rows
