"""Minimizing movements of axis-parallel rectangles under the l1 perimeter.

A rectangle with sides (a, b), a >= b, retreats by x on each vertical side
and advances by y = b*x/(a - 2x) on each horizontal side, so the area is
kept.  One step picks x minimising

    E(x) = 2(a - 2x + b + 2y) + D(x)/tau.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class Rect:
    a: float
    b: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"sides must be positive, got a={self.a}, b={self.b}")

    @property
    def area(self) -> float:
        return self.a * self.b


@dataclass(frozen=True)
class ContinuumParams:
    tau: float
    lam: float = math.inf
    horizon: float = 1.0
    ode_step: float = 1e-3

    def __post_init__(self):
        if self.tau <= 0 or self.ode_step <= 0 or self.horizon < 0:
            raise ValueError("tau and ode_step must be positive, horizon >= 0")


@dataclass(frozen=True)
class IncrementResult:
    x_bar: float
    y_bar: float
    energy: float
    branch: str  # "x<b/2" or "x>=b/2"
    proven_regime: bool = True
    bracketed: bool = True


class NonBracketing(RuntimeError):
    pass


class InvariantDrift(RuntimeError):
    pass


def perimeter_l1(rect: Rect) -> float:
    return 2 * (rect.a + rect.b)


def advance(a: float, b: float, x: float) -> float:
    return b * x / (a - 2 * x)


def _check_x(a: float, x: float):
    if x < 0 or x >= a / 2:
        raise ValueError(f"retreat x={x} outside [0, a/2) for a={a}")


def dissipation_rect(a: float, b: float, x: float) -> float:
    """Dissipation of the area-preserving move with horizontal retreat x."""
    _check_x(a, x)
    y = advance(a, b, x)
    top = y * y * (a - 2 * x)
    if x < b / 2:
        return top + 4 / 3 * x ** 3 + x * x * (b - 2 * x)
    return top - b ** 3 / 12 + x * b * b / 2


def energy_profile(a: float, b: float, tau: float, x: float) -> float:
    if tau <= 0:
        raise ValueError("tau must be positive")
    y = advance(a, b, x) if x else 0.0
    return 2 * (a - 2 * x + b + 2 * y) + dissipation_rect(a, b, x) / tau


def stationary_quartic(a: float, b: float, tau: float, x: float) -> float:
    """tau*(a - 2x)^2 * dE/dx on the branch x < b/2."""
    return (-8 * x ** 4 + x ** 3 * (8 * a + 8 * b)
            + x * x * (-8 * a * b - 2 * b * b - 16 * tau - 2 * a * a)
            + x * (2 * a * a * b + 2 * a * b * b + 16 * a * tau)
            + 4 * a * b * tau - 4 * a * a * tau)


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    flo = f(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _golden(g, lo: float, hi: float, tol: float) -> float:
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    gc, gd = g(c), g(d)
    while hi - lo > tol:
        if gc <= gd:
            hi, d, gd = d, c, gc
            c = hi - GOLDEN * (hi - lo)
            gc = g(c)
        else:
            lo, c, gc = c, d, gd
            d = lo + GOLDEN * (hi - lo)
            gd = g(d)
    return 0.5 * (lo + hi)


def _sampled_min(g, lo: float, hi: float, samples: int, tol: float) -> float:
    """Grid search followed by golden-section refinement around the best."""
    xs = [lo + (hi - lo) * k / samples for k in range(samples)]
    vals = [g(x) for x in xs]
    k = min(range(samples), key=vals.__getitem__)
    left = xs[max(k - 1, 0)]
    right = xs[k + 1] if k + 1 < samples else hi * (1 - 1e-12)
    x = _golden(g, left, right, tol)
    return x if g(x) < vals[k] else xs[k]


def _result(a, b, tau, x, proven=True, bracketed=True) -> IncrementResult:
    return IncrementResult(x, advance(a, b, x), energy_profile(a, b, tau, x),
                           "x<b/2" if x < b / 2 else "x>=b/2", proven, bracketed)


def minimize_increment(a: float, b: float, params: ContinuumParams) -> IncrementResult:
    """Global minimiser of E over [0, a/2) for b <= a.

    Roots of the stationary quartic on [0, b/2] are located by a 64-point
    scan and bisection; they compete with x = 0, x = b/2 and a sampled
    search of the branch x >= b/2.  If tau >= a, or no interior minimum is
    bracketed, a dense 256-point search with golden-section refinement is
    used instead and the result is flagged.
    """
    if b > a:
        raise ValueError("minimize_increment expects b <= a; swap the roles")
    tau = params.tau
    g = lambda x: energy_profile(a, b, tau, x)  # noqa: E731
    tol = 1e-13 * b
    if tau >= a:
        log.warning("tau=%g >= a=%g: outside the proven-uniqueness regime", tau, a)
        return _result(a, b, tau, _dense(g, a, tol), proven=False)

    half = b / 2 if b < a else b / 2 * (1 - 1e-12)
    f = lambda x: stationary_quartic(a, b, tau, x)  # noqa: E731
    grid = [half * k / 64 for k in range(65)]
    fv = [f(x) for x in grid]
    roots = [_bisect(f, grid[k], grid[k + 1], tol)
             for k in range(64) if fv[k] < 0 <= fv[k + 1]]
    pool = [0.0, *roots]
    if half < a / 2:
        pool.append(half)
    if b / 2 < a / 2 * (1 - 1e-9):
        pool.append(_sampled_min(g, b / 2, a / 2 * (1 - 1e-9), 64, tol))
    best = min(pool, key=lambda x: (g(x), x))
    if not roots and all(v < 0 for v in fv[1:]):
        # E still falling at b/2: no interior minimum on the first branch
        log.info("no bracketed root for a=%g b=%g tau=%g; dense search", a, b, tau)
        x = _dense(g, a, tol)
        return _result(a, b, tau, min((x, best), key=lambda v: (g(v), v)),
                       bracketed=False)
    return _result(a, b, tau, best)


def _dense(g, a: float, tol: float) -> float:
    x = _sampled_min(g, 0.0, a / 2 * (1 - 1e-9), 256, tol)
    return x if g(x) < g(0.0) else 0.0


def flat_flow_step(rect: Rect, params: ContinuumParams) -> tuple[Rect, IncrementResult]:
    """One move; for a < b the problem is solved with the axes exchanged."""
    a, b = rect.a, rect.b
    swap = a < b
    if swap:
        a, b = b, a
    res = minimize_increment(a, b, params)
    a2 = a - 2 * res.x_bar
    b2 = a * b / a2
    if swap:
        a2, b2 = b2, a2
    return Rect(a2, b2, rect.center), res


@dataclass
class RectTrajectory:
    times: list = field(default_factory=list)
    a: list = field(default_factory=list)
    b: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    status: str = "ok"

    def append(self, t: float, a: float, b: float):
        self.times.append(t)
        self.a.append(a)
        self.b.append(b)

    def value_at(self, t: float, which: str = "a") -> float:
        """Piecewise-constant (right-continuous) reading of the samples."""
        xs = getattr(self, which)
        k = 0
        for i, s in enumerate(self.times):
            if s <= t + 1e-12:
                k = i
        return xs[k]


def run_approximate_flow(rect0: Rect, params: ContinuumParams) -> RectTrajectory:
    if abs(rect0.area - 1) > 1e-12:
        raise ValueError("the flow is run from unit-area rectangles")
    if params.lam <= rect0.a + rect0.b:
        raise ValueError("lambda must exceed a + b")
    steps = round(params.horizon / params.tau)
    traj = RectTrajectory()
    traj.append(0.0, rect0.a, rect0.b)
    rect = rect0
    for k in range(steps):
        try:
            rect, res = flat_flow_step(rect, params)
        except (ValueError, NonBracketing) as exc:
            traj.status = f"step {k} failed: {exc}"
            break
        if not res.proven_regime:
            traj.notes.append(f"step {k}: outside proven regime")
        traj.append((k + 1) * params.tau, rect.a, rect.b)
    return traj


def ode_rhs(a: float, b: float) -> tuple[float, float]:
    if a <= 0 or b <= 0:
        raise ValueError("sides must be positive")
    s = 8 / (a + b)
    return -4 / b + s, -4 / a + s


def _rk4(a: float, b: float, h: float) -> tuple[float, float]:
    k1 = ode_rhs(a, b)
    k2 = ode_rhs(a + h / 2 * k1[0], b + h / 2 * k1[1])
    k3 = ode_rhs(a + h / 2 * k2[0], b + h / 2 * k2[1])
    k4 = ode_rhs(a + h * k3[0], b + h * k3[1])
    return (a + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            b + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))


def integrate_limit_ode(rect0: Rect, horizon: float, h: float,
                        drift_rate: float = 1e-6) -> RectTrajectory:
    """Fixed-step RK4; raises InvariantDrift if a*b leaves its initial value
    faster than ``drift_rate`` per unit time."""
    if h <= 0:
        raise ValueError("step must be positive")
    steps = round(horizon / h)
    a, b = rect0.a, rect0.b
    area0 = a * b
    traj = RectTrajectory()
    traj.append(0.0, a, b)
    for k in range(1, steps + 1):
        a, b = _rk4(a, b, h)
        t = k * h
        if abs(a * b - area0) > drift_rate * max(t, h):
            raise InvariantDrift(f"area drift {a * b - area0:.3e} at t={t:g}; reduce h")
        traj.append(t, a, b)
    return traj


def aspect_defect(a: float, b: float) -> float:
    return a / b - 1


def sup_error(approx: RectTrajectory, exact: RectTrajectory, t_end: float = 1.0) -> float:
    """sup over [0, t_end] of |a_approx(t) - a(t)| with a_approx piecewise constant.

    ``exact`` must be sampled on a grid that refines the approximation grid.
    """
    err = 0.0
    j = 0
    times = approx.times
    for t, a_ex in zip(exact.times, exact.a):
        if t > t_end + 1e-12:
            break
        while j + 1 < len(times) and times[j + 1] <= t + 1e-12:
            j += 1
        err = max(err, abs(approx.a[j] - a_ex))
        if j and abs(times[j] - t) < 1e-12:
            # left limit at a jump
            err = max(err, abs(approx.a[j - 1] - a_ex))
    return err


def fitted_order(steps: list[float], errors: list[float]) -> float:
    """Least-squares slope of log(error) against log(step)."""
    xs = [math.log(s) for s in steps]
    ys = [math.log(e) for e in errors]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = sum((x - mx) ** 2 for x in xs)
    return num / den


def convergence_study(rect0: Rect, taus: list[float], horizon: float = 1.0,
                      ode_step: float | None = None) -> dict:
    h = ode_step or min(taus) / 25
    exact = integrate_limit_ode(rect0, horizon, h)
    errors = []
    for tau in taus:
        traj = run_approximate_flow(rect0, ContinuumParams(tau, horizon=horizon))
        errors.append(sup_error(traj, exact, horizon))
    return {"taus": list(taus), "errors": errors, "order": fitted_order(taus, errors)}
