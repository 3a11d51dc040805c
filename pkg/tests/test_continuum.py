import math

import pytest

from flowlab import continuum as c


@pytest.mark.parametrize("a,b,want", [(1, 1, 4), (2, 0.5, 5), (3, 1 / 3, 20 / 3)])
def test_perimeter(a, b, want):
    assert c.perimeter_l1(c.Rect(a, b)) == pytest.approx(want, rel=1e-15)


def test_rect_rejects_degenerate():
    with pytest.raises(ValueError):
        c.Rect(0, 1)


@pytest.mark.parametrize("x,want", [(0.1, 0.0057222), (0.3, 0.043154)])
def test_dissipation_values(x, want):
    assert c.dissipation_rect(2, 0.5, x) == pytest.approx(want, rel=1e-3)


def test_dissipation_zero_move():
    assert c.dissipation_rect(2, 0.5, 0) == 0


def test_dissipation_continuous_at_branch_point():
    a, b = 2.0, 0.5
    x = b / 2
    lower = c.advance(a, b, x) ** 2 * (a - 2 * x) + 4 / 3 * x ** 3 + x * x * (b - 2 * x)
    assert c.dissipation_rect(a, b, x) == pytest.approx(lower, rel=1e-12)
    assert c.dissipation_rect(a, b, math.nextafter(x, 0)) == pytest.approx(lower, rel=1e-12)


def test_dissipation_rejects_out_of_range():
    with pytest.raises(ValueError):
        c.dissipation_rect(2, 0.5, 1.0)
    with pytest.raises(ValueError):
        c.dissipation_rect(2, 0.5, -0.1)


@pytest.mark.parametrize("tau", [1e-4, 1e-3, 1.0])
def test_energy_at_zero_is_perimeter(tau):
    assert c.energy_profile(2, 0.5, tau, 0) == 5


def test_energy_cross_assembly():
    a, b, tau, x = 2, 0.5, 1e-3, 1e-3
    y = b * x / (a - 2 * x)
    want = 2 * (a - 2 * x + b + 2 * y) + c.dissipation_rect(a, b, x) / tau
    assert c.energy_profile(a, b, tau, x) == pytest.approx(want, rel=1e-14)


def test_square_is_stationary_in_energy():
    xs = [k * 1e-4 for k in range(101)]
    es = [c.energy_profile(1, 1, 1e-3, x) for x in xs]
    assert es[0] == 4
    assert all(u <= v for u, v in zip(es, es[1:]))


def test_stationary_quartic_matches_derivative():
    a, b, tau = 2.0, 0.5, 1e-3
    for x in (0.01, 0.05, 0.1, 0.2):
        h = 1e-6
        de = (c.energy_profile(a, b, tau, x + h) - c.energy_profile(a, b, tau, x - h)) / (2 * h)
        assert c.stationary_quartic(a, b, tau, x) == pytest.approx(
            tau * (a - 2 * x) ** 2 * de, rel=1e-5)


def test_minimizer_square():
    res = c.minimize_increment(1, 1, c.ContinuumParams(1e-3))
    assert res.x_bar == 0


def test_minimizer_slope():
    res = c.minimize_increment(2, 0.5, c.ContinuumParams(1e-4))
    assert 2.28 <= res.x_bar / 1e-4 <= 2.52
    assert res.proven_regime and res.bracketed


def test_minimizer_second_order_remainder():
    # the tau^2 remainder coefficient is the same at tau and tau/2
    coef = []
    for tau in (1e-3, 5e-4):
        x = c.minimize_increment(2, 0.5, c.ContinuumParams(tau)).x_bar
        coef.append((x - 2.4 * tau) / tau ** 2)
    assert coef[0] == pytest.approx(coef[1], rel=0.05)


def test_minimizer_beats_reference_points():
    for a, b, tau in [(2, 0.5, 1e-3), (3, 1 / 3, 1e-2), (1.5, 2 / 3, 5e-2), (4, 0.25, 0.1)]:
        res = c.minimize_increment(a, b, c.ContinuumParams(tau))
        assert res.energy <= c.energy_profile(a, b, tau, 0) + 1e-15
        assert res.energy <= c.energy_profile(a, b, tau, b / 2) + 1e-15


def test_minimizer_flags_large_tau():
    res = c.minimize_increment(2, 0.5, c.ContinuumParams(3.0))
    assert not res.proven_regime


def test_minimizer_requires_orientation():
    with pytest.raises(ValueError):
        c.minimize_increment(0.5, 2, c.ContinuumParams(1e-3))


def test_flat_flow_step_values():
    sq, _ = c.flat_flow_step(c.Rect(1, 1), c.ContinuumParams(1e-3))
    assert (sq.a, sq.b) == (1, 1)
    r, _ = c.flat_flow_step(c.Rect(2, 0.5), c.ContinuumParams(1e-3))
    assert r.a == pytest.approx(1.99520, abs=1e-5)
    assert r.b == pytest.approx(0.50120, abs=1e-5)


def test_flat_flow_step_invariants():
    for a, b, tau in [(2, 0.5, 1e-3), (0.5, 2, 1e-3), (4, 0.25, 1e-2), (1.25, 0.8, 1e-2)]:
        r, _ = c.flat_flow_step(c.Rect(a, b), c.ContinuumParams(tau))
        assert r.a * r.b == pytest.approx(1, abs=1e-12)
        assert r.a + r.b <= a + b + 1e-15


def test_approximate_flow_square_constant():
    tr = c.run_approximate_flow(c.Rect(1, 1), c.ContinuumParams(1e-2))
    assert set(tr.a) == {1} and set(tr.b) == {1}


def test_approximate_flow_decreasing():
    tr = c.run_approximate_flow(c.Rect(2, 0.5), c.ContinuumParams(1e-2))
    assert tr.status == "ok"
    assert all(u > v for u, v in zip(tr.a, tr.a[1:]))
    assert tr.a[-1] > 1


def test_approximate_flow_halving():
    trajs = [c.run_approximate_flow(c.Rect(2, 0.5), c.ContinuumParams(t))
             for t in (1e-2, 5e-3, 2.5e-3)]

    def gap(p, q):
        return max(abs(p.value_at(t) - a) for t, a in zip(q.times, q.a))

    ratio = gap(trajs[0], trajs[1]) / gap(trajs[1], trajs[2])
    assert 1.7 <= ratio <= 2.3


def test_approximate_flow_guards():
    with pytest.raises(ValueError):
        c.run_approximate_flow(c.Rect(2, 1), c.ContinuumParams(1e-2))
    with pytest.raises(ValueError):
        c.run_approximate_flow(c.Rect(2, 0.5), c.ContinuumParams(1e-2, lam=2.5))


@pytest.mark.parametrize("a,b,want", [(1, 1, (0, 0)), (2, 0.5, (-4.8, 1.2)),
                                      (4, 0.25, (-14.11765, 0.88235))])
def test_ode_rhs(a, b, want):
    got = c.ode_rhs(a, b)
    assert got[0] == pytest.approx(want[0], abs=1e-5)
    assert got[1] == pytest.approx(want[1], abs=1e-5)


def test_ode_square_constant():
    tr = c.integrate_limit_ode(c.Rect(1, 1), 10, 1e-2)
    assert max(abs(a - 1) for a in tr.a) == 0


def test_ode_exponential_decay():
    tr = c.integrate_limit_ode(c.Rect(2, 0.5), 1, 1e-3)
    f1 = c.aspect_defect(tr.a[-1], tr.b[-1])
    assert 0 < f1 <= 3 * math.exp(-4)


def test_ode_conserves_area():
    tr = c.integrate_limit_ode(c.Rect(2, 0.5), 2, 1e-3)
    assert max(abs(a * b - 1) for a, b in zip(tr.a, tr.b)) <= 1e-9


def test_ode_defect_inequality():
    tr = c.integrate_limit_ode(c.Rect(2, 0.5), 2, 1e-3)
    for a, b in zip(tr.a, tr.b):
        da, db = c.ode_rhs(a, b)
        dfdt = (da * b - a * db) / b ** 2
        assert dfdt <= -4 * c.aspect_defect(a, b) + 1e-12


def test_ode_drift_guard():
    with pytest.raises(c.InvariantDrift):
        c.integrate_limit_ode(c.Rect(4, 0.25), 1, 0.05)


def test_fitted_order_exact_power():
    assert c.fitted_order([1, 2, 4], [3, 6, 12]) == pytest.approx(1)
