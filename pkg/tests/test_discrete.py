from fractions import Fraction as F

import pytest

from flowlab import discrete as d
from flowlab.lattice import (LatticeSet, QuasiRect, dissipation_eps, dissipation_units,
                             perimeter_eps, quasi_rect_cells)


def in_domain_moves(a_max=10, b_max=7, y_max=3):
    for A in range(2, a_max + 1):
        for B in range(1, min(A, b_max + 1)):
            for C in range(A):
                for X in range((A + 1) // 2):
                    for Y in range(y_max + 1):
                        D = d.area_remainder(A, B, C, X, Y)
                        if d.in_closed_form_domain(A, B, C, X, Y, D):
                            yield A, B, C, X, Y, D


@pytest.mark.parametrize("a,b,alpha,want", [
    (1, 1, 3, F(-1, 2)), (F(7, 3), F(7, 3), F(1, 5), F(-1, 2)),
    (2, F(1, 2), 1, F(8, 5)), (2, F(1, 2), F(1, 5), F(-8, 25))])
def test_drift(a, b, alpha, want):
    assert d.drift(a, b, alpha) == want
    assert d.x_initial(a, b, alpha) == want


def test_candidates_wide_rectangle():
    qr = QuasiRect(F(1, 20), 40, 10, 0)
    got = [(c.X, c.Y, c.D, c.overflow) for c in d.candidates(qr, d.FlowParams(1, F(1, 20)))]
    assert got == [(1, 0, 20, False), (2, 0, 40, True)]


def test_candidates_square_is_clamped():
    for C in (0, 3, 9):
        qr = QuasiRect(F(1, 10), 10, 10, C)
        cands = d.candidates(qr, d.FlowParams(F(1, 3), F(1, 10)))
        assert [(c.X, c.Y, c.D) for c in cands] == [(0, C // 20, C)]


def test_candidates_negative_drift_stationary():
    qr = QuasiRect(F(1, 20), 25, 16, 0)
    assert float(d.drift(qr.descriptor().a, qr.descriptor().b, 1)) == pytest.approx(-0.06098, abs=1e-5)
    cands = d.candidates(qr, d.FlowParams(1, F(1, 20)))
    assert [(c.X, c.Y, c.D) for c in cands] == [(0, 0, 0)]


def test_candidates_area_identity():
    for A in range(20, 41, 4):
        for B in range(A // 3, A, 3):
            for C in (0, A // 2, A - 1):
                qr = QuasiRect(F(1, 25), A, B, C)
                for c in d.candidates(qr, d.FlowParams(1, F(1, 25))):
                    assert (A - 2 * c.X) * (B + 2 * c.Y) + c.D == A * B + C
                    n, m, r = c.shape
                    assert n * m + r == A * B + C


def test_identity_is_a_candidate_for_small_drift():
    for A, B in [(30, 20), (12, 10), (25, 16), (40, 30)]:
        qr = QuasiRect(F(1, 20), A, B, 0)
        a, b = qr.descriptor().a, qr.descriptor().b
        for alpha in (F(1, 5), F(1, 2), 1):
            if 0 <= d.drift(a, b, alpha) < 1:
                cands = d.candidates(qr, d.FlowParams(alpha, F(1, 20)))
                assert any(c.X == 0 for c in cands)


def test_bottom_strip_example():
    assert F(1, 10) ** 3 * d.bottom_strip_units(20, 1, 1) == F(18, 1000)


def test_side_columns_example():
    assert F(1, 10) ** 3 * d.side_columns_units(5, 1) == F(1, 100)


def test_dissipation_identity_move():
    s = QuasiRect(F(1, 10), 8, 4, 3).descriptor()
    assert d.dissipation_closed_form(s, 0, 0, 3) == 0


def test_dissipation_parts_equal_cell_sums():
    for A, B, C, X, Y, D in in_domain_moves():
        n, m, r = d.realize(A, B, X, Y, D)
        cells = dissipation_units(quasi_rect_cells(n, m, r), quasi_rect_cells(A, B, C))
        assert sum(d.dissipation_parts_units(A, B, C, X, Y, D)) == cells


def test_dissipation_outside_domain_rejected():
    # (8, 4, 0) with X = Y = 1 leaves a negative remainder
    assert d.area_remainder(8, 4, 0, 1, 1) == -4
    with pytest.raises(ValueError):
        d.dissipation_parts_units(8, 4, 0, 1, 1, -4)


def test_energy_identity_moves():
    eps, alpha = F(1, 10), F(3, 2)
    p = d.FlowParams(alpha, eps)
    s = QuasiRect(eps, 8, 4, 3).descriptor()
    assert d.energy_closed_form(s, 0, 0, 3, p) == alpha * eps * (2 * s.a + 2 * s.b + 2 * eps)
    s = QuasiRect(eps, 8, 4, 0).descriptor()
    assert d.energy_closed_form(s, 0, 0, 0, p) == alpha * eps * (2 * s.a + 2 * s.b)


def test_energy_equals_cell_assembly():
    eps = F(1, 10)
    for alpha in (F(1, 5), 1, 3):
        p = d.FlowParams(alpha, eps)
        for A, B, C, X, Y, D in in_domain_moves(8, 5, 2):
            old = LatticeSet(eps, quasi_rect_cells(A, B, C))
            new = LatticeSet(eps, quasi_rect_cells(*d.realize(A, B, X, Y, D)))
            want = p.alpha * eps * perimeter_eps(new) + dissipation_eps(new, old)
            shape = QuasiRect(eps, A, B, C).descriptor()
            assert d.energy_closed_form(shape, X, Y, D, p) == want


def test_polynomial_matches_tabulated_sums():
    eps = F(1, 10)
    p = d.FlowParams(1, eps)
    for A, B, C, X, Y, D in in_domain_moves():
        if 2 * X >= B:
            continue
        shape = QuasiRect(eps, A, B, C).descriptor()
        n, m, r = d.realize(A, B, X, Y, D)
        tab = (eps ** 2 * (2 * n + 2 * m + (2 if r else 0))
               + eps ** 3 * sum(d.printed_parts_units(A, B, C, X, Y, D)))
        assert d.energy_closed_form(shape, X, Y, D, p, "polynomial") == tab


def test_polynomial_and_perimeter_agree_without_top_gaps():
    # no partial rows and no new rows: only the bottom and side strips move
    eps = F(1, 10)
    p = d.FlowParams(1, eps)
    shape = QuasiRect(eps, 12, 6, 0).descriptor()
    assert (d.energy_closed_form(shape, 0, 0, 0, p, "polynomial")
            == d.energy_closed_form(shape, 0, 0, 0, p))


def test_polynomial_branch_guard():
    p = d.FlowParams(1, F(1, 10))
    with pytest.raises(ValueError):
        d.energy_closed_form(QuasiRect(F(1, 10), 10, 2, 0).descriptor(), 1, 0, 4, p,
                             "polynomial")


def test_step_picks_lower_energy():
    qr = QuasiRect(F(1, 20), 40, 10, 0)
    params = d.FlowParams(1, F(1, 20))
    c1, c2 = d.candidates(qr, params)
    nxt, best = d.incremental_step(qr, params)
    assert best == min((c1, c2), key=lambda c: c.energy)
    assert nxt.size == qr.size


def test_step_pinned_square_ish():
    qr = QuasiRect(F(1, 20), 25, 16, 0)
    nxt, best = d.incremental_step(qr, d.FlowParams(1, F(1, 20)))
    assert nxt == qr and best.X == 0


def test_symmetric_flow_pinned_constant():
    qr = QuasiRect(F(1, 20), 25, 16, 0)
    tr = d.run_symmetric_flow(qr, d.FlowParams(1, F(1, 20), steps=20))
    assert tr.pinned and len({s for s in tr.states}) == 1


def test_symmetric_flow_monotone():
    eps = F(1, 40)
    tr = d.run_symmetric_flow(QuasiRect(eps, 80, 20, 0), d.FlowParams(1, eps, steps=60))
    sums = [s.a + s.b for s in tr.states]
    assert all(u >= v for u, v in zip(sums, sums[1:]))
    assert len({s.area for s in tr.states}) == 1


def test_symmetric_flow_cauchy_in_eps():
    trajs = {}
    for N in (20, 40, 80):
        eps = F(1, N)
        trajs[N] = d.run_symmetric_flow(QuasiRect(eps, 2 * N, N // 2, 0),
                                        d.FlowParams(1, eps, steps=N // 2))

    def at(t, tr):
        return tr.states[max(k for k, s in enumerate(tr.times) if s <= t)].a

    def gap(p, q):
        return max(abs(at(t, p) - s.a) for t, s in zip(q.times, q.states))

    assert gap(trajs[40], trajs[80]) <= F(3, 5) * gap(trajs[20], trajs[40])


def test_rectangular_first_step():
    eps = F(1, 20)
    tr = d.run_rectangular_flow(QuasiRect(eps, 40, 10, 0), d.FlowParams(1, eps, steps=1))
    c = tr.chosen[0]
    assert c.X in (1, 2) and c.Y == (2 * 10 * c.X) // (2 * 40 - 4 * c.X)
    assert tr.states[-1].c == 0


def test_rectangular_area_drift():
    eps = F(1, 50)
    lam = F(3)
    tr = d.run_rectangular_flow(QuasiRect(eps, 100, 25, 0), d.FlowParams(1, eps, lam, 200))
    for s, t in zip(tr.states, tr.states[1:]):
        assert abs(t.area - s.area) <= lam * eps


def test_rectangular_needs_rectangle():
    with pytest.raises(ValueError):
        d.run_rectangular_flow(QuasiRect(F(1, 20), 40, 10, 3), d.FlowParams(1, F(1, 20)))


def test_lambda_guard_stops_flow():
    eps = F(1, 20)
    tr = d.run_symmetric_flow(QuasiRect(eps, 40, 10, 0), d.FlowParams(1, eps, F(1, 100), 5))
    assert tr.status.startswith("guard failure")


def test_coarse_eps_warns():
    tr = d.run_symmetric_flow(QuasiRect(F(1, 4), 6, 2, 0), d.FlowParams(1, F(1, 4), steps=1))
    assert tr.warnings


def test_pinning_threshold_values():
    assert d.pinning_threshold(F(1, 2)) == F(1, 12)
    assert float(d.pinning_threshold(F(70711, 100000))) == pytest.approx(0.35355, rel=1e-4)
    assert d.pinning_threshold(F(9999, 10000)) > 1000
    with pytest.raises(ValueError):
        d.pinning_threshold(1)


def test_derived_interval_matches_window():
    for b in (F(3, 10), F(1, 2), F(4, 5)):
        lo, hi = d.derived_pinning_interval(b)
        assert d.is_pinned_window(1 / b, b, lo)
        assert not d.is_pinned_window(1 / b, b, hi)
        assert not d.is_pinned_window(1 / b, b, lo * F(99, 100))


def test_inclusion_bounds():
    da, _ = d.inclusion_bounds(2, F(1, 2), 0, 1)
    assert da == (-4, -2)
    da, _ = d.inclusion_bounds(2, F(1, 2), 0, F(7, 6))
    assert d.x_initial(2, F(1, 2), F(7, 6)) == 2
    assert da == (-2 / F(7, 6) * 3, -2 / F(7, 6))
    da, db = d.inclusion_bounds(1, 1, 0, 1)
    assert da[0] <= 0 <= da[1] and db[0] <= 0 <= db[1]


def test_unit_area_counts():
    A, B, C = d.unit_area_counts(F(1, 2), 100)
    assert (A, B, C) == (200, 50, 0)
    A, B, C = d.unit_area_counts(F(3, 10), 100)
    assert A * B + C == 10000 and 0 <= C < B
