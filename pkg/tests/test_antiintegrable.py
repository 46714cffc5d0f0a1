import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actmap import antiintegrable as ai
from actmap import equilibria as eq
from actmap.core import MapParams, iterate
from actmap.errors import ResidualTooLarge

BASE = MapParams(0.0, 1.0, 1.0, 1.0, 0.0, 3)
C_ROUTE = ai.RouteSpec(ai.Route.C_ROUTE, 1.0, 0.01)


def test_residual_vanishes_on_fixed_points():
    p = MapParams(0.6, 0.5, 1.0, 1.0, 1.0, 3)
    x1 = eq.equilibria(p).nontrivial[0][0]
    assert np.abs(ai.residual(p, [x1] * 4)).max() < 1e-10
    assert np.abs(ai.residual(p, np.zeros(3))).max() == 0.0


def test_residual_vanishes_on_period2():
    p = MapParams(0.1, 1.0, 9.0, 1.0, 0.2, 3)
    x2 = eq.symmetric_period2(p).points[0][0]
    assert np.abs(ai.residual(p, [x2, -x2])).max() < 1e-10


def test_lift_recovers_p1():
    p = MapParams(0.6, 0.5, 1.0, 1.0, 1.0, 3)
    q = eq.equilibria(p).nontrivial[0]
    assert np.allclose(ai.lift_orbit([q[0]] * 3, p), q, atol=1e-12)
    assert np.all(ai.lift_orbit(np.zeros(2), p) == 0)


def test_lift_round_trip_of_genuine_orbit():
    p = MapParams(0.3, 1.2, 0.8, 1.0, 0.4, 3)
    orb = iterate(p, [0.05, -0.02, 0.01], 12).states
    x = orb[:, 0]
    # interior states are determined by their neighbours' x-values
    P = ai.lift(p, x)
    assert np.allclose(P[1:-1], orb[1:-1], atol=1e-10)


def test_lift_refuses_bad_window():
    with pytest.raises(ResidualTooLarge):
        ai.lift_orbit([0.3, 0.1], BASE)


def test_residual_jacobian_finite_difference():
    p = MapParams(0.2, 1.3, 0.7, -0.5, 0.3, 4)
    x = np.array([0.3, -0.2, 0.5, 0.1, -0.4])
    J = ai.residual_jacobian(p, x)
    h = 1e-6
    fd = np.column_stack([(ai.residual(p, x + h * v) - ai.residual(p, x - h * v)) / (2 * h) for v in np.eye(5)])
    assert np.allclose(J, fd, atol=1e-6)


def test_seed_examples():
    assert np.all(ai.seed([0], 1.0, 3) == 0)
    assert ai.seed([1, 2], 1.0, 3).tolist() == [1.0, -1.0]
    assert ai.seed([1], 4.0, 2).tolist() == [4.0]
    with pytest.raises(ValueError):
        ai.seed([2], 1.0, 2)


def test_route_rejects_limit_and_large_lambda():
    with pytest.raises(ValueError):
        ai.RouteSpec(ai.Route.C_ROUTE, 1.0, 0.0)
    with pytest.raises(ValueError):
        ai.RouteSpec(ai.Route.C_ROUTE, 1.0, 0.5)


def test_fixed_point_closed_form():
    res = ai.continue_orbit([1], C_ROUTE, BASE)
    assert abs(res.x[0] - np.sqrt(0.98)) < 1e-9
    assert np.all(ai.continue_orbit([0], C_ROUTE, BASE).x == 0)


def test_witness_counts_k3():
    rep = ai.conjugacy_witness(C_ROUTE, BASE, 4)
    assert rep.counts == [3, 9, 27, 81] and rep.ok


def test_witness_counts_k2():
    rep = ai.conjugacy_witness(C_ROUTE, BASE.with_(k=2), 5)
    assert rep.counts == [2, 4, 8, 16, 32] and rep.ok


@pytest.mark.parametrize("ratio,k", [(-1.0, 3), (2.0, 2)])
def test_b_route(ratio, k):
    route = ai.RouteSpec(ai.Route.B_ROUTE, ratio, 0.01)
    rep = ai.conjugacy_witness(route, BASE.with_(k=k), 3)
    assert rep.ok and rep.counts == [ai.alphabet_size(k) ** n for n in (1, 2, 3)]


def test_distinct_windows():
    runs = [ai.continue_orbit(w, C_ROUTE, BASE) for w in ai.all_words(3, 3)]
    assert ai.pairwise_min_distance([r.x for r in runs]) > 1e-6


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=6), st.floats(0.001, 0.02))
def test_continued_words_solve_the_map(word, lam):
    route = ai.RouteSpec(ai.Route.C_ROUTE, 1.0, lam)
    res = ai.continue_orbit(word, route, BASE)
    assert ai.orbit_defect(res.params, res.orbit) < 1e-9
    # symbols survive: each x stays nearest its limit zero
    zeros = ai.limit_zeros(3, 1.0)
    assert [int(np.argmin(np.abs(zeros - x))) for x in res.x] == list(word)
