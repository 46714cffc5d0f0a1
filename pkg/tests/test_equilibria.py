import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actmap import equilibria as eq
from actmap.core import MapParams, evaluate, jacobian
from actmap.errors import DegenerateParameters, EmptyRegion, StripViolation
from actmap.equilibria import BoundaryKind, RegionKind
from actmap.schur import cubic_roots

nonzero = st.floats(0.2, 2).flatmap(lambda v: st.sampled_from([v, -v]))


@st.composite
def params(draw):
    return MapParams(
        draw(st.floats(-1, 1)), draw(nonzero), draw(st.floats(-3, 3)), draw(nonzero), draw(st.floats(-1, 1)),
        draw(st.integers(2, 6)),
    )


def test_p1_example():
    p = MapParams(0.6, 0.5, 1.0, 1.0, 1.0, 3)
    es = eq.equilibria(p)
    assert es.radicand == pytest.approx(1.0)
    assert len(es.nontrivial) == 2
    assert np.allclose(es.nontrivial[0], [1.0, 0.02, 0.82])
    assert np.allclose(es.nontrivial[1], -es.nontrivial[0])


def test_odd_k_negative_radicand_has_no_nontrivial_point():
    p = MapParams(0.6, 0.5, -1.0, 1.0, 1.0, 3)
    es = eq.equilibria(p)
    assert es.radicand < 0 and es.nontrivial == []


def test_even_k_takes_real_root_of_either_sign():
    p = MapParams(0.6, 0.5, -1.0, 1.0, 1.0, 2)
    (q,) = eq.equilibria(p).nontrivial
    assert q[0] < 0
    assert np.abs(evaluate(p, q) - q).max() < 1e-12


def test_period2_needs_odd_k():
    assert not eq.symmetric_period2(MapParams(0.1, 1.0, 9.0, 1.0, 0.2, 4)).exists


def test_period2_degenerate_on_c_minus_one_line():
    a, b, e = 0.1, 1.0, 0.2
    c = (1 + e) * ((a + 1) ** 2 + b * b) / b
    p2 = eq.symmetric_period2(MapParams(a, b, c, 1.0, e, 3))
    assert not p2.exists and p2.degenerate and abs(p2.radicand) < 1e-12


@settings(max_examples=300)
@given(params())
def test_fixed_point_and_period2_residuals(p):
    for q in eq.equilibria(p).nontrivial:
        assert np.abs(evaluate(p, q) - q).max() < 1e-10
    p2 = eq.symmetric_period2(p)
    if p2.exists:
        q = p2.points[0]
        assert np.abs(evaluate(p, q) + q).max() < 1e-10
        assert np.abs(evaluate(p, evaluate(p, q)) - q).max() < 1e-10


@pytest.mark.parametrize("a,b,expected", [(0.6, -0.8, True), (0.2, -1.4, True), (10.0, 0.1, False)])
def test_region_nonempty_examples(a, b, expected):
    assert eq.region_nonempty(a, b)[0] is expected


def test_region_nonempty_sign_rules():
    assert not eq.region_nonempty(0.6, -0.8, RegionKind.NONTRIVIAL, k=3, d=1)[0]
    assert eq.region_nonempty(0.6, -0.8, RegionKind.NONTRIVIAL, k=3, d=-1)[0]
    assert eq.region_nonempty(0.6, -0.8, RegionKind.NONTRIVIAL, k=2, d=1)[0]
    assert not eq.region_nonempty(0.6, 0.8, RegionKind.SYMMETRIC, k=4, d=1)[0]
    assert not eq.region_nonempty(0.6, 0.8, RegionKind.SYMMETRIC, k=3, d=-1)[0]


def test_region_member_examples():
    assert eq.region_member(MapParams(0.6, -0.8, -0.5, 1.0, 0.0, 3), RegionKind.TRIVIAL)
    assert not eq.region_member(MapParams(0.6, -0.8, 0.1, 1.0, 0.0, 3), RegionKind.TRIVIAL)


@settings(max_examples=300)
@given(params(), st.sampled_from(list(RegionKind)))
def test_membership_matches_jacobian_eigenvalues(p, kind):
    member = eq.region_member(p, kind)
    if kind is RegionKind.TRIVIAL:
        pts = [np.zeros(3)]
    elif kind is RegionKind.NONTRIVIAL:
        pts = eq.equilibria(p).nontrivial[:1]
    else:
        p2 = eq.symmetric_period2(p)
        pts = [p2.points[0]] if p2.exists else []
    if not pts:
        assert not member
        return
    rho = np.abs(np.linalg.eigvals(jacobian(p, pts[0][0]))).max()
    near = eq.boundary_distance(p.a, p.b, p.k, p.e, p.c, kind) < 1e-6
    if not near and abs(rho - 1) > 1e-9:
        assert member == (rho < 1)


@given(params(), st.sampled_from(list(RegionKind)))
def test_members_lie_in_strip(p, kind):
    if eq.region_member(p, kind):
        assert abs(p.e) * p.rho2 < 1


def test_boundary_example_hopf_at_one_and_a_half():
    pts = eq.boundary_classify(0.0, 2.0, 1.0, 3, 0.0, RegionKind.TRIVIAL)
    assert [(bp.c, bp.kind) for bp in pts] == [(pytest.approx(1.5), BoundaryKind.HOPF_PAIR),
                                               (pytest.approx(2.5), BoundaryKind.EIGEN_PLUS_ONE)]
    hopf = pts[0]
    assert hopf.verified
    assert np.allclose(np.sort(np.abs(np.angle(hopf.eigenvalues[np.abs(hopf.eigenvalues) > 0.5]))), np.pi / 2)


def test_minus_one_boundary_shared_with_symmetric_region():
    a, b, d, k, e = 0.6, 0.5, 1.0, 3, -0.9
    tr = eq.boundary_classify(a, b, d, k, e, RegionKind.TRIVIAL)
    sym = eq.boundary_classify(a, b, d, k, e, RegionKind.SYMMETRIC)
    c_tr = [bp for bp in tr if bp.kind is BoundaryKind.EIGEN_MINUS_ONE]
    c_sym = [bp for bp in sym if bp.kind is BoundaryKind.EIGEN_MINUS_ONE]
    assert c_tr and c_sym
    assert c_tr[0].c == pytest.approx(c_sym[0].c, abs=1e-12)
    assert np.abs(c_tr[0].eigenvalues + 1).min() < 1e-9


def test_boundary_errors():
    with pytest.raises(StripViolation):
        eq.boundary_classify(0.0, 2.0, 1.0, 3, 0.3, RegionKind.TRIVIAL)
    with pytest.raises(EmptyRegion):
        eq.boundary_classify(0.6, -0.8, 1.0, 3, 0.0, RegionKind.NONTRIVIAL)


def test_corner_points_unit_modulus_case():
    cp = eq.corner_points(0.6, -0.8)
    m = cp["M'"]
    assert (m.e, m.c) == pytest.approx((1.0, 0.0), abs=1e-12)
    target = np.array([1.0, 0.6 + 0.8j, 0.6 - 0.8j])
    assert max(np.abs(m.eigenvalues - t).min() for t in target) < 1e-8
    assert cp["M''"] is None and cp["N''"] is None


def test_corner_double_prime_inside_strip():
    a, b = 0.85, -1.0
    m2 = eq.corner_points(a, b)["M''"]
    assert abs(m2.e) < 1 / (a * a + b * b)
    assert np.sort(np.abs(m2.eigenvalues - 1))[1] < 1e-6  # double root at +1


def test_resonances():
    assert eq.resonance_parameters(0.0, 2.0) == {"e_1to4": 0.0, "e_1to3": pytest.approx(1 / 3)}
    e = 1 / 3
    c = eq.RegionCurves(0.0, 2.0).c_hat(e) / -2.0
    eig = cubic_roots(eq.char_poly_from_power(MapParams(0.0, 2.0, c, 1.0, e, 3), 0.0))
    unit = eig[np.abs(np.abs(eig) - 1) < 1e-9]
    assert np.allclose(np.sort(np.abs(np.angle(unit))), 2 * np.pi / 3, atol=1e-9)
    with pytest.raises(DegenerateParameters):
        eq.resonance_parameters(0.6, -0.8)


@pytest.mark.parametrize("method", ["schur", "eigen"])
def test_stability_mask_methods_agree_with_region(method):
    a, b, d, k = 0.2, -1.4, -1.0, 3
    s = a * a + b * b
    E, C = np.meshgrid(np.linspace(-1 / s, 1 / s, 60), np.linspace(-6, 3, 60), indexing="ij")
    for kind in RegionKind:
        region = eq.region_mask(a, b, d, k, E, C, kind)
        direct = eq.orbit_stability_mask(a, b, d, k, E, C, kind, method=method)
        near = eq.boundary_distance(a, b, k, E, C, kind) < 1e-6
        assert np.all((region == direct) | near)
