"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from actmap import antiintegrable as ai
from actmap import equilibria as eq
from actmap import horseshoe as hs
from actmap import scan
from actmap.core import MapParams, evaluate, iterate, jacobian, nonwandering_box
from actmap.schur import MonicCubic, cubic_roots, is_stable, stable_interval

pytestmark = pytest.mark.acceptance

RNG_SEED = 20240501

# Periodic orbits found by criteria 6 and 7, re-checked by criterion 8.
_FOUND: dict = {}


def test_c01_schur_matches_root_oracle(criterion):
    with criterion(1, "Schur criterion vs root oracle on 1e6 cubics") as info:
        t0 = time.perf_counter()
        rng = np.random.default_rng(RNG_SEED)
        A, B, D = rng.uniform(-3.0, 3.0, size=(3, 1_000_000))
        stable = is_stable(MonicCubic(A, B, D))
        rho = np.abs(cubic_roots(MonicCubic(A, B, D))).max(axis=-1)
        oracle = rho < 1.0
        band = np.abs(rho - 1.0) < 1e-8
        bad = (stable != oracle) & ~band
        elapsed = time.perf_counter() - t0
        info["detail"] = f"{int(oracle.sum())} stable, {int(bad.sum())} disagreements outside band, {elapsed:.1f}s"
        assert not bad.any()
        assert elapsed < 60.0


def test_c02_stable_interval_endpoints(criterion):
    with criterion(2, "stable-interval endpoints on 1e4 cubics") as info:
        rng = np.random.default_rng(RNG_SEED + 2)
        checked = 0
        while checked < 10_000:
            D = rng.uniform(-1.0, 1.0)
            A = D + rng.uniform(-2.0, 2.0)
            B = rng.uniform(-3.0, 3.0)
            if not (abs(D) < 1 and abs(A - D) < 2):
                continue
            iv = stable_interval(A, B, D)
            assert iv is not None, (A, B, D)
            q = MonicCubic(A, B, D)
            hi_roots = cubic_roots(q.shifted(iv.hi))
            pair = [r for r in hi_roots if abs(abs(r) - 1.0) < 1e-8 and abs(r - 1) > 1e-8 and abs(r + 1) > 1e-8]
            assert len(pair) >= 2 and abs(pair[0] - np.conj(pair[1])) < 1e-6, (A, B, D, hi_roots)
            lo_roots = cubic_roots(q.shifted(iv.lo))
            assert min(np.abs(lo_roots - 1.0).min(), np.abs(lo_roots + 1.0).min()) < 1e-8, (A, B, D, lo_roots)
            checked += 1
        info["detail"] = f"{checked} cubics"


def test_c03_equilibria_residuals(criterion):
    with criterion(3, "equilibria residuals on 1e4 draws") as info:
        rng = np.random.default_rng(RNG_SEED + 3)
        n_p1 = n_p2 = worst = 0
        for _ in range(10_000):
            b = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0)
            d = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0)
            p = MapParams(rng.uniform(-1, 1), b, rng.uniform(-3, 3), d, rng.uniform(-1, 1), int(rng.integers(2, 6)))
            for q in eq.equilibria(p).nontrivial:
                r = np.abs(evaluate(p, q) - q).max()
                worst = max(worst, r)
                assert r < 1e-10, (p, q, r)
                n_p1 += 1
            p2 = eq.symmetric_period2(p)
            if p2.exists:
                q = p2.points[0]
                r1 = np.abs(evaluate(p, q) + q).max()
                r2 = np.abs(evaluate(p, evaluate(p, q)) - q).max()
                worst = max(worst, r1, r2)
                assert r1 < 1e-10 and r2 < 1e-10, (p, q, r1, r2)
                n_p2 += 1
        assert n_p1 > 1000 and n_p2 > 1000
        info["detail"] = f"{n_p1} fixed points, {n_p2} period-2 points, worst residual {worst:.1e}"


def _oracle_stable(a, b, d, k, E, C, kind):
    """Stability computed from scratch: solve the orbit equations, build DF, test its cubic."""
    if kind is eq.RegionKind.TRIVIAL:
        xpow = np.zeros_like(E)
        exists = np.ones_like(E, dtype=bool)
    else:
        sign = 1.0 if kind is eq.RegionKind.NONTRIVIAL else -1.0
        # fixed point: x^(k-1) = (c - (1-e)((1-a)^2+b^2)/b)/d ; period-2 with F(p) = -p: flip signs of a, e
        xpow = (C - (1 - sign * E) * ((1 - sign * a) ** 2 + b * b) / b) / d
        if kind is eq.RegionKind.SYMMETRIC and k % 2 == 0:
            exists = np.zeros_like(E, dtype=bool)
        elif (k - 1) % 2 == 0:
            exists = xpow > 1e-12
        else:
            exists = np.abs(xpow) > 1e-12
    J = np.zeros(E.shape + (3, 3))
    J[..., 0, :] = (a, -b, b)
    J[..., 1, :] = (b, a, -a)
    J[..., 2, 0] = C - k * d * np.where(exists, xpow, 0.0)
    J[..., 2, 2] = E
    tr = np.trace(J, axis1=-2, axis2=-1)
    minors = (
        J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        + J[..., 0, 0] * J[..., 2, 2] - J[..., 0, 2] * J[..., 2, 0]
        + J[..., 1, 1] * J[..., 2, 2] - J[..., 1, 2] * J[..., 2, 1]
    )
    q = MonicCubic(-tr, minors, -np.linalg.det(J))
    return np.asarray(is_stable(q)) & exists


@pytest.mark.parametrize("a,b", [(0.6, -0.8), (0.2, -1.4), (0.1, -0.8)])
@pytest.mark.parametrize("kind", list(eq.RegionKind), ids=lambda k: k.value)
def test_c04_region_raster(criterion, a, b, kind):
    with criterion(4, f"region raster a={a} b={b} {kind.value}") as info:
        t0 = time.perf_counter()
        d, k = float(np.sign(b)), 3
        s = a * a + b * b
        es = np.linspace(-1.1 / s, 1.1 / s, 200)
        cs = np.linspace(-8.0, 4.0, 200)
        E, C = np.meshgrid(es, cs, indexing="ij")
        member = eq.region_mask(a, b, d, k, E, C, kind)
        oracle = _oracle_stable(a, b, d, k, E, C, kind)
        near = eq.boundary_distance(a, b, k, E, C, kind) < 1e-6
        bad = (member != oracle) & ~near
        # scalar entry point agrees with the raster on a sample of cells
        for i, j in itertools.product(range(0, 200, 23), range(0, 200, 17)):
            assert eq.region_member(MapParams(a, b, C[i, j], d, E[i, j], k), kind) == member[i, j]
        elapsed = time.perf_counter() - t0
        info["detail"] = f"{int(member.sum())} member cells, {int(bad.sum())} disagreements, {elapsed:.2f}s"
        assert member.any()
        assert not bad.any()
        assert elapsed < 30.0


def test_c05_resonance_witness(criterion):
    with criterion(5, "1:4 resonance eigenvalues at a=0 b=2 e=0 c=1.5") as info:
        p = MapParams(0.0, 2.0, 1.5, 1.0, 0.0, 3)
        eigs = np.linalg.eigvals(jacobian(p, 0.0))
        target = np.array([0.0, 1j, -1j])
        err = max(np.abs(eigs - t).min() for t in target)
        assert eq.resonance_parameters(0.0, 2.0)["e_1to4"] == 0.0
        info["detail"] = f"max eigenvalue error {err:.1e}"
        assert err < 1e-9


def test_c06_horseshoe_counts(criterion):
    with criterion(6, "horseshoe slabs, margin and 2^n counts") as info:
        t0 = time.perf_counter()
        p = MapParams(0.0, 2.0, 5.0, 1.0, 0.0, 2)
        geo = hs.strip_geometry(p)
        assert np.abs(geo.slab_roots - np.array([-2.0, 0.0, 3.0, 5.0])).max() < 1e-10, geo.slab_roots
        margin = hs.hyperbolicity_margins(p, slab_inflation=0.0).margin
        assert margin == pytest.approx(3.0, abs=1e-12)
        counts = {}
        _FOUND["horseshoe"] = []
        for params, label in ((p, "a=e=0"), (p.with_(a=0.01, e=0.01), "a=e=0.01")):
            got = []
            for n in range(1, 7):
                res = hs.enumerate_periodic(params, n)
                assert not res.failures, res.failures[:3]
                assert res.count == 2**n
                assert res.min_distance > 1e-8
                got.append(res.count)
                _FOUND["horseshoe"].extend((params, o.states) for o in res.orbits)
            counts[label] = got
        elapsed = time.perf_counter() - t0
        info["detail"] = f"margin {margin:g}, counts {counts}, {elapsed:.1f}s"
        assert elapsed < 120.0


def test_c07_antiintegrable_continuation(criterion):
    with criterion(7, "anti-integrable continuation, k=3 c-route") as info:
        t0 = time.perf_counter()
        route = ai.RouteSpec(ai.Route.C_ROUTE, 1.0, 0.01)
        base = MapParams(0.0, 1.0, 1.0, 1.0, 0.0, 3)
        fixed = ai.continue_orbit([1], route, base)
        assert abs(fixed.x[0] - np.sqrt(0.98)) < 1e-9, fixed.x
        p = route.routed(base)
        box = nonwandering_box(p)
        _FOUND["ai"] = []
        counts, worst = [], 0.0
        for n in range(1, 5):
            words = list(itertools.product(range(3), repeat=n))
            runs = [ai.continue_orbit(list(w), route, base) for w in words]
            assert ai.pairwise_min_distance([r.x for r in runs]) > ai.DISTINCT_TOL
            for r in runs:
                defect = ai.orbit_defect(p, r.orbit)
                worst = max(worst, defect)
                assert defect < 1e-9
                assert np.all(box.contains(r.orbit))
                _FOUND["ai"].append((p, r.orbit))
            counts.append(len(runs))
        assert counts == [3, 9, 27, 81]
        elapsed = time.perf_counter() - t0
        info["detail"] = f"|x-sqrt(0.98)|={abs(fixed.x[0] - np.sqrt(0.98)):.1e}, counts {counts}, worst defect {worst:.1e}, {elapsed:.1f}s"
        assert elapsed < 120.0


def test_c08_box_containment(criterion):
    with criterion(8, "periodic orbits of criteria 6-7 inside the nonwandering box") as info:
        if "horseshoe" not in _FOUND:
            test_c06_horseshoe_counts(lambda *a: _null())
        if "ai" not in _FOUND:
            test_c07_antiintegrable_continuation(lambda *a: _null())
        total = 0
        for params, states in _FOUND["horseshoe"] + _FOUND["ai"]:
            box = nonwandering_box(params)
            assert np.all(np.abs(states) <= box.half_widths * (1 + 1e-9)), (params, states)
            total += 1
        info["detail"] = f"{total} orbits"


class _null:
    def __enter__(self):
        return {}

    def __exit__(self, *exc):
        return False


FIG6I = dict(a="0.2", b="-1.4", c="-0.94", d="-1", e="0.5", k=3)


def test_c09_conservative_tori(criterion):
    with criterion(9, "conservative tori at the fig6i parameters") as info:
        a, b, e = (Fraction(FIG6I[x]) for x in "abe")
        assert abs((a * a + b * b) * e) == 1  # det DF = (a^2+b^2) e, exactly
        p = MapParams(*(float(FIG6I[x]) for x in "abcde"), FIG6I["k"])
        assert abs(np.linalg.det(jacobian(p, 0.3))) == pytest.approx(1.0, abs=1e-14)

        p1 = eq.equilibria(p).nontrivial[0]
        orb = iterate(p, p1 + 1e-3, 1_000_000, inflation=2.0)
        assert not orb.escaped, orb.escape_index

        tri = scan.lyapunov(p, p1 + 1e-3, 100_000)
        assert abs(tri.total) < 1e-3, tri

        plane = scan.axis_section(p)
        centre, _ = scan.locate_invariant_circle(p, plane, (0.0, 0.01), stride=4)
        loops = []
        for t in np.linspace(0.004, 0.02, 5):
            s0 = plane.from_plane(centre + np.array([t, 0.0]))
            sec = scan.poincare_section(p, s0, plane, 100_000, stride=4, min_crossings=200)
            assert not sec.escaped
            loops.append(sec.uv)
        nested, gaps = scan.loops_nested(loops, centre)
        info["detail"] = f"Lyapunov sum {tri.total:.1e}, loop gaps {[f'{g:.1e}' for g in gaps]}"
        assert nested


def test_c10_strange_attractor(criterion):
    with criterion(10, "strange attractor at the fig8 parameters") as info:
        p = MapParams(0.01, 1.1, 3.6578, 1.0, 0.01, 3)
        orb = iterate(p, np.array([0.1, 0.1, 0.1]), 1_000_000)
        assert not orb.escaped, orb.escape_index
        assert scan.detect_period(orb.states[-20_000:], tol=1e-6) is None
        tri = scan.lyapunov(p, orb.states[-1], 200_000)
        info["detail"] = f"exponents {np.round(tri.exponents, 4).tolist()}, sum-rule error {tri.sum_rule_error:.1e}"
        assert tri.top > 0.01
        assert tri.sum_rule_error < 1e-3


def test_c11_bifurcation_alignment(criterion):
    with criterion(11, "first period doubling vs c_-1 boundary at a=0.6 b=0.5 d=e=1") as info:
        a, b, d, e, k = 0.6, 0.5, 1.0, 1.0, 3
        targets = []
        for kind in eq.RegionKind:
            try:
                pts = eq.boundary_classify(a, b, d, k, e, kind)
            except eq.EmptyRegion:
                continue
            targets += [bp.c for bp in pts if bp.kind is eq.BoundaryKind.EIGEN_MINUS_ONE]
        cfg = scan.ScanConfig(param="c", start=-0.5, stop=20.0, steps=20_501, seed="origin")
        table = scan.bifurcation_diagram(cfg, MapParams(a, b, 0.0, d, e, k))
        found = scan.first_period_doubling(table)
        info["detail"] = f"c_-1 boundary points {targets}, first doubling {found}, step {cfg.step_size:g}"
        assert cfg.step_size <= 1e-3
        assert targets, f"no eigenvalue -1 boundary at e={e} (first doubling detected: {found})"
        assert found is not None, f"sweep found no period doubling (targets {targets})"
        assert min(abs(found - t) for t in targets) <= cfg.step_size
