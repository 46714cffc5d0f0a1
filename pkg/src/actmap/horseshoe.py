"""Horseshoe of the ACT map near ``a = e = 0``.

At ``a = e = 0`` the map is ``(x, y, z) -> (-b(y - z), b x, c x - d x**k)``
and the first coordinate obeys

    x_{n+2} = g(x_n),    g(x) = -b f(x),    f(x) = d x**k + (b - c) x,

so the ``x``-dynamics are two interleaved copies of the interval map ``g``.
When ``g`` has ``s`` full monotone branches over an invariant interval (two
for even ``k``, three for odd ``k``), every period-``n`` symbol word
``(s_0, ..., s_{n-1})`` picks one periodic solution of
``x_j = g_{s_j}^{-1}(x_{j+2})``, giving ``s**n`` period-``n`` points of ``F``.

This module checks the horseshoe parameter conditions, reports the strip
geometry and hyperbolicity quantities, and enumerates periodic orbits
by inverse-branch contraction followed by multiple-shooting Newton on ``F``.
Small ``a, e`` are reached by a homotopy from ``a = e = 0``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import pmap
from .antiintegrable import lift, pairwise_min_distance
from .core import MapParams, evaluate, jacobian, nonwandering_box
from .errors import ContinuationFailed, HypothesisNotMet, OutsideSlabs

DEDUP_TOL = 1e-8
NEWTON_TOL = 1e-12
MAX_PERIOD = 8


class Case(str, enum.Enum):
    II1 = "ii1"
    II2 = "ii2"
    II3 = "ii3"
    II4 = "ii4"
    NONE = "none"


@dataclass(frozen=True)
class HorseshoeCase:
    condition_i: bool
    case: Case
    symbol_count: int

    @property
    def holds(self) -> bool:
        return self.condition_i and self.case is not Case.NONE


def classify_case(p: MapParams) -> HorseshoeCase:
    """Evaluate condition (i) ``|b| > 1, |b - c| > 1`` and which of (ii1)-(ii4) holds.

    ``a`` and ``e`` are ignored.
    """
    b, c, d, k = p.b, p.c, p.d, p.k
    cond_i = abs(b) > 1 and abs(b - c) > 1
    base = k * b * b / (k - 1)
    root = k ** (1.0 / (k - 1))
    bc = b * c
    if k % 2 == 0:
        if bc > base:
            case = Case.II1
        elif bc < base * (1 - root):
            case = Case.II2
        else:
            case = Case.NONE
        symbols = 2
    else:
        if b * d > 0 and bc > base * (1 + root):
            case = Case.II3
        elif b * d < 0 and bc < base * (1 - root):
            case = Case.II4
        else:
            case = Case.NONE
        symbols = 3
    return HorseshoeCase(cond_i, case, symbols)


def _real_root(r: float, n: int) -> float:
    if n % 2:
        return float(np.sign(r) * abs(r) ** (1.0 / n))
    if r < 0:
        return float("nan")
    return float(r ** (1.0 / n))


def _poly_f(p: MapParams, shift: float = 0.0) -> np.ndarray:
    """Coefficients (highest first) of ``d x**k + (b - c) x - shift``."""
    coef = np.zeros(p.k + 1)
    coef[0] = p.d
    coef[-2] = p.b - p.c
    coef[-1] = -shift
    return coef


def _real_roots(coef: np.ndarray, imag_tol: float = 1e-9) -> np.ndarray:
    r = np.roots(coef)
    scale = max(1.0, float(np.max(np.abs(r)))) if r.size else 1.0
    return np.sort(r[np.abs(r.imag) <= imag_tol * scale].real)


@dataclass
class StripGeometry:
    """Quantities of the strip construction at ``a = e = 0``.

    ``slab_roots`` are the real roots of ``f(x) = 0`` and
    ``f(x) = r_sign * r_star``, sorted; consecutive pairs bound the slabs.
    ``distinct_roots`` is false when the two equations do not give
    ``2 * symbol_count`` well separated real roots.
    """

    y_star: float
    z_star: float
    r_star: float
    slab_roots: np.ndarray
    r_sign: int
    distinct_roots: bool
    ordering_ok: Optional[bool] = None

    @property
    def slabs(self) -> np.ndarray:
        return self.slab_roots.reshape(-1, 2)

    def surface_z(self, y, p: MapParams):
        """The image surface ``z = (c/b) y - (d/b**k) y**k``."""
        y = np.asarray(y, dtype=float)
        return (p.c / p.b) * y - (p.d / p.b**p.k) * y**p.k


def strip_geometry(p: MapParams, root_sep: float = 1e-9) -> StripGeometry:
    """Extreme line ``(y*, z*)``, intercept ``r*`` and the slab roots.

    Of the two sign pairings ``f = +r*`` and ``f = -r*`` the one that yields
    ``2 s`` distinct real roots is used (``+`` is tried first).
    ``ordering_ok`` checks ``r* > y* > 0``, ``z* > 0`` and ``z* > y*`` in the
    case ``k`` even, ``d > 0``, ``bc > 0``; it is ``None`` elsewhere.
    """
    b, c, d, k = p.b, p.c, p.d, p.k
    n = k - 1
    y_star = _real_root(b**n * c / (k * d), n)
    z_star = (n * c / (k * b)) * y_star
    r_star = _real_root(b**n * c / d, n)
    want = 2 * (2 if k % 2 == 0 else 3)
    zeros = _real_roots(_poly_f(p))
    roots, sign, ok = None, 1, False
    if np.isfinite(r_star):
        for sgn in (1, -1):
            cand = np.sort(np.concatenate([zeros, _real_roots(_poly_f(p, sgn * r_star))]))
            good = cand.size == want and bool(np.all(np.diff(cand) > root_sep * max(1.0, np.abs(cand).max())))
            if roots is None or good:
                roots, sign, ok = cand, sgn, good
            if good:
                break
    else:
        roots = zeros
    ordering = None
    if k % 2 == 0 and d > 0 and b * c > 0:
        ordering = bool(r_star > y_star > 0 and z_star > 0 and z_star > y_star)
    return StripGeometry(y_star, z_star, r_star, roots, sign, ok, ordering)


@dataclass
class HyperbolicityReport:
    """Sup-norms of the block quantities in the cone conditions over the slabs.

    In the coordinates ``u = y - z, v = y + z`` the derivative splits as
    ``dG/dx = [[0, -b], [f', 0]]``, ``dH/dx = [b + c - k d x**(k-1), 0]``
    and ``dG/dv = dH/dv = 0``, so only the first condition has content.
    """

    inv_dGdx: float
    dHdv: float
    dHdx_inv_dGdx: float
    dGdv: float
    margin: float
    conditions: tuple
    slabs: np.ndarray = field(repr=False)

    @property
    def hyperbolic(self) -> bool:
        return all(self.conditions)


def _slab_grid(slabs: np.ndarray, inflation: float, m: int = 4001) -> np.ndarray:
    pts = [np.linspace(lo - inflation, hi + inflation, m) for lo, hi in slabs]
    return np.concatenate(pts)


def hyperbolicity_margins(
    p: MapParams,
    slab_inflation: Optional[float] = None,
    slabs: Optional[np.ndarray] = None,
) -> HyperbolicityReport:
    """Evaluate the four cone conditions on (inflated) slabs.

    ``slabs`` defaults to the strip-geometry slabs; pass
    ``invariant_slabs(p)`` to measure on the slabs that actually carry the
    invariant set.  ``slab_inflation`` defaults to ``1e-3`` of the slabs'
    total span.  Sup-norms are taken on a dense grid that includes the slab
    endpoints; the critical points of ``f'`` are added explicitly.
    """
    if slabs is None:
        slabs = strip_geometry(p).slabs
    slabs = np.asarray(slabs, dtype=float).reshape(-1, 2)
    if slab_inflation is None:
        slab_inflation = 1e-3 * (slabs.max() - slabs.min())
    x = _slab_grid(slabs, slab_inflation)
    # f'' = k (k-1) d x**(k-2) vanishes only at 0 (k > 2)
    if p.k > 2 and np.any((slabs[:, 0] - slab_inflation <= 0) & (0 <= slabs[:, 1] + slab_inflation)):
        x = np.append(x, 0.0)
    fprime = p.b - p.c + p.k * p.d * x ** (p.k - 1)
    h = p.b + p.c - p.k * p.d * x ** (p.k - 1)
    margin = float(np.min(np.abs(fprime)))
    with np.errstate(divide="ignore"):
        inv_g = max(1.0 / abs(p.b), 1.0 / margin if margin > 0 else np.inf)
        hg = float(np.max(np.abs(h / fprime))) if margin > 0 else np.inf
    hv = gv = 0.0
    c6 = inv_g < 1
    c7 = hv < 1
    c8 = 1 - inv_g * hv > 2 * np.sqrt(hg * gv * inv_g) if np.isfinite(hg) else False
    c9 = (1 - inv_g) * (1 - hv) > hg * gv if np.isfinite(hg) else False
    return HyperbolicityReport(inv_g, hv, hg, gv, margin, (c6, c7, bool(c8), bool(c9)), slabs)


def g_map(p: MapParams, x):
    """Second-iterate ``x``-map ``g(x) = -b (d x**k + (b - c) x)`` at ``a = e = 0``."""
    x = np.asarray(x, dtype=float)
    return -p.b * (p.d * x**p.k + (p.b - p.c) * x)


def g_branch_preimages(p: MapParams, y: float) -> np.ndarray:
    """Real solutions of ``g(x) = y``, ascending."""
    return _real_roots(_poly_f(p, -y / p.b))


def invariant_slabs(p: MapParams, max_iter: int = 200, tol: float = 1e-13) -> np.ndarray:
    """Branch intervals ``g_s^{-1}(I)`` of the invariant hull ``I`` of ``g``.

    ``I`` is the fixed point of ``I <- hull(union_s g_s^{-1}(I))`` started
    from ``{0}``; returns an ``(s, 2)`` array of ascending slabs.
    """
    s = classify_case(p).symbol_count
    lo = hi = 0.0
    slabs = None
    for _ in range(max_iter):
        pl, ph = g_branch_preimages(p, lo), g_branch_preimages(p, hi)
        if pl.size != s or ph.size != s:
            raise HypothesisNotMet(f"g does not have {s} full branches over [{lo:g}, {hi:g}]")
        slabs = np.sort(np.stack([pl, ph], axis=1), axis=1)
        nlo, nhi = slabs.min(), slabs.max()
        if abs(nlo - lo) < tol and abs(nhi - hi) < tol:
            break
        lo, hi = nlo, nhi
    if np.any(slabs[1:, 0] <= slabs[:-1, 1]):
        raise HypothesisNotMet("branch slabs overlap; no horseshoe")
    return slabs


def itinerary(
    p: MapParams,
    orbit,
    slabs: Optional[np.ndarray] = None,
    inflation: float = 0.0,
    nearest: bool = False,
) -> tuple:
    """Slab index of each state's ``x``.

    With ``nearest=False`` a state outside every (inflated) slab raises
    ``OutsideSlabs`` carrying its index; with ``nearest=True`` the closest
    slab is reported instead.
    """
    if slabs is None:
        slabs = invariant_slabs(p)
    slabs = np.asarray(slabs, dtype=float)
    xs = np.asarray(orbit, dtype=float)[:, 0]
    out = []
    for i, x in enumerate(xs):
        dist = np.maximum(slabs[:, 0] - x, x - slabs[:, 1]).clip(min=0.0)
        j = int(np.argmin(dist))
        if dist[j] > inflation and not nearest:
            raise OutsideSlabs(f"state {i} with x={x:.6g} lies outside every slab", i)
        out.append(j)
    return tuple(out)


def _contract_word(p: MapParams, word: Sequence[int], tol: float = 1e-15, max_iter: int = 500) -> np.ndarray:
    """Periodic ``x``-window with ``x_j = g_{s_j}^{-1}(x_{j+2})`` by fixed-point sweeps."""
    n = len(word)
    x = np.zeros(n)
    for _ in range(max_iter):
        old = x.copy()
        for j in reversed(range(n)):
            pre = g_branch_preimages(p, x[(j + 2) % n])
            if pre.size <= word[j]:
                raise ContinuationFailed("branch preimage missing", {"word": tuple(word), "j": j})
            x[j] = pre[word[j]]
        if np.max(np.abs(x - old)) < tol:
            break
    return x


def shooting_newton(p: MapParams, P0, tol: float = NEWTON_TOL, max_iter: int = 50) -> tuple[np.ndarray, int]:
    """Solve ``F(P_j) = P_{j+1 mod n}`` for all ``j`` by Newton in ``3n`` unknowns."""
    P = np.array(P0, dtype=float)
    n = len(P)
    eye = np.eye(3)
    for it in range(max_iter + 1):
        R = evaluate(p, P) - np.roll(P, -1, axis=0)
        norm = float(np.max(np.abs(R)))
        if norm < tol:
            return P, it
        if it == max_iter or not np.isfinite(norm):
            break
        J = np.zeros((3 * n, 3 * n))
        Js = jacobian(p, P[:, 0])
        for j in range(n):
            J[3 * j : 3 * j + 3, 3 * j : 3 * j + 3] += Js[j]
            jn = (j + 1) % n
            J[3 * j : 3 * j + 3, 3 * jn : 3 * jn + 3] -= eye
        try:
            P = P - np.linalg.solve(J, R.ravel()).reshape(n, 3)
        except np.linalg.LinAlgError:
            break
    raise ContinuationFailed("shooting Newton failed", {"residual": norm, "iterations": it})


@dataclass
class PeriodicOrbit:
    word: tuple
    states: np.ndarray = field(repr=False)
    iterations: int = 0


def _solve_word(p: MapParams, word: tuple, ramp: int) -> PeriodicOrbit:
    base = p.with_(a=0.0, e=0.0)
    x = _contract_word(base, word)
    P, it = shooting_newton(base, lift(base, x))
    if p.a != 0.0 or p.e != 0.0:
        for t in np.linspace(0.0, 1.0, ramp + 1)[1:]:
            P, it2 = shooting_newton(p.with_(a=t * p.a, e=t * p.e), P)
            it += it2
    return PeriodicOrbit(word, P, it)


@dataclass
class EnumerationResult:
    n: int
    expected: int
    orbits: list
    failures: list
    min_distance: float

    @property
    def count(self) -> int:
        return len(self.orbits)

    @property
    def distinct(self) -> bool:
        return self.min_distance > DEDUP_TOL

    @property
    def ok(self) -> bool:
        return self.count == self.expected and self.distinct and not self.failures


def enumerate_periodic(
    p: MapParams,
    n: int,
    ramp: int = 4,
    force: bool = False,
    workers: Optional[int] = None,
) -> EnumerationResult:
    """Find one period-``n`` orbit of ``F`` per symbol word.

    Words are solved at ``a = e = 0`` (branch contraction, lift, shooting
    Newton) and carried to the requested ``a, e`` through ``ramp`` homotopy
    steps.  Distinctness is the sup-distance between whole orbits.
    """
    if not 1 <= n <= MAX_PERIOD:
        raise ValueError(f"period must be in 1..{MAX_PERIOD}")
    hc = classify_case(p)
    if not hc.holds and not force:
        raise HypothesisNotMet(f"horseshoe conditions fail: condition_i={hc.condition_i}, case={hc.case.value}")
    words = list(itertools.product(range(hc.symbol_count), repeat=n))

    def run(word):
        try:
            return _solve_word(p, word, ramp)
        except ContinuationFailed as exc:
            return exc

    results = pmap(run, words, workers)
    orbits = [r for r in results if isinstance(r, PeriodicOrbit)]
    failures = [{"word": list(w), "error": str(r)} for w, r in zip(words, results) if not isinstance(r, PeriodicOrbit)]
    dmin = pairwise_min_distance([o.states for o in orbits])
    return EnumerationResult(n, hc.symbol_count**n, orbits, failures, dmin)


def horseshoe_report(p: MapParams, n_max: int = 6, perturb: float = 1e-2) -> dict:
    """Everything the CLI emits: case, geometry, margins, per-``n`` counts."""
    hc = classify_case(p)
    geo = strip_geometry(p)
    hyp = hyperbolicity_margins(p, slab_inflation=0.0)
    out = {
        "params": p.as_dict(),
        "condition_i": hc.condition_i,
        "case": hc.case.value,
        "symbol_count": hc.symbol_count,
        "geometry": {
            "y_star": geo.y_star,
            "z_star": geo.z_star,
            "r_star": geo.r_star,
            "r_sign": geo.r_sign,
            "slab_roots": geo.slab_roots.tolist(),
            "distinct_roots": geo.distinct_roots,
            "ordering_ok": geo.ordering_ok,
        },
        "hyperbolicity": {
            "inv_dGdx": hyp.inv_dGdx,
            "dHdx_inv_dGdx": hyp.dHdx_inv_dGdx,
            "margin": hyp.margin,
            "conditions": list(hyp.conditions),
        },
        "counts": [],
        "failures": [],
    }
    if not hc.holds:
        out["failures"].append("hypotheses not met")
        return out
    inv = invariant_slabs(p)
    out["invariant_slabs"] = inv.tolist()
    out["invariant_margin"] = hyperbolicity_margins(p, slab_inflation=0.0, slabs=inv).margin
    box = nonwandering_box(p)
    pert = p.with_(a=perturb, e=perturb) if perturb else None
    for n in range(1, n_max + 1):
        res = enumerate_periodic(p, n)
        entry = {"n": n, "expected": res.expected, "count": res.count, "distinct": res.distinct}
        entry["in_box"] = all(bool(np.all(box.contains(o.states))) for o in res.orbits)
        if pert is not None:
            rp = enumerate_periodic(pert, n)
            entry["count_perturbed"] = rp.count
            entry["distinct_perturbed"] = rp.distinct
        out["counts"].append(entry)
        out["failures"].extend(res.failures)
    return out
