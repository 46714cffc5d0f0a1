"""Fixed points, symmetric period-2 points and their stability regions.

Write ``s = a**2 + b**2`` and ``beta = -b c``.  The three boundary curves

    c1(e)    = (1 - e) [(a-1)**2 + b**2]
    c_m1(e)  = -(1 + e) [(a+1)**2 + b**2]
    c_hat(e) = -(s - 1) [(a e - 1)**2 + b**2 e**2]

are the values of ``-P(1)``, ``P(-1)`` and ``alpha_hat`` for the origin's
characteristic polynomial with ``beta`` removed, so every region below is an
interval in ``beta`` for fixed ``e``:

    trivial      max(-c1, c_m1)                 < beta < c_hat
    nontrivial   -(k c1 + c_hat)/(k-1)          < beta < min(-c1, -(k c1 + c_m1)/(k-1))
    symmetric    (k c_m1 - c_hat)/(k-1)         < beta < min((k c_m1 + c1)/(k-1), c_m1)

The inequalities are evaluated in ``beta`` itself; conversion to ``c`` happens
only when reporting (``c = -beta / b``), so the sign of ``b`` never flips an
inequality by accident.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .core import MapParams, char_poly_from_power, jacobian
from .errors import DegenerateParameters, EmptyRegion, StripViolation
from .schur import MonicCubic, cubic_roots, is_stable

DEGENERATE_TOL = 1e-12


class RegionKind(str, enum.Enum):
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"
    SYMMETRIC = "symmetric"


class BoundaryKind(str, enum.Enum):
    HOPF_PAIR = "hopf_pair"
    EIGEN_MINUS_ONE = "eigen_minus_one"
    EIGEN_PLUS_ONE = "eigen_plus_one"


@dataclass(frozen=True)
class RegionCurves:
    a: float
    b: float

    @property
    def s(self) -> float:
        return self.a * self.a + self.b * self.b

    def c1(self, e):
        return (1.0 - e) * ((self.a - 1.0) ** 2 + self.b**2)

    def c_m1(self, e):
        return -(1.0 + e) * ((self.a + 1.0) ** 2 + self.b**2)

    def c_hat(self, e):
        a, b = self.a, self.b
        return -(self.s - 1.0) * ((a * e - 1.0) ** 2 + b * b * e * e)

    def beta_bounds(self, e, kind: RegionKind, k: int):
        """Lower and upper bounds on ``beta = -bc`` for region ``kind``.

        Broadcasts over ``e``; the strip and existence conditions are not
        included.
        """
        kind = RegionKind(kind)
        c1, cm1, ch = self.c1(e), self.c_m1(e), self.c_hat(e)
        if kind is RegionKind.TRIVIAL:
            return np.maximum(-c1, cm1), ch
        if kind is RegionKind.NONTRIVIAL:
            return -(k * c1 + ch) / (k - 1), np.minimum(-c1, -(k * c1 + cm1) / (k - 1))
        return (k * cm1 - ch) / (k - 1), np.minimum((k * cm1 + c1) / (k - 1), cm1)


@dataclass
class EquilibriumSet:
    """Fixed points of ``F``.

    ``radicand`` is the value of ``x1**(k-1)``.  ``degenerate`` marks a
    radicand within 1e-12 of zero, where the nontrivial point merges with the
    origin; ``nontrivial`` is then empty.
    """

    origin: np.ndarray
    nontrivial: list
    radicand: float
    degenerate: bool = False


@dataclass
class Period2Set:
    """Symmetric period-2 orbit ``{p2, -p2}`` (``points`` is ``None`` when absent)."""

    points: Optional[tuple]
    radicand: float
    degenerate: bool = False

    @property
    def exists(self) -> bool:
        return self.points is not None


@dataclass(frozen=True)
class BoundaryPoint:
    e: float
    c: float
    kind: BoundaryKind
    eigenvalues: np.ndarray = field(repr=False)
    verified: bool = True


class CornerPoint(NamedTuple):
    e: float
    c: float
    eigenvalues: np.ndarray


def real_root(r, n: int):
    """Real ``n``-th root; for even ``n`` a non-negative argument is required."""
    r = np.asarray(r, dtype=float)
    if n % 2:
        out = np.sign(r) * np.abs(r) ** (1.0 / n)
    else:
        with np.errstate(invalid="ignore"):
            out = np.where(r >= 0, np.abs(r) ** (1.0 / n), np.nan)
    return float(out) if out.ndim == 0 else out


def fixed_point_radicand(p: MapParams):
    """``x1**(k-1) = (b c - c1(e)) / (b d)``."""
    return (p.b * p.c - RegionCurves(p.a, p.b).c1(p.e)) / (p.b * p.d)


def period2_radicand(p: MapParams):
    """``x2**(k-1) = (b c + c_m1(e)) / (b d)``."""
    return (p.b * p.c + RegionCurves(p.a, p.b).c_m1(p.e)) / (p.b * p.d)


def p1_from_x(p: MapParams, x: float) -> np.ndarray:
    a, b = p.a, p.b
    return np.array([x, (p.rho2 - a) / b * x, ((a - 1.0) ** 2 + b * b) / b * x])


def p2_from_x(p: MapParams, x: float) -> np.ndarray:
    a, b = p.a, p.b
    return np.array([x, (-p.rho2 - a) / b * x, (-((a + 1.0) ** 2) - b * b) / b * x])


def equilibria(p: MapParams) -> EquilibriumSet:
    """Origin plus the nontrivial fixed points.

    Even ``k``: one nontrivial point (real root of odd degree, any sign).
    Odd ``k``: ``{p1, -p1}`` when the radicand is positive, otherwise none.
    """
    r = float(fixed_point_radicand(p))
    origin = np.zeros(3)
    if abs(r) <= DEGENERATE_TOL:
        return EquilibriumSet(origin, [], r, degenerate=True)
    n = p.k - 1
    if n % 2:
        x1 = real_root(r, n)
        pts = [p1_from_x(p, x1)]
    elif r > 0:
        x1 = real_root(r, n)
        pts = [p1_from_x(p, x1), p1_from_x(p, -x1)]
    else:
        pts = []
    return EquilibriumSet(origin, pts, r)


def symmetric_period2(p: MapParams) -> Period2Set:
    """Orbit ``{p2, -p2}`` with ``F(p2) = -p2``; exists only for odd ``k``."""
    r = float(period2_radicand(p))
    if p.k % 2 == 0:
        return Period2Set(None, r)
    if abs(r) <= DEGENERATE_TOL:
        return Period2Set(None, r, degenerate=True)
    if r < 0:
        return Period2Set(None, r)
    x2 = real_root(r, p.k - 1)
    q = p2_from_x(p, x2)
    return Period2Set((q, -q), r)


def _strip_e_interval(s: float) -> tuple[float, float]:
    return (-1.0 / s, 1.0 / s)


def region_nonempty(
    a: float, b: float, kind: RegionKind = RegionKind.TRIVIAL, *, k: int = 3, d: float = 1.0
) -> tuple[bool, Optional[tuple[float, float]]]:
    """Whether some ``(e, c)`` lies in the region, with the witness ``e``-interval.

    The trivial region is non-empty at ``e`` iff the origin's cubic family
    has a stable interval: ``|s e| < 1`` and ``|(s-1) e - 2a| < 2``.  The
    nontrivial and symmetric regions have the same ``e``-slices whenever the
    orbit can exist there; existence rules out odd ``k`` with ``bd < 0``
    (nontrivial) and even ``k`` or ``bd < 0`` (symmetric).
    """
    if b == 0:
        raise ValueError("b must be non-zero")
    kind = RegionKind(kind)
    if kind is RegionKind.NONTRIVIAL and k % 2 == 1 and b * d < 0:
        return False, None
    if kind is RegionKind.SYMMETRIC and (k % 2 == 0 or b * d < 0):
        return False, None
    s = a * a + b * b
    lo, hi = _strip_e_interval(s)
    if s != 1.0:
        r1, r2 = (2 * a - 2) / (s - 1), (2 * a + 2) / (s - 1)
        lo, hi = max(lo, min(r1, r2)), min(hi, max(r1, r2))
    elif abs(a) >= 1.0:
        return False, None
    if lo < hi:
        return True, (lo, hi)
    return False, None


def _orbit_exists(radicand, k: int, kind: RegionKind):
    if kind is RegionKind.TRIVIAL:
        return np.ones_like(radicand, dtype=bool)
    if kind is RegionKind.SYMMETRIC and k % 2 == 0:
        return np.zeros_like(radicand, dtype=bool)
    nz = np.abs(radicand) > DEGENERATE_TOL
    if (k - 1) % 2:
        return nz
    return nz & (radicand > 0)


def region_mask(a, b, d, k, e, c, kind: RegionKind):
    """Vectorised region membership over broadcast arrays ``e`` and ``c``."""
    kind = RegionKind(kind)
    e, c = np.broadcast_arrays(np.asarray(e, dtype=float), np.asarray(c, dtype=float))
    curves = RegionCurves(a, b)
    beta = -b * c
    lo, hi = curves.beta_bounds(e, kind, k)
    inside = (lo < beta) & (beta < hi) & (np.abs(e) * curves.s < 1.0)
    if kind is RegionKind.NONTRIVIAL:
        rad = (b * c - curves.c1(e)) / (b * d)
    elif kind is RegionKind.SYMMETRIC:
        rad = (b * c + curves.c_m1(e)) / (b * d)
    else:
        rad = np.ones_like(e)
    return inside & _orbit_exists(rad, k, kind)


def region_member(p: MapParams, kind: RegionKind) -> bool:
    """Whether ``p`` lies in the stability region of the given orbit kind."""
    return bool(region_mask(p.a, p.b, p.d, p.k, p.e, p.c, kind))


def _orbit_xpow(a, b, d, e, c, kind: RegionKind):
    curves = RegionCurves(a, b)
    if kind is RegionKind.TRIVIAL:
        return np.zeros_like(e)
    if kind is RegionKind.NONTRIVIAL:
        return (b * c - curves.c1(e)) / (b * d)
    return (b * c + curves.c_m1(e)) / (b * d)


def orbit_cubic(a, b, d, k, e, c, kind: RegionKind):
    """Characteristic polynomial of ``DF`` at the orbit of ``kind`` and its existence mask.

    For the symmetric orbit ``DF(-p2) = DF(p2)`` (``x**(k-1)`` is even in
    ``x`` for odd ``k``), so ``DF^2`` at ``p2`` is the square of ``DF(p2)``
    and stability reduces to this cubic.
    """
    kind = RegionKind(kind)
    e, c = np.broadcast_arrays(np.asarray(e, dtype=float), np.asarray(c, dtype=float))
    xpow = _orbit_xpow(a, b, d, e, c, kind)
    exists = _orbit_exists(xpow, k, kind)
    A = -(2.0 * a + e)
    B = a * a + b * b + 2.0 * a * e - b * c + k * b * d * xpow
    D = -(a * a + b * b) * e
    return MonicCubic(A, B, D), exists


def orbit_stability_mask(a, b, d, k, e, c, kind: RegionKind, method: str = "schur"):
    """Linear stability of the orbit computed directly, for cross-validation.

    ``method="schur"`` applies ``is_stable`` to the orbit's cubic;
    ``method="eigen"`` takes the spectral radius of the Jacobian built from
    the orbit's actual ``x``-coordinate.
    """
    kind = RegionKind(kind)
    if method == "schur":
        q, exists = orbit_cubic(a, b, d, k, e, c, kind)
        return np.asarray(is_stable(q)) & exists
    if method != "eigen":
        raise ValueError(f"unknown method {method!r}")
    e, c = np.broadcast_arrays(np.asarray(e, dtype=float), np.asarray(c, dtype=float))
    xpow = _orbit_xpow(a, b, d, e, c, kind)
    exists = _orbit_exists(xpow, k, kind)
    x = np.nan_to_num(real_root(np.where(exists, xpow, 0.0), k - 1))
    J = np.zeros(e.shape + (3, 3))
    J[..., 0, :] = (a, -b, b)
    J[..., 1, :] = (b, a, -a)
    J[..., 2, 0] = c - k * d * x ** (k - 1)
    J[..., 2, 2] = e
    rho = np.abs(np.linalg.eigvals(J)).max(axis=-1)
    return (rho < 1.0) & exists


def boundary_distance(a, b, k, e, c, kind: RegionKind):
    """Distance in ``beta`` from ``-b c`` to the nearest curve bounding ``kind``.

    Includes the strip edges ``|e| s = 1`` (measured in ``e``).
    """
    kind = RegionKind(kind)
    curves = RegionCurves(a, b)
    c1, cm1, ch = curves.c1(e), curves.c_m1(e), curves.c_hat(e)
    beta = -b * np.asarray(c, dtype=float)
    if kind is RegionKind.TRIVIAL:
        cands = [-c1, cm1, ch]
    elif kind is RegionKind.NONTRIVIAL:
        cands = [-(k * c1 + ch) / (k - 1), -c1, -(k * c1 + cm1) / (k - 1)]
    else:
        cands = [(k * cm1 - ch) / (k - 1), (k * cm1 + c1) / (k - 1), cm1]
    dist = np.min(np.abs(np.stack(np.broadcast_arrays(*[beta - v for v in cands]))), axis=0)
    strip = np.abs(np.abs(np.asarray(e)) - 1.0 / curves.s)
    return np.minimum(dist, strip)


_SIDE_KINDS = {
    RegionKind.TRIVIAL: (
        (BoundaryKind.EIGEN_PLUS_ONE, BoundaryKind.EIGEN_MINUS_ONE),
        (BoundaryKind.HOPF_PAIR,),
    ),
    RegionKind.NONTRIVIAL: (
        (BoundaryKind.HOPF_PAIR,),
        (BoundaryKind.EIGEN_PLUS_ONE, BoundaryKind.EIGEN_MINUS_ONE),
    ),
    RegionKind.SYMMETRIC: (
        (BoundaryKind.HOPF_PAIR,),
        (BoundaryKind.EIGEN_PLUS_ONE, BoundaryKind.EIGEN_MINUS_ONE),
    ),
}


def _kind_matches(eigs: np.ndarray, kind: BoundaryKind, tol: float) -> bool:
    if kind is BoundaryKind.EIGEN_PLUS_ONE:
        return bool(np.min(np.abs(eigs - 1.0)) < tol)
    if kind is BoundaryKind.EIGEN_MINUS_ONE:
        return bool(np.min(np.abs(eigs + 1.0)) < tol)
    pair = eigs[np.abs(eigs.imag) > tol]
    return pair.size == 2 and bool(np.all(np.abs(np.abs(pair) - 1.0) < tol))


def boundary_classify(
    a: float,
    b: float,
    d: float,
    k: int,
    e: float,
    kind: RegionKind,
    tol: float = 1e-8,
) -> list[BoundaryPoint]:
    """The two ``c``-values bounding the region at this ``e``, classified.

    Each side is labelled by the curve that attains it (``c_hat`` gives a
    unit-modulus complex pair, ``c_m1`` an eigenvalue ``-1``, ``c1`` an
    eigenvalue ``+1``); the label is then checked against the eigenvalues of
    ``DF`` at the orbit and the outcome stored in ``verified``.  Points are
    returned in increasing ``c``.
    """
    kind = RegionKind(kind)
    s = a * a + b * b
    if abs(e) * s >= 1.0:
        raise StripViolation(f"|e|(a^2+b^2) = {abs(e) * s:g} >= 1")
    ok, _ = region_nonempty(a, b, kind, k=k, d=d)
    curves = RegionCurves(a, b)
    lo, hi = (float(v) for v in curves.beta_bounds(e, kind, k))
    if not ok or not lo < hi:
        raise EmptyRegion(f"{kind.value} region is empty at e={e}")

    c1, cm1, ch = curves.c1(e), curves.c_m1(e), curves.c_hat(e)
    if kind is RegionKind.TRIVIAL:
        lo_terms, hi_terms = (-c1, cm1), (ch,)
    elif kind is RegionKind.NONTRIVIAL:
        lo_terms, hi_terms = (-(k * c1 + ch) / (k - 1),), (-c1, -(k * c1 + cm1) / (k - 1))
    else:
        lo_terms, hi_terms = ((k * cm1 - ch) / (k - 1),), ((k * cm1 + c1) / (k - 1), cm1)
    lo_kinds, hi_kinds = _SIDE_KINDS[kind]
    lo_kind = lo_kinds[int(np.argmax(lo_terms))]
    hi_kind = hi_kinds[int(np.argmin(hi_terms))]

    out = []
    for beta, bkind in ((lo, lo_kind), (hi, hi_kind)):
        c = -beta / b
        q, _ = orbit_cubic(a, b, d, k, e, c, kind)
        q = MonicCubic(*(float(v) for v in q))
        eigs = _orbit_eigenvalues(MapParams(a, b, c, d, e, k), q, kind)
        out.append(BoundaryPoint(float(e), float(c), bkind, eigs, _kind_matches(eigs, bkind, tol)))
    out.sort(key=lambda bp: bp.c)
    return out


def _orbit_eigenvalues(p: MapParams, q: MonicCubic, kind: RegionKind) -> np.ndarray:
    """Eigenvalues of ``DF`` at the orbit point, from the Jacobian itself.

    On the fold sides the orbit merges with the origin, so a zero or
    slightly negative radicand is clamped to the origin.
    """
    if kind is RegionKind.TRIVIAL:
        x = 0.0
    else:
        rad = fixed_point_radicand(p) if kind is RegionKind.NONTRIVIAL else period2_radicand(p)
        if (p.k - 1) % 2 == 0 and rad < 0:
            rad = 0.0
        x = real_root(rad, p.k - 1)
    return np.linalg.eigvals(jacobian(p, x))


def origin_eigenvalues(a: float, b: float, c: float, e: float, k: int = 3, d: float = 1.0) -> np.ndarray:
    return cubic_roots(char_poly_from_power(MapParams(a, b, c, d, e, k), 0.0))


def corner_points(a: float, b: float) -> dict[str, Optional[CornerPoint]]:
    """Corners of the trivial region where two boundary curves meet.

    ``M'`` and ``N'`` sit on the strip edges ``e = +-1/s`` of the ``c1`` and
    ``c_m1`` lines; ``M''`` and ``N''`` are where the same lines are tangent
    to ``c_hat`` (a double eigenvalue at ``+1`` resp. ``-1``).  For ``s = 1``
    the primed corners collapse onto ``(+-1, 0)`` and the double-primed ones
    do not exist (returned as ``None``).
    """
    if b == 0:
        raise ValueError("b must be non-zero")
    curves = RegionCurves(a, b)
    s = curves.s

    def on_c1(e):
        c = curves.c1(e) / b
        return CornerPoint(float(e), float(c), origin_eigenvalues(a, b, c, e))

    def on_cm1(e):
        c = curves.c_m1(e) / (-b)
        return CornerPoint(float(e), float(c), origin_eigenvalues(a, b, c, e))

    out: dict[str, Optional[CornerPoint]] = {"M'": on_c1(1.0 / s), "N'": on_cm1(-1.0 / s)}
    if s == 1.0:
        out["M''"] = out["N''"] = None
    else:
        out["M''"] = on_c1((2 * a - 2) / (s - 1))
        out["N''"] = on_cm1((2 * a + 2) / (s - 1))
    return out


def resonance_parameters(a: float, b: float) -> dict[str, float]:
    """Values of ``e`` where the Hopf pair on ``c_hat`` is a 1:4 or 1:3 resonance."""
    s = a * a + b * b
    if s == 1.0:
        raise DegenerateParameters("resonance values are undefined when a^2+b^2 == 1")
    return {"e_1to4": 2 * a / (s - 1), "e_1to3": (2 * a + 1) / (s - 1)}
