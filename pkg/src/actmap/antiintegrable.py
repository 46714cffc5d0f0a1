"""Orbits as solutions of a scalar difference equation, and their continuation
from an anti-integrable limit.

Eliminating ``y`` and ``z`` from the orbit equations of ``F`` leaves a
fourth-order recurrence in ``x`` alone (``s = a**2 + b**2``):

    R_n = d x_{n+1}**k - (s e / b) x_n + ((s - b c + 2 a e) / b) x_{n+1}
          - ((2a + e) / b) x_{n+2} + (1 / b) x_{n+3} = 0.

A periodic ``x``-window with zero residual lifts to a periodic orbit via

    y_n = (s / b) x_{n-1} - (a / b) x_n
    z_n = (s / b) x_{n-1} - (2a / b) x_n + (1 / b) x_{n+1}.

The lift satisfies the first two components of the map identically; the
third component is off by exactly ``R_{n-1}``.

Two parameter routes send the equation to a degenerate limit in which it
decouples into ``psi(x_{n+1}) = 0`` for a polynomial ``psi``:

``c_route``
    ``c = 1/lam``, ``d = ratio/lam``.  ``lam * R_n`` tends to
    ``ratio x**k - x``, whose zeros are those of ``x (x**(k-1) - 1/ratio)``.
``b_route``
    ``d = 1/lam``, ``b = ratio/lam`` with ``e`` kept as a small explicit
    parameter.  With ``r = ratio``,

        lam * R_n = x_{n+1}**k + (r - lam c + lam**2 (a**2 + 2ae)/r) x_{n+1}
                    - e (r + a**2 lam**2 / r) x_n
                    - (lam**2 (2a + e)/r) x_{n+2} + (lam**2 / r) x_{n+3},

    which tends to ``x (x**(k-1) + r)`` as ``lam, e -> 0``.

In both cases the limit is ``psi_A(x) = x (x**(k-1) - A)`` with
``A = 1/ratio`` (c_route) or ``A = -ratio`` (b_route).  Simple zeros of
``psi_A`` label symbols; Newton's method on ``lam * R`` continues each
periodic symbol word to a genuine orbit for small ``lam``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._parallel import pmap
from .core import MapParams, evaluate, nonwandering_box
from .errors import ContinuationFailed, ResidualTooLarge

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
DIVERGENCE_NORM = 1e6
LAMBDA_CEILING = 0.05
DISTINCT_TOL = 1e-6


class Route(str, enum.Enum):
    C_ROUTE = "c_route"
    B_ROUTE = "b_route"


@dataclass(frozen=True)
class RouteSpec:
    """Parameter route toward the anti-integrable limit.

    ``ratio`` is ``d/c`` for the c-route and ``b/d`` for the b-route;
    ``lam`` is the small parameter (``1/c`` resp. ``1/d``).
    """

    route: Route
    ratio: float
    lam: float
    ceiling: float = LAMBDA_CEILING

    def __post_init__(self):
        object.__setattr__(self, "route", Route(self.route))
        if self.ratio == 0 or not np.isfinite(self.ratio):
            raise ValueError("route ratio must be finite and non-zero")
        if self.lam == 0:
            raise ValueError("lam = 0 is the anti-integrable limit itself; no map corresponds to it")
        if abs(self.lam) > self.ceiling:
            raise ValueError(f"|lam| = {abs(self.lam):g} exceeds the ceiling {self.ceiling:g}")

    @property
    def limit_A(self) -> float:
        """``A`` in the limit function ``x (x**(k-1) - A)``."""
        if self.route is Route.C_ROUTE:
            return 1.0 / self.ratio
        return -self.ratio

    def routed(self, base: MapParams) -> MapParams:
        """``base`` with the routed parameters replaced."""
        if self.route is Route.C_ROUTE:
            return base.with_(c=1.0 / self.lam, d=self.ratio / self.lam)
        return base.with_(d=1.0 / self.lam, b=self.ratio / self.lam)


@dataclass
class Continuation:
    """Outcome of continuing one symbol word."""

    word: tuple
    x: np.ndarray
    params: MapParams
    iterations: int
    residual_norm: float
    orbit: Optional[np.ndarray] = field(default=None, repr=False)


def _periodic(w, shift: int) -> np.ndarray:
    return np.roll(w, -shift)


def residual(p: MapParams, w) -> np.ndarray:
    """Difference-equation residuals ``R_n`` of a periodic window."""
    x = np.asarray(w, dtype=float)
    a, b, c, d, e, k = p.a, p.b, p.c, p.d, p.e, p.k
    s = p.rho2
    x1, x2, x3 = _periodic(x, 1), _periodic(x, 2), _periodic(x, 3)
    return (
        d * x1**k
        - (s * e / b) * x
        + ((s - b * c + 2 * a * e) / b) * x1
        - ((2 * a + e) / b) * x2
        + x3 / b
    )


def residual_jacobian(p: MapParams, w) -> np.ndarray:
    """Dense ``dR_n/dx_m`` for a periodic window (wrapped band of width 4)."""
    x = np.asarray(w, dtype=float)
    n = x.size
    a, b, c, d, e, k = p.a, p.b, p.c, p.d, p.e, p.k
    s = p.rho2
    rows = np.arange(n)
    J = np.zeros((n, n))
    x1 = _periodic(x, 1)
    coeffs = (
        np.full(n, -s * e / b),
        k * d * x1 ** (k - 1) + (s - b * c + 2 * a * e) / b,
        np.full(n, -(2 * a + e) / b),
        np.full(n, 1.0 / b),
    )
    for j, col in enumerate(coeffs):
        np.add.at(J, (rows, (rows + j) % n), col)
    return J


def lift(p: MapParams, w) -> np.ndarray:
    """Phase-space states ``(x_n, y_n, z_n)`` built from a periodic window, no checks."""
    x = np.asarray(w, dtype=float)
    a, b = p.a, p.b
    s = p.rho2
    xm, xp = _periodic(x, -1), _periodic(x, 1)
    y = (s / b) * xm - (a / b) * x
    z = (s / b) * xm - (2 * a / b) * x + xp / b
    return np.stack([x, y, z], axis=-1)


def lift_orbit(w, p: MapParams, tol: float = 1e-9) -> np.ndarray:
    """Lift a periodic window to an orbit of ``F``; refuses if ``max|R| > tol``."""
    r = np.max(np.abs(residual(p, w))) if np.size(w) else 0.0
    if not r <= tol:
        raise ResidualTooLarge(f"window residual {r:.3e} exceeds {tol:.1e}")
    return lift(p, w)


def orbit_defect(p: MapParams, orbit) -> float:
    """``max_n |F(P_n) - P_{n+1}|`` around a periodic orbit."""
    P = np.asarray(orbit, dtype=float)
    return float(np.max(np.abs(evaluate(p, P) - np.roll(P, -1, axis=0))))


def alphabet_size(k: int) -> int:
    return 2 if k % 2 == 0 else 3


def limit_zeros(k: int, A: float) -> np.ndarray:
    """Simple zeros of ``x (x**(k-1) - A)`` in symbol order.

    Symbol 0 is the zero at the origin, symbol 1 the real root
    ``A**(1/(k-1))`` (positive branch for odd ``k``), symbol 2 its negative
    for odd ``k``.
    """
    if A == 0:
        raise ValueError("A = 0 gives a multiple zero at the origin")
    n = k - 1
    if n % 2:
        return np.array([0.0, np.sign(A) * abs(A) ** (1.0 / n)])
    if A < 0:
        raise ValueError(f"x**{n} = {A} has no real root; need A > 0 for odd k")
    r = A ** (1.0 / n)
    return np.array([0.0, r, -r])


def seed(word: Sequence[int], route: Union[RouteSpec, float], k: int) -> np.ndarray:
    """Anti-integrable seed window: each symbol replaced by its limit zero."""
    A = route.limit_A if isinstance(route, RouteSpec) else float(route)
    zeros = limit_zeros(k, A)
    idx = np.asarray(word, dtype=int)
    if idx.size == 0:
        raise ValueError("empty word")
    if idx.min() < 0 or idx.max() >= zeros.size:
        raise ValueError(f"word {tuple(word)} uses symbols outside 0..{zeros.size - 1} for k={k}")
    return zeros[idx].copy()


def newton_window(
    p: MapParams,
    x0,
    scale: float = 1.0,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    diverge: float = DIVERGENCE_NORM,
):
    """Solve ``scale * R(x) = 0`` from ``x0``; returns ``(x, iterations, norm)``."""
    x = np.array(x0, dtype=float)
    hist = []
    for it in range(max_iter + 1):
        r = scale * residual(p, x)
        norm = float(np.max(np.abs(r)))
        hist.append(norm)
        if not np.isfinite(norm) or norm > diverge:
            raise ContinuationFailed("Newton diverged", {"history": hist, "x": x})
        if norm < tol:
            return x, it, norm
        if it == max_iter:
            break
        J = scale * residual_jacobian(p, x)
        try:
            x = x - np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            raise ContinuationFailed("singular Newton matrix", {"history": hist, "x": x}) from None
    raise ContinuationFailed("Newton did not reach tolerance", {"history": hist, "x": x})


def continue_orbit(word: Sequence[int], route: RouteSpec, base: MapParams) -> Continuation:
    """Continue a periodic symbol word from the limit to ``route.lam``.

    Newton runs on ``lam * R`` for the routed parameters, started from the
    seed.  The lifted orbit is attached when it passes the map check.
    """
    word = tuple(int(s) for s in word)
    p = route.routed(base)
    x0 = seed(word, route, p.k)
    try:
        x, it, norm = newton_window(p, x0, scale=route.lam)
    except ContinuationFailed as exc:
        exc.diagnostics["word"] = word
        raise
    orbit = lift_orbit(x, p, tol=max(1e-9, 10 * NEWTON_TOL / abs(route.lam)))
    return Continuation(word, x, p, it, norm, orbit)


def all_words(symbols: int, n: int):
    return list(itertools.product(range(symbols), repeat=n))


def pairwise_min_distance(windows: Sequence[np.ndarray]) -> float:
    """Smallest sup-distance between two distinct windows (``inf`` if fewer than two)."""
    if len(windows) < 2:
        return float("inf")
    W = np.asarray(windows, dtype=float)
    W = W.reshape(len(W), -1)
    best = float("inf")
    for i in range(len(W) - 1):
        best = min(best, float(np.min(np.max(np.abs(W[i + 1 :] - W[i]), axis=1))))
    return best


@dataclass
class WitnessLevel:
    n: int
    expected: int
    converged: int
    distinct: bool
    min_distance: float
    max_defect: float
    in_box: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.converged == self.expected
            and self.distinct
            and self.max_defect <= 1e-9
            and self.in_box
            and not self.failures
        )


@dataclass
class WitnessReport:
    route: RouteSpec
    params: MapParams
    levels: list

    @property
    def counts(self) -> list[int]:
        return [lv.converged for lv in self.levels]

    @property
    def ok(self) -> bool:
        return all(lv.ok for lv in self.levels)

    def to_dict(self) -> dict:
        return {
            "route": self.route.route.value,
            "ratio": self.route.ratio,
            "lam": self.route.lam,
            "params": self.params.as_dict(),
            "ok": self.ok,
            "levels": [
                {
                    "n": lv.n,
                    "expected": lv.expected,
                    "converged": lv.converged,
                    "distinct": lv.distinct,
                    "min_distance": lv.min_distance,
                    "max_defect": lv.max_defect,
                    "in_box": lv.in_box,
                    "failures": lv.failures,
                }
                for lv in self.levels
            ],
        }


def conjugacy_witness(route: RouteSpec, base: MapParams, n_max: int, workers: Optional[int] = None) -> WitnessReport:
    """Continue every word of period ``1..n_max`` and check the full-shift count.

    A level passes when all ``s**n`` words converge, the windows are pairwise
    more than 1e-6 apart, every lift satisfies the map to 1e-9 and lies in
    the nonwandering box.
    """
    if not 1 <= n_max <= 6:
        raise ValueError("n_max must be in 1..6")
    p = route.routed(base)
    s = alphabet_size(p.k)
    box = nonwandering_box(p)

    def run(word):
        try:
            return continue_orbit(word, route, base)
        except (ContinuationFailed, ResidualTooLarge) as exc:
            return exc

    levels = []
    for n in range(1, n_max + 1):
        words = all_words(s, n)
        results = pmap(run, words, workers)
        good = [r for r in results if isinstance(r, Continuation)]
        failures = [
            {"word": list(w), "error": str(r)} for w, r in zip(words, results) if not isinstance(r, Continuation)
        ]
        dmin = pairwise_min_distance([r.x for r in good])
        defect = max((orbit_defect(p, r.orbit) for r in good), default=0.0)
        in_box = all(bool(np.all(box.contains(r.orbit))) for r in good)
        levels.append(WitnessLevel(n, s**n, len(good), dmin > DISTINCT_TOL, dmin, defect, in_box, failures))
    return WitnessReport(route, p, levels)
