"""The Arneodo-Coullet-Tresser map family.

    F(x, y, z) = (a x - b (y - z),  b x + a (y - z),  c x - d x**k + e z)

with real ``a, b, c, d, e`` (``b d != 0``) and integer ``k >= 2``.  The
Jacobian depends on ``x`` only and its determinant is the constant
``(a**2 + b**2) e``; for ``e != 0`` the map is a polynomial automorphism with
an explicit polynomial inverse.

States are numpy arrays with a trailing axis of length 3.  ``evaluate`` and
``jacobian`` broadcast over leading axes; ``iterate`` is a scalar loop that
stops at the first state leaving an escape box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import NonFiniteResult, NotInvertible
from .schur import MonicCubic

MAX_EXPONENT = 16


@dataclass(frozen=True)
class MapParams:
    a: float
    b: float
    c: float
    d: float
    e: float
    k: int = 3

    def __post_init__(self):
        for name in "abcde":
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v}")
        if self.b == 0 or self.d == 0:
            raise ValueError("parameters require b*d != 0")
        if int(self.k) != self.k or not 2 <= self.k <= MAX_EXPONENT:
            raise ValueError(f"exponent k must be an integer in [2, {MAX_EXPONENT}], got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def rho2(self) -> float:
        """a**2 + b**2, the squared modulus of the rotation block."""
        return self.a * self.a + self.b * self.b

    @property
    def det(self) -> float:
        """Constant Jacobian determinant (a**2 + b**2) e."""
        return self.rho2 * self.e

    def with_(self, **changes) -> "MapParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d, "e": self.e, "k": self.k}


@dataclass(frozen=True)
class Box3:
    """Coordinate box ``|x| <= x_max, |y| <= y_max, |z| <= z_max``."""

    x_max: float
    y_max: float
    z_max: float

    def __post_init__(self):
        if min(self.x_max, self.y_max, self.z_max) < 0:
            raise ValueError("box half-widths must be non-negative")

    @property
    def half_widths(self) -> np.ndarray:
        return np.array([self.x_max, self.y_max, self.z_max])

    def inflate(self, factor: float) -> "Box3":
        return Box3(self.x_max * factor, self.y_max * factor, self.z_max * factor)

    def contains(self, states, rtol: float = 1e-9):
        """Elementwise membership with a relative slack ``rtol`` on each half-width."""
        s = np.abs(np.asarray(states, dtype=float))
        inside = np.all(s <= self.half_widths * (1.0 + rtol), axis=-1)
        return bool(inside) if np.ndim(inside) == 0 else inside


@dataclass
class OrbitResult:
    """States visited by ``iterate``.

    ``states[0]`` is the seed.  When ``escaped`` is set, ``escape_index`` is
    the step of the first state outside the escape box; that state is stored
    as ``states[escape_index]`` unless it was non-finite, in which case the
    record ends just before it.
    """

    states: np.ndarray
    escaped: bool = False
    escape_index: Optional[int] = None
    box: Optional[Box3] = field(default=None, repr=False)

    def __len__(self):
        return len(self.states)


def _check_finite(out: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(out)):
        raise NonFiniteResult("map evaluation overflowed")
    return out


def evaluate(p: MapParams, s) -> np.ndarray:
    """Image ``F(s)``; broadcasts over leading axes of ``s``."""
    s = np.asarray(s, dtype=float)
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    with np.errstate(over="ignore", invalid="ignore"):
        u = y - z
        out = np.stack(
            [p.a * x - p.b * u, p.b * x + p.a * u, p.c * x - p.d * x**p.k + p.e * z],
            axis=-1,
        )
    return _check_finite(out)


def inverse(p: MapParams, s) -> np.ndarray:
    """Preimage ``F^{-1}(s)``; requires ``e != 0``."""
    if p.e == 0:
        raise NotInvertible("F is not invertible when e == 0")
    s = np.asarray(s, dtype=float)
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    r2 = p.rho2
    with np.errstate(over="ignore", invalid="ignore"):
        xh = (p.a * x + p.b * y) / r2
        zh = (z - p.c * xh + p.d * xh**p.k) / p.e
        out = np.stack([xh, (-p.b * x + p.a * y) / r2 + zh, zh], axis=-1)
    return _check_finite(out)


def jacobian(p: MapParams, x) -> np.ndarray:
    """``DF`` at a point with first coordinate ``x``; shape ``(..., 3, 3)``."""
    x = np.asarray(x, dtype=float)
    J = np.zeros(x.shape + (3, 3))
    J[..., 0, :] = (p.a, -p.b, p.b)
    J[..., 1, :] = (p.b, p.a, -p.a)
    J[..., 2, 0] = p.c - p.k * p.d * x ** (p.k - 1)
    J[..., 2, 2] = p.e
    return J


def char_poly(p: MapParams, x) -> MonicCubic:
    """Characteristic polynomial of ``jacobian(p, x)`` as ``(A, B, D)``."""
    return char_poly_from_power(p, np.asarray(x, dtype=float) ** (p.k - 1))


def char_poly_from_power(p: MapParams, xpow) -> MonicCubic:
    """Same as ``char_poly`` but takes ``x**(k-1)`` directly.

    Stability at a fixed point only needs ``x**(k-1)``, which the closed-form
    equilibria provide without taking a root.
    """
    a, b, e = p.a, p.b, p.e
    A = -(2.0 * a + e)
    B = a * a + b * b + 2.0 * a * e - b * p.c + p.k * b * p.d * xpow
    D = -(a * a + b * b) * e
    if np.ndim(B) == 0:
        B = float(B)
    return MonicCubic(A, B, D)


def nonwandering_box(p: MapParams) -> Box3:
    """Box containing every bounded orbit (and so every periodic point).

    ``M**(k-1) = (|(a^2+b^2)e| + |a^2+b^2-bc+2ae| + |2a+e| + 1) / |bd|`` bounds
    ``|x|``; the y- and z-bounds follow from writing ``y_n`` and ``z_n`` as
    combinations of neighbouring x-values:

        y_{n+1} = ((a^2+b^2) x_n - a x_{n+1}) / b
        z_{n+1} = ((a^2+b^2) x_n - 2a x_{n+1} + x_{n+2}) / b
    """
    a, b, c, d, e = p.a, p.b, p.c, p.d, p.e
    r2 = p.rho2
    num = abs(r2 * e) + abs(r2 - b * c + 2 * a * e) + abs(2 * a + e) + 1.0
    M = (num / abs(b * d)) ** (1.0 / (p.k - 1))
    return Box3(
        x_max=M,
        y_max=(r2 + abs(a)) / abs(b) * M,
        z_max=(r2 + 2 * abs(a) + 1) / abs(b) * M,
    )


def iterate(
    p: MapParams,
    s0,
    n: int,
    escape: Optional[Box3] = None,
    inflation: float = 10.0,
) -> OrbitResult:
    """Apply ``F`` up to ``n`` times, stopping at the first escape.

    ``escape`` defaults to the nonwandering box; it is inflated by
    ``inflation`` before use.  Overflow counts as an escape.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    box = (escape if escape is not None else nonwandering_box(p)).inflate(inflation)
    xm, ym, zm = box.x_max, box.y_max, box.z_max
    a, b, c, d, e, k = p.a, p.b, p.c, p.d, p.e, p.k

    out = np.empty((n + 1, 3))
    x, y, z = (float(v) for v in s0)
    out[0] = (x, y, z)
    if not (abs(x) <= xm and abs(y) <= ym and abs(z) <= zm):
        return OrbitResult(out[:1], True, 0, box)
    for i in range(1, n + 1):
        u = y - z
        try:
            x, y, z = a * x - b * u, b * x + a * u, c * x - d * x**k + e * z
        except OverflowError:
            return OrbitResult(out[:i], True, i, box)
        if not (abs(x) <= xm and abs(y) <= ym and abs(z) <= zm):
            if math.isfinite(x) and math.isfinite(y) and math.isfinite(z):
                out[i] = (x, y, z)
                return OrbitResult(out[: i + 1], True, i, box)
            return OrbitResult(out[:i], True, i, box)
        out[i] = (x, y, z)
    return OrbitResult(out, False, None, box)
