"""Discrete (Schur) stability of real monic cubics.

A cubic ``P(l) = l**3 + A*l**2 + B*l + D`` is *stable* when all three roots
lie strictly inside the unit circle.  The test used here needs no root
finding:

    |D| < 1   and   max(-P(1), P(-1)) < 0 < alpha_hat,
    alpha_hat = -D**2 + A*D - B + 1.

For the family ``P_beta = P + beta*l`` the stable set in ``beta`` is the open
interval ``(max(-P(1), P(-1)), alpha_hat)``, non-empty iff ``|D| < 1`` and
``|A - D| < 2``.

All predicates accept scalars or numpy arrays (broadcast elementwise), so the
same code serves single queries and parameter-plane rasters.  ``cubic_roots``
is an independent eigenvalue oracle used to cross-check the criterion.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np


class MonicCubic(NamedTuple):
    """Coefficients of ``l**3 + A*l**2 + B*l + D``."""

    A: float
    B: float
    D: float

    def __call__(self, lam):
        return ((lam + self.A) * lam + self.B) * lam + self.D

    def shifted(self, beta) -> "MonicCubic":
        """Member ``P + beta*l`` of the one-parameter family."""
        return MonicCubic(self.A, self.B + beta, self.D)


class BifurcationKind(str, enum.Enum):
    ROOT_AT_PLUS_ONE = "root_at_plus_one"
    ROOT_AT_MINUS_ONE = "root_at_minus_one"
    UNIT_COMPLEX_PAIR = "unit_complex_pair"


@dataclass(frozen=True)
class StableInterval:
    """Open interval ``(lo, hi)`` of ``beta`` for which ``P_beta`` is stable."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi})")

    def __contains__(self, beta) -> bool:
        return self.lo < beta < self.hi

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class BifurcationValue:
    beta: float
    kind: BifurcationKind


def _as_cubic(q) -> MonicCubic:
    if isinstance(q, MonicCubic):
        return q
    A, B, D = q
    return MonicCubic(A, B, D)


def alpha_hat(q):
    """``-D**2 + A*D - B + 1``; zero exactly when two roots have product one."""
    A, B, D = _as_cubic(q)
    return -D * D + A * D - B + 1.0


def is_stable(q):
    """True where all roots of the cubic lie strictly inside the unit circle.

    Works elementwise when the coefficients are arrays.
    """
    q = _as_cubic(q)
    A, B, D = q
    p_plus = 1.0 + A + B + D
    p_minus = -1.0 + A - B + D
    result = (np.abs(D) < 1.0) & (-p_plus < 0.0) & (p_minus < 0.0) & (alpha_hat(q) > 0.0)
    if np.ndim(result) == 0:
        return bool(result)
    return result


def stable_interval(A: float, B: float, D: float) -> Optional[StableInterval]:
    """Stable interval of ``l**3 + A l**2 + (B+beta) l + D`` in ``beta``.

    Returns ``None`` when no ``beta`` makes the family stable, which happens
    exactly when ``|D| >= 1`` or ``|A - D| >= 2``.
    """
    if not (abs(D) < 1.0 and abs(A - D) < 2.0):
        return None
    q0 = MonicCubic(A, B, D)
    lo = max(-q0(1.0), q0(-1.0))
    hi = alpha_hat(q0)
    if not lo < hi:  # only reachable through rounding at the edge of the existence set
        return None
    return StableInterval(float(lo), float(hi))


def bifurcation_values(A: float, B: float, D: float) -> list[BifurcationValue]:
    """The three values of ``beta`` at which a root of ``P_beta`` can cross |l| = 1."""
    q0 = MonicCubic(A, B, D)
    return [
        BifurcationValue(float(-q0(1.0)), BifurcationKind.ROOT_AT_PLUS_ONE),
        BifurcationValue(float(q0(-1.0)), BifurcationKind.ROOT_AT_MINUS_ONE),
        BifurcationValue(float(alpha_hat(q0)), BifurcationKind.UNIT_COMPLEX_PAIR),
    ]


def companion(q) -> np.ndarray:
    """Companion matrices, shape ``(..., 3, 3)``."""
    A, B, D = (np.asarray(c, dtype=float) for c in _as_cubic(q))
    A, B, D = np.broadcast_arrays(A, B, D)
    C = np.zeros(A.shape + (3, 3))
    C[..., 0, 0] = -A
    C[..., 0, 1] = -B
    C[..., 0, 2] = -D
    C[..., 1, 0] = 1.0
    C[..., 2, 1] = 1.0
    return C


def cubic_roots(q) -> np.ndarray:
    """Roots via companion-matrix eigenvalues, shape ``(..., 3)`` complex.

    Roots are sorted by modulus (descending) so that ``roots[..., 0]`` is the
    spectral radius witness.
    """
    roots = np.linalg.eigvals(companion(q)).astype(complex)
    order = np.argsort(-np.abs(roots), axis=-1, kind="stable")
    return np.take_along_axis(roots, order, axis=-1)


def spectral_radius(q):
    r = np.abs(cubic_roots(q)).max(axis=-1)
    return float(r) if np.ndim(r) == 0 else r


def cubic_roots_closed_form(q) -> np.ndarray:
    """Trigonometric/Cardano roots of a single cubic; secondary cross-check only.

    Near multiple roots this loses about half the digits, which is why the
    eigenvalue route is the primary oracle.
    """
    A, B, D = (float(c) for c in _as_cubic(q))
    # depressed cubic t**3 + p t + r with l = t - A/3
    shift = A / 3.0
    p = B - A * A / 3.0
    r = 2.0 * A**3 / 27.0 - A * B / 3.0 + D
    disc = (r / 2.0) ** 2 + (p / 3.0) ** 3
    if p == 0.0 and r == 0.0:
        t = np.zeros(3, dtype=complex)
    elif disc > 0.0:
        sq = np.sqrt(disc)
        # pick the larger-magnitude radicand to avoid cancellation
        u3 = -r / 2.0 + sq if r <= 0.0 else -r / 2.0 - sq
        u = np.cbrt(u3)
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        w = complex(-0.5, np.sqrt(3.0) / 2.0)
        t = np.array([u + v, w * u + w.conjugate() * v, w.conjugate() * u + w * v])
    else:
        m = 2.0 * np.sqrt(-p / 3.0)
        arg = np.clip(3.0 * r / (p * m), -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        t = m * np.cos(theta - 2.0 * np.pi * np.arange(3) / 3.0)
        t = t.astype(complex)
    return t - shift


def poly_from_roots(roots) -> MonicCubic:
    """Expand ``(l - r1)(l - r2)(l - r3)``; imaginary parts are dropped."""
    r1, r2, r3 = np.moveaxis(np.asarray(roots), -1, 0)
    A = -(r1 + r2 + r3)
    B = r1 * r2 + r1 * r3 + r2 * r3
    D = -(r1 * r2 * r3)
    return MonicCubic(np.real(A), np.real(B), np.real(D))
