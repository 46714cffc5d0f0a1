"""Numerical phenomenology: bifurcation diagrams, Lyapunov exponents,
Poincare sections, period detection and attractor samples.

The diagram is computed for all sweep values at once (one numpy array per
coordinate), so a sweep costs roughly ``transient + sample`` vector steps.
Lyapunov exponents use QR (modified Gram-Schmidt) re-orthonormalisation of
three tangent vectors; since ``det DF = (a**2 + b**2) e`` is constant, the
exponents must sum to ``log|(a**2 + b**2) e|``, which is checked.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import Box3, MapParams, iterate, nonwandering_box
from .equilibria import equilibria, symmetric_period2
from .errors import OrbitEscaped, TooFewCrossings

SEED_MODES = ("origin", "p1", "p2")


@dataclass(frozen=True)
class ScanConfig:
    """Sweep and sampling settings.

    ``seed`` may be an explicit state or one of ``"origin"``, ``"p1"``,
    ``"p2"``: the corresponding orbit (where it exists) displaced by
    ``seed_offset`` in every coordinate.
    """

    param: str = "c"
    start: float = 0.0
    stop: float = 1.0
    steps: int = 101
    transient: int = 10_000
    sample: int = 1_000
    seed: object = "origin"
    seed_offset: float = 1e-8
    inflation: float = 10.0
    thin: int = 1

    def __post_init__(self):
        if self.param not in ("c", "e"):
            raise ValueError("sweep parameter must be 'c' or 'e'")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.transient < 0 or self.sample < 0:
            raise ValueError("transient and sample lengths must be >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if isinstance(self.seed, str) and self.seed not in SEED_MODES:
            raise ValueError(f"seed mode must be one of {SEED_MODES} or a state")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    @property
    def step_size(self) -> float:
        return (self.stop - self.start) / (self.steps - 1) if self.steps > 1 else 0.0


def seed_state(p: MapParams, seed, offset: float = 1e-8) -> np.ndarray:
    """Resolve a seed spec to a state; ``None`` if the requested orbit does not exist."""
    if not isinstance(seed, str):
        s = np.asarray(seed, dtype=float)
        if s.shape != (3,):
            raise ValueError("explicit seed must have three coordinates")
        return s
    if seed == "origin":
        base = np.zeros(3)
    elif seed == "p1":
        eq = equilibria(p)
        if not eq.nontrivial:
            return None
        base = eq.nontrivial[0]
    else:
        p2 = symmetric_period2(p)
        if not p2.exists:
            return None
        base = p2.points[0]
    return base + offset


@dataclass
class DiagramTable:
    """Post-transient ``x``-samples per sweep value (NaN rows where the orbit escaped)."""

    param: str
    values: np.ndarray
    samples: np.ndarray
    escaped: np.ndarray
    base: MapParams
    config: ScanConfig
    periods: Optional[np.ndarray] = None

    def to_csv(self, max_samples: Optional[int] = None) -> str:
        m = self.samples.shape[1] if max_samples is None else min(max_samples, self.samples.shape[1])
        cols = [self.param, "escaped", "period"] + [f"x{i}" for i in range(m)]
        periods = self.periods if self.periods is not None else np.zeros(len(self.values), dtype=int)
        buf = io.StringIO()
        buf.write(
            "# bifurcation_diagram "
            + " ".join(f"{k}={v!r}" for k, v in self.base.as_dict().items() if k != self.param)
            + f" sweep={self.param}:{self.config.start!r}:{self.config.stop!r}:{self.config.steps}"
            + f" transient={self.config.transient} seed={self.config.seed!r}"
            + " columns=" + ",".join(cols[:3]) + ",x0..x" + str(m - 1)
            + "\n"
        )
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for v, esc, per, row in zip(self.values, self.escaped, periods, self.samples[:, :m]):
            w.writerow([repr(float(v)), int(esc), int(per)] + ["" if not np.isfinite(x) else repr(float(x)) for x in row])
        return buf.getvalue()


def bifurcation_diagram(cfg: ScanConfig, base: MapParams, period_tol: float = 1e-6, max_period: int = 64) -> DiagramTable:
    """Sweep ``cfg.param`` and record post-transient ``x`` values.

    All sweep values are iterated together.  A value counts as escaped once
    its state leaves the ``cfg.inflation``-inflated nonwandering box of its
    own parameters (or overflows); escaped rows hold NaN.
    """
    vals = cfg.values
    m = vals.size
    a, b, d, k = base.a, base.b, base.d, base.k
    c = vals if cfg.param == "c" else np.full(m, base.c)
    e = vals if cfg.param == "e" else np.full(m, base.e)

    S = np.full((m, 3), np.nan)
    xmax = np.empty(m)
    ymax = np.empty(m)
    zmax = np.empty(m)
    for i in range(m):
        p = base.with_(c=float(c[i]), e=float(e[i]))
        box = nonwandering_box(p).inflate(cfg.inflation)
        xmax[i], ymax[i], zmax[i] = box.x_max, box.y_max, box.z_max
        s0 = seed_state(p, cfg.seed, cfg.seed_offset)
        if s0 is not None:
            S[i] = s0
    x, y, z = S[:, 0].copy(), S[:, 1].copy(), S[:, 2].copy()
    escaped = ~np.isfinite(x)

    def step(x, y, z):
        u = y - z
        return a * x - b * u, b * x + a * u, c * x - d * x**k + e * z

    def mark(x, y, z, escaped):
        bad = ~((np.abs(x) <= xmax) & (np.abs(y) <= ymax) & (np.abs(z) <= zmax))
        escaped |= bad
        x[escaped] = y[escaped] = z[escaped] = 0.0
        return escaped

    samples = np.full((m, cfg.sample), np.nan)
    with np.errstate(over="ignore", invalid="ignore"):
        x[escaped] = y[escaped] = z[escaped] = 0.0
        for _ in range(cfg.transient):
            x, y, z = step(x, y, z)
            escaped = mark(x, y, z, escaped)
        for j in range(cfg.sample):
            x, y, z = step(x, y, z)
            escaped = mark(x, y, z, escaped)
            samples[:, j] = x
    samples[escaped] = np.nan
    table = DiagramTable(cfg.param, vals, samples, escaped, base, cfg)
    table.periods = np.array([detect_period(row, period_tol, max_period) or 0 for row in samples])
    table.periods[escaped] = -1
    return table


def first_period_doubling(table: DiagramTable) -> Optional[float]:
    """First sweep value whose period is twice the previous value's period.

    Periods come from ``table.periods`` (0 = none detected, -1 = escaped).
    Returns the midpoint of the two sweep values, or ``None``.
    """
    per = table.periods
    for i in range(1, len(per)):
        if per[i - 1] >= 1 and per[i] == 2 * per[i - 1]:
            return float(0.5 * (table.values[i - 1] + table.values[i]))
    return None


def period_transitions(table: DiagramTable) -> list[tuple[float, int, int]]:
    """``(value, old_period, new_period)`` at every change along the sweep."""
    out = []
    per = table.periods
    for i in range(1, len(per)):
        if per[i] != per[i - 1]:
            out.append((float(table.values[i]), int(per[i - 1]), int(per[i])))
    return out


def detect_period(orbit, tol: float = 1e-8, max_period: Optional[int] = None) -> Optional[int]:
    """Smallest ``q`` with ``sup |orbit[n+q] - orbit[n]| < tol``, else ``None``.

    ``orbit`` may be a sequence of states or of scalars.  ``q`` ranges up to
    ``max_period`` (default: half the orbit length).
    """
    X = np.asarray(orbit, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if n < 2 or not np.all(np.isfinite(X)):
        return None
    qmax = n // 2 if max_period is None else min(max_period, n - 1)
    for q in range(1, qmax + 1):
        if np.max(np.abs(X[q:] - X[:-q])) < tol:
            return q
    return None


@dataclass(frozen=True)
class LyapunovTriple:
    exponents: tuple
    steps: int
    sum_rule_error: Optional[float]

    @property
    def top(self) -> float:
        return self.exponents[0]

    @property
    def total(self) -> float:
        return float(sum(self.exponents))


def lyapunov(
    p: MapParams,
    s0,
    n: int,
    transient: int = 0,
    escape: Optional[Box3] = None,
    inflation: float = 10.0,
    sum_tol: float = 1e-3,
) -> LyapunovTriple:
    """Lyapunov exponents (per iterate, descending) by QR tangent iteration.

    Raises ``OrbitEscaped`` when the orbit leaves the inflated box, and
    ``ArithmeticError`` when the exponents violate the sum rule by more than
    ``sum_tol`` (only checked when ``det DF != 0``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    box = (escape if escape is not None else nonwandering_box(p)).inflate(inflation)
    xm, ym, zm = box.x_max, box.y_max, box.z_max
    a, b, c, d, e, k = p.a, p.b, p.c, p.d, p.e, p.k
    x, y, z = (float(v) for v in s0)

    for i in range(transient):
        u = y - z
        x, y, z = a * x - b * u, b * x + a * u, c * x - d * x**k + e * z
        if not (abs(x) <= xm and abs(y) <= ym and abs(z) <= zm):
            raise OrbitEscaped(f"orbit escaped during transient at step {i + 1}", i + 1)

    # columns of Q, stored row-major as q[j] = (q0, q1, q2)
    q = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    acc = [0.0, 0.0, 0.0]
    log = math.log
    tiny = 1e-300
    for i in range(n):
        g = c - k * d * x ** (k - 1)
        w = []
        for v0, v1, v2 in q:
            du = v1 - v2
            w.append([a * v0 - b * du, b * v0 + a * du, g * v0 + e * v2])
        # modified Gram-Schmidt
        r = [0.0, 0.0, 0.0]
        for j in range(3):
            vj = w[j]
            for m in range(j):
                qm = w[m]
                dot = vj[0] * qm[0] + vj[1] * qm[1] + vj[2] * qm[2]
                vj = [vj[0] - dot * qm[0], vj[1] - dot * qm[1], vj[2] - dot * qm[2]]
            nrm = math.sqrt(vj[0] * vj[0] + vj[1] * vj[1] + vj[2] * vj[2])
            r[j] = nrm
            if nrm > tiny:
                w[j] = [vj[0] / nrm, vj[1] / nrm, vj[2] / nrm]
            else:
                w[j] = [0.0, 0.0, 0.0]
        q = w
        acc[0] += log(max(r[0], tiny))
        acc[1] += log(max(r[1], tiny))
        acc[2] += log(max(r[2], tiny))
        u = y - z
        x, y, z = a * x - b * u, b * x + a * u, c * x - d * x**k + e * z
        if not (abs(x) <= xm and abs(y) <= ym and abs(z) <= zm):
            raise OrbitEscaped(f"orbit escaped at step {transient + i + 1}", transient + i + 1)

    exps = sorted((v / n for v in acc), reverse=True)
    err = None
    if p.det != 0:
        err = abs(sum(exps) - math.log(abs(p.det)))
        if err > sum_tol:
            raise ArithmeticError(f"Lyapunov sum rule violated by {err:.3e}")
    return LyapunovTriple(tuple(exps), n, err)


@dataclass(frozen=True)
class SectionPlane:
    """Plane through ``point`` with unit ``normal``.

    In-plane coordinates are ``(q - point) . e1`` and ``(q - point) . e2``
    with ``e2 = normal x e1``.  If ``half`` is set, only crossings with
    ``(q - point) . half > 0`` are kept.
    """

    point: tuple
    normal: tuple
    e1: tuple
    half: Optional[tuple] = None

    @classmethod
    def coordinate(cls, axis: str, value: float = 0.0) -> "SectionPlane":
        i = "xyz".index(axis)
        n = np.zeros(3)
        n[i] = 1.0
        e1 = np.zeros(3)
        e1[(i + 1) % 3] = 1.0
        pt = np.zeros(3)
        pt[i] = value
        return cls(tuple(pt), tuple(n), tuple(e1))

    def basis(self):
        n = np.asarray(self.normal, dtype=float)
        n = n / np.linalg.norm(n)
        e1 = np.asarray(self.e1, dtype=float)
        e1 = e1 - (e1 @ n) * n
        e1 = e1 / np.linalg.norm(e1)
        return np.asarray(self.point, dtype=float), n, e1, np.cross(n, e1)

    def to_plane(self, q) -> np.ndarray:
        o, _, e1, e2 = self.basis()
        d = np.asarray(q, dtype=float) - o
        return np.stack([d @ e1, d @ e2], axis=-1)

    def from_plane(self, uv) -> np.ndarray:
        o, _, e1, e2 = self.basis()
        uv = np.asarray(uv, dtype=float)
        return o + uv[..., :1] * e1 + uv[..., 1:2] * e2


def rotation_frame(p: MapParams, x: float = 0.0):
    """``(v, u1, u2)``: real eigenvector of ``DF`` at ``x`` and an orthonormal
    complement, for building sections around the rotation axis."""
    from .core import jacobian

    w, V = np.linalg.eig(jacobian(p, x))
    i = int(np.argmin(np.abs(w.imag)))
    v = np.real(V[:, i])
    v /= np.linalg.norm(v)
    ref = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u1 = np.cross(v, ref)
    u1 /= np.linalg.norm(u1)
    return v, u1, np.cross(v, u1)


def axis_section(p: MapParams, x: float = 0.0) -> SectionPlane:
    """Meridian half-plane containing the rotation axis at ``x``.

    The plane contains ``v`` and ``u1`` (normal ``u2``) and keeps the side
    ``u1 > 0``; in-plane coordinates are ``(along v, along u1)``.
    """
    v, u1, u2 = rotation_frame(p, x)
    return SectionPlane((0.0, 0.0, 0.0), tuple(u2), tuple(v), tuple(u1))


def section_crossings(states, plane: SectionPlane, stride: int = 1) -> np.ndarray:
    """Crossings of ``plane`` by the sequence ``states[i] -> states[i + stride]``.

    Each crossing is linearly interpolated between the two samples; both
    crossing directions are recorded.  Returns 3D points.
    """
    P = np.asarray(states, dtype=float)
    if len(P) <= stride:
        return np.empty((0, 3))
    o, n, _, _ = plane.basis()
    sd = (P - o) @ n
    A, B = P[:-stride], P[stride:]
    sa, sb = sd[:-stride], sd[stride:]
    m = (sa < 0) != (sb < 0)
    t = sa[m] / (sa[m] - sb[m])
    Q = A[m] + t[:, None] * (B[m] - A[m])
    if plane.half is not None:
        Q = Q[(Q - o) @ np.asarray(plane.half, dtype=float) > 0]
    return Q


@dataclass
class Section:
    points: np.ndarray
    uv: np.ndarray
    steps: int
    volume_preserving: bool
    escaped: bool = False


def poincare_section(
    p: MapParams,
    s0,
    plane: SectionPlane,
    n: int,
    stride: int = 1,
    transient: int = 0,
    min_crossings: int = 1,
    inflation: float = 10.0,
) -> Section:
    """Record crossings of ``plane`` along ``n`` iterates from ``s0``.

    ``stride > 1`` samples ``F**stride``, useful when one iterate rotates
    by nearly a full quarter turn or more and consecutive points straddle the
    plane far from it.  Raises ``TooFewCrossings`` below ``min_crossings``.
    """
    orb = iterate(p, s0, transient + n, inflation=inflation)
    states = orb.states[transient:]
    Q = section_crossings(states, plane, stride)
    if len(Q) < min_crossings:
        raise TooFewCrossings(f"{len(Q)} crossings, wanted at least {min_crossings}")
    vp = abs(abs(p.det) - 1.0) <= 1e-12
    return Section(Q, plane.to_plane(Q), len(states) - 1, vp, orb.escaped)


def locate_invariant_circle(
    p: MapParams,
    plane: SectionPlane,
    guess: Sequence[float],
    stride: int = 1,
    n: int = 20_000,
    xatol: float = 1e-7,
) -> tuple[np.ndarray, float]:
    """In-plane point whose orbit has the smallest section spread.

    The orbit of an invariant circle of ``F**stride``'s return map meets the
    section in (nearly) one point; Nelder-Mead minimises the RMS spread of
    the crossings.  Returns ``(uv, spread)``.
    """

    def spread(uv):
        s = plane.from_plane(uv)
        orb = iterate(p, s, n)
        if orb.escaped:
            return 1e3
        Q = section_crossings(orb.states, plane, stride)
        if len(Q) < 10:
            return 1e3
        return float(np.sqrt(((Q - Q.mean(axis=0)) ** 2).sum(axis=1).mean()))

    res = minimize(spread, np.asarray(guess, dtype=float), method="Nelder-Mead",
                   options={"xatol": xatol, "fatol": 1e-10})
    return np.asarray(res.x), float(res.fun)


def polar_about(uv, centre) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(uv, dtype=float) - np.asarray(centre, dtype=float)
    return np.arctan2(d[:, 1], d[:, 0]), np.hypot(d[:, 0], d[:, 1])


def _radius_at(theta, r, query):
    o = np.argsort(theta)
    th, rr = theta[o], r[o]
    th = np.concatenate([th[-1:] - 2 * np.pi, th, th[:1] + 2 * np.pi])
    rr = np.concatenate([rr[-1:], rr, rr[:1]])
    return np.interp(query, th, rr)


def loops_nested(loops: Sequence[np.ndarray], centre) -> tuple[bool, list[float]]:
    """Strict radial nesting of section loops around ``centre``.

    Each loop is an ``(m, 2)`` array of in-plane points, ordered from inner
    to outer.  Loop ``i + 1`` is compared with loop ``i`` by interpolating
    its radius (as a periodic function of angle) at loop ``i``'s angles;
    nesting is strict when every inner radius is smaller.  Returns the
    verdict and the smallest gap per consecutive pair.
    """
    gaps = []
    for inner, outer in zip(loops[:-1], loops[1:]):
        ti, ri = polar_about(inner, centre)
        to, ro = polar_about(outer, centre)
        gaps.append(float(np.min(_radius_at(to, ro, ti) - ri)))
    return all(g > 0 for g in gaps), gaps


def rotation_number(states, centre, axis) -> float:
    """Mean angular advance per iterate (in turns) about ``axis`` through ``centre``."""
    P = np.asarray(states, dtype=float) - np.asarray(centre, dtype=float)
    v = np.asarray(axis, dtype=float)
    v = v / np.linalg.norm(v)
    ref = np.eye(3)[int(np.argmin(np.abs(v)))]
    u1 = np.cross(v, ref)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(v, u1)
    ang = np.unwrap(np.arctan2(P @ u2, P @ u1))
    if len(ang) < 2:
        return 0.0
    return float((ang[-1] - ang[0]) / (len(ang) - 1) / (2 * np.pi))


@dataclass
class AttractorSample:
    seed: np.ndarray
    states: np.ndarray = field(repr=False)
    escaped: bool = False

    @property
    def empty(self) -> bool:
        return self.escaped or len(self.states) == 0


def attractor_sample(p: MapParams, cfg: ScanConfig, seeds: Optional[Iterable] = None) -> list[AttractorSample]:
    """Post-transient states (every ``cfg.thin``-th) for each seed.

    Without ``seeds`` the single seed from ``cfg.seed`` is used.  An escaped
    seed yields an empty sample.
    """
    if seeds is None:
        s = seed_state(p, cfg.seed, cfg.seed_offset)
        seeds = [] if s is None else [s]
    out = []
    for s in seeds:
        s = np.asarray(s, dtype=float)
        orb = iterate(p, s, cfg.transient + cfg.sample, inflation=cfg.inflation)
        if orb.escaped:
            out.append(AttractorSample(s, np.empty((0, 3)), True))
        else:
            out.append(AttractorSample(s, orb.states[cfg.transient + 1 :: cfg.thin]))
    return out


def spread_seeds(centre, radius: float, count: int = 8, rng_seed: int = 0) -> np.ndarray:
    """``count`` seeds uniformly in a ball (deterministic for a fixed ``rng_seed``)."""
    rng = np.random.default_rng(rng_seed)
    d = rng.normal(size=(count, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1 / 3)
    return np.asarray(centre, dtype=float) + d * r[:, None]
