"""Quasidisc constants and the Ahlfors three-point diagnostic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import confmap
from .errors import DegenerateCurve, InvalidParameter
from .quadrature import build_grid, integrate

MIN_VERTICES = 8
MAX_VERTICES = 4096


@dataclass(frozen=True)
class QuasidiscParams:
    K: float
    k: float
    p_sup: float
    p_chosen: float
    q_chosen: float
    dim_bound: float
    jacobian_p_sup: float
    M: float | None = None

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.p_sup)

    def to_dict(self) -> dict:
        def enc(x):
            return "inf" if isinstance(x, float) and math.isinf(x) else x
        return {name: enc(getattr(self, name)) for name in self.__dataclass_fields__}


def quasidisc_params(K: float, estimate_m: bool = False) -> QuasidiscParams:
    """Integrability exponents and dimension bound of a K-quasidisc.

    ``p_sup = 2K^2/(K^2-1)`` bounds the exponents with ``phi' in L^p``;
    ``p_chosen = (2K^2-1)/(K^2-1)`` is the admissible exponent used for the
    stability constant ``M = C(4p/(p-2))^2 = C(4(2K^2-1))^2``; the boundary
    has Hausdorff dimension at most ``1 + k^2`` with ``k = (K-1)/(K+1)``.
    ``K = 1`` returns ``inf`` for all exponents.
    """
    K = float(K)
    if not K >= 1:
        raise InvalidParameter(f"K must be >= 1, got {K}")
    k = (K - 1.0) / (K + 1.0)
    K2 = K * K
    if K == 1.0:
        p_sup = p_chosen = jac = math.inf
        q = 4.0
    else:
        p_sup = 2.0 * K2 / (K2 - 1.0)
        p_chosen = (2.0 * K2 - 1.0) / (K2 - 1.0)
        jac = K / (K - 1.0)
        q = 4.0 * (2.0 * K2 - 1.0)
    M = None
    if estimate_m:
        from .stability import cq_cached
        M = cq_cached(q).value ** 2
    return QuasidiscParams(K, k, p_sup, p_chosen, q, 1.0 + k * k, jac, M)


# ---------------------------------------------------------------- curves


@dataclass(frozen=True, eq=False)
class DiscreteJordanCurve:
    vertices: np.ndarray
    arclength: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise InvalidParameter("curve vertices must be an array of [x, y] pairs")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("curve vertices must be finite")
        if v.shape[0] > 1 and np.array_equal(v[0], v[-1]):
            v = v[:-1]
        if v.shape[0] < MIN_VERTICES:
            raise InvalidParameter(f"a curve needs at least {MIN_VERTICES} vertices, got {v.shape[0]}")
        if v.shape[0] > MAX_VERTICES:
            raise InvalidParameter(f"a curve may have at most {MAX_VERTICES} vertices")
        step = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
        if np.any(step == 0):
            raise InvalidParameter("curve has repeated consecutive vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "arclength", np.concatenate([[0.0], np.cumsum(step)]))

    def __len__(self) -> int:
        return self.vertices.shape[0]

    @property
    def perimeter(self) -> float:
        return float(self.arclength[-1])


def _pair_distances(v: np.ndarray) -> np.ndarray:
    dx = v[:, None, 0] - v[None, :, 0]
    dy = v[:, None, 1] - v[None, :, 1]
    return np.hypot(dx, dy)


def smaller_arc_is_forward(curve: DiscreteJordanCurve, i: int, j: int) -> bool:
    """Whether the arc i -> i+1 -> ... -> j is the smaller one (by length).

    Ties go to the arc running forward from the lower index.
    """
    n = len(curve)
    s = curve.arclength
    fwd = s[j] - s[i] if j >= i else s[n] - s[i] + s[j]
    other = s[n] - fwd
    return fwd < other or (fwd == other and i < j)


def ahlfors_constant(curve: DiscreteJordanCurve) -> float:
    """``max diam(smaller arc(a, b)) / |a - b|`` over vertex pairs.

    Arc diameters are taken over the arc's vertices.  For a start vertex
    ``i`` let ``A_i[L]`` be the diameter of vertices ``i..i+L``; then
    ``A_i[L] = max(A_{i+1}[L-1], max_{t<=L} |v_i - v_{i+t}|)``, which gives all
    arc diameters in O(n^2) time and O(n) extra memory per sweep.
    """
    v = curve.vertices
    n = len(curve)
    D = _pair_distances(v)
    s = curve.arclength
    per = s[n]
    offs = np.arange(1, n)
    best = 1.0
    A = np.zeros(n)  # A[L] for the current start, L = 0..n-1
    # Sweep starts from 2n-1 down to 0 on the doubled index sequence so the
    # recurrence never wraps; only starts < n are scored.
    for start in range(2 * n - 1, -1, -1):
        i = start % n
        reach = min(n - 1, 2 * n - 1 - start)
        row = np.zeros(n)
        if reach:
            row[1:reach + 1] = np.maximum.accumulate(D[i, (i + offs[:reach]) % n])
        shifted = np.concatenate([[0.0], A[:-1]])
        A = np.maximum(shifted, row)
        if start >= n:
            continue
        j = (i + offs) % n
        fwd = np.where(j > i, s[j] - s[i], per - s[i] + s[j])
        other = per - fwd
        use = (fwd < other) | ((fwd == other) & (i < j))
        chord = D[i, j]
        adjacent = (offs == 1) | (offs == n - 1)
        bad = use & ~adjacent & (chord < 1e-12)
        if np.any(bad):
            raise DegenerateCurve(f"vertices {i} and {int(j[bad][0])} nearly coincide")
        if np.any(use):
            best = max(best, float(np.max(A[offs[use]] / chord[use])))
    return best


# ---------------------------------------------------------------- test curves


def regular_polygon(n: int, radius: float = 1.0) -> DiscreteJordanCurve:
    t = 2.0 * np.pi * np.arange(n) / n
    return DiscreteJordanCurve(np.column_stack([radius * np.cos(t), radius * np.sin(t)]))


def unit_square(samples: int) -> DiscreteJordanCurve:
    """Boundary of [0,1]^2 with ``samples`` equispaced vertices (multiple of 4)."""
    if samples % 4:
        raise InvalidParameter("square sample count must be a multiple of 4")
    m = samples // 4
    t = np.arange(m) / m
    sides = [
        np.column_stack([t, np.zeros(m)]),
        np.column_stack([np.ones(m), t]),
        np.column_stack([1.0 - t, np.ones(m)]),
        np.column_stack([np.zeros(m), 1.0 - t]),
    ]
    return DiscreteJordanCurve(np.vstack(sides))


def koch_snowflake(level: int, subdivide: int = 1) -> DiscreteJordanCurve:
    """Koch snowflake polygon; each edge optionally split into ``subdivide`` pieces."""
    pts = np.exp(2j * np.pi * np.arange(3) / 3)
    rot = np.exp(1j * np.pi / 3)
    for _ in range(level):
        a = pts
        b = np.roll(pts, -1)
        d = (b - a) / 3.0
        p1 = a + d
        p3 = a + 2 * d
        p2 = p1 + d * np.conj(rot)
        pts = np.column_stack([a, p1, p2, p3]).ravel()
    if subdivide > 1:
        b = np.roll(pts, -1)
        frac = np.arange(subdivide) / subdivide
        pts = (pts[:, None] + (b - pts)[:, None] * frac[None, :]).ravel()
    return DiscreteJordanCurve(np.column_stack([pts.real, pts.imag]))


# ---------------------------------------------------------------- integrability


DEFAULT_LADDER = ((32, 64), (64, 128), (128, 256), (256, 512), (512, 1024), (1024, 2048))
DECAY_RATE_MIN = 0.15
RESOLVED_RTOL = 1e-10


def _trend(values: list[float]) -> dict:
    """Classify a sequence of norms from successive ladder rungs.

    With ``d_k`` the relative increments, the decay rate is the mean of
    ``-log2(d_{k+1}/d_k)`` over the last three ratios.  Increments that
    shrink geometrically (rate >= DECAY_RATE_MIN) or vanish mean the norms
    are stabilizing; roughly constant increments mean growth.
    """
    v = np.asarray(values, dtype=float)
    rel = np.abs(np.diff(v)) / np.abs(v[1:])
    if rel[-1] <= RESOLVED_RTOL:
        rate = math.inf
    else:
        tail = rel[-4:]
        tail = tail[tail > RESOLVED_RTOL]
        ratios = tail[1:] / tail[:-1]
        rate = float(-np.mean(np.log2(ratios))) if ratios.size else 0.0
    stable = rate >= DECAY_RATE_MIN
    return {"norms": v.tolist(), "relative_increments": rel.tolist(),
            "decay_rate": rate if math.isfinite(rate) else "inf",
            "trend": "stabilizing" if stable else "growing"}


def _ladder_norm(m, p: float, nr: int, ntheta: int) -> tuple[float, int]:
    # Partial sum cut at the ring's Nyquist frequency: higher powers are not
    # resolved by this rung, and a full polynomial has every L^p norm finite.
    grid = build_grid(nr, ntheta)
    dc = m.derivative_coeffs
    cut = min(dc.size, ntheta // 2)
    d = np.abs(confmap._series_on_rings(dc[:cut], grid.r, ntheta)).ravel()
    return float(integrate(grid, d**p) ** (1.0 / p)), cut


def check_integrability(m, K_hypothesis: float, ladder=DEFAULT_LADDER,
                        margin: float = 0.5) -> dict:
    """Grid-ladder evidence for ``phi' in L^p`` on both sides of ``p_sup(K)``.

    Rung ``(nr, ntheta)`` integrates ``|phi'|^p`` for the partial sum of the
    series resolved by ``ntheta`` angular nodes, at ``p = p_sup -/+ margin``.
    Singular boundary behaviour shows up as norms that keep growing by a
    roughly constant factor per rung.  Evidence only: finitely many values
    cannot decide integrability.
    """
    if not K_hypothesis > 1:
        raise InvalidParameter(f"K_hypothesis must be > 1, got {K_hypothesis}")
    if len(ladder) < 3:
        raise InvalidParameter("the grid ladder needs at least 3 rungs")
    par = quasidisc_params(K_hypothesis)
    p_below = max(1.0, par.p_sup - margin)
    p_above = par.p_sup + margin
    out = {"K_hypothesis": float(K_hypothesis), "p_sup": par.p_sup,
           "ladder": [list(x) for x in ladder], "evidence_only": True}
    for name, p in (("below", p_below), ("above", p_above)):
        norms, cuts = zip(*(_ladder_norm(m, p, nr, nt) for nr, nt in ladder))
        out[name] = {"p": p, **_trend(list(norms))}
        out["series_terms"] = list(cuts)
    return out
