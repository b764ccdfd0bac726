"""Weighted Dirichlet eigenproblem on the unit disc.

Trial space: the Dirichlet eigenfunctions of the disc,

    psi_{m,k}(r, t) = N_{m,k} J_m(j_{m,k} r) {cos, sin}(m t),

which are L2-orthonormal and satisfy ``int grad psi_i . grad psi_j = mu_i delta_ij``
with ``mu = j_{m,k}**2``.  The stiffness matrix is therefore diagonal and the
Galerkin problem ``K x = lam M x`` reduces to one dense symmetric solve.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .errors import (
    BandwidthTooLow,
    ConvergenceFailure,
    InvalidParameter,
    SingularMass,
)
from .quadrature import QuadratureGrid

COS, SIN = 0, 1
DEFAULT_M_MAX = 12
DEFAULT_K_MAX = 12
MAX_ORDER = 64
TIE_RTOL = 1e-10


# ---------------------------------------------------------------- Bessel zeros


@lru_cache(maxsize=None)
def _bessel_zeros(m: int, kmax: int) -> tuple[float, ...]:
    """First ``kmax`` positive zeros of ``J_m`` by bracketing and bisection.

    Sign changes are located on a scan of step 0.25 starting at ``x = m``
    (all zeros of ``J_m`` exceed ``m``; consecutive zeros are more than 2.9
    apart), then each bracket is refined with Brent's method to full
    double precision.
    """
    f = lambda x: special.jv(m, x)  # noqa: E731
    zeros: list[float] = []
    step = 0.25
    a = max(float(m), step)
    fa = f(a)
    limit = m + (kmax + 4) * math.pi + 10.0 * (m + 1) ** (1.0 / 3.0) + 10.0
    while len(zeros) < kmax:
        b = a + step
        if b > limit:
            raise ConvergenceFailure(f"could not bracket zero {len(zeros) + 1} of J_{m}")
        fb = f(b)
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0:
            root, info = optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                         maxiter=200, full_output=True)
            if not info.converged:
                raise ConvergenceFailure(f"bisection for zero of J_{m} did not converge")
            zeros.append(root)
        a, fa = b, fb
    return tuple(zeros)


def bessel_zero(m: int, k: int) -> float:
    """k-th positive zero of the Bessel function J_m."""
    if int(m) != m or not 0 <= m <= MAX_ORDER:
        raise InvalidParameter(f"order m must be an integer in [0, {MAX_ORDER}], got {m}")
    if int(k) != k or not 1 <= k <= MAX_ORDER:
        raise InvalidParameter(f"index k must be an integer in [1, {MAX_ORDER}], got {k}")
    # Request a fixed-size table so the cache is shared across k.
    return _bessel_zeros(int(m), max(int(k), 16))[int(k) - 1]


# ---------------------------------------------------------------- basis


@dataclass(frozen=True, eq=False)
class DiscBasis:
    m: np.ndarray
    k: np.ndarray
    parity: np.ndarray
    j: np.ndarray
    mu: np.ndarray
    norm_const: np.ndarray
    m_max: int
    k_max: int

    def __len__(self) -> int:
        return self.m.size

    @property
    def size(self) -> int:
        return self.m.size

    def modes(self) -> list[tuple[int, str, int]]:
        return [(int(m), "cs"[p], int(k)) for m, p, k in zip(self.m, self.parity, self.k)]

    def radial(self, r) -> np.ndarray:
        """``N J_m(j r)`` for every mode, shape ``(size, len(r))``."""
        r = np.asarray(r, dtype=float)
        return self.norm_const[:, None] * special.jv(self.m[:, None], self.j[:, None] * r[None, :])

    def radial_derivative(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return (self.norm_const * self.j)[:, None] * special.jvp(
            self.m[:, None], self.j[:, None] * r[None, :]
        )

    def angular(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        arg = self.m[:, None] * theta[None, :]
        return np.where(self.parity[:, None] == COS, np.cos(arg), np.sin(arg))

    def angular_derivative(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        arg = self.m[:, None] * theta[None, :]
        return self.m[:, None] * np.where(self.parity[:, None] == COS, -np.sin(arg), np.cos(arg))

    def values(self, grid: QuadratureGrid) -> np.ndarray:
        """All basis functions at all grid nodes, shape ``(size, grid.size)``."""
        R = self.radial(grid.r)
        T = self.angular(grid.theta)
        return (R[:, :, None] * T[:, None, :]).reshape(self.size, -1)

    def gradients(self, grid: QuadratureGrid) -> tuple[np.ndarray, np.ndarray]:
        """Polar gradient components ``(d/dr, (1/r) d/dt)`` at grid nodes."""
        R, dR = self.radial(grid.r), self.radial_derivative(grid.r)
        T, dT = self.angular(grid.theta), self.angular_derivative(grid.theta)
        gr = (dR[:, :, None] * T[:, None, :]).reshape(self.size, -1)
        gt = ((R / grid.r[None, :])[:, :, None] * dT[:, None, :]).reshape(self.size, -1)
        return gr, gt

    def evaluate(self, coeffs, z) -> np.ndarray:
        """Expansion ``sum_i c_i psi_i`` at points ``z`` of the closed disc."""
        z = np.asarray(z, dtype=complex).ravel()
        r, t = np.abs(z), np.angle(z)
        vals = self.radial(r) * self.angular(t)
        return np.asarray(coeffs) @ vals

    def gradient_norm(self, coeffs) -> float:
        """``|| grad f ||_2`` of an expansion (exact: stiffness is diagonal)."""
        c = np.asarray(coeffs, dtype=float)
        return math.sqrt(float(np.sum(self.mu * c * c)))


def build_basis(m_max: int = DEFAULT_M_MAX, k_max: int = DEFAULT_K_MAX) -> DiscBasis:
    if int(m_max) != m_max or not 0 <= m_max <= MAX_ORDER:
        raise InvalidParameter(f"m_max must be an integer in [0, {MAX_ORDER}], got {m_max}")
    if int(k_max) != k_max or not 1 <= k_max <= MAX_ORDER:
        raise InvalidParameter(f"k_max must be an integer in [1, {MAX_ORDER}], got {k_max}")
    rows = []
    for m in range(int(m_max) + 1):
        for k in range(1, int(k_max) + 1):
            jz = bessel_zero(m, k)
            # int_0^1 J_m(j r)^2 r dr = J_{m+1}(j)^2 / 2
            radial_sq = 0.5 * special.jv(m + 1, jz) ** 2
            if m == 0:
                rows.append((jz * jz, m, COS, k, jz, 1.0 / math.sqrt(2.0 * math.pi * radial_sq)))
            else:
                nc = 1.0 / math.sqrt(math.pi * radial_sq)
                rows.append((jz * jz, m, COS, k, jz, nc))
                rows.append((jz * jz, m, SIN, k, jz, nc))
    rows.sort(key=lambda row: row[:4])
    mu, m, par, k, jz, nc = (np.array(col) for col in zip(*rows))
    return DiscBasis(
        m=m.astype(int), k=k.astype(int), parity=par.astype(int), j=jz.astype(float),
        mu=mu.astype(float), norm_const=nc.astype(float), m_max=int(m_max), k_max=int(k_max),
    )


# ---------------------------------------------------------------- mass matrix


def weight_values(h, grid: QuadratureGrid) -> np.ndarray:
    """Node values of a weight given as a callable of z or a node array."""
    if callable(h):
        vals = np.asarray(h(grid.z), dtype=float)
    else:
        vals = np.asarray(h, dtype=float)
        if vals.ndim == 0:
            vals = np.full(grid.size, float(vals))
    if vals.size != grid.size:
        raise InvalidParameter(f"weight has {vals.size} node values, grid has {grid.size}")
    return vals.reshape(grid.nr, grid.ntheta)


def _check_bandwidth(basis: DiscBasis, h, grid: QuadratureGrid) -> None:
    bw = getattr(h, "bandwidth", None)
    if bw is None:
        return
    need = 2 * (2 * basis.m_max + bw)
    if grid.ntheta <= need:
        warnings.warn(
            f"ntheta={grid.ntheta} does not exceed 2*(2*m_max + bandwidth) = {need}",
            BandwidthTooLow, stacklevel=3,
        )


def assemble_mass(basis: DiscBasis, h, grid: QuadratureGrid) -> np.ndarray:
    """``M_ij = int_D h psi_i psi_j`` under the grid's quadrature rule.

    The angular sums are taken from an FFT of the weight on each ring (the
    same discrete sums as direct quadrature, aliasing included), so assembly
    costs O(nr * size**2) instead of O(nr * ntheta * size**2).
    """
    _check_bandwidth(basis, h, grid)
    hv = weight_values(h, grid)
    nt = grid.ntheta
    wt = 2.0 * np.pi / nt
    F = np.fft.fft(hv, axis=1)
    kmax = 2 * basis.m_max
    kidx = np.arange(kmax + 1) % nt
    ccos = wt * F[:, kidx].real  # sum_j wt h cos(k t_j)
    csin = -wt * F[:, kidx].imag  # sum_j wt h sin(k t_j)

    ma, mb = basis.m[:, None], basis.m[None, :]
    pa, pb = basis.parity[:, None], basis.parity[None, :]
    dif = np.abs(ma - mb)
    tot = ma + mb
    cc = (pa == COS) & (pb == COS)
    ss = (pa == SIN) & (pb == SIN)
    cs = (pa == COS) & (pb == SIN)
    sc = (pa == SIN) & (pb == COS)
    # products of trig functions as sums of single harmonics
    c_dif = np.where(cc | ss, 0.5, 0.0)
    c_tot = np.where(cc, 0.5, np.where(ss, -0.5, 0.0))
    s_tot = np.where(cs | sc, 0.5, 0.0)
    s_dif = np.where(cs, 0.5 * np.sign(mb - ma), np.where(sc, 0.5 * np.sign(ma - mb), 0.0))

    R = basis.radial(grid.r) * np.sqrt(grid.radial_weights)[None, :]
    n = basis.size
    M = np.zeros((n, n))
    for i in range(grid.nr):
        ang = (c_dif * ccos[i][dif] + c_tot * ccos[i][tot]
               + s_dif * csin[i][dif] + s_tot * csin[i][tot])
        Ri = R[:, i]
        M += np.outer(Ri, Ri) * ang
    return 0.5 * (M + M.T)


# ---------------------------------------------------------------- solver


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    coeffs: np.ndarray
    weight_id: str = ""
    solver_params: dict = field(default_factory=dict)
    degenerate: bool = False
    discarded: int = 0

    def __len__(self) -> int:
        return self.eigenvalues.size

    def to_json(self) -> list[dict]:
        return [{"n": i + 1, "lambda": float(v)} for i, v in enumerate(self.eigenvalues)]


def solve_mass(basis: DiscBasis, M: np.ndarray, n_eigs: int | None = None,
               weight_id: str = "", solver_params: dict | None = None) -> Spectrum:
    """Solve ``diag(mu) x = lam M x`` for the smallest eigenvalues.

    Returns eigenvectors normalised so that ``x.T M x = 1``.
    """
    n = basis.size
    if n_eigs is None:
        n_eigs = n
    if int(n_eigs) != n_eigs or not 1 <= n_eigs <= n:
        raise InvalidParameter(f"n_eigs must be in [1, {n}], got {n_eigs}")
    d = 1.0 / np.sqrt(basis.mu)
    S = d[:, None] * M * d[None, :]
    S = 0.5 * (S + S.T)
    nu, Y = np.linalg.eigh(S)
    nu, Y = nu[::-1], Y[:, ::-1]
    numax = max(float(nu[0]), 0.0)
    keep = nu > np.finfo(float).eps * numax
    discarded = int(n - keep.sum())
    degenerate = discarded > 0
    if degenerate:
        warnings.warn(
            f"{discarded} of {n} generalized eigenvalues discarded as spurious "
            "(weight numerically zero on part of the trial space)",
            SingularMass, stacklevel=2,
        )
    nu, Y = nu[keep], Y[:, keep]
    lam = 1.0 / nu
    X = d[:, None] * Y / np.sqrt(nu)[None, :]
    lam, X = _order_ties(basis, lam, X)
    count = min(int(n_eigs), lam.size)
    params = {"m_max": basis.m_max, "k_max": basis.k_max, "n_eigs": int(n_eigs)}
    if solver_params:
        params.update(solver_params)
    return Spectrum(lam[:count], X[:, :count], weight_id, params, degenerate, discarded)


def _order_ties(basis: DiscBasis, lam: np.ndarray, X: np.ndarray):
    """Fix eigenvector signs and order (near-)equal eigenvalues by dominant mode."""
    X = X.copy()
    dom = np.argmax(np.abs(X), axis=0)
    signs = np.sign(X[dom, np.arange(X.shape[1])])
    X *= np.where(signs == 0, 1.0, signs)[None, :]
    key = [(basis.m[i], basis.parity[i], basis.k[i]) for i in dom]
    order = list(range(lam.size))
    start = 0
    while start < lam.size:
        stop = start + 1
        while stop < lam.size and lam[stop] - lam[start] <= TIE_RTOL * abs(lam[start]):
            stop += 1
        if stop - start > 1:
            order[start:stop] = sorted(order[start:stop], key=lambda i: key[i])
        start = stop
    return lam[order], X[:, order]


def solve_weighted(basis: DiscBasis, h, grid: QuadratureGrid, n_eigs: int = 10) -> Spectrum:
    """Ritz values of ``-Lap f = lam h f`` on the disc (upper bounds, ascending)."""
    M = assemble_mass(basis, h, grid)
    return solve_mass(
        basis, M, n_eigs, weight_id=getattr(h, "label", type(h).__name__),
        solver_params={"nr": grid.nr, "ntheta": grid.ntheta},
    )


def kstar(spec: Spectrum) -> float:
    """Sharp Poincare constant ``1 / sqrt(lam_1)``."""
    if len(spec) == 0:
        raise InvalidParameter("empty spectrum")
    return 1.0 / math.sqrt(float(spec.eigenvalues[0]))


def l2h_norm(f, basis: DiscBasis, h, grid: QuadratureGrid, M: np.ndarray | None = None) -> float:
    """``(int_D |f|^2 h)^(1/2)`` for an expansion with coefficients ``f``."""
    f = np.asarray(f, dtype=float)
    if f.size != basis.size:
        raise InvalidParameter(f"coefficient vector has {f.size} entries, basis has {basis.size}")
    if M is None:
        M = assemble_mass(basis, h, grid)
    return math.sqrt(max(float(f @ M @ f), 0.0))


def rayleigh_quotient(x, basis: DiscBasis, M: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(basis.mu * x * x) / (x @ M @ x))
