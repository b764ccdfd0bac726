"""Eigenvalue stability bounds for pairs of conformal weights.

Given maps phi1, phi2 with weights h_i = |phi_i'|**2, every bound below
controls ``|lam_n[h1] - lam_n[h2]|``:

* two-weight bound      B c~/(1 + B sqrt(c~)), valid whenever
                        int |h1 - h2| f^2 <= B int |grad f|^2;
* d_s bound             c~ C(2s/(s-1))**2 d_s(h1, h2);
* derivative bound      c C(4p/(p-2))**2 (|phi1'|_p + |phi2'|_p) || |phi1'| - |phi2'| ||_2;
* measure bound         same with the L2 factor replaced by sqrt(int |J1 - J2|);

with ``c~ = c = max(lam_n[h1], lam_n[h2])**2`` and ``C(q)`` the Sobolev
embedding constant of the disc.  ``C(q)`` is estimated numerically from
below (see :func:`estimate_cq`), so the bounds are evaluated, not certified.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from . import confmap, discspec
from .confmap import ClassCertificate, PowerSeriesMap
from .discspec import DiscBasis, Spectrum
from .errors import DegenerateWeight, ExponentMismatch, InvalidParameter, NonConvergence
from .quadrature import QuadratureGrid

SLACK_FACTOR = 10.0
ROUNDOFF_RTOL = 1e-9


def conjugate_exponent_s(p: float) -> float:
    """``s = 2p/(p+2)``, so that ``1/s = 1/p + 1/2``."""
    return 2.0 if math.isinf(p) else 2.0 * p / (p + 2.0)


def sobolev_exponent_from_s(s: float) -> float:
    """``q = 2s/(s-1)`` (2 for s = inf)."""
    return 2.0 if math.isinf(s) else 2.0 * s / (s - 1.0)


def sobolev_exponent_from_p(p: float) -> float:
    """``q = 4p/(p-2)`` (4 for p = inf)."""
    return 4.0 if math.isinf(p) else 4.0 * p / (p - 2.0)


# ---------------------------------------------------------------- C(q)


@dataclass(frozen=True)
class SobolevConstantEstimate:
    q: float
    value: float
    mode: str = "variational"
    basis_size: int = 0
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    seed: int | None = None


@lru_cache(maxsize=None)
def _radial_setup(basis_size: int, nquad: int):
    x, w = np.polynomial.legendre.leggauss(nquad)
    r = 0.5 * (x + 1.0)
    wa = 2.0 * np.pi * 0.5 * w * r  # area weights of radial functions
    jz = np.array([discspec.bessel_zero(0, k) for k in range(1, basis_size + 1)])
    norm = 1.0 / (math.sqrt(math.pi) * np.abs(special.j1(jz)))
    # columns: psi_k / sqrt(mu_k), so coefficient vectors on the unit sphere
    # have unit Dirichlet energy
    Phi = (norm / jz)[None, :] * special.j0(np.outer(r, jz))
    return wa, Phi


def estimate_cq(q: float, basis_size: int = 32, tol: float = 1e-13, *,
                max_iter: int = 5000, seed: int | None = 0,
                start=None) -> SobolevConstantEstimate:
    """Estimate ``C(q) = sup ||f||_q / ||grad f||_2`` over W_0^{1,2}(D).

    The supremum is attained by a radially decreasing function, so the
    search runs over spans of the first ``basis_size`` radial Dirichlet
    modes.  On the unit-energy sphere ``F(a) = ||f_a||_q^q`` is convex, hence
    the normalised-gradient step ``a <- grad F / |grad F|`` never decreases
    it; the iteration stops when the relative change of the ratio drops
    below ``tol``.  The result approaches ``C(q)`` from below as the basis
    grows.
    """
    if not q >= 2:
        raise InvalidParameter(f"q must be >= 2, got {q}")
    if int(basis_size) != basis_size or basis_size < 1:
        raise InvalidParameter(f"basis_size must be a positive integer, got {basis_size}")
    basis_size = int(basis_size)
    wa, Phi = _radial_setup(basis_size, max(256, 12 * basis_size))

    if start is not None:
        a = np.asarray(start, dtype=float)
    elif seed is None:
        a = np.zeros(basis_size)
        a[0] = 1.0
    else:
        a = np.random.default_rng(seed).standard_normal(basis_size)
    a = a / np.linalg.norm(a)

    def value_and_grad(a):
        f = Phi @ a
        af = np.abs(f)
        F = float(wa @ af**q)
        g = q * (Phi.T @ (wa * af ** (q - 2.0) * f))
        return F, g

    F, g = value_and_grad(a)
    ratio = F ** (1.0 / q)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        a = g / np.linalg.norm(g)
        F, g = value_and_grad(a)
        new = F ** (1.0 / q)
        change = abs(new - ratio) / new
        ratio = new
        if change <= tol:
            converged = True
            break
    gn = np.linalg.norm(g)
    residual = float(np.linalg.norm(g - (g @ a) * a) / gn) if gn else 0.0
    if not converged:
        warnings.warn(f"C({q}) estimate did not converge in {max_iter} iterations",
                      NonConvergence, stacklevel=2)
    return SobolevConstantEstimate(float(q), float(ratio), "variational", basis_size, it,
                                   residual, converged, seed)


def user_cq(q: float, value: float) -> SobolevConstantEstimate:
    """Wrap a user-supplied admissible constant."""
    return SobolevConstantEstimate(float(q), float(value), mode="user_override")


@lru_cache(maxsize=64)
def cq_cached(q: float, basis_size: int = 32) -> SobolevConstantEstimate:
    # the seedless start (first radial mode) is positive, like the maximiser
    return estimate_cq(q, basis_size, seed=None)


# ---------------------------------------------------------------- bounds


def bound_two_weight(B: float, lam1_n: float, lam2_n: float) -> float:
    """``B c~ / (1 + B sqrt(c~))`` with ``c~ = max(lam1_n, lam2_n)**2``."""
    if B < 0:
        raise InvalidParameter(f"B must be nonnegative, got {B}")
    root = max(lam1_n, lam2_n)
    if math.isinf(B):
        return root
    return B * root * root / (1.0 + B * root)


def b_from_ds(ds: float, s: float, cq: SobolevConstantEstimate) -> float:
    """``C(2s/(s-1))**2 * d_s``."""
    if not s > 1:
        raise InvalidParameter(f"s must be > 1, got {s}")
    q = sobolev_exponent_from_s(s)
    if not math.isclose(cq.q, q, rel_tol=1e-12):
        raise ExponentMismatch(f"C(q) was estimated at q={cq.q}, but s={s} needs q={q}")
    return cq.value**2 * ds


def difference_weight(h1, h2):
    def w(z):
        return np.abs(h1(z) - h2(z))
    w.label = f"|{getattr(h1, 'label', 'h1')} - {getattr(h2, 'label', 'h2')}|"
    return w


def optimal_b(h1, h2, basis: DiscBasis, grid: QuadratureGrid) -> float:
    """Smallest admissible two-weight constant, ``1 / lam_1[|h1 - h2|]``.

    Computed with the Galerkin solver on the (possibly degenerate) weight
    ``|h1 - h2|``; the Ritz value over-estimates ``lam_1``, so the returned
    constant is a lower approximation.
    """
    w = difference_weight(h1, h2)
    wv = discspec.weight_values(w, grid)
    if not np.any(wv > 0):
        warnings.warn("weights coincide on the grid; optimal B is 0", DegenerateWeight,
                      stacklevel=2)
        return 0.0
    M = discspec.assemble_mass(basis, wv.ravel(), grid)
    with warnings.catch_warnings():
        # zero sets of |h1 - h2| routinely kill a few discrete modes
        warnings.simplefilter("ignore", discspec.SingularMass)
        spec = discspec.solve_mass(basis, M, 1)
    if len(spec) == 0:
        return 0.0
    return 1.0 / float(spec.eigenvalues[0])


def sharpened_bound(Bopt: float, lam1_n: float, lam2_n: float) -> float:
    """``max(lam1_n, lam2_n)**2 / lam_1[|h1 - h2|]``."""
    return Bopt * max(lam1_n, lam2_n) ** 2


def check_class(m: PowerSeriesMap, p: float, tau: float, grid: QuadratureGrid) -> ClassCertificate:
    """Membership of ``m`` in the class ``||phi'||_p <= tau``.

    For ``p = inf`` the Jacobian lower bound ``inf |phi'|**2 >= 1/tau`` of the
    bi-Lipschitz class is reported too (both as grid extrema).
    """
    if not p > 2:
        raise InvalidParameter(f"p must be in (2, inf], got {p}")
    semi = confmap.lp_seminorm(m, p, grid)
    inf_jac = None
    in_lipschitz_class = None
    if math.isinf(p):
        inf_jac = float(np.min(confmap.weight(m)(grid.sup_points)))
        in_lipschitz_class = bool(semi <= tau and inf_jac >= 1.0 / tau)
    return ClassCertificate(float(p), semi, float(tau), bool(semi <= tau),
                            inf_jac, in_lipschitz_class, grid_max=math.isinf(p))


# ---------------------------------------------------------------- report


@dataclass
class PairQuantities:
    """Everything in a report that depends on the quadrature grid."""

    lambdas1: np.ndarray
    lambdas2: np.ndarray
    norm1: float
    norm2: float
    l2_modulus: float
    l2_full: float
    ds: float
    measure: confmap.MeasureVariation
    optimal_b: float


def pair_quantities(m1, m2, p, n_max, basis, grid, spectra=None, bopt=None) -> PairQuantities:
    h1, h2 = confmap.weight(m1), confmap.weight(m2)
    s = conjugate_exponent_s(p)
    if spectra is None:
        spectra = (discspec.solve_weighted(basis, h1, grid, n_max),
                   discspec.solve_weighted(basis, h2, grid, n_max))
    l1, l2 = (np.asarray(sp.eigenvalues[:n_max], dtype=float) for sp in spectra)
    mod, full = confmap.l2_derivative_distance(m1, m2, grid)
    return PairQuantities(
        lambdas1=l1, lambdas2=l2,
        norm1=confmap.lp_seminorm(m1, p, grid), norm2=confmap.lp_seminorm(m2, p, grid),
        l2_modulus=mod, l2_full=full,
        ds=confmap.ds_distance(h1, h2, s, grid),
        measure=confmap.measure_variation(m1, m2, grid),
        optimal_b=optimal_b(h1, h2, basis, grid) if bopt is None else float(bopt),
    )


def _bounds(pq: PairQuantities, C2: float) -> dict[str, np.ndarray]:
    l1, l2 = pq.lambdas1, pq.lambdas2
    c = np.maximum(l1, l2) ** 2
    B = C2 * pq.ds
    tau = max(pq.norm1, pq.norm2)
    return {
        "diff": np.abs(l1 - l2),
        "c": c,
        "lemma31": np.array([bound_two_weight(B, a, b) for a, b in zip(l1, l2)]),
        "thm33": c * C2 * pq.ds,
        "thm44": c * C2 * (pq.norm1 + pq.norm2) * pq.l2_modulus,
        "measure": c * C2 * (pq.norm1 + pq.norm2) * math.sqrt(pq.measure.total),
        "opt": np.array([bound_two_weight(pq.optimal_b, a, b) for a, b in zip(l1, l2)]),
        "sharpened": pq.optimal_b * c,
        "thm12": c * C2 * 2.0 * tau * pq.l2_full,
    }


CHECKED_BOUNDS = ("thm44", "thm33", "lemma31", "opt", "measure")


@dataclass
class StabilityReport:
    n_max: int
    p: float
    s: float
    q: float
    lambdas1: list
    lambdas2: list
    diffs: list
    c_n: list
    c_tilde_n: list
    d_s: float
    cq: SobolevConstantEstimate
    B: float
    optimalB: float
    norm1_p: float
    norm2_p: float
    l2_modulus: float
    l2_full: float
    measure_variation: dict
    bound_lemma31: list
    bound_thm33: list
    bound_thm44: list
    bound_measure: list
    bound_opt: list
    bound_sharpened: list
    bound_thm12: list
    B_p_tau: float
    tau: float
    class_certificates: list
    slack: dict
    satisfied_by_bound: dict
    satisfied: list
    trivial_regime: list
    error_estimates: dict
    quadrature: dict
    solver: dict
    grid_max_norms: bool = False
    notes: list = field(default_factory=list)

    @property
    def all_satisfied(self) -> bool:
        return all(self.satisfied)

    def to_dict(self) -> dict:
        out = asdict(self)
        return _jsonable(out)

    def csv_rows(self) -> list[list]:
        rows = []
        for i in range(self.n_max):
            rows.append([i + 1, self.lambdas1[i], self.lambdas2[i], self.diffs[i],
                         self.bound_thm44[i], self.bound_thm33[i], self.bound_opt[i],
                         self.satisfied[i]])
        return rows


CSV_HEADER = "n,lambda1,lambda2,diff,bound_thm44,bound_thm33,bound_opt,satisfied"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        x = float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def full_report(m1: PowerSeriesMap, m2: PowerSeriesMap, p: float = 4.0, n_max: int = 10,
                basis: DiscBasis | None = None, grid: QuadratureGrid | None = None,
                cq: SobolevConstantEstimate | None = None,
                spectra=None, fine_spectra=None, bopt=None) -> StabilityReport:
    """Evaluate every stability bound for the pair ``(m1, m2)``.

    Grid-dependent quantities are recomputed on the doubled grid; the slack
    allowed in each inequality check is ``10 x`` the resulting change of the
    two sides, plus a round-off floor of ``1e-9 * max(lam1_n, lam2_n)``.
    ``spectra`` / ``fine_spectra`` may carry precomputed pairs of spectra on
    ``grid`` and ``grid.doubled()``, and ``bopt`` the pair of optimal
    constants on the same two grids; none of them depends on ``p``.
    """
    if not p > 2:
        raise InvalidParameter(f"p must be in (2, inf], got {p}")
    from .quadrature import build_grid, default_grid_size

    basis = basis if basis is not None else discspec.build_basis()
    grid = grid if grid is not None else build_grid(*default_grid_size())
    if not 1 <= n_max <= basis.size:
        raise InvalidParameter(f"n_max must be in [1, {basis.size}], got {n_max}")
    s = conjugate_exponent_s(p)
    q = sobolev_exponent_from_p(p)
    if cq is None:
        cq = cq_cached(q)
    elif not math.isclose(cq.q, q, rel_tol=1e-12):
        raise ExponentMismatch(f"C(q) was estimated at q={cq.q}, p={p} needs q={q}")
    C2 = cq.value**2

    bc_opt, bf_opt = bopt if bopt is not None else (None, None)
    coarse = pair_quantities(m1, m2, p, n_max, basis, grid, spectra, bc_opt)
    fine = pair_quantities(m1, m2, p, n_max, basis, grid.doubled(), fine_spectra, bf_opt)
    bc, bf = _bounds(coarse, C2), _bounds(fine, C2)

    floor = ROUNDOFF_RTOL * np.maximum(coarse.lambdas1, coarse.lambdas2)
    ddiff = np.abs(bf["diff"] - bc["diff"])
    slack, ok = {}, {}
    for name in CHECKED_BOUNDS:
        slack[name] = SLACK_FACTOR * (ddiff + np.abs(bf[name] - bc[name])) + floor
        ok[name] = bc["diff"] <= bc[name] + slack[name]
    satisfied = np.logical_and.reduce([ok[k] for k in CHECKED_BOUNDS])
    root_c = np.sqrt(bc["c"])
    trivial = {k: (bc[k] > root_c).tolist() for k in ("thm44", "thm33", "lemma31", "opt")}

    tau = max(coarse.norm1, coarse.norm2)
    certs = [asdict(check_class(m, p, tau, grid)) for m in (m1, m2)]
    errors = {
        "lambdas1": np.abs(fine.lambdas1 - coarse.lambdas1),
        "lambdas2": np.abs(fine.lambdas2 - coarse.lambdas2),
        "d_s": abs(fine.ds - coarse.ds),
        "norm1_p": abs(fine.norm1 - coarse.norm1),
        "norm2_p": abs(fine.norm2 - coarse.norm2),
        "l2_modulus": abs(fine.l2_modulus - coarse.l2_modulus),
        "measure_total": abs(fine.measure.total - coarse.measure.total),
        "optimalB": abs(fine.optimal_b - coarse.optimal_b),
    }
    notes = [
        "C(q) is a variational lower estimate; inequality checks are numerical evidence.",
        "injectivity of the maps is assumed, not verified.",
    ]
    if math.isinf(p):
        notes.append("p = inf norms are grid maxima (lower bounds of the supremum).")
    return StabilityReport(
        n_max=n_max, p=p, s=s, q=q,
        lambdas1=coarse.lambdas1, lambdas2=coarse.lambdas2, diffs=bc["diff"],
        c_n=bc["c"], c_tilde_n=bc["c"], d_s=coarse.ds, cq=cq, B=C2 * coarse.ds,
        optimalB=coarse.optimal_b, norm1_p=coarse.norm1, norm2_p=coarse.norm2,
        l2_modulus=coarse.l2_modulus, l2_full=coarse.l2_full,
        measure_variation=asdict(coarse.measure),
        bound_lemma31=bc["lemma31"], bound_thm33=bc["thm33"], bound_thm44=bc["thm44"],
        bound_measure=bc["measure"], bound_opt=bc["opt"], bound_sharpened=bc["sharpened"],
        bound_thm12=bc["thm12"], B_p_tau=C2 * 2.0 * tau, tau=tau,
        class_certificates=certs, slack=slack,
        satisfied_by_bound={k: v.tolist() for k, v in ok.items()},
        satisfied=satisfied.tolist(), trivial_regime=trivial, error_estimates=errors,
        quadrature={"nr": grid.nr, "ntheta": grid.ntheta,
                    "doubled": {"nr": 2 * grid.nr, "ntheta": 2 * grid.ntheta}},
        solver={"m_max": basis.m_max, "k_max": basis.k_max, "basis_size": basis.size},
        grid_max_norms=math.isinf(p), notes=notes,
    )
