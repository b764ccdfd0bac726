"""Conformal maps of the unit disc as truncated power series.

A map is ``phi(z) = sum_k a_k z**k``.  Everything downstream only needs
``phi`` and ``phi'`` at points of the closed disc, so both are evaluated
with Horner's rule directly from the coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .errors import InvalidParameter, UnivalenceViolation
from .quadrature import QuadratureGrid, integrate

VALIDATION_RADII = 64
VALIDATION_ANGLES = 256
# |phi'| below this fraction of its max on the validation grid counts as zero
ZERO_DERIVATIVE_RTOL = 1e-10


def _validation_points() -> np.ndarray:
    r = np.linspace(0.0, 1.0, VALIDATION_RADII)
    t = 2.0 * np.pi * np.arange(VALIDATION_ANGLES) / VALIDATION_ANGLES
    return np.outer(r, np.exp(1j * t)).ravel()


def _horner(coeffs: np.ndarray, z):
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _series_on_rings(coeffs: np.ndarray, radii: np.ndarray, ntheta: int) -> np.ndarray:
    """``sum_n c_n (r e^{i t_j})^n`` on equispaced angles, shape (len(radii), ntheta).

    Powers beyond ``ntheta`` are folded back (``e^{i n t_j}`` is periodic in
    ``n``), so the result equals direct evaluation up to round-off.
    """
    n = np.arange(coeffs.size)
    with np.errstate(under="ignore"):
        b = coeffs[None, :] * radii[:, None] ** n[None, :]
    if coeffs.size > ntheta:
        folded = np.zeros((radii.size, ntheta), dtype=complex)
        np.add.at(folded, (slice(None), n % ntheta), b)
        b = folded
    else:
        b = np.pad(b, ((0, 0), (0, ntheta - coeffs.size)))
    return np.fft.ifft(b, axis=1) * ntheta


@dataclass(frozen=True, eq=False)
class PowerSeriesMap:
    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size < 2:
            raise InvalidParameter("a power series map needs at least a0 and a1")
        if c[1] == 0:
            raise UnivalenceViolation("a1 = phi'(0) must be nonzero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        dabs = np.abs(_horner(self.derivative_coeffs, _validation_points()))
        dmin = dabs.min()
        if not dmin > ZERO_DERIVATIVE_RTOL * dabs.max():
            raise UnivalenceViolation(
                f"phi' vanishes on the validation grid (min |phi'| = {dmin:.3e})"
            )

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def derivative_coeffs(self) -> np.ndarray:
        k = np.arange(1, self.coeffs.size)
        return k * self.coeffs[1:]

    @property
    def bandwidth(self) -> int:
        """Highest angular frequency of |phi'|**2."""
        return self.coeffs.size - 2

    def __call__(self, z):
        return _horner(self.coeffs, z)

    def derivative(self, z):
        return _horner(self.derivative_coeffs, z)

    def derivative_on_grid(self, grid: QuadratureGrid) -> np.ndarray:
        """``phi'`` at the grid nodes (radius-major), one FFT per ring."""
        return _series_on_rings(self.derivative_coeffs, grid.r, grid.ntheta).ravel()

    def to_spec(self) -> dict:
        return {
            "type": "polynomial",
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }


def eval(m: PowerSeriesMap, z):  # noqa: A001 - operation name
    return m(z)


def eval_derivative(m: PowerSeriesMap, z):
    return m.derivative(z)


# ---------------------------------------------------------------- builtins


def identity() -> PowerSeriesMap:
    return PowerSeriesMap([0, 1], label="identity")


def scale(r: float) -> PowerSeriesMap:
    if not r > 0:
        raise InvalidParameter(f"scale factor must be positive, got {r}")
    return PowerSeriesMap([0, r], label=f"scale({r!r})")


def polynomial_perturbation(eps: complex, k: int) -> PowerSeriesMap:
    """``z + eps z**k``, univalent exactly when ``|eps| <= 1/k``."""
    if int(k) != k or k < 2:
        raise InvalidParameter(f"perturbation order k must be an integer >= 2, got {k}")
    k = int(k)
    if abs(eps) >= 1.0 / k:
        raise UnivalenceViolation(f"|eps| = {abs(eps)} must be < 1/k = {1.0 / k}")
    c = np.zeros(k + 1, dtype=complex)
    c[1] = 1.0
    c[k] = eps
    return PowerSeriesMap(c, label=f"perturbation({eps!r},{k})")


def square_series_rational(terms: int) -> list[Fraction]:
    """Exact coefficients ``binom(2n, n) / 4**n / (4n + 1)``, n < terms."""
    out = []
    central = Fraction(1)
    for n in range(terms):
        if n:
            central *= Fraction(2 * n - 1, 2 * n)
        out.append(central / (4 * n + 1))
    return out


def disc_to_square(terms: int) -> PowerSeriesMap:
    """Truncated Schwarz-Christoffel map of the disc onto a square.

    The full series is the antiderivative of ``(1 - z**4)**-0.5``; its image
    is the square with vertices ``+-f1, +-i f1``, ``f1 = int_0^1 (1-t^4)^-1/2``.
    """
    if int(terms) != terms or terms < 1:
        raise InvalidParameter(f"terms must be a positive integer, got {terms}")
    terms = int(terms)
    c = np.zeros(4 * (terms - 1) + 2, dtype=complex)
    for n, q in enumerate(square_series_rational(terms)):
        c[4 * n + 1] = float(q)
    return PowerSeriesMap(c, label=f"disc_to_square({terms})")


BUILTINS: dict[str, Callable[..., PowerSeriesMap]] = {
    "identity": identity,
    "scale": scale,
    "polynomial_perturbation": polynomial_perturbation,
    "disc_to_square": disc_to_square,
}


def make_builtin(family: str, **params) -> PowerSeriesMap:
    try:
        factory = BUILTINS[family]
    except KeyError:
        raise InvalidParameter(
            f"unknown family {family!r}; expected one of {sorted(BUILTINS)}"
        ) from None
    return factory(**params)


def _require(spec: dict, key: str):
    if key not in spec:
        raise InvalidParameter(f"map spec field {key!r} is missing")
    return spec[key]


def _real(spec: dict, key: str) -> float:
    v = _require(spec, key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidParameter(f"map spec field {key!r} must be a number, got {v!r}")
    return float(v)


def _int(spec: dict, key: str) -> int:
    v = _require(spec, key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidParameter(f"map spec field {key!r} must be an integer, got {v!r}")
    return v


def from_spec(spec: Any) -> PowerSeriesMap:
    """Build a map from its JSON description (dict or JSON text)."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise InvalidParameter(f"map spec is not valid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise InvalidParameter("map spec must be a JSON object")
    kind = _require(spec, "type")
    if kind == "identity":
        return identity()
    if kind == "scale":
        return scale(_real(spec, "r"))
    if kind == "perturbation":
        return polynomial_perturbation(_real(spec, "eps"), _int(spec, "k"))
    if kind == "disc_to_square":
        return disc_to_square(_int(spec, "terms"))
    if kind == "polynomial":
        raw = _require(spec, "coeffs")
        if not isinstance(raw, list):
            raise InvalidParameter("map spec field 'coeffs' must be a list of [re, im] pairs")
        coeffs = []
        for i, pair in enumerate(raw):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise InvalidParameter(f"map spec field 'coeffs[{i}]' must be [re, im]")
            coeffs.append(complex(pair[0], pair[1]))
        return PowerSeriesMap(coeffs, label=spec.get("label", "polynomial"))
    raise InvalidParameter(f"map spec field 'type' has unknown value {kind!r}")


# ---------------------------------------------------------------- weights


@dataclass(frozen=True, eq=False)
class ConformalWeight:
    """``h(z) = |phi'(z)|**2``, the Jacobian of the map."""

    source: PowerSeriesMap

    def __call__(self, z):
        d = self.source.derivative(z)
        return d.real**2 + d.imag**2

    @property
    def label(self) -> str:
        return self.source.label

    @property
    def bandwidth(self) -> int:
        return self.source.bandwidth


def weight(m: PowerSeriesMap) -> ConformalWeight:
    return ConformalWeight(m)


# ---------------------------------------------------------------- functionals


def _lp(grid: QuadratureGrid, values_at, p: float) -> float:
    if math.isinf(p):
        return float(np.max(values_at(grid.sup_points)))
    return float(integrate(grid, values_at(grid.z) ** p) ** (1.0 / p))


def lp_seminorm(m: PowerSeriesMap, p: float, grid: QuadratureGrid) -> float:
    """``(int_D |phi'|**p)**(1/p)``; for ``p = inf`` a grid max (a lower bound)."""
    if not p >= 1:
        raise InvalidParameter(f"p must be >= 1, got {p}")
    return _lp(grid, lambda z: np.abs(m.derivative(z)), p)


def l2_derivative_distance(m1, m2, grid: QuadratureGrid) -> tuple[float, float]:
    """``(|| |phi1'| - |phi2'| ||_2, || phi1' - phi2' ||_2)``."""
    d1 = m1.derivative(grid.z)
    d2 = m2.derivative(grid.z)
    modulus = math.sqrt(integrate(grid, (np.abs(d1) - np.abs(d2)) ** 2))
    full = math.sqrt(integrate(grid, np.abs(d1 - d2) ** 2))
    return modulus, full


def ds_distance(h1, h2, s: float, grid: QuadratureGrid) -> float:
    if not s > 1:
        raise InvalidParameter(f"s must be > 1, got {s}")
    return _lp(grid, lambda z: np.abs(h1(z) - h2(z)), s)


@dataclass(frozen=True)
class MeasureVariation:
    plus: float
    minus: float
    total: float


def measure_variation(m1, m2, grid: QuadratureGrid) -> MeasureVariation:
    """Split of ``int |J1 - J2|`` over ``{J1 >= J2}`` and ``{J1 < J2}`` (nodewise)."""
    diff = weight(m1)(grid.z) - weight(m2)(grid.z)
    plus_mask = diff >= 0
    plus = float(integrate(grid, np.where(plus_mask, diff, 0.0)))
    minus = float(integrate(grid, np.where(plus_mask, 0.0, -diff)))
    total = float(integrate(grid, np.abs(diff)))
    return MeasureVariation(plus, minus, total)


def area(m: PowerSeriesMap, grid: QuadratureGrid) -> float:
    return float(integrate(grid, weight(m)(grid.z)))


def boundary_area(m: PowerSeriesMap, npts: int | None = None) -> float:
    """Area enclosed by ``phi(|z| = 1)`` via ``(1/2) |oint x dy - y dx|``.

    The contour integral is a trigonometric polynomial in the angle, so the
    trapezoid rule with more than ``2 * degree`` points is exact.
    """
    if npts is None:
        npts = max(64, 2 * m.degree + 2)
    t = 2.0 * np.pi * np.arange(npts) / npts
    z = np.exp(1j * t)
    w = m(z)
    dw = m.derivative(z) * 1j * z
    integrand = (np.conj(w) * dw).imag
    return 0.5 * abs(float(np.sum(integrand)) * 2.0 * np.pi / npts)


def linf_seminorm_distance(m1, m2, grid: QuadratureGrid) -> float:
    """Grid max of ``|phi1' - phi2'|`` (including the boundary ring)."""
    pts = grid.sup_points
    return float(np.max(np.abs(m1.derivative(pts) - m2.derivative(pts))))


@dataclass(frozen=True)
class ClassCertificate:
    """Result of testing ``||phi'||_p <= tau``.

    For ``p = inf`` also carries ``inf_jac``, the grid minimum of the
    Jacobian, and whether ``inf_jac >= 1/tau`` holds as well.
    """

    p: float
    seminorm: float
    tau: float
    member: bool
    inf_jac: float | None = None
    in_lipschitz_class: bool | None = None
    grid_max: bool = False
