import math
import warnings
from functools import lru_cache

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from confspec import confmap, discspec
from confspec.quadrature import build_grid

J01 = 2.404825557695773


def square_side() -> float:
    """Side of the square image of the Schwarz-Christoffel map (1-D quadrature)."""
    f1, _ = sp_integrate.quad(lambda t: (1.0 - t**4) ** -0.5, 0.0, 1.0, limit=200)
    return math.sqrt(2.0) * f1


def lattice_maps() -> dict:
    maps = {
        "identity": confmap.identity(),
        "scale(0.9)": confmap.scale(0.9),
        "scale(0.99)": confmap.scale(0.99),
    }
    for eps in (0.01, 0.05, 0.1):
        for k in (2, 3, 5):
            maps[f"perturbation({eps},{k})"] = confmap.polynomial_perturbation(eps, k)
    return maps


@lru_cache(maxsize=None)
def default_grid():
    return build_grid(64, 256)


@lru_cache(maxsize=None)
def default_basis():
    return discspec.build_basis(12, 12)


@lru_cache(maxsize=None)
def lattice_spectra(name: str, nr: int, ntheta: int, n: int = 10):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return discspec.solve_weighted(
            default_basis(), confmap.weight(lattice_maps()[name]), build_grid(nr, ntheta), n
        )


def lattice_pairs() -> list[tuple[str, str]]:
    names = list(lattice_maps())
    return [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]


@lru_cache(maxsize=None)
def lattice_bopt(a: str, b: str, nr: int, ntheta: int) -> float:
    from confspec import stability

    maps = lattice_maps()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return stability.optimal_b(confmap.weight(maps[a]), confmap.weight(maps[b]),
                                   default_basis(), build_grid(nr, ntheta))


def lattice_report(a: str, b: str, p: float, n: int = 10):
    """full_report for a lattice pair, reusing the p-independent solves."""
    from confspec import stability

    g = default_grid()
    f = g.doubled()
    maps = lattice_maps()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return stability.full_report(
            maps[a], maps[b], p, n, default_basis(), g,
            spectra=(lattice_spectra(a, g.nr, g.ntheta), lattice_spectra(b, g.nr, g.ntheta)),
            fine_spectra=(lattice_spectra(a, f.nr, f.ntheta), lattice_spectra(b, f.nr, f.ntheta)),
            bopt=(lattice_bopt(a, b, g.nr, g.ntheta), lattice_bopt(a, b, f.nr, f.ntheta)),
        )


@pytest.fixture(scope="session")
def grid():
    return default_grid()


@pytest.fixture(scope="session")
def basis():
    return default_basis()


@pytest.fixture(scope="session")
def lattice():
    return lattice_maps()


@pytest.fixture(autouse=True)
def _quiet_bandwidth():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=UserWarning)
        yield


# criterion number -> one-line verdict, filled by test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
