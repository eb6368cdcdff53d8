import numpy as np
import pytest

from qdlens.ratfun import ComplexPoly, RationalMap
from qdlens.lenssolve import solve_lens


def random_rational_map(rng: np.random.Generator, degree: int) -> RationalMap:
    """Random rational map of the given degree with a random pole pattern."""
    d = degree
    m = int(rng.integers(0, d + 1))  # total finite pole multiplicity
    # random partition of m into multiplicities
    mults = []
    left = m
    while left > 0:
        mu = int(rng.integers(1, left + 1))
        mults.append(mu)
        left -= mu
    poles = []
    while len(poles) < len(mults):
        z = complex(rng.normal(), rng.normal())
        if all(abs(z - w) > 0.3 for w in poles):
            poles.append(z)
    den = ComplexPoly([1.0])
    for z, mu in zip(poles, mults):
        den = den * ComplexPoly([-z, 1.0]).pow(mu)
    num_deg = d if m < d else int(rng.integers(0, d + 1))
    num = ComplexPoly(rng.normal(size=num_deg + 1) + 1j * rng.normal(size=num_deg + 1))
    if max(num.degree, den.degree) != d:
        raise ValueError("degree mismatch")
    # keep clear of common roots
    if any(abs(num(z)) < 1e-3 for z in poles):
        raise ValueError("nearly coprime")
    return RationalMap(
        num, den, finite_poles=tuple(zip(poles, mults)), check_coprime=False
    )


def seeded_hyperbolic_maps(count: int = 100, seed: int = 20240811):
    """Deterministic stream of hyperbolic maps, degrees 2..6, with reports."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        degree = int(rng.integers(2, 7))
        try:
            r = random_rational_map(rng, degree)
            report = solve_lens(r)
        except Exception:
            continue
        if not report.hyperbolic:
            continue
        out.append((r, report))
    return out


@pytest.fixture(scope="session")
def hyperbolic_map_suite():
    return seeded_hyperbolic_maps()
