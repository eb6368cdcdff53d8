"""Complex polynomial / rational-map arithmetic and the unit-circle duality involution.

Everything downstream (fixed-point solving, cusp finding, boundary censuses)
is built on the two types here.  Polynomials are stored with ascending
coefficients: ``coeffs[k]`` multiplies ``z**k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ComplexPoly",
    "RationalMap",
    "RootFindingError",
    "CoprimalityError",
    "all_roots",
    "dualize",
    "is_self_dual",
]

# |root| within this of 1 gets the unit-modulus flag (value never mutated).
UNIT_SNAP_TOL = 1e-9
COPRIME_TOL = 1e-9


class RootFindingError(RuntimeError):
    """Simultaneous iteration failed to converge."""


class CoprimalityError(ValueError):
    """Numerator and denominator share a root within clustering tolerance."""


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1:
        raise ValueError("coefficient array must be one-dimensional")
    scale = np.max(np.abs(c)) if c.size else 0.0
    n = c.size
    while n > 1 and abs(c[n - 1]) <= 1e-300 + 0.0 * scale and c[n - 1] == 0:
        n -= 1
    return c[:n].copy()


@dataclass(frozen=True)
class ComplexPoly:
    """Polynomial with complex coefficients, ascending by power."""

    coeffs: np.ndarray

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _trim(coeffs))
        self.coeffs.setflags(write=False)

    @property
    def degree(self) -> int:
        if self.is_zero():
            return 0
        return len(self.coeffs) - 1

    def is_zero(self, scale: float = 1.0, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol * scale))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        if out.ndim == 0:
            return complex(out)
        return out

    def deriv(self, order: int = 1) -> "ComplexPoly":
        c = self.coeffs
        for _ in range(order):
            if len(c) <= 1:
                c = np.zeros(1, dtype=complex)
                break
            c = c[1:] * np.arange(1, len(c), dtype=float)
        return ComplexPoly(c)

    def conj_coeffs(self) -> "ComplexPoly":
        """Polynomial with conjugated coefficients: pbar(z) = conj(p(conj z))."""
        return ComplexPoly(np.conj(self.coeffs))

    def monic(self) -> "ComplexPoly":
        return ComplexPoly(self.coeffs / self.coeffs[-1])

    def __add__(self, other):
        a, b = self.coeffs, _as_poly(other).coeffs
        n = max(len(a), len(b))
        out = np.zeros(n, dtype=complex)
        out[: len(a)] += a
        out[: len(b)] += b
        return ComplexPoly(out)

    def __sub__(self, other):
        return self + (-1.0) * _as_poly(other)

    def __rmul__(self, scalar):
        return ComplexPoly(self.coeffs * complex(scalar))

    def __mul__(self, other):
        if np.isscalar(other):
            return ComplexPoly(self.coeffs * complex(other))
        return ComplexPoly(np.convolve(self.coeffs, _as_poly(other).coeffs))

    def pow(self, k: int) -> "ComplexPoly":
        out = ComplexPoly([1.0])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift_up(self, k: int) -> "ComplexPoly":
        """Multiply by z**k."""
        return ComplexPoly(np.concatenate([np.zeros(k, dtype=complex), self.coeffs]))

    # -- shared JSON format: list of [re, im], ascending by power ------------
    def to_json(self):
        return [[float(c.real), float(c.imag)] for c in self.coeffs]

    @staticmethod
    def from_json(data) -> "ComplexPoly":
        return ComplexPoly([complex(re, im) for re, im in data])


def _as_poly(p) -> ComplexPoly:
    if isinstance(p, ComplexPoly):
        return p
    return ComplexPoly(np.atleast_1d(np.asarray(p, dtype=complex)))


def _coeff_scale(c: np.ndarray) -> float:
    return float(np.max(np.abs(c)))


def all_roots(p: ComplexPoly, tol: float = 1e-9, max_iter: int = 200) -> np.ndarray:
    """All roots of ``p`` (with multiplicity) by Aberth–Ehrlich iteration.

    Initial guesses sit on a slightly perturbed circle of radius given by the
    Cauchy bound; three Newton polish steps afterwards.  A root whose modulus
    is within 1e-9 of 1 is *flagged* downstream but never snapped here.

    Raises RootFindingError (naming degree and worst residual) when the
    residual test ``|p(root)| <= tol * coefficient_scale`` fails after the
    iteration cap.
    """
    p = _as_poly(p)
    if p.is_zero():
        raise ValueError("all_roots requires a nonzero polynomial")
    c = p.coeffs
    # strip exact zero trailing roots at origin
    nz = 0
    while nz < len(c) - 1 and c[nz] == 0:
        nz += 1
    zero_roots = np.zeros(nz, dtype=complex)
    c = c[nz:]
    n = len(c) - 1
    if n == 0:
        return zero_roots
    if n == 1:
        return np.concatenate([zero_roots, [-c[0] / c[1]]])

    scale = _coeff_scale(c)
    a = c / c[-1]
    # Fujiwara-type root-radius bound tames wildly graded coefficients;
    # work in the rescaled variable z = R*w so iterates stay O(1)
    with np.errstate(all="ignore"):
        mags = np.abs(a[:-1])
        expo = 1.0 / (n - np.arange(n))
        R = 2.0 * np.max(np.where(mags > 0, mags**expo, 0.0))
    if not np.isfinite(R) or R <= 0:
        R = 1.0
    a = a * R ** (np.arange(n + 1, dtype=float) - n)
    cauchy = 1.0 + np.max(np.abs(a[:-1]))
    k = np.arange(n)
    # deterministic angular offset breaks symmetric lock-step
    theta = 2.0 * np.pi * k / n + 0.3761963
    z = cauchy * (0.5 + 0.5 * (k + 1.0) / n) * np.exp(1j * theta)

    dcoeffs = a[1:] * np.arange(1, n + 1)

    def horner(x, coeffs):
        out = np.zeros_like(x)
        for cc in coeffs[::-1]:
            out = out * x + cc
        return out

    converged = False
    with np.errstate(all="ignore"):
        for it in range(max_iter):
            # runaway iterates get reseeded onto the Cauchy circle
            bad = ~np.isfinite(z) | (np.abs(z) > 4.0 * cauchy)
            if np.any(bad):
                z[bad] = cauchy * np.exp(1j * (theta[bad] + 0.1 * (it + 1)))
            pv = horner(z, a)
            dv = horner(z, dcoeffs)
            dv = np.where(dv == 0, 1e-300, dv)
            newton = pv / dv
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            sums = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - newton * sums
            denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
            step = newton / denom
            step = np.where(np.isfinite(step), step, 0.0)
            z = z - step
            if np.max(np.abs(step)) <= 1e-14 * (1.0 + np.max(np.abs(z))):
                converged = True
                break

    z = z * R  # back to the original variable

    # Newton polish (3 steps) on the original, unnormalized coefficients
    dfull = c[1:] * np.arange(1, n + 1)
    with np.errstate(all="ignore"):
        for _ in range(3):
            pv = horner(z, c)
            dv = horner(z, dfull)
            step = np.where(np.abs(dv) > 0, pv / np.where(dv == 0, 1.0, dv), 0.0)
            step = np.where(np.isfinite(step), step, 0.0)
            z = z - step

        resid = np.abs(horner(z, c))
        # residual scale: coefficient magnitudes at the root's modulus
        logmax = np.log(np.maximum(1.0, np.abs(z)))
        local = np.array(
            [
                np.sum(np.abs(c) * np.exp(np.minimum(600.0, np.arange(len(c)) * lm)))
                for lm in logmax
            ]
        )
    ok = resid <= tol * np.maximum(scale, local * 1e-3)
    if not (converged or np.all(ok)):
        worst = float(np.max(resid / np.maximum(scale, 1e-300)))
        raise RootFindingError(
            f"root iteration did not converge for degree-{n} polynomial; "
            f"worst relative residual {worst:.3e}"
        )
    return np.concatenate([zero_roots, z])


def on_unit_circle(root: complex, tol: float = UNIT_SNAP_TOL) -> bool:
    """Unit-modulus flag for a root (the root itself is never mutated)."""
    return abs(abs(root) - 1.0) < tol


def dualize(p: ComplexPoly, k: int) -> ComplexPoly:
    """Involution p*(z) = z^k * conj(p(1 / conj(z))) on the slot Π_k.

    Coefficients are reversed and conjugated relative to slot k.
    """
    p = _as_poly(p)
    if p.degree > k:
        raise ValueError(f"polynomial degree {p.degree} exceeds slot k={k}")
    padded = np.zeros(k + 1, dtype=complex)
    padded[: len(p.coeffs)] = p.coeffs
    return ComplexPoly(np.conj(padded[::-1]))


def is_self_dual(p: ComplexPoly, k: int, tol: float = 1e-12) -> bool:
    """True iff max coefficient deviation between p and dualize(p, k) <= tol."""
    p = _as_poly(p)
    q = dualize(p, k)
    a = np.zeros(k + 1, dtype=complex)
    b = np.zeros(k + 1, dtype=complex)
    a[: len(p.coeffs)] = p.coeffs
    b[: len(q.coeffs)] = q.coeffs
    return bool(np.max(np.abs(a - b)) <= tol)


def _cluster(points: np.ndarray, radius: float):
    """Greedy clustering; returns list of (representative, count)."""
    pts = list(points)
    clusters = []
    for z in pts:
        for i, (rep, members) in enumerate(clusters):
            if abs(z - rep) <= radius * max(1.0, abs(rep)):
                members.append(z)
                clusters[i] = (np.mean(members), members)
                break
        else:
            clusters.append((z, [z]))
    return [(complex(rep), len(members)) for rep, members in clusters]


@dataclass(frozen=True)
class RationalMap:
    """Ratio of two complex polynomials with pole bookkeeping.

    ``degree`` is max(deg numerator, deg denominator); ``n_poles`` counts
    distinct poles including infinity when the numerator degree exceeds the
    denominator degree.
    """

    numerator: ComplexPoly
    denominator: ComplexPoly
    finite_poles: tuple = field(default=None)  # ((location, multiplicity), ...)

    def __init__(self, numerator, denominator, finite_poles=None, check_coprime=True):
        num = _as_poly(numerator)
        den = _as_poly(denominator)
        if den.is_zero():
            raise ValueError("denominator is identically zero")
        if num.is_zero():
            raise ValueError("rational map must be nonconstant (zero numerator)")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        if finite_poles is None:
            if den.degree >= 1:
                den_roots = all_roots(den, tol=1e-8)
                if check_coprime and num.degree >= 1:
                    num_roots = all_roots(num, tol=1e-8)
                    dist = np.abs(den_roots[:, None] - num_roots[None, :])
                    if dist.size and np.min(dist) < COPRIME_TOL * max(
                        1.0, float(np.max(np.abs(den_roots)))
                    ):
                        raise CoprimalityError(
                            "numerator and denominator share a root within tolerance"
                        )
                finite_poles = tuple(_cluster(den_roots, 1e-6))
            else:
                finite_poles = ()
        else:
            finite_poles = tuple((complex(z), int(m)) for z, m in finite_poles)
        object.__setattr__(self, "finite_poles", finite_poles)
        if self.degree < 1:
            raise ValueError("rational map must have degree >= 1")

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.degree)

    @property
    def pole_at_infinity(self) -> int:
        """Multiplicity of the pole at infinity (0 if none)."""
        return max(0, self.numerator.degree - self.denominator.degree)

    @property
    def n_poles(self) -> int:
        return len(self.finite_poles) + (1 if self.pole_at_infinity > 0 else 0)

    def __call__(self, z):
        return self.numerator(z) / self.denominator(z)

    def deriv_at(self, z):
        p, q = self.numerator, self.denominator
        return (p.deriv()(z) * q(z) - p(z) * q.deriv()(z)) / q(z) ** 2

    def deriv_at_infinity(self) -> float:
        """|r'(infinity)| in the limit sense; inf when deg num > deg den + 1."""
        dn, dd = self.numerator.degree, self.denominator.degree
        if dn <= dd:
            return 0.0
        if dn == dd + 1:
            return float(abs(self.numerator.coeffs[-1] / self.denominator.coeffs[-1]))
        return float("inf")

    def conj_reflect(self) -> "RationalMap":
        """r*(w) = conj(r(conj w)): coefficients conjugated."""
        return RationalMap(
            self.numerator.conj_coeffs(),
            self.denominator.conj_coeffs(),
            finite_poles=tuple((np.conj(z), m) for z, m in self.finite_poles),
            check_coprime=False,
        )

    def to_json(self):
        return {
            "numerator": self.numerator.to_json(),
            "denominator": self.denominator.to_json(),
        }

    @staticmethod
    def from_json(data) -> "RationalMap":
        return RationalMap(
            ComplexPoly.from_json(data["numerator"]),
            ComplexPoly.from_json(data["denominator"]),
        )
