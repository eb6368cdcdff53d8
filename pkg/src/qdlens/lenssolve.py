"""Fixed points of z -> conj(r(z)): solving, classification, and counting.

The equation r(z) = conj(z) is attacked through the holomorphic composition
z = r*(r(z)) with r*(w) = conj(r(conj w)); candidate roots of the cleared
numerator are filtered by the direct residual |r(z) - conj(z)| and polished
with Newton steps on the underlying pair of real equations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ratfun import ComplexPoly, RationalMap, all_roots

__all__ = [
    "FixedPoint",
    "FixedPointReport",
    "LensConfig",
    "ConstructionSeed",
    "ContinuumFixedPointsError",
    "NonHyperbolicError",
    "build_fixed_point_poly",
    "solve_lens",
    "verify_lefschetz",
    "check_sharp_bound",
    "lens_from_masses",
    "hele_shaw_local_min",
    "search_max_images",
    "GAMMA0",
]

# feasibility threshold for the two-disk ellipse packing
GAMMA0 = (2.0 - math.sqrt(2.0)) / (2.0 + math.sqrt(2.0))

HYPERBOLICITY_MARGIN = 1e-6
SUPERATTRACT_TOL = 1e-8
CLUSTER_RADIUS = 1e-6


class ContinuumFixedPointsError(ValueError):
    """r*(r(z)) is the identity: the solution set is a continuum."""


class NonHyperbolicError(RuntimeError):
    """A requested check assumes all fixed points are hyperbolic."""


@dataclass(frozen=True)
class FixedPoint:
    location: complex | None  # None marks the point at infinity
    multiplier: float  # |r'| (math.inf allowed at infinity)
    kind: str  # attracting | repelling | superattracting | nonhyperbolic

    @property
    def is_infinity(self) -> bool:
        return self.location is None

    def to_json(self):
        z = "inf" if self.location is None else [self.location.real, self.location.imag]
        mult = "inf" if math.isinf(self.multiplier) else self.multiplier
        return {"z": z, "multiplier": mult, "class": self.kind}


@dataclass
class FixedPointReport:
    points: list
    degree: int
    distinct_poles: int
    hyperbolic: bool

    @property
    def F(self) -> int:
        return sum(1 for p in self.points if not p.is_infinity)

    @property
    def A(self) -> int:
        return sum(
            1
            for p in self.points
            if not p.is_infinity and p.kind in ("attracting", "superattracting")
        )

    @property
    def Fhat(self) -> int:
        return len(self.points)

    @property
    def Ahat(self) -> int:
        return sum(1 for p in self.points if p.kind in ("attracting", "superattracting"))

    def finite_locations(self) -> np.ndarray:
        return np.array([p.location for p in self.points if not p.is_infinity])

    def to_json(self):
        data = {
            "schema": 1,
            "points": [p.to_json() for p in self.points],
            "F": self.F,
            "A": self.A,
            "Fhat": self.Fhat,
            "Ahat": self.Ahat,
            "d": self.degree,
            "n": self.distinct_poles,
        }
        if self.hyperbolic:
            data["lefschetzResidual"] = verify_lefschetz(self)
        else:
            data["lefschetzResidual"] = None
        return data


def build_fixed_point_poly(r: RationalMap) -> ComplexPoly:
    """Cleared numerator of r*(r(z)) - z; every solution of r(z)=conj(z) is a root."""
    p, q = r.numerator, r.denominator
    rs = r.conj_reflect()
    M = max(rs.numerator.degree, rs.denominator.degree)

    def compose_cleared(u: ComplexPoly) -> ComplexPoly:
        # u(p/q) * q^M for a polynomial u given in slot degree M
        out = ComplexPoly([0.0])
        for j, cj in enumerate(u.coeffs):
            out = out + cj * (p.pow(j) * q.pow(M - j))
        return out

    Pc = compose_cleared(rs.numerator)
    Qc = compose_cleared(rs.denominator)
    N = Pc - ComplexPoly([0.0, 1.0]) * Qc
    scale = max(
        np.max(np.abs(Pc.coeffs)), np.max(np.abs(Qc.coeffs)), 1e-300
    )
    if np.all(np.abs(N.coeffs) <= 1e-12 * scale):
        raise ContinuumFixedPointsError(
            "r*(r(z)) is the identity map; r(z) = conj(z) holds on a continuum"
        )
    # composition can nearly cancel the top coefficients; the numerically
    # meaningful degree drops and near-infinity phantom roots would otherwise
    # poison the root finder
    c = np.array(N.coeffs)
    top = len(c)
    while top > 1 and abs(c[top - 1]) <= 1e-12 * scale:
        top -= 1
    return ComplexPoly(c[:top])


def _newton_polish_pair(r: RationalMap, z: complex, steps: int = 40) -> complex:
    # Damped Newton on the real pair Re/Im of H(z) = r(z) - conj(z):
    # solve a*dz - conj(dz) = -H with a = r'(z).  Backtracking keeps the
    # iterate in the basin of the nearest solution; composed-polynomial
    # candidates can start a sizable distance from their root.
    with np.errstate(all="ignore"):
        for _ in range(steps):
            H = r(z) - np.conj(z)
            if not np.isfinite(H):
                break
            a = r.deriv_at(z)
            denom = abs(a) ** 2 - 1.0
            if abs(denom) < 1e-14:
                break
            dz = -(np.conj(H) + np.conj(a) * H) / denom
            t = 1.0
            base = abs(H)
            accepted = False
            for _damp in range(24):
                znew = z + t * dz
                Hnew = r(znew) - np.conj(znew)
                if np.isfinite(Hnew) and abs(Hnew) < base:
                    z = znew
                    accepted = True
                    break
                t *= 0.5
            if not accepted or abs(t * dz) < 1e-16 * max(1.0, abs(z)):
                break
    return z


def _classify(mult: float) -> str:
    if mult <= SUPERATTRACT_TOL:
        return "superattracting"
    if abs(mult - 1.0) < HYPERBOLICITY_MARGIN:
        return "nonhyperbolic"
    return "attracting" if mult < 1.0 else "repelling"


def solve_lens(r: RationalMap, tol: float = 1e-8) -> FixedPointReport:
    """Solve r(z) = conj(z); classify every solution, infinity included."""
    N = build_fixed_point_poly(r)
    if N.degree == 0:
        candidates = np.array([], dtype=complex)
    else:
        # Aberth candidates plus companion-matrix roots; the residual filter
        # below keeps only genuine solutions, so extra candidates are free and
        # the union guards against either finder dropping a clustered root.
        candidates = all_roots(N, tol=1e-7)
        with np.errstate(all="ignore"):
            extra = np.roots(N.coeffs[::-1])
        candidates = np.concatenate([candidates, extra[np.isfinite(extra)]])

    accepted = []
    for z in candidates:
        qv = abs(r.denominator(z))
        if qv < 1e-10 * max(1.0, abs(z) ** r.denominator.degree):
            continue  # candidate sits on a pole
        z = _newton_polish_pair(r, complex(z))
        resid = abs(r(z) - np.conj(z))
        if resid <= tol * max(1.0, abs(z) ** 2):
            accepted.append(z)

    # dedupe by clustering radius
    unique = []
    for z in sorted(accepted, key=lambda w: (w.real, w.imag)):
        if all(abs(z - u) > CLUSTER_RADIUS * max(1.0, abs(u)) for u in unique):
            unique.append(z)

    points = []
    hyperbolic = True
    for z in unique:
        mult = float(abs(r.deriv_at(z)))
        kind = _classify(mult)
        if kind == "nonhyperbolic":
            hyperbolic = False
        points.append(FixedPoint(complex(z), mult, kind))

    if r.pole_at_infinity > 0:
        # infinity is fixed; attracting iff |r'| > 1 in the limit
        mult = r.deriv_at_infinity()
        if math.isinf(mult):
            kind = "attracting"
        elif abs(mult - 1.0) < HYPERBOLICITY_MARGIN:
            kind = "nonhyperbolic"
            hyperbolic = False
        else:
            kind = "attracting" if mult > 1.0 else "repelling"
        points.append(FixedPoint(None, mult, kind))

    return FixedPointReport(
        points=points,
        degree=r.degree,
        distinct_poles=r.n_poles,
        hyperbolic=hyperbolic,
    )


def verify_lefschetz(report: FixedPointReport) -> int:
    """Residual Fhat - (2*Ahat + d - 1); exactly 0 for a correct hyperbolic solve."""
    if not report.hyperbolic:
        bad = [p for p in report.points if p.kind == "nonhyperbolic"]
        raise NonHyperbolicError(
            f"{len(bad)} fixed point(s) within {HYPERBOLICITY_MARGIN} of |r'|=1; "
            "Lefschetz verification refused"
        )
    return report.Fhat - (2 * report.Ahat + report.degree - 1)


def check_sharp_bound(report: FixedPointReport) -> bool:
    """Fhat <= min(3d + 2n - 3, 5d - 5); a violation signals a solver bug."""
    d, n = report.degree, report.distinct_poles
    if d < 2:
        raise ValueError("sharp bound requires degree d >= 2")
    return report.Fhat <= min(3 * d + 2 * n - 3, 5 * d - 5)


# ---------------------------------------------------------------------------
# gravitational lens configurations
# ---------------------------------------------------------------------------


@dataclass
class LensConfig:
    """Shear gamma, source s, point masses eps_j at positions z_j."""

    gamma: float
    source: complex
    masses: list
    positions: list

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("shear gamma must be nonnegative")
        if any(e <= 0 for e in self.masses):
            raise ValueError("all masses must be positive")
        if len(self.masses) != len(self.positions):
            raise ValueError("masses and positions must pair up")
        pos = [complex(z) for z in self.positions]
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                if abs(pos[i] - pos[j]) < 1e-12:
                    raise ValueError("mass positions must be pairwise distinct")
        self.positions = pos
        self.masses = [float(e) for e in self.masses]
        self.source = complex(self.source)

    def to_json(self):
        return {
            "schema": 1,
            "gamma": self.gamma,
            "source": [self.source.real, self.source.imag],
            "masses": list(self.masses),
            "positions": [[z.real, z.imag] for z in self.positions],
        }

    @staticmethod
    def from_json(data) -> "LensConfig":
        return LensConfig(
            gamma=float(data["gamma"]),
            source=complex(data["source"][0], data["source"][1]),
            masses=[float(e) for e in data["masses"]],
            positions=[complex(p[0], p[1]) for p in data["positions"]],
        )


def lens_from_masses(config: LensConfig) -> RationalMap:
    """r(z) = -gamma*z + s + sum eps_j / (z - z_j).

    Degree N+1 when gamma > 0, N otherwise; residue at z_j equals eps_j.
    """
    den = ComplexPoly([1.0])
    for z in config.positions:
        den = den * ComplexPoly([-z, 1.0])
    num = ComplexPoly([config.source, -config.gamma]) * den
    for e, z in zip(config.masses, config.positions):
        part = ComplexPoly([e])
        for w in config.positions:
            if w is not z:
                part = part * ComplexPoly([-w, 1.0])
        num = num + part
    poles = tuple((z, 1) for z in config.positions)
    return RationalMap(num, den, finite_poles=poles, check_coprime=False)


def hele_shaw_local_min(
    r: RationalMap, z0: complex, probe_radius: float = 1e-3, n_probe: int = 32
):
    """Gradient residual and Hessian determinant of the algebraic potential at z0.

    Q(z) = |z|^2 - |z0|^2 - 2 Re integral_{z0}^{z} r; the gradient residual is
    |conj(z0) - r(z0)| and the (quarter-)Hessian determinant is 1 - |r'(z0)|^2,
    positive exactly at attracting points.  Q is also sampled on the probe
    circle and must be strictly positive there for a genuine local minimum.
    """
    z0 = complex(z0)
    grad_resid = float(abs(np.conj(z0) - r(z0)))
    det = 1.0 - float(abs(r.deriv_at(z0))) ** 2

    def integrate_segment(a: complex, b: complex) -> complex:
        # 64-node Gauss-Legendre on a straight segment, deflecting around poles
        poles = np.array([z for z, _ in r.finite_poles], dtype=complex)
        for attempt in range(3):
            if attempt == 0:
                path = [a, b]
            else:
                # deflect the midpoint perpendicular to the segment
                off = 1j * (b - a) * (0.5 * attempt)
                path = [a, 0.5 * (a + b) + off, b]
            ok = True
            for u, v in zip(path[:-1], path[1:]):
                if poles.size:
                    t = np.linspace(0, 1, 33)
                    seg = u + t * (v - u)
                    dmin = np.min(np.abs(seg[:, None] - poles[None, :]))
                    if dmin < 1e-6 * max(1.0, abs(v - u)):
                        ok = False
                        break
            if not ok:
                continue
            x, w = np.polynomial.legendre.leggauss(64)
            total = 0.0 + 0.0j
            for u, v in zip(path[:-1], path[1:]):
                mid = 0.5 * (u + v)
                half = 0.5 * (v - u)
                total += half * np.sum(w * r(mid + half * x))
            return total
        raise RuntimeError("pole on integration path; deflection retries exhausted")

    theta = 2 * np.pi * np.arange(n_probe) / n_probe
    ring = z0 + probe_radius * np.exp(1j * theta)
    q_ring = np.empty(n_probe)
    for k, z in enumerate(ring):
        integral = integrate_segment(z0, z)
        q_ring[k] = abs(z) ** 2 - abs(z0) ** 2 - 2.0 * integral.real
    return {
        "gradient_residual": grad_resid,
        "hessian_det": det,
        "probe_min": float(np.min(q_ring)),
    }


# ---------------------------------------------------------------------------
# image-count maximization for physical lens configurations
# ---------------------------------------------------------------------------


@dataclass
class ConstructionSeed:
    """Disk-packing geometry seeding the image-count search.

    The ellipse with vertical major axis 4 and shear gamma = b/a (a+b = 2)
    just admits two kissing equal disks along the major axis when
    gamma > GAMMA0; masses are the squared radii.
    """

    gamma: float
    centers: list
    radii: list
    source: complex = 0.0

    def config(self) -> LensConfig:
        return LensConfig(
            gamma=self.gamma,
            source=self.source,
            masses=[rr**2 for rr in self.radii],
            positions=list(self.centers),
        )


def _ellipse_semi_axes(gamma: float):
    # f(w) = a w - b/w with b = 2 - a, gamma = b/a: horizontal a-b, vertical a+b=2
    a = 2.0 / (1.0 + gamma)
    b = 2.0 - a
    return a - b, 2.0


def _snug_disk_radius(gamma: float) -> float:
    """Radius rho such that disks at (0, +-rho) kiss and touch the ellipse."""
    ax, ay = _ellipse_semi_axes(gamma)

    def clearance(rho):
        # min over ellipse boundary of (distance from (0, rho)) - rho
        t = np.linspace(0, np.pi, 2048)
        ex, ey = ax * np.cos(t), ay * np.sin(t)
        return float(np.min(np.hypot(ex, ey - rho))) - rho

    lo, hi = 1e-3, min(ax, 1.0)
    if clearance(hi) > 0:
        return hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if clearance(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def default_seed(N: int, gamma: float = 0.5) -> ConstructionSeed:
    """Two kissing disks on the major axis; extra disks stacked alternately."""
    rho = _snug_disk_radius(gamma)
    centers = [1j * rho, -1j * rho]
    radii = [rho, rho]
    # remaining masses hug the minor axis, mirror-symmetric
    ax, _ = _ellipse_semi_axes(gamma)
    k = 0
    while len(centers) < N:
        side = 1 if k % 2 == 0 else -1
        row = 1 + k // 2
        centers.append(side * (0.55 * ax) + 0.0j * row)
        radii.append(0.25 * rho)
        k += 1
    return ConstructionSeed(gamma=gamma, centers=centers[:N], radii=radii[:N])


def _count_images(config: LensConfig) -> FixedPointReport | None:
    try:
        r = lens_from_masses(config)
        return solve_lens(r)
    except Exception:
        return None


def search_max_images(
    N: int,
    seed: ConstructionSeed | None = None,
    budget: int = 10_000,
    rng_seed: int = 0,
):
    """Derivative-free search for lens configs maximizing the finite image count.

    Returns (best LensConfig, best F, shortfall flag). The target is 5N-1
    images for gamma in (GAMMA0, 1); positivity of the masses is enforced by
    a log parametrization.  Deterministic for fixed seeds.
    """
    from scipy.optimize import minimize

    if N < 1:
        raise ValueError("N >= 1 required")
    if seed is None:
        seed = default_seed(N)

    target = 5 * N - 1
    evals = 0
    best = {"F": -1, "config": None, "margin": 0.0}

    def pack(config: LensConfig) -> np.ndarray:
        x = [config.gamma, config.source.real, config.source.imag]
        for e in config.masses:
            x.append(math.log(e))
        for z in config.positions:
            x.extend([z.real, z.imag])
        return np.array(x)

    def unpack(x) -> LensConfig | None:
        gamma = float(x[0])
        if not (0.0 <= gamma < 1.0):
            return None
        s = complex(x[1], x[2])
        masses = [math.exp(float(v)) for v in x[3 : 3 + N]]
        rest = x[3 + N :]
        pos = [complex(rest[2 * j], rest[2 * j + 1]) for j in range(N)]
        try:
            return LensConfig(gamma=gamma, source=s, masses=masses, positions=pos)
        except ValueError:
            return None

    def objective(x) -> float:
        nonlocal evals
        if evals >= budget:
            return 1e9
        evals += 1
        config = unpack(x)
        if config is None:
            return 1e6
        report = _count_images(config)
        if report is None:
            return 1e6
        F = report.F
        finite = [p for p in report.points if not p.is_infinity]
        margin = min((abs(p.multiplier - 1.0) for p in finite), default=0.0)
        margin = min(margin, 1.0)
        if F > best["F"] or (F == best["F"] and margin > best["margin"]):
            best.update(F=F, config=config, margin=margin)
        return -(F + 0.5 * margin)

    # symmetric family scan: gamma x separation x mass, source at 0
    rng = np.random.default_rng(rng_seed)
    rho0 = seed.radii[0]
    scan_gammas = np.linspace(max(GAMMA0 + 0.03, seed.gamma - 0.25), 0.9, 8)
    scan_sep = np.linspace(0.3 * rho0, 2.0 * rho0, 10)
    scan_mass = np.linspace(0.2 * rho0**2, 2.0 * rho0**2, 9)
    x0_best, f_best = None, 1e18
    if N == 2:
        for g in scan_gammas:
            for y in scan_sep:
                for m in scan_mass:
                    if evals >= budget // 2:
                        break
                    cfg = LensConfig(
                        gamma=float(g),
                        source=0.0,
                        masses=[float(m), float(m)],
                        positions=[1j * float(y), -1j * float(y)],
                    )
                    val = objective(pack(cfg))
                    if val < f_best:
                        f_best, x0_best = val, pack(cfg)
    if x0_best is None:
        x0_best = pack(seed.config())
        f_best = objective(x0_best)

    # Nelder-Mead refinement from the scan optimum, then jittered restarts
    while evals < budget and best["F"] < target:
        res = minimize(
            objective,
            x0_best,
            method="Nelder-Mead",
            options={"maxfev": max(10, budget - evals), "xatol": 1e-10, "fatol": 1e-12},
        )
        if best["F"] >= target or evals >= budget:
            break
        x0_best = res.x + rng.normal(scale=0.02, size=res.x.shape)

    shortfall = best["F"] < target
    return best["config"], best["F"], shortfall


def report_to_json_str(report: FixedPointReport) -> str:
    return json.dumps(report.to_json(), sort_keys=True)
