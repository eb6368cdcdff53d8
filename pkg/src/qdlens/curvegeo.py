"""Singularity and curvature analysis of boundary curves f(T).

Two families:
  'S'     polynomial f(z) = a1 z + a2 z^2 + ... univalent on the unit disk;
  'Sigma' Laurent f(z) = z + a1/z + ... + ad/z^d univalent outside it.

Cusps are unit-modulus zeros of f'; double points are off-diagonal parameter
pairs with f(e^{i t-}) = f(e^{i t+}); conformal curvature is the angular
velocity of the boundary tangent in the circle parameter.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ._geometry import segment_self_intersections, winding_number
from .ratfun import ComplexPoly

__all__ = [
    "CircleMap",
    "BoundaryCurve",
    "SingularityCensus",
    "CensusCapError",
    "CuspAmbiguityWarning",
    "find_cusps",
    "find_double_points",
    "conformal_curvature",
    "verify_double_angle_relation",
    "is_univalent",
    "UnivalenceReport",
    "census",
    "component_analysis",
]

CUSP_SNAP_TOL = 1e-9
DOUBLE_POINT_TOL = 1e-9
TANGENT_COLLINEAR_TOL = 1e-6


class CensusCapError(RuntimeError):
    """Singularity counts above the family caps signal a solver bug."""


class CuspAmbiguityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CircleMap:
    """Conformal map evaluated on the unit circle.

    family 'S': coeffs are ascending polynomial coefficients (coeffs[0] = 0).
    family 'Sigma': f(z) = z + sum_j tail[j-1] z^{-j}.
    """

    family: str
    coeffs: tuple

    def __init__(self, family: str, coeffs):
        if family not in ("S", "Sigma"):
            raise ValueError("family must be 'S' or 'Sigma'")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in coeffs))

    # ---- constructors -----------------------------------------------------
    @staticmethod
    def from_poly(p: ComplexPoly) -> "CircleMap":
        return CircleMap("S", p.coeffs)

    @staticmethod
    def sigma(tail) -> "CircleMap":
        """f(z) = z + tail[0]/z + tail[1]/z^2 + ..."""
        return CircleMap("Sigma", tail)

    @property
    def degree(self) -> int:
        if self.family == "S":
            d = len(self.coeffs) - 1
            while d > 1 and self.coeffs[d] == 0:
                d -= 1
            return d
        d = len(self.coeffs)
        while d > 1 and self.coeffs[d - 1] == 0:
            d -= 1
        return d

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.family == "S":
            out = np.zeros_like(z)
            for c in self.coeffs[::-1]:
                out = out * z + c
        else:
            w = 1.0 / z
            out = np.zeros_like(z)
            for c in self.coeffs[::-1]:
                out = (out + c) * w
            out = out + z
        return out if out.ndim else complex(out)

    def fprime(self, z):
        z = np.asarray(z, dtype=complex)
        if self.family == "S":
            out = np.zeros_like(z)
            cs = [j * c for j, c in enumerate(self.coeffs)][1:]
            for c in cs[::-1]:
                out = out * z + c
        else:
            w = 1.0 / z
            out = np.zeros_like(z)
            cs = [-j * c for j, c in enumerate(self.coeffs, start=1)]
            for c in cs[::-1]:
                out = (out + c) * w
            out = out * w + 1.0
        return out if out.ndim else complex(out)

    def fsecond(self, z):
        z = np.asarray(z, dtype=complex)
        if self.family == "S":
            out = np.zeros_like(z)
            cs = [j * (j - 1) * c for j, c in enumerate(self.coeffs)][2:]
            for c in cs[::-1]:
                out = out * z + c
        else:
            w = 1.0 / z
            out = np.zeros_like(z)
            cs = [j * (j + 1) * c for j, c in enumerate(self.coeffs, start=1)]
            for c in cs[::-1]:
                out = (out + c) * w
            out = out * w * w
        return out if out.ndim else complex(out)

    def at_angle(self, t):
        return self(np.exp(1j * np.asarray(t, dtype=float)))

    def velocity(self, t):
        """d/dt f(e^{it}) = i e^{it} f'(e^{it})."""
        zeta = np.exp(1j * np.asarray(t, dtype=float))
        return 1j * zeta * self.fprime(zeta)

    def fprime_numerator(self) -> ComplexPoly:
        """Polynomial whose unit-circle roots are the cusp locations.

        'S': f' itself; 'Sigma': z^{d+1} f'(z).
        """
        if self.family == "S":
            cs = [j * c for j, c in enumerate(self.coeffs)][1:]
            return ComplexPoly(cs)
        d = len(self.coeffs)
        out = np.zeros(d + 2, dtype=complex)
        out[d + 1] = 1.0
        for j, c in enumerate(self.coeffs, start=1):
            out[d - j] = -j * c
        return ComplexPoly(out)

    def boundary_scale(self, n: int = 256) -> float:
        t = 2 * np.pi * np.arange(n) / n
        return float(np.max(np.abs(self.at_angle(t))))

    def to_json(self):
        return {
            "family": self.family,
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
        }

    @staticmethod
    def from_json(data) -> "CircleMap":
        return CircleMap(data["family"], [complex(re, im) for re, im in data["coeffs"]])


# ---------------------------------------------------------------------------
# cusps and curvature
# ---------------------------------------------------------------------------


def find_cusps(f: CircleMap, snap_tol: float = CUSP_SNAP_TOL):
    """Unit-modulus roots of f' as (t, point) pairs sorted by t."""
    from .ratfun import all_roots

    num = f.fprime_numerator()
    if num.degree < 1:
        return []
    roots = all_roots(num, tol=1e-10)
    cusps = []
    for z in roots:
        if f.family == "Sigma" and abs(z) < 1e-12:
            continue  # cleared pole at the origin
        off = abs(abs(z) - 1.0)
        if off < snap_tol:
            t = float(np.angle(z)) % (2 * np.pi)
            cusps.append((t, complex(f.at_angle(t))))
        elif off < 10 * snap_tol:
            warnings.warn(
                f"critical point at |z|-1 = {off:.2e}: off the circle but within "
                "10x of snapping tolerance",
                CuspAmbiguityWarning,
            )
    cusps.sort(key=lambda c: c[0])
    return cusps


def conformal_curvature(f: CircleMap, t: float, min_speed: float = 1e-9) -> float:
    """kappa(t) = Re(1 + zeta f''(zeta)/f'(zeta)), zeta = e^{it}.

    The angular velocity of arg(i e^{it} f'(e^{it})); constant (1+d)/2 on
    starred S-class curves and (1-d)/2 on starred Sigma-class curves away
    from cusps.
    """
    zeta = np.exp(1j * float(t))
    fp = f.fprime(zeta)
    if abs(fp) < min_speed:
        raise ValueError(f"t={t} is a cusp parameter; curvature undefined")
    return float((1.0 + zeta * f.fsecond(zeta) / fp).real)


def curvature_samples(f: CircleMap, n: int = 256, cusp_exclusion: float = 1e-4):
    """(t, kappa) pairs on a regular grid, skipping the cusp exclusion zones."""
    cusps = [t for t, _ in find_cusps(f)]
    out = []
    for t in 2 * np.pi * np.arange(n) / n:
        if any(
            min(abs(t - tc), 2 * np.pi - abs(t - tc)) < cusp_exclusion for tc in cusps
        ):
            continue
        out.append((float(t), conformal_curvature(f, t)))
    return out


# ---------------------------------------------------------------------------
# double points
# ---------------------------------------------------------------------------


def _refine_pair(f: CircleMap, t1: float, t2: float):
    """Gauss-Newton polish of f(e^{it1}) = f(e^{it2}); tolerant of the
    rank-deficient Jacobian at tangential contacts."""

    def resid(x):
        g = f.at_angle(x[0]) - f.at_angle(x[1])
        return np.array([g.real, g.imag])

    def jac(x):
        v1 = f.velocity(x[0])
        v2 = f.velocity(x[1])
        return np.array([[v1.real, -v2.real], [v1.imag, -v2.imag]])

    sol = least_squares(
        resid, np.array([t1, t2]), jac=jac, method="lm",
        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400,
    )
    r1, r2 = float(sol.x[0]) % (2 * np.pi), float(sol.x[1]) % (2 * np.pi)
    gap = float(np.abs(f.at_angle(r1) - f.at_angle(r2)))
    return r1, r2, gap


def find_double_points(f: CircleMap, grid_size: int = 2048, tol: float = DOUBLE_POINT_TOL):
    """All distinct parameter pairs (t-, t+) with f(e^{it-}) = f(e^{it+}).

    Coarse torus-grid proximity pass restricted to the off-diagonal region,
    then a two-variable Newton (Gauss-Newton) polish per candidate.
    Returns (t-, t+, point) with t- < t+, sorted.
    """
    n = grid_size
    t = 2 * np.pi * np.arange(n) / n
    pts = f.at_angle(t)
    speed = np.abs(f.velocity(t))
    band = 2  # diagonal exclusion: 2 grid steps, width 4 pi / grid_size
    scale = float(np.max(np.abs(pts)))
    step = 2 * np.pi / n
    thresh = 4.0 * step * np.maximum.reduce([speed, np.roll(speed, 1), np.full(n, 1e-3 * scale)])

    candidates = []
    block = 256
    d2_min = {}
    for i0 in range(0, n, block):
        i1 = min(i0 + block, n)
        diff = np.abs(pts[i0:i1, None] - pts[None, :])
        ii = np.arange(i0, i1)[:, None]
        jj = np.arange(n)[None, :]
        sep = (jj - ii) % n
        mask = (sep > band) & (sep < n - band) & (jj > ii)
        close = mask & (diff <= np.minimum(thresh[i0:i1, None], thresh[None, :]))
        for a, b in zip(*np.nonzero(close)):
            candidates.append((int(ii[a, 0]), int(b), float(diff[a, b])))

    # keep local minima of the proximity field per (i, j) neighborhood
    candidates.sort(key=lambda c: c[2])
    chosen = []
    for i, j, dist in candidates:
        if all(
            min(abs(i - ci), n - abs(i - ci)) > 4 or min(abs(j - cj), n - abs(j - cj)) > 4
            for ci, cj in chosen
        ):
            chosen.append((i, j))

    found = []
    for i, j in chosen:
        t1, t2, gap = _refine_pair(f, t[i], t[j])
        if gap > tol * max(1.0, scale):
            continue  # Newton diverged or spurious proximity; drop candidate
        dt = (t2 - t1) % (2 * np.pi)
        if dt < 2 * step or dt > 2 * np.pi - 2 * step:
            continue  # collapsed onto the diagonal
        lo, hi = (t1, t2) if t1 < t2 else (t2, t1)
        if all(
            not (abs(lo - a) < 1e-6 and abs(hi - b) < 1e-6) for a, b, _ in found
        ):
            found.append((lo, hi, complex(f.at_angle(lo))))
    found.sort(key=lambda c: (c[0], c[1]))
    return found


def verify_double_angle_relation(f: CircleMap, double_points=None) -> float:
    """Max distance of (d +- 1)(t+ - t-)/(2 pi) from the nearest integer.

    '+' for the S family and '-' for the Sigma family; vacuously 0 without
    double points.
    """
    if double_points is None:
        double_points = find_double_points(f)
    d = f.degree
    factor = d + 1 if f.family == "S" else d - 1
    worst = 0.0
    for t1, t2, _ in double_points:
        x = factor * (t2 - t1) / (2 * np.pi)
        worst = max(worst, abs(x - round(x)))
    return worst


# ---------------------------------------------------------------------------
# univalence
# ---------------------------------------------------------------------------


@dataclass
class UnivalenceReport:
    status: str  # 'univalent' | 'not_univalent' | 'inconclusive'
    witness: tuple | None = None  # (t1, t2) for a transversal crossing
    contacts: list = field(default_factory=list)  # tangential double points

    def __bool__(self):
        if self.status == "inconclusive":
            raise ValueError("univalence test inconclusive; raise sample count")
        return self.status == "univalent"


def _tangent_angle_gap(f: CircleMap, t1: float, t2: float) -> float:
    v1, v2 = f.velocity(t1), f.velocity(t2)
    if abs(v1) < 1e-12 or abs(v2) < 1e-12:
        return 0.0
    ang = np.angle(v1 / v2) % np.pi
    return float(min(ang, np.pi - ang))


def _penetration_depth(f: CircleMap, t1: float, t2: float, scale: float) -> float:
    """Signed overlap of the two arc branches near a tangential contact.

    Graphs both branches over the common tangent line; returns the largest
    sign violation of the gap (0 for a clean one-sided touch).
    """
    P = 0.5 * (f.at_angle(t1) + f.at_angle(t2))
    v1 = f.velocity(t1)
    if abs(v1) < 1e-9 * scale:
        return 0.0
    u = v1 / abs(v1)
    nvec = 1j * u

    def graph(tc, xs):
        # parameter s near tc with tangential coordinate x, then normal coord
        ys = np.empty_like(xs)
        for k, x in enumerate(xs):
            s = tc + x / abs(f.velocity(tc)) * 0.0  # init at tc
            s = tc
            for _ in range(30):
                g = f.at_angle(s) - P
                val = (g * np.conj(u)).real - x
                dv = (f.velocity(s) * np.conj(u)).real
                if abs(dv) < 1e-14:
                    break
                snew = s - val / dv
                if abs(snew - s) < 1e-15:
                    s = snew
                    break
                s = snew
            g = f.at_angle(s) - P
            ys[k] = (g * np.conj(nvec)).real
        return ys

    w = 0.01 * scale
    for _ in range(6):
        xs = np.linspace(-w, w, 33)
        y1 = graph(t1, xs)
        y2 = graph(t2, xs)
        h = y1 - y2
        hmin, hmax = float(np.min(h)), float(np.max(h))
        ends = min(abs(h[0]), abs(h[-1]))
        if hmin >= -1e-12 * scale or hmax <= 1e-12 * scale:
            # one-sided within noise: keep expanding to be sure the window
            # covers any overlap lobes
            if ends > 10 * max(abs(hmin), 1e-300) or w > 0.3 * scale:
                return 0.0
        else:
            return float(min(abs(hmin), abs(hmax)))
        w *= 3.0
    return 0.0


def is_univalent(f: CircleMap, sample_count: int = 2048) -> UnivalenceReport:
    """Winding-number univalence test on the sampled boundary polyline.

    True iff the curve has no transversal self-crossing (tangential double
    points are permitted) and winds once around an interior probe point.
    Near-tangencies that the sampling cannot separate yield 'inconclusive',
    never a silent verdict.
    """
    n = sample_count
    t = 2 * np.pi * np.arange(n) / n
    pts = f.at_angle(t)
    scale = float(np.max(np.abs(pts)))
    step = 2 * np.pi / n

    crossings = segment_self_intersections(pts)
    contacts = []
    for i, j, ti_loc, tj_loc in crossings:
        t1, t2, gap = _refine_pair(f, t[i] + ti_loc * step, t[j] + tj_loc * step)
        if gap > 1e-7 * scale:
            return UnivalenceReport("inconclusive", witness=(t[i], t[j]))
        ang = _tangent_angle_gap(f, t1, t2)
        if ang > TANGENT_COLLINEAR_TOL:
            return UnivalenceReport("not_univalent", witness=(t1, t2))
        depth = _penetration_depth(f, t1, t2, scale)
        if depth > 1e-9 * scale:
            return UnivalenceReport("not_univalent", witness=(t1, t2))
        contacts.append((t1, t2))

    # interior probe: image of 0 for the disk family, sample centroid outside
    if f.family == "S":
        probe = complex(f(np.array([0.0j]))[0])
    else:
        probe = complex(np.mean(pts))
    dmin = float(np.min(np.abs(pts - probe)))
    if dmin < 1e-9 * scale:
        probe += 0.01 * scale * 1j
    w = winding_number(pts, probe)
    if w != 1:
        return UnivalenceReport("not_univalent", witness=None)
    return UnivalenceReport("univalent", contacts=contacts)


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------


@dataclass
class BoundaryCurve:
    family: str
    map_degree: int
    circle_map: CircleMap
    samples: list  # (t, point)
    cusps: list  # (t, point)
    double_points: list  # (t-, t+, point)
    curvature: list  # (t, kappa)

    def to_csv(self, path):
        kappa_at = dict((round(t, 12), k) for t, k in self.curvature)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y", "kappa"])
            for t, p in self.samples:
                w.writerow([t, p.real, p.imag, kappa_at.get(round(t, 12), "nan")])

    def to_svg(self, path, manifest: str | None = None):
        from .svgout import curve_svg

        curve_svg(self, path, manifest=manifest)


@dataclass
class SingularityCensus:
    family: str
    map_degree: int
    cusp_count: int
    double_point_count: int
    is_extreme: bool
    per_component: list = field(default_factory=list)

    def to_json(self):
        return {
            "schema": 1,
            "family": self.family,
            "d": self.map_degree,
            "cusps": self.cusp_count,
            "doubles": self.double_point_count,
            "extreme": self.is_extreme,
            "components": [
                {
                    "id": cid,
                    "doubles": dj,
                    "cusps": cj,
                    "classification": cls,
                    "unbounded": unb,
                }
                for cid, dj, cj, cls, unb in self.per_component
            ],
        }


def boundary_curve(f: CircleMap, n_samples: int = 1024, grid_size: int = 2048) -> BoundaryCurve:
    t = 2 * np.pi * np.arange(n_samples) / n_samples
    pts = f.at_angle(t)
    return BoundaryCurve(
        family=f.family,
        map_degree=f.degree,
        circle_map=f,
        samples=[(float(tt), complex(p)) for tt, p in zip(t, pts)],
        cusps=find_cusps(f),
        double_points=find_double_points(f, grid_size=grid_size),
        curvature=curvature_samples(f),
    )


def census(f: CircleMap, grid_size: int = 2048, with_components: bool = False) -> SingularityCensus:
    """Cusp/double-point counts, family caps enforced, extremeness verdict.

    Caps: d-1 cusps and d-2 double points for 'S'; d+1 and d-2 for 'Sigma'.
    Exceeding a cap raises CensusCapError (a bug signal, not a math fact).
    """
    d = f.degree
    cusps = find_cusps(f)
    doubles = find_double_points(f, grid_size=grid_size)
    cusp_cap = d - 1 if f.family == "S" else d + 1
    double_cap = max(0, d - 2)
    if len(cusps) > cusp_cap:
        raise CensusCapError(
            f"{len(cusps)} cusps exceeds the {f.family}-class cap {cusp_cap} for d={d}"
        )
    if len(doubles) > double_cap:
        raise CensusCapError(
            f"{len(doubles)} double points exceeds the cap {double_cap} for d={d}"
        )
    extreme = len(cusps) == cusp_cap and len(doubles) == double_cap and d >= 2
    out = SingularityCensus(
        family=f.family,
        map_degree=d,
        cusp_count=len(cusps),
        double_point_count=len(doubles),
        is_extreme=extreme,
    )
    if with_components:
        out.per_component = component_analysis(f, cusps=cusps, doubles=doubles)
    return out


def component_analysis(f: CircleMap, cusps=None, doubles=None):
    """Per-face singularity census of the complement of the closed curve.

    Returns a list of (component_id, double_count, cusp_count, classification,
    unbounded) for every complement face (the image domain itself is skipped).
    """
    from ._arrangement import curve_complement_faces

    if cusps is None:
        cusps = find_cusps(f)
    if doubles is None:
        doubles = find_double_points(f)
    return curve_complement_faces(f, cusps, doubles)
