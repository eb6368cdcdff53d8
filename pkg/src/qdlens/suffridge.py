"""Extreme univalent polynomials: the explicit catalog and a constructive search.

The search walks the stratum of univalent maps with a prescribed number of
boundary tangencies: perturb along a direction whose derivative is self-dual
(R1) and which slides existing tangency pairs along their common tangent
lines (R2), push to the univalence boundary where a new tangency is born,
capture it, and repeat until the singularity counts are maximal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvegeo import (
    CircleMap,
    census,
    find_cusps,
    find_double_points,
    is_univalent,
)
from .ratfun import ComplexPoly, is_self_dual

__all__ = [
    "known_suffridge",
    "self_dual_basis",
    "perturbation_direction",
    "max_univalent_delta",
    "extremalize",
    "AlreadyExtremeError",
    "PerturbationStep",
    "ExtremalizeResult",
]


class AlreadyExtremeError(RuntimeError):
    """No admissible perturbation direction remains: N >= d-2."""


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def known_suffridge(family: str, d: int) -> CircleMap:
    """Exact extreme polynomials, d = 2..5 in both families."""
    if family == "S":
        if d == 2:
            return CircleMap("S", [0, 1, 0.5])
        if d == 3:
            return CircleMap("S", [0, 1, 2 * math.sqrt(2) / 3, 1 / 3])
        if d == 4:
            A = 0.5 * math.sqrt(3 * (math.sqrt(15) - 3))
            t = math.acos(3 / 16 * math.sqrt(9 + 5 * math.sqrt(15))) / 3
            return CircleMap(
                "S",
                [0, 1, 1.5 * A * np.exp(1j * t), A * np.exp(-1j * t), 0.25],
            )
        if d == 5:
            s = math.sqrt(2.0 / 3.0)
            return CircleMap("S", [0, 1, 1.6 * s, 1.2, 0.8 * s, 0.2])
    elif family == "Sigma":
        if d == 2:
            return CircleMap.sigma([0, -0.5])
        if d == 3:
            return CircleMap.sigma([2 / 3, 0, -1 / 3])
        if d == 4:
            return CircleMap.sigma([-5 / 8, -5 / 16, 0, -1 / 4])
        if d == 5:
            return CircleMap.sigma([0, 2 * math.sqrt(2) / 5, 0, 0, -1 / 5])
    raise KeyError(f"({family}, {d}) is not in the catalog")


# ---------------------------------------------------------------------------
# the real-linear space of admissible directions
# ---------------------------------------------------------------------------


def _s_direction(coeff_pairs, d: int) -> CircleMap:
    c = np.zeros(d + 1, dtype=complex)
    for j, a in coeff_pairs:
        c[j] = a
    return CircleMap("S", c)


def _sigma_direction(coeff_pairs, d: int) -> CircleMap:
    tail = np.zeros(d, dtype=complex)
    for j, a in coeff_pairs:
        tail[j - 1] = a
    return CircleMap("Sigma", tail)


def self_dual_basis(family: str, d: int):
    """Basis of the (d-2)-real-dimensional space of admissible directions.

    'S': polynomials sum_{j=2}^{d-1} a_j z^j whose derivative is self-dual in
    Pi_{d-1}; 'Sigma': Laurent tails sum_{j=1}^{d-1} a_j z^{-j} whose
    reflected derivative is self-dual in Pi_{d+1} (forcing a_{d-1} = 0).
    """
    if d < 3:
        return []
    out = []
    if family == "S":
        lo, hi = 2, d - 1
        pair_of = lambda j: d + 1 - j
        build = _s_direction
    elif family == "Sigma":
        lo, hi = 1, d - 2  # a_{d-1} = 0 forced
        pair_of = lambda j: d - 1 - j
        build = _sigma_direction
    else:
        raise ValueError("family must be 'S' or 'Sigma'")
    for j in range(lo, hi + 1):
        k = pair_of(j)
        if j < k:
            out.append(build([(j, 1.0 / j), (k, 1.0 / k)], d))
            out.append(build([(j, 1j / j), (k, -1j / k)], d))
        elif j == k:
            out.append(build([(j, 1.0)], d))
    return out


def direction_is_admissible(r: CircleMap, d: int, tol: float = 1e-12) -> bool:
    """The (R1) check for a direction in either family."""
    if r.family == "S":
        return is_self_dual(_shift_to_slot(r.fprime_numerator(), 0), d - 1, tol)
    # Sigma: r'(1/z) must be self-dual in Pi_{d+1}; clear z^{-(d+1)}
    tail = list(r.coeffs)
    c = np.zeros(d + 2, dtype=complex)
    for j, a in enumerate(tail, start=1):
        c[j + 1] = -j * a
    return is_self_dual(ComplexPoly(c), d + 1, tol)


def _shift_to_slot(p: ComplexPoly, k: int) -> ComplexPoly:
    return p if k == 0 else p.shift_up(k)


def add_direction(f: CircleMap, r: CircleMap, delta: float) -> CircleMap:
    if f.family != r.family:
        raise ValueError("direction family mismatch")
    if f.family == "S":
        n = max(len(f.coeffs), len(r.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(f.coeffs)] += f.coeffs
        c[: len(r.coeffs)] += delta * np.asarray(r.coeffs)
        return CircleMap("S", c)
    n = max(len(f.coeffs), len(r.coeffs))
    c = np.zeros(n, dtype=complex)
    c[: len(f.coeffs)] += f.coeffs
    c[: len(r.coeffs)] += delta * np.asarray(r.coeffs)
    return CircleMap.sigma(c)


def combine_basis(family: str, d: int, coeffs) -> CircleMap:
    basis = self_dual_basis(family, d)
    if len(coeffs) != len(basis):
        raise ValueError("coefficient vector does not match basis dimension")
    if family == "S":
        c = np.zeros(d + 1, dtype=complex)
        for w, b in zip(coeffs, basis):
            c[: len(b.coeffs)] += w * np.asarray(b.coeffs)
        return CircleMap("S", c)
    c = np.zeros(d, dtype=complex)
    for w, b in zip(coeffs, basis):
        c[: len(b.coeffs)] += w * np.asarray(b.coeffs)
    return CircleMap.sigma(c)


@dataclass
class PerturbationStep:
    basis_coefficients: np.ndarray
    direction: CircleMap
    admissible_delta: tuple | None = None  # (delta_min, delta_max)


def _r2_phase(family: str, d: int, t_plus: float) -> complex:
    expo = (d + 1) / 2 if family == "S" else (1 - d) / 2
    return np.exp(1j * expo * t_plus)


def _r2_row(basis_elem: CircleMap, family, d, t_minus, t_plus) -> float:
    diff = basis_elem.at_angle(t_plus) - basis_elem.at_angle(t_minus)
    return float((diff / _r2_phase(family, d, t_plus)).real)


def perturbation_direction(f: CircleMap, double_points) -> PerturbationStep:
    """Null direction of the (R2) tangency-sliding system over the (R1) basis.

    Raises AlreadyExtremeError once the number of tangency pairs reaches d-2.
    """
    d = f.degree
    basis = self_dual_basis(f.family, d)
    N = len(double_points)
    if N >= d - 2:
        raise AlreadyExtremeError(f"{N} double points with d={d}: no admissible direction")
    if not basis:
        raise AlreadyExtremeError(f"d={d} admits no perturbation directions")
    M = np.zeros((max(N, 1), len(basis)))
    for k, (tm, tp, _) in enumerate(double_points):
        for ell, b in enumerate(basis):
            M[k, ell] = _r2_row(b, f.family, d, tm, tp)
    if N == 0:
        M = np.zeros((1, len(basis)))
    _, s, vt = np.linalg.svd(M)
    c = vt[-1]
    if N > 0:
        resid = np.abs(M @ c)
        if np.max(resid) > 1e-10:
            raise RuntimeError(f"(R2) null solve residual {np.max(resid):.2e}")
    # determinism: unit norm, first nonzero coordinate positive
    for x in c:
        if abs(x) > 1e-12:
            c = c * np.sign(x) if x != 0 else c
            break
    c = c / np.linalg.norm(c)
    direction = combine_basis(f.family, d, c)
    if not direction_is_admissible(direction, d, tol=1e-9):
        raise RuntimeError("constructed direction violates (R1)")
    return PerturbationStep(basis_coefficients=c, direction=direction)


# ---------------------------------------------------------------------------
# univalence interval along a direction
# ---------------------------------------------------------------------------


def _valid_state(g: CircleMap, expected_cusps: int, samples: int) -> bool:
    try:
        rep = is_univalent(g, sample_count=samples)
    except Exception:
        return False
    if rep.status == "inconclusive":
        return False
    if rep.status != "univalent":
        return False
    try:
        if len(find_cusps(g)) != expected_cusps:
            return False
    except Exception:
        return False
    return True


def max_univalent_delta(
    f: CircleMap,
    r: CircleMap,
    resolution: float = 1e-4,
    samples: int = 2048,
    delta_cap: float = 64.0,
):
    """Bisection bounds (delta_min < 0 < delta_max) of the univalence interval.

    At the returned endpoints f + delta r is univalent with the full cusp
    count; slightly beyond it is not.
    """
    d = f.degree
    expected_cusps = d - 1 if f.family == "S" else d + 1
    if not _valid_state(f, expected_cusps, samples):
        raise ValueError("base map is not univalent with the expected cusp count")

    out = []
    for sign in (-1.0, 1.0):
        step = 0.05
        good = 0.0
        bad = None
        while bad is None and step <= delta_cap:
            trial = sign * step
            if _valid_state(add_direction(f, r, trial), expected_cusps, samples):
                good = trial
                step *= 2.0
            else:
                bad = trial
        if bad is None:
            out.append(sign * delta_cap)
            continue
        lo, hi = abs(good), abs(bad)
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if _valid_state(add_direction(f, r, sign * mid), expected_cusps, samples):
                lo = mid
            else:
                hi = mid
        out.append(sign * lo)
    dmin, dmax = out
    return float(dmin), float(dmax)


# ---------------------------------------------------------------------------
# tangency tracking and the extremalization loop
# ---------------------------------------------------------------------------


def _pair_offset_integer(family: str, d: int, tm: float, tp: float):
    factor = d + 1 if family == "S" else d - 1
    x = factor * (tp - tm) / (2 * np.pi)
    m = int(round(x))
    return (m, abs(x - m))


def _close_pairs(f_coeffs, family, d, pairs, offsets):
    """Gauss-Newton projection re-closing the tracked tangency pairs.

    Unknowns: basis coordinates (relative update) plus one base parameter per
    pair; each pair contributes the complex closure equation
    f(e^{i(t+Delta)}) = f(e^{it}) with its integer angle offset fixed.
    Under-determined systems take the least-norm step.
    """
    basis = self_dual_basis(family, d)
    nb = len(basis)
    factor = d + 1 if family == "S" else d - 1
    deltas = [2 * np.pi * m / factor for m in offsets]
    t = np.array([tm for tm, tp, _ in pairs])
    f = f_coeffs

    for _ in range(60):
        res = []
        for k, tm in enumerate(t):
            g = f.at_angle(tm + deltas[k]) - f.at_angle(tm)
            res.extend([g.real, g.imag])
        res = np.array(res)
        if np.max(np.abs(res)) < 1e-14 * max(1.0, f.boundary_scale(64)):
            break
        J = np.zeros((2 * len(t), nb + len(t)))
        for k, tm in enumerate(t):
            tp = tm + deltas[k]
            for ell, b in enumerate(basis):
                diff = b.at_angle(tp) - b.at_angle(tm)
                J[2 * k, ell] = diff.real
                J[2 * k + 1, ell] = diff.imag
            dv = f.velocity(tp) - f.velocity(tm)
            J[2 * k, nb + k] = dv.real
            J[2 * k + 1, nb + k] = dv.imag
        upd, *_ = np.linalg.lstsq(J, -res, rcond=None)
        f = add_direction(f, combine_basis(family, d, upd[:nb]), 1.0)
        t = t + upd[nb:]
    new_pairs = []
    for k, tm in enumerate(t):
        tm = float(tm % (2 * np.pi))
        tp = tm + deltas[k]
        lo, hi = (tm, tp) if tm < tp else (tp, tm)
        new_pairs.append((lo % (2 * np.pi), (lo + abs(deltas[k])) % (2 * np.pi), complex(f.at_angle(tm))))
    # normalize to t- < t+ within one period
    norm_pairs = []
    for (tm, tp, p), m in zip(new_pairs, offsets):
        if tp < tm:
            tp += 2 * np.pi
        norm_pairs.append((tm, tp, p))
    return f, norm_pairs


def _min_gap_pair(f: CircleMap, exclude, grid: int = 1024):
    """Smallest off-diagonal boundary gap away from tracked pairs and cusps."""
    t = 2 * np.pi * np.arange(grid) / grid
    pts = f.at_angle(t)
    best = (np.inf, 0.0, 0.0)
    block = 256
    for i0 in range(0, grid, block):
        i1 = min(i0 + block, grid)
        diff = np.abs(pts[i0:i1, None] - pts[None, :])
        ii = np.arange(i0, i1)[:, None]
        jj = np.arange(grid)[None, :]
        sep = (jj - ii) % grid
        mask = (sep > grid // 16) & (sep < grid - grid // 16)
        for tm, tp, _ in exclude:
            near_i = np.minimum(np.abs(t[i0:i1] - tm), 2 * np.pi - np.abs(t[i0:i1] - tm))[:, None] < 0.2
            near_j = np.minimum(np.abs(t - tp), 2 * np.pi - np.abs(t - tp))[None, :] < 0.2
            mask &= ~(near_i & near_j)
            near_i2 = np.minimum(np.abs(t[i0:i1] - tp), 2 * np.pi - np.abs(t[i0:i1] - tp))[:, None] < 0.2
            near_j2 = np.minimum(np.abs(t - tm), 2 * np.pi - np.abs(t - tm))[None, :] < 0.2
            mask &= ~(near_i2 & near_j2)
        diff = np.where(mask, diff, np.inf)
        k = np.argmin(diff)
        a, b = divmod(int(k), grid)
        if diff[a, b] < best[0]:
            best = (float(diff[a, b]), float(t[i0 + a]), float(t[b]))
    return best


@dataclass
class ExtremalizeResult:
    circle_map: CircleMap
    census: object
    rounds: int
    converged: bool
    trace: list = field(default_factory=list)


def _gauge_rotation(f: CircleMap) -> CircleMap:
    """Nearest class-preserving (discrete) rotation putting the first cusp near t=0."""
    d = f.degree
    order = d - 1 if f.family == "S" else d + 1
    cusps = find_cusps(f)
    if not cusps:
        return f
    t0 = cusps[0][0]
    k = round(t0 * order / (2 * np.pi))
    theta = 2 * np.pi * k / order
    if k % order == 0:
        return f
    # f -> e^{-i theta} f(e^{i theta} z)
    if f.family == "S":
        c = np.array(f.coeffs, dtype=complex)
        c = c * np.exp(1j * theta * (np.arange(len(c)) - 1))
        return CircleMap("S", c)
    tail = np.array(f.coeffs, dtype=complex)
    tail = tail * np.exp(-1j * theta * (np.arange(1, len(tail) + 1) + 1))
    return CircleMap.sigma(tail)


def initial_map(family: str, d: int) -> CircleMap:
    """Symmetric starting point z + z^d/d (or z - z^{-d}/d): full cusp count,
    no double points, derivative self-dual."""
    if family == "S":
        c = np.zeros(d + 1, dtype=complex)
        c[1] = 1.0
        c[d] = 1.0 / d
        return CircleMap("S", c)
    tail = np.zeros(d, dtype=complex)
    tail[d - 1] = -1.0 / d
    return CircleMap.sigma(tail)


def extremalize(
    f0: CircleMap,
    max_rounds: int = 80,
    birth_tol: float = 2e-3,
    samples: int = 2048,
    verbose: bool = False,
) -> ExtremalizeResult:
    """Drive f0 to an extreme map: d-1 (resp. d+1) cusps and d-2 double points.

    Each round pushes along an (R1)+(R2) direction to 0.98 of the univalence
    boundary, re-closes the tracked tangencies, and captures a newly born
    tangency pair once its gap falls below the birth tolerance.
    """
    f = f0
    d = f.degree
    family = f.family
    target = d - 2
    scale = f.boundary_scale()
    pairs = find_double_points(f)
    offsets = []
    for tm, tp, _ in pairs:
        m, err = _pair_offset_integer(family, d, tm, tp)
        if err > 0.05:
            raise ValueError("initial double point violates the angle relation")
        offsets.append(m)
    trace = []

    rounds = 0
    stall = 0
    while len(pairs) < target and rounds < max_rounds:
        rounds += 1
        step = perturbation_direction(f, pairs)
        dmin, dmax = max_univalent_delta(f, step.direction, samples=samples)
        step.admissible_delta = (dmin, dmax)
        # prefer the positive side; fall back if it degenerates
        delta_star = dmax if abs(dmax) >= 1e-6 else dmin
        if stall >= 3:
            delta_star = dmin if delta_star == dmax else dmax
        f_try = add_direction(f, step.direction, 0.98 * delta_star)
        f_try, pairs_try = (
            _close_pairs(f_try, family, d, pairs, offsets) if pairs else (f_try, [])
        )

        gap, t1, t2 = _min_gap_pair(f_try, pairs_try)
        captured = False
        if gap <= birth_tol * scale:
            from .curvegeo import _refine_pair

            r1, r2, g2 = _refine_pair(f_try, t1, t2)
            lo, hi = (r1, r2) if r1 < r2 else (r2, r1)
            m, err = _pair_offset_integer(family, d, lo, hi)
            if err < 0.05 and m != 0:
                cand_pairs = pairs_try + [(lo, hi, complex(f_try.at_angle(lo)))]
                cand_offsets = offsets + [m]
                f_new, closed = _close_pairs(f_try, family, d, cand_pairs, cand_offsets)
                ok = _valid_state(
                    f_new, d - 1 if family == "S" else d + 1, samples
                )
                if ok:
                    f, pairs, offsets = f_new, closed, cand_offsets
                    captured = True
        if not captured:
            f, pairs = f_try, pairs_try
            stall += 1
        else:
            stall = 0
        trace.append(
            {
                "round": rounds,
                "N": len(pairs),
                "delta_interval": [dmin, dmax],
                "captured": captured,
                "min_gap": gap,
            }
        )
        if verbose:
            print(trace[-1])

    f = _gauge_rotation(f)
    if pairs:
        # re-derive pair parameters after the gauge rotation
        pairs = find_double_points(f)
    final_census = census(f)
    return ExtremalizeResult(
        circle_map=f,
        census=final_census,
        rounds=rounds,
        converged=final_census.is_extreme,
        trace=trace,
    )
