"""Planar subdivision induced by closed curves touching at known tangential contacts.

Vertices are the declared contact points (curves never cross transversally
here); each vertex has degree 4 per incident contact.  Chord directions of
the discretized germs break the tangential degeneracy in the geometrically
correct order, so standard half-edge face tracing applies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._geometry import polygon_area, winding_number

__all__ = ["ArrCurve", "Arrangement", "Face", "FaceTracingError", "curve_complement_faces"]

TWO_PI = 2.0 * np.pi


class FaceTracingError(RuntimeError):
    pass


@dataclass
class ArrCurve:
    """Closed parametrized curve entering an arrangement.

    eval_fn/velocity_fn/kappa_fn take scalar or array parameters in
    [0, 2 pi); cusp_params lists parameter locations of classical cusps.
    """

    curve_id: int
    eval_fn: object
    velocity_fn: object
    kappa_fn: object
    cusp_params: list

    def point(self, t):
        return self.eval_fn(np.asarray(t, dtype=float))


@dataclass
class Corner:
    point: complex
    kind: str  # 'contact' | 'cusp'
    spike_dir: complex
    inward: bool | None = None


@dataclass
class Face:
    face_id: int
    arcs: list  # (curve_id, t0, t1, direction) traversal pieces
    polygon: np.ndarray
    area: float
    probe: complex
    corners: list = field(default_factory=list)
    classification: str = "other"
    conc_arc: int | None = None
    unbounded: bool = False

    @property
    def cusp_count(self):
        return sum(1 for c in self.corners if c.kind == "cusp")

    @property
    def contact_count(self):
        return sum(1 for c in self.corners if c.kind == "contact")


def _arc_samples(curve: ArrCurve, t0: float, t1: float, min_pts: int = 48):
    span = t1 - t0
    n = max(min_pts, int(abs(span) / TWO_PI * 2048))
    ts = t0 + span * np.arange(n + 1) / n
    return ts, curve.point(ts)


class Arrangement:
    def __init__(self):
        self.curves = {}
        self.contacts = []  # (curve_a, t_a, curve_b, t_b)
        self._scale = 1.0

    def add_curve(self, curve: ArrCurve):
        self.curves[curve.curve_id] = curve

    def add_contact(self, curve_a: int, t_a: float, curve_b: int, t_b: float):
        self.contacts.append((curve_a, float(t_a) % TWO_PI, curve_b, float(t_b) % TWO_PI))

    # ------------------------------------------------------------------
    def build_faces(self):
        pts_all = []
        for c in self.curves.values():
            _, p = _arc_samples(c, 0.0, TWO_PI, min_pts=128)
            pts_all.append(p)
        self._scale = float(np.max(np.abs(np.concatenate(pts_all))))
        snap = 1e-7 * self._scale

        # --- vertices: contact points merged within the snap radius -----
        vertices = []  # point
        slots = {cid: [] for cid in self.curves}  # (t, vertex_index)

        def vertex_for(p: complex) -> int:
            for i, q in enumerate(vertices):
                if abs(p - q) <= snap:
                    return i
            vertices.append(p)
            return len(vertices) - 1

        for ca, ta, cb, tb in self.contacts:
            pa = complex(self.curves[ca].point(ta))
            pb = complex(self.curves[cb].point(tb))
            if abs(pa - pb) > 10 * snap:
                raise FaceTracingError(
                    f"contact between curves {ca}@{ta:.6f} and {cb}@{tb:.6f} "
                    f"does not coincide: gap {abs(pa - pb):.3e}"
                )
            v = vertex_for(0.5 * (pa + pb))
            slots[ca].append((ta, v))
            slots[cb].append((tb, v))

        # isolated loops get a phantom break vertex so tracing is uniform
        phantom = set()
        for cid, sl in slots.items():
            if not sl:
                p = complex(self.curves[cid].point(0.0))
                v = vertex_for(p)
                sl.append((0.0, v))
                phantom.add(v)

        # --- arcs between consecutive slots along each curve -------------
        arcs = []  # (curve_id, t0, t1, v0, v1)
        for cid, sl in slots.items():
            sl = sorted(set(sl))
            slots[cid] = sl
            for k, (t0, v0) in enumerate(sl):
                t1, v1 = sl[(k + 1) % len(sl)]
                if k == len(sl) - 1:
                    t1 += TWO_PI
                arcs.append((cid, t0, t1, v0, v1))

        # --- germs: outgoing directed arc ends at each vertex -----------
        # germ key: (arc_index, direction); direction +1 departs from v0
        germs_at = {v: [] for v in range(len(vertices))}
        for ai, (cid, t0, t1, v0, v1) in enumerate(arcs):
            curve = self.curves[cid]
            h = min((t1 - t0) / 8.0, 1e-3)
            ang_f = []
            ang_b = []
            for hh in (h, 0.5 * h):
                pf = complex(curve.point(t0 + hh)) - vertices[v0]
                pb = complex(curve.point(t1 - hh)) - vertices[v1]
                ang_f.append(float(np.angle(pf)))
                ang_b.append(float(np.angle(pb)))
            germs_at[v0].append((ai, +1, ang_f[0], ang_f[1]))
            germs_at[v1].append((ai, -1, ang_b[0], ang_b[1]))

        order_at = {}
        for v, germs in germs_at.items():
            o1 = sorted(range(len(germs)), key=lambda k: germs[k][2])
            o2 = sorted(range(len(germs)), key=lambda k: germs[k][3])
            if o1 != o2 and len(germs) > 2:
                # cyclic rotations of the same order are fine
                def canon(o):
                    i0 = o.index(0)
                    return tuple(o[i0:] + o[:i0])

                if canon(o1) != canon(o2):
                    cid_list = sorted({arcs[germs[k][0]][0] for k in range(len(germs))})
                    raise FaceTracingError(
                        f"unresolved tangency ordering at vertex {v} "
                        f"({vertices[v]:.6f}), curves {cid_list}"
                    )
            order_at[v] = [(germs[k][0], germs[k][1]) for k in o1]

        # --- face tracing: next = clockwise successor of the twin --------
        def head(halfedge):
            ai, d = halfedge
            return arcs[ai][4] if d > 0 else arcs[ai][3]

        nxt = {}
        for v, order in order_at.items():
            m = len(order)
            for idx, g in enumerate(order):
                ai, d = g
                incoming = (ai, -d)  # halfedge arriving at v with twin germ g
                nxt[incoming] = order[(idx - 1) % m]

        halfedges = [(ai, d) for ai in range(len(arcs)) for d in (+1, -1)]
        seen = set()
        faces = []
        for h0 in halfedges:
            if h0 in seen:
                continue
            orbit = []
            h = h0
            for _ in range(8 * len(halfedges)):
                orbit.append(h)
                seen.add(h)
                h = nxt[h]
                if h == h0:
                    break
            else:
                raise FaceTracingError("face orbit failed to close")
            faces.append(orbit)

        # --- geometry per face -------------------------------------------
        out = []
        for fid, orbit in enumerate(faces):
            arcs_list = []
            polys = []
            for ai, d in orbit:
                cid, t0, t1, v0, v1 = arcs[ai]
                ts, pts = _arc_samples(self.curves[cid], t0, t1)
                if d < 0:
                    pts = pts[::-1]
                    arcs_list.append((cid, t1, t0, -1))
                else:
                    arcs_list.append((cid, t0, t1, +1))
                polys.append(pts[:-1])
            polygon = np.concatenate(polys)
            area = polygon_area(polygon)
            face = Face(
                face_id=fid,
                arcs=arcs_list,
                polygon=polygon,
                area=area,
                probe=0.0,
            )
            face.probe = self._find_probe(face)
            out.append(face)

        # unbounded faces: negative orientation orbits (one per component)
        for face in out:
            face.unbounded = face.area < 0
        self._annotate_corners(out, arcs, vertices, phantom)
        return out

    # ------------------------------------------------------------------
    def _find_probe(self, face: Face) -> complex:
        """Interior point of the face: midpoint of a normal chord.

        A ray from an edge midpoint along the inward normal is cut at its
        first polygon intersection; half that width stays inside even in
        sliver-thin faces where a fixed offset would overshoot.
        """
        poly = face.polygon
        n = len(poly)
        a_all = poly
        b_all = np.roll(poly, -1)
        seglen = np.abs(b_all - a_all)
        order = np.argsort(seglen)[::-1]
        expected = 1 if face.area > 0 else 0
        for idx in order[: min(64, n)]:
            a, b = poly[idx], poly[(idx + 1) % n]
            if abs(b - a) < 1e-300:
                continue
            mid = 0.5 * (a + b)
            d = (b - a) / abs(b - a)
            normal = 1j * d  # face lies on the left of the traversal
            # first crossing of the ray mid + s*normal with the polygon
            rel_a = (a_all - mid) / normal
            rel_b = (b_all - mid) / normal
            dx = rel_b - rel_a
            with np.errstate(all="ignore"):
                tcross = -rel_a.imag / dx.imag
                scross = rel_a.real + tcross * dx.real
            valid = (
                np.isfinite(tcross)
                & (tcross > 0.0)
                & (tcross < 1.0)
                & (scross > 1e-12 * self._scale)
            )
            valid[idx] = False
            s0 = np.min(scross[valid]) if np.any(valid) else np.inf
            if np.isinf(s0):
                offsets = (2e-3 * self._scale, 2e-4 * self._scale)
            else:
                offsets = (0.5 * s0, 0.25 * s0)
            for off in offsets:
                probe = mid + off * normal
                if winding_number(poly, probe) == expected:
                    dmin = np.min(np.abs(poly - probe))
                    if dmin > 0.25 * off:
                        return complex(probe)
        raise FaceTracingError(f"no interior probe found for face {face.face_id}")

    # ------------------------------------------------------------------
    def _annotate_corners(self, faces, arcs, vertices, phantom):
        for face in faces:
            corners = []
            # vertex visits (tangential pinches)
            m = len(face.arcs)
            for k in range(m):
                cid, t0, t1, d = face.arcs[k]
                # the corner between this arc's end and the next arc's start
                curve = self.curves[cid]
                t_end = t1
                p = complex(curve.point(t_end))
                # skip phantom break vertices (not singular points)
                is_phantom = any(
                    abs(p - vertices[v]) < 1e-7 * self._scale for v in phantom
                )
                if is_phantom:
                    continue
                cid2, s0, s1, d2 = face.arcs[(k + 1) % m]
                curve2 = self.curves[cid2]
                h1 = min(abs(t1 - t0) / 8.0, 1e-3)
                h2 = min(abs(s1 - s0) / 8.0, 1e-3)
                g_in = complex(curve.point(t_end - np.sign(t1 - t0) * h1)) - p
                g_out = complex(curve2.point(s0 + np.sign(s1 - s0) * h2)) - p
                bis = g_in / abs(g_in) + g_out / abs(g_out)
                if abs(bis) < 1e-9:
                    bis = 1j * g_in / abs(g_in)
                # zero-angle wedge opens along the bisector; the tip points away
                corners.append(Corner(point=p, kind="contact", spike_dir=-bis / abs(bis)))
            # classical cusps interior to arcs
            for cid, t0, t1, d in face.arcs:
                curve = self.curves[cid]
                lo, hi = min(t0, t1), max(t0, t1)
                for tc in curve.cusp_params:
                    for shift in (-TWO_PI, 0.0, TWO_PI):
                        tt = tc + shift
                        if lo + 1e-9 < tt < hi - 1e-9:
                            p = complex(curve.point(tt))
                            v = curve.velocity_fn
                            hh = min((hi - lo) / 16.0, 1e-3)
                            g1 = complex(curve.point(tt - hh)) - p
                            g2 = complex(curve.point(tt + hh)) - p
                            bis = g1 / abs(g1) + g2 / abs(g2)
                            if abs(bis) < 1e-9:
                                bis = g1 / abs(g1)
                            spike = -bis / abs(bis)
                            corners.append(Corner(point=p, kind="cusp", spike_dir=spike))
            face.corners = corners
        # inward/outward relative to the bounded side of the face boundary
        for face in faces:
            poly = face.polygon if face.area > 0 else face.polygon[::-1]
            for c in face.corners:
                probe = c.point + 1e-4 * self._scale * c.spike_dir
                c.inward = winding_number(poly, probe) != 0
        for face in faces:
            self._classify(face)

    # ------------------------------------------------------------------
    def _sub_arcs(self, face: Face):
        """Split face arcs at interior cusps; yields (cid, a, b, dir) smooth pieces."""
        pieces = []
        for cid, t0, t1, d in face.arcs:
            curve = self.curves[cid]
            lo, hi = min(t0, t1), max(t0, t1)
            cuts = [lo, hi]
            for tc in curve.cusp_params:
                for shift in (-TWO_PI, 0.0, TWO_PI):
                    tt = tc + shift
                    if lo + 1e-9 < tt < hi - 1e-9:
                        cuts.append(tt)
            cuts = sorted(set(cuts))
            segs = list(zip(cuts[:-1], cuts[1:]))
            if d < 0:
                segs = [(b, a) for a, b in segs[::-1]]
            pieces.extend((cid, a, b, d) for a, b in segs)
        return pieces

    def _classify(self, face: Face):
        """Cardioid-like / deltoid-like / other, per the planar definitions."""
        corners = face.corners
        flip = -1.0 if face.area < 0 else 1.0
        pieces = self._sub_arcs(face)
        kappas = []
        variations = []
        lengths = []
        for cid, a, b, d in pieces:
            curve = self.curves[cid]
            if curve.kappa_fn is None:
                kappas.append(0.0)
                variations.append(np.nan)
                lengths.append(abs(b - a))
                continue
            ts = np.linspace(a, b, 33)[1:-1]
            kv = np.array([curve.kappa_fn(t) for t in ts])
            sign = flip * (1.0 if b > a else -1.0)
            kappas.append(float(np.median(kv)) * sign)
            variations.append(float(np.trapezoid(np.abs(kv), ts)))
            lengths.append(abs(b - a))
        n_corners = len(corners)
        if n_corners == 1 and corners[0].inward and all(k > 0 for k in kappas):
            face.classification = "cardioid-like"
            return
        if n_corners == 3 and all(not c.inward for c in corners):
            candidates = [
                (lengths[i], i)
                for i in range(len(pieces))
                if kappas[i] < 0 and variations[i] < np.pi
            ]
            if candidates:
                face.classification = "deltoid-like"
                face.conc_arc = max(candidates)[1]
                return
            face.classification = "other:no concave arc with tangent variation < pi"
            return
        face.classification = f"other:{n_corners} corners"


# ---------------------------------------------------------------------------
# single boundary curve -> complement face census
# ---------------------------------------------------------------------------


def circle_map_arr_curve(f, curve_id: int = 0) -> ArrCurve:
    from .curvegeo import conformal_curvature, find_cusps

    cusps = [t for t, _ in find_cusps(f)]

    def kappa(t):
        try:
            return conformal_curvature(f, float(t))
        except ValueError:
            return 0.0

    return ArrCurve(
        curve_id=curve_id,
        eval_fn=lambda t: f.at_angle(t),
        velocity_fn=lambda t: f.velocity(t),
        kappa_fn=kappa,
        cusp_params=cusps,
    )


def curve_complement_faces(f, cusps, doubles):
    """Per-face singularity census of the complement of f(T).

    Returns (component_id, double_count, cusp_count, classification,
    unbounded) for every face not covered by the image domain: winding-0
    faces for the disk family, winding-1 faces for the exterior family.
    """
    arr = Arrangement()
    arr.add_curve(circle_map_arr_curve(f))
    for tm, tp, _ in doubles:
        arr.add_contact(0, tm, 0, tp)
    faces = arr.build_faces()

    n = 4096
    t = TWO_PI * np.arange(n) / n
    boundary = f.at_angle(t)
    out = []
    comp_id = 0
    for face in faces:
        w = winding_number(boundary, face.probe)
        is_domain = (w != 0) if f.family == "S" else (w == 0 and face.unbounded) or (
            f.family == "Sigma" and w == 0
        )
        if f.family == "S" and w != 0:
            continue
        if f.family == "Sigma" and w == 0:
            continue
        out.append(
            (
                comp_id,
                face.contact_count,
                face.cusp_count,
                face.classification,
                face.unbounded,
            )
        )
        comp_id += 1
    return out
