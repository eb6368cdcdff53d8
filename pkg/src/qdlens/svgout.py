"""Small dependency-free SVG writer for curves, markers, and overlays."""

from __future__ import annotations

import numpy as np

__all__ = ["SvgCanvas", "curve_svg"]


class SvgCanvas:
    def __init__(self, manifest: str | None = None, size: int = 640):
        self.elements = []
        self.points = []
        self.manifest = manifest
        self.size = size

    def path(self, pts, color="#1f4e79", width=1.5, closed=True):
        pts = np.asarray(pts, dtype=complex)
        self.points.append(pts)
        self.elements.append(("path", pts, color, width, closed))

    def marker(self, z, color="#c0392b", radius=4.0, shape="circle"):
        self.points.append(np.array([z], dtype=complex))
        self.elements.append(("marker", complex(z), color, radius, shape))

    def _transform(self):
        allpts = np.concatenate(self.points)
        x0, x1 = allpts.real.min(), allpts.real.max()
        y0, y1 = allpts.imag.min(), allpts.imag.max()
        span = max(x1 - x0, y1 - y0, 1e-12)
        pad = 0.06 * span
        scale = self.size / (span + 2 * pad)

        def tx(z):
            return (
                (z.real - x0 + pad) * scale,
                self.size - (z.imag - y0 + pad) * scale,
            )

        return tx

    def write(self, path):
        tx = self._transform()
        lines = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" '
            f'height="{self.size}" viewBox="0 0 {self.size} {self.size}">',
        ]
        if self.manifest:
            safe = self.manifest.replace("--", "- -")
            lines.append(f"<!-- manifest: {safe} -->")
        lines.append('<rect width="100%" height="100%" fill="white"/>')
        for el in self.elements:
            if el[0] == "path":
                _, pts, color, width, closed = el
                coords = " ".join(f"{tx(p)[0]:.3f},{tx(p)[1]:.3f}" for p in pts)
                tag = "polygon" if closed else "polyline"
                lines.append(
                    f'<{tag} points="{coords}" fill="none" stroke="{color}" '
                    f'stroke-width="{width}"/>'
                )
            else:
                _, z, color, radius, shape = el
                x, y = tx(z)
                if shape == "circle":
                    lines.append(
                        f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{radius}" '
                        f'fill="{color}"/>'
                    )
                else:
                    s = radius
                    lines.append(
                        f'<rect x="{x - s:.3f}" y="{y - s:.3f}" width="{2 * s}" '
                        f'height="{2 * s}" fill="{color}"/>'
                    )
        lines.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def curve_svg(curve, path, manifest=None):
    canvas = SvgCanvas(manifest=manifest)
    canvas.path(np.array([p for _, p in curve.samples]))
    for _, p in curve.cusps:
        canvas.marker(p, color="#c0392b", shape="circle")
    for _, _, p in curve.double_points:
        canvas.marker(p, color="#27ae60", shape="square")
    canvas.write(path)
