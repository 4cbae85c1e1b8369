"""Dependency-free SVG scatter plots of sample clouds.

The document is an 800x800 viewport with fixed element ids:
``cloud`` (scaled points), ``limit-set`` (boundary polyline of the limit
shape), ``inner`` (dashed curve, points inside it are hidden), ``edge``
(edge points) and ``cmax`` (coordinatewise maximum). The first line is a
version comment; everything after it depends only on the inputs.
"""

from __future__ import annotations

import numpy as np

from .shapes import StarShape

SIZE = 800
MARGIN = 40
BOUNDARY_SAMPLES = 256


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def cloud_svg(
    points: np.ndarray,
    shape: StarShape | None = None,
    edge: np.ndarray | None = None,
    cmax: np.ndarray | None = None,
    positive_quadrant: bool = False,
    hide_below: float | None = None,
    title: str = "",
    version: str = "",
) -> str:
    """Render a planar cloud.

    Parameters
    ----------
    points : (n, 2) array
        Scaled sample points.
    shape : StarShape, optional
        Limit shape; its boundary is drawn from 256 ``boundary_point`` samples.
    positive_quadrant : bool
        Restrict the plot to ``(0, inf)^2``.
    hide_below : float, optional
        Omit points with ``shape.gauge < hide_below`` and draw that level
        as a dashed curve.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("cloud_svg needs planar points")
    if positive_quadrant:
        pts = pts[np.all(pts > 0, axis=1)]
    if hide_below is not None and shape is not None:
        pts = pts[np.asarray(shape.gauge(pts)) >= hide_below] if len(pts) else pts

    if positive_quadrant:
        phi = np.linspace(0.0, 0.5 * np.pi, BOUNDARY_SAMPLES)
    else:
        phi = np.linspace(0.0, 2.0 * np.pi, BOUNDARY_SAMPLES)
    boundary = None
    if shape is not None:
        boundary = shape.boundary_points(np.column_stack([np.cos(phi), np.sin(phi)]))
        boundary = boundary[np.all(np.isfinite(boundary), axis=1)]

    extent = [1.0]
    for arr in (pts, boundary):
        if arr is not None and len(arr):
            extent.append(float(np.max(np.abs(arr))))
    half = 1.1 * max(extent)
    lo = 0.0 if positive_quadrant else -half
    span = half - lo
    scale = (SIZE - 2 * MARGIN) / span

    def px(xy):
        xy = np.atleast_2d(xy)
        return MARGIN + (xy[:, 0] - lo) * scale, SIZE - MARGIN - (xy[:, 1] - lo) * scale

    def polyline(arr, ident, extra=""):
        x, y = px(arr)
        coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y))
        return f'<polyline id="{ident}" fill="none" stroke="black" stroke-width="1.5"{extra} points="{coords}"/>'

    out = [
        f"<!-- startail {version} -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    ax, ay = px(np.array([[lo, 0.0], [half, 0.0], [0.0, lo], [0.0, half]]))
    out.append(
        f'<g id="axes" stroke="#999" stroke-width="1">'
        f'<line x1="{_fmt(ax[0])}" y1="{_fmt(ay[0])}" x2="{_fmt(ax[1])}" y2="{_fmt(ay[1])}"/>'
        f'<line x1="{_fmt(ax[2])}" y1="{_fmt(ay[2])}" x2="{_fmt(ax[3])}" y2="{_fmt(ay[3])}"/></g>'
    )
    x, y = px(pts) if len(pts) else (np.empty(0), np.empty(0))
    out.append('<g id="cloud" fill="#555">')
    out.extend(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="1.5"/>' for a, b in zip(x, y))
    out.append("</g>")
    if boundary is not None and len(boundary):
        out.append(polyline(boundary, "limit-set"))
        if hide_below is not None:
            out.append(polyline(hide_below * boundary, "inner", ' stroke-dasharray="6,4"'))
    if edge is not None and len(edge):
        x, y = px(edge)
        out.append('<g id="edge" fill="none" stroke="#c00">')
        out.extend(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="3"/>' for a, b in zip(x, y))
        out.append("</g>")
    if cmax is not None:
        x, y = px(cmax)
        out.append(f'<circle id="cmax" cx="{_fmt(x[0])}" cy="{_fmt(y[0])}" r="5" fill="black"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
