"""Thermal-image geometry: threshold mask, boundary, hull, width, tip.

The denaturation region is whatever exceeds the threshold temperature.
Its boundary pixels feed one convex hull (Andrew's monotone chain); the
hull's across-track extent is the reported width and its rightmost
vertex stands in for the tool tip. Pixel coordinates are (col, row) with
travel along columns; conversions to metres use the frame's px/mm ratio.
"""

from __future__ import annotations

import numpy as np


class NoDetectionError(RuntimeError):
    """No pixel exceeded the threshold; there is no tip to estimate."""


def threshold_mask(pixels: np.ndarray, threshold: float) -> np.ndarray:
    return pixels > threshold


def boundary_points(mask: np.ndarray) -> np.ndarray:
    """(N, 2) array of (col, row) pixels on the mask's 4-neighbour boundary."""
    if not mask.any():
        return np.empty((0, 2), dtype=np.int64)
    rows = np.any(mask, axis=1).nonzero()[0]
    cols = np.any(mask, axis=0).nonzero()[0]
    r0, r1 = rows[0], rows[-1] + 1
    c0, c1 = cols[0], cols[-1] + 1
    sub = mask[r0:r1, c0:c1]
    interior = np.zeros_like(sub)
    interior[1:-1, 1:-1] = (sub[1:-1, 1:-1] & sub[:-2, 1:-1]
                            & sub[2:, 1:-1] & sub[1:-1, :-2]
                            & sub[1:-1, 2:])
    edge = sub & ~interior
    rr, cc = edge.nonzero()
    return np.column_stack((cc + c0, rr + r0)).astype(np.int64)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull of 2-D points via the monotone chain, CCW order.

    Returns the hull vertices without repeating the first point.
    Degenerate inputs (0, 1, 2 points, collinear sets) return the
    extreme points.
    """
    pts = sorted({(p[0], p[1]) for p in np.asarray(points).tolist()})
    if len(pts) <= 2:
        return np.asarray(pts).reshape(-1, 2)

    def build(seq):
        chain: list[tuple] = []
        for p in seq:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                if ((a[0] - o[0]) * (p[1] - o[1])
                        - (a[1] - o[1]) * (p[0] - o[0])) <= 0:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain

    lower = build(pts)
    upper = build(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


def row_extremes(mask: np.ndarray) -> np.ndarray:
    """Leftmost and rightmost mask pixel of every occupied row.

    Every convex-hull vertex of the region is one of these points, so
    they are a sufficient (and much smaller) hull input than the full
    boundary.
    """
    occupied = np.flatnonzero(mask.any(axis=1))
    if occupied.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    sub = mask[occupied]
    first = sub.argmax(axis=1)
    last = mask.shape[1] - 1 - sub[:, ::-1].argmax(axis=1)
    return np.concatenate([
        np.column_stack((first, occupied)),
        np.column_stack((last, occupied)),
    ]).astype(np.int64)


def hull_of_frame(pixels: np.ndarray, threshold: float) -> np.ndarray:
    """Convex hull (col, row) of the super-threshold region; may be empty."""
    return convex_hull(row_extremes(threshold_mask(pixels, threshold)))


def width_from_hull(hull: np.ndarray, px_per_mm: float) -> float:
    """Across-track hull extent in metres; 0 for an empty hull.

    Width spans whole pixels, so a patch covering rows r..r+n-1 reads n
    pixels wide.
    """
    if hull.shape[0] == 0:
        return 0.0
    extent_px = float(hull[:, 1].max() - hull[:, 1].min()) + 1.0
    return extent_px / px_per_mm * 1e-3


def tip_from_hull(hull: np.ndarray, px_per_mm: float) -> np.ndarray:
    """Rightmost hull vertex in metres; ties go to the smaller |y|."""
    if hull.shape[0] == 0:
        raise NoDetectionError("no super-threshold pixels in frame")
    best = max(hull.tolist(), key=lambda p: (p[0], -abs(p[1])))
    return np.array(best, dtype=float) / px_per_mm * 1e-3


def measure_width(frame, threshold: float = 60.0) -> float:
    """Across-track extent of the denaturation hull, in metres."""
    return width_from_hull(hull_of_frame(frame.pixels, threshold),
                           frame.px_per_mm)


def estimate_tip(frame, threshold: float = 60.0) -> np.ndarray:
    """Rightmost hull vertex in metres (frame coordinates).

    Raises NoDetectionError on an empty mask so callers can fall back to
    a predict-only filter step.
    """
    return tip_from_hull(hull_of_frame(frame.pixels, threshold),
                         frame.px_per_mm)
