"""Shape descriptors of a binary mask.

Moments and hull areas are accumulated in integers so that results are
exactly invariant under 90-degree rotations and reflections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, astuple

import numpy as np

from .segment import ExtractionError

SQRT2 = math.sqrt(2.0)

# clockwise from west, (dy, dx)
_DIRS = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}


@dataclass(frozen=True)
class GeometricFeatures:
    area: float
    perimeter: float
    major_axis: float
    minor_axis: float
    eccentricity: float
    solidity: float
    convex_area: float
    aspect_ratio: float

    def as_vector(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


def trace_perimeter(mask: np.ndarray) -> float:
    """Length of the outer boundary by Moore-neighbour tracing.

    Axis-aligned steps count 1, diagonal steps sqrt(2). Tracing stops when
    the start pixel is about to repeat its first move (Jacob's criterion).
    """
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    start = (int(ys[0]), int(xs[0]))

    def fg(y, x):
        return 0 <= y < h and 0 <= x < w and mask[y, x]

    cur, back = start, 0
    first_k = None
    length = 0.0
    for _ in range(8 * int(mask.sum()) + 16):
        for j in range(1, 9):
            k = (back + j) % 8
            dy, dx = _DIRS[k]
            if fg(cur[0] + dy, cur[1] + dx):
                break
        else:
            return 0.0   # isolated pixel
        if cur == start and first_k is not None and k == first_k:
            return length
        if first_k is None:
            first_k = k
        length += SQRT2 if dy and dx else 1.0
        pdy, pdx = _DIRS[(k - 1) % 8]
        nxt = (cur[0] + dy, cur[1] + dx)
        back = _DIR_INDEX[(cur[0] + pdy - nxt[0], cur[1] + pdx - nxt[1])]
        cur = nxt
    raise RuntimeError("boundary tracing did not close")


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> list[tuple[int, int]]:
    """Andrew's monotone chain; returns the hull counter-clockwise."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def shoelace2(poly) -> int:
    """Twice the signed polygon area (exact for integer vertices)."""
    n = len(poly)
    return sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1] for i in range(n))


def hull_pixel_count(mask: np.ndarray) -> int:
    """Number of pixel centres inside the convex hull of the foreground centres.

    The hull is built from the extreme pixel of each row (only those can be
    vertices); its shoelace area A and boundary lattice count B give the
    interior-plus-boundary count A + B/2 + 1 by Pick's theorem. A filled
    rectangle therefore has exactly its own pixel count.
    """
    pts = []
    for y in np.nonzero(mask.any(axis=1))[0]:
        xs = np.nonzero(mask[y])[0]
        pts += [(int(xs[0]), int(y)), (int(xs[-1]), int(y))]
    hull = convex_hull(pts)
    if len(hull) < 3:
        return len(set(pts))
    twice_area = abs(shoelace2(hull))
    boundary = sum(math.gcd(abs(hull[i][0] - hull[i - 1][0]), abs(hull[i][1] - hull[i - 1][1]))
                   for i in range(len(hull)))
    return (twice_area + boundary) // 2 + 1


def geometric_features(mask: np.ndarray) -> GeometricFeatures:
    mask = np.asarray(mask, dtype=bool)
    ys, xs = np.nonzero(mask)
    n = len(xs)
    if n < 2:
        raise ExtractionError("degenerate geometry: mask has fewer than 2 pixels")
    xs = [int(v) for v in xs]
    ys = [int(v) for v in ys]
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    syy = sum(y * y for y in ys)
    sxy = sum(x * y for x, y in zip(xs, ys))
    # n^2 times the central second moments, exact integers
    a2 = n * sxx - sx * sx
    c2 = n * syy - sy * sy
    b2 = n * sxy - sx * sy
    if a2 * c2 - b2 * b2 == 0:
        raise ExtractionError("degenerate geometry: foreground pixels are collinear")
    nn = float(n) * n
    a, c, b = a2 / nn, c2 / nn, b2 / nn
    half_tr = (a + c) / 2.0
    root = math.sqrt(((a - c) / 2.0) ** 2 + b * b)
    lam1 = half_tr + root
    # product form avoids cancellation for thin shapes
    lam2 = (a2 * c2 - b2 * b2) / (nn * nn) / lam1
    major = 4.0 * math.sqrt(lam1)
    minor = 4.0 * math.sqrt(lam2)
    ecc = math.sqrt(max(0.0, 1.0 - lam2 / lam1))
    hull = float(hull_pixel_count(mask))
    area = float(n)
    return GeometricFeatures(
        area=area,
        perimeter=trace_perimeter(mask),
        major_axis=major,
        minor_axis=minor,
        eccentricity=ecc,
        solidity=area / hull,
        convex_area=hull,
        aspect_ratio=major / minor,
    )
