"""Admissible-exponent region in the (l, k) plane.

The region is the intersection of the five half planes

    l <= 1/4,   k >= 0 (implied),   2l + k <= 1,   l + k <= 1,
    k >= l,     k >= -l,

clipped to a display window.  Vertices come from pairwise boundary-line
intersections filtered by feasibility, ordered by angle.
"""

from __future__ import annotations

import numpy as np

# a*l + b*k <= c
CONSTRAINTS = (
    ("l < 1/4", 1.0, 0.0, 0.25),
    ("2l + k < 1", 2.0, 1.0, 1.0),
    ("l + k <= 1", 1.0, 1.0, 1.0),
    ("k >= l", 1.0, -1.0, 0.0),
    ("k >= -l", -1.0, -1.0, 0.0),
)


def window_constraints(l_range, k_range):
    return (
        ("window l min", -1.0, 0.0, -l_range[0]),
        ("window l max", 1.0, 0.0, l_range[1]),
        ("window k min", 0.0, -1.0, -k_range[0]),
        ("window k max", 0.0, 1.0, k_range[1]),
    )


def admissible(l, k, tol=0.0):
    """Direct evaluation of the five inequalities (closed version)."""
    return all(a * l + b * k <= c + tol for _, a, b, c in CONSTRAINTS)


def region_polygon(l_range=(-0.75, 0.5), k_range=(0.0, 1.25)):
    """Vertices (counterclockwise) of the admissible region in the window."""
    cons = CONSTRAINTS + window_constraints(l_range, k_range)
    pts = []
    for i in range(len(cons)):
        for j in range(i + 1, len(cons)):
            _, a1, b1, c1 = cons[i]
            _, a2, b2, c2 = cons[j]
            det = a1 * b2 - a2 * b1
            if abs(det) < 1e-12:
                continue
            l = (c1 * b2 - c2 * b1) / det
            k = (a1 * c2 - a2 * c1) / det
            if all(a * l + b * k <= c + 1e-9 for _, a, b, c in cons):
                pts.append((l, k))
    # deduplicate and order by angle around the centroid
    uniq = []
    for p in pts:
        if not any(abs(p[0] - q[0]) + abs(p[1] - q[1]) < 1e-9 for q in uniq):
            uniq.append(p)
    if len(uniq) < 3:
        return np.zeros((0, 2))
    arr = np.array(uniq)
    center = arr.mean(axis=0)
    angles = np.arctan2(arr[:, 1] - center[1], arr[:, 0] - center[0])
    return arr[np.argsort(angles)]
