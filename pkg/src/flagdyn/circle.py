"""Exact arc arithmetic on the projective line.

A point of RP^1 is an angle theta in [0, pi) for the direction
(cos theta, sin theta). Arcs are (center, radius) pairs in this angle
metric, which coincides with the Fubini-Study metric in dimension 2.
Projective 2x2 matrices act by Mobius maps; images of arcs are arcs and
are computed from endpoint images, so containment tests and margins on
RP^1 are exact up to roundoff (no sampling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HALF_TURN = math.pi


def angle_of(vec) -> float:
    """Angle in [0, pi) of a projective point [v0 : v1]."""
    v = np.asarray(vec, dtype=float)
    theta = math.atan2(v[1], v[0])
    return theta % HALF_TURN


def vec_of(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def angle_dist(a: float, b: float) -> float:
    """Distance on RP^1 = circle of circumference pi."""
    d = abs(a - b) % HALF_TURN
    return min(d, HALF_TURN - d)


def mobius_angle(m, theta: float) -> float:
    """Image angle of a projective point under a 2x2 matrix."""
    v = m @ vec_of(theta)
    return angle_of(v)


@dataclass(frozen=True)
class Arc:
    """Closed arc of RP^1: points within ``radius`` of ``center`` (angles)."""

    center: float
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", self.center % HALF_TURN)
        if not 0 <= self.radius < HALF_TURN / 2:
            raise ValueError(f"arc radius {self.radius} out of (0, pi/2)")

    def contains_angle(self, theta: float, slack: float = 0.0) -> bool:
        return angle_dist(theta, self.center) <= self.radius + slack

    def margin_of(self, theta: float) -> float:
        """Signed containment margin: positive inside, negative outside."""
        return self.radius - angle_dist(theta, self.center)

    def endpoints(self):
        return (self.center - self.radius) % HALF_TURN, (
            self.center + self.radius
        ) % HALF_TURN

    def expand(self, eps: float) -> "Arc":
        r = self.radius + eps
        if r >= HALF_TURN / 2:
            raise ValueError("expanded arc covers RP^1")
        return Arc(self.center, r)

    def contains_arc(self, other: "Arc") -> bool:
        return self.margin_of_arc(other) >= 0.0

    def margin_of_arc(self, other: "Arc") -> float:
        """min over points of ``other`` of this arc's containment margin."""
        return self.radius - (angle_dist(self.center, other.center) + other.radius)

    def intersects(self, other: "Arc") -> bool:
        return angle_dist(self.center, other.center) <= self.radius + other.radius

    def gap_to(self, other: "Arc") -> float:
        """FS gap between the closed arcs (0 if they meet)."""
        return max(0.0, angle_dist(self.center, other.center) - self.radius - other.radius)


def mobius_arc(m, arc: Arc) -> Arc:
    """Image arc under a projective 2x2 matrix.

    Mobius maps send arcs to arcs; the image is reconstructed from the
    images of the endpoints and of the center (the center image selects
    which of the two complementary arcs is the image).
    """
    lo, hi = arc.endpoints()
    a = mobius_angle(m, lo)
    b = mobius_angle(m, hi)
    mid = mobius_angle(m, arc.center)
    # the image arc has endpoints {a, b}; pick the side containing mid
    c1, r1 = _arc_from_endpoints(a, b)
    if Arc(c1, r1).contains_angle(mid, slack=1e-12):
        return Arc(c1, r1)
    c2 = (c1 + HALF_TURN / 2) % HALF_TURN
    return Arc(c2, HALF_TURN / 2 - r1)


def _arc_from_endpoints(a: float, b: float):
    """Center/radius of the shorter arc with endpoints a, b."""
    d = (b - a) % HALF_TURN
    if d <= HALF_TURN / 2:
        return (a + d / 2) % HALF_TURN, d / 2
    d2 = HALF_TURN - d
    return (b + d2 / 2) % HALF_TURN, d2 / 2


def cover_circle(arcs):
    """Greedy minimal subcover of RP^1 by closed arcs.

    Returns indices of a subfamily covering the circle, or None if the
    input family does not cover. Standard circular interval covering:
    start from the arc covering a fixed point with the farthest reach,
    then repeatedly take the arc extending coverage farthest.
    """
    if not arcs:
        return None
    intervals = []
    for i, arc in enumerate(arcs):
        lo = arc.center - arc.radius
        hi = arc.center + arc.radius
        intervals.append((lo % HALF_TURN, (hi - lo), i))
    # arcs covering angle 0 (i.e. lo + length wraps past a multiple of pi)
    start_candidates = [
        (lo + length, i) for lo, length, i in intervals if lo + length >= HALF_TURN
    ]
    if not start_candidates:
        # no arc covers angle 0: rotate frame to the first left endpoint
        base = min(lo for lo, _, _ in intervals)
        shifted = [((lo - base) % HALF_TURN, length, i) for lo, length, i in intervals]
        start_candidates = [
            (lo + length, i) for lo, length, i in shifted if lo <= 1e-12
        ]
        if not start_candidates:
            return None
        intervals = shifted
    reach, first = max(start_candidates)
    chosen = [first]
    covered_to = reach % HALF_TURN
    if reach - HALF_TURN >= min(lo for lo, _, _ in intervals):
        pass
    guard = 0
    while guard < len(intervals) + 2:
        guard += 1
        # done when the chosen arcs wrap all the way around
        total = covered_to
        start_lo = intervals[[x[2] for x in intervals].index(chosen[0])][0]
        if total >= start_lo and _wraps(arcs, chosen):
            return chosen
        extend = [
            (lo + length, i)
            for lo, length, i in intervals
            if lo <= covered_to + 1e-12 and lo + length > covered_to
        ]
        if not extend:
            return None
        reach, nxt = max(extend)
        chosen.append(nxt)
        covered_to = reach
        if covered_to >= HALF_TURN + intervals[[x[2] for x in intervals].index(chosen[0])][0]:
            return chosen
    return chosen if _wraps(arcs, chosen) else None


def _wraps(arcs, chosen):
    """Check that the chosen closed arcs cover RP^1 (by uncovered-gap scan)."""
    events = []
    for i in chosen:
        lo = (arcs[i].center - arcs[i].radius) % HALF_TURN
        hi = lo + 2 * arcs[i].radius
        events.append((lo, hi))
    events.sort()
    # unroll twice around the circle
    unrolled = events + [(lo + HALF_TURN, hi + HALF_TURN) for lo, hi in events]
    covered = events[0][0]
    for lo, hi in unrolled:
        if lo > covered + 1e-12:
            return False
        covered = max(covered, hi)
        if covered >= events[0][0] + HALF_TURN:
            return True
    return covered >= events[0][0] + HALF_TURN
