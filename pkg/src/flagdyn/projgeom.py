"""Projective points, hyperplanes, flags, lines, charts, and the cross-ratio.

Points and hyperplanes are unit vectors / covectors, sign-canonicalized so
equal projective classes have equal coordinates. The cross-ratio follows
the convention [0, inf; 1, z] = z on the projective line under the
kernel identification of covectors with points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoincidentPoints,
    DegenerateImage,
    InfiniteCrossRatio,
    LineInHyperplane,
    NotInChart,
)

INCIDENCE_TOL = 1e-10
OPPOSITION_TOL = 1e-6


def _canonical_unit(vec):
    v = np.asarray(vec, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-300:
        raise DegenerateImage("vector norm underflow")
    v = v / n
    idx = int(np.argmax(np.abs(v)))
    if v[idx] < 0:
        v = -v
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class ProjPoint:
    coords: np.ndarray

    def __init__(self, coords):
        object.__setattr__(self, "coords", _canonical_unit(coords))

    @property
    def dim(self):
        return len(self.coords)

    def __eq__(self, other):
        return isinstance(other, ProjPoint) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"ProjPoint({np.round(self.coords, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class ProjHyperplane:
    covector: np.ndarray

    def __init__(self, covector):
        object.__setattr__(self, "covector", _canonical_unit(covector))

    @property
    def dim(self):
        return len(self.covector)

    def __eq__(self, other):
        return isinstance(other, ProjHyperplane) and np.array_equal(
            self.covector, other.covector
        )

    def __hash__(self):
        return hash(self.covector.tobytes())

    def __repr__(self):
        return f"ProjHyperplane({np.round(self.covector, 6).tolist()})"


@dataclass(frozen=True)
class Flag:
    """Incident (point, hyperplane) pair: a flag of type (1, d-1)."""

    point: ProjPoint
    hyperplane: ProjHyperplane

    def __post_init__(self):
        r = abs(float(self.hyperplane.covector @ self.point.coords))
        if r > INCIDENCE_TOL:
            raise ValueError(f"point/hyperplane incidence residual {r:.2e} too large")


@dataclass(frozen=True, eq=False)
class ProjectiveLine:
    """2-plane through the origin, stored as an orthonormal basis pair."""

    basis: np.ndarray  # shape (2, d), rows orthonormal

    def __init__(self, basis):
        b = np.asarray(basis, dtype=float)
        if b.shape[0] != 2:
            raise ValueError("projective line needs exactly two basis vectors")
        g = b @ b.T
        if np.max(np.abs(g - np.eye(2))) > 1e-12:
            raise ValueError("basis vectors must be orthonormal")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return self.basis.shape[1]

    def point_at(self, s):
        """Affine parametrization: s -> [b0 + s * b1], with s = inf at [b1]."""
        if math.isinf(s):
            return ProjPoint(self.basis[1])
        return ProjPoint(self.basis[0] + s * self.basis[1])

    def param_of(self, p: ProjPoint):
        """Inverse of ``point_at`` for points on the line (inf for [b1])."""
        c0 = float(self.basis[0] @ p.coords)
        c1 = float(self.basis[1] @ p.coords)
        if abs(c0) < 1e-14:
            return math.inf
        return c1 / c0


def act(m, p: ProjPoint) -> ProjPoint:
    img = m.arr @ p.coords
    if np.linalg.norm(img) < 1e-300:
        raise DegenerateImage("projective image underflow")
    return ProjPoint(img)


def act_many(m, coords):
    """Vectorized action on an (n, d) array of unit rows; returns unit rows."""
    img = coords @ m.arr.T
    norms = np.linalg.norm(img, axis=1, keepdims=True)
    if np.any(norms < 1e-300):
        raise DegenerateImage("projective image underflow")
    return img / norms


def act_dual(m, h: ProjHyperplane) -> ProjHyperplane:
    """Inverse-transpose action, so incidence is preserved."""
    img = np.linalg.solve(m.arr.T, h.covector)
    return ProjHyperplane(img)


def opposition_margin(p: ProjPoint, h: ProjHyperplane) -> float:
    """|<covector, coords>| for unit representatives: 0 means incident."""
    return abs(float(h.covector @ p.coords))


def flags_opposite(f1: Flag, f2: Flag, tol: float = OPPOSITION_TOL) -> bool:
    """Both cross-pairings must clear the opposition tolerance."""
    return (
        opposition_margin(f1.point, f2.hyperplane) > tol
        and opposition_margin(f2.point, f1.hyperplane) > tol
    )


def chart_basis(h: ProjHyperplane) -> np.ndarray:
    """Orthonormal completion of the chart covector, deterministic.

    Gram-Schmidt over the standard basis in index order, skipping the
    basis vector most aligned with the covector. Rows are the d-1
    completion vectors.
    """
    d = h.dim
    skip = int(np.argmax(np.abs(h.covector)))
    rows = [h.covector]
    for i in range(d):
        if i == skip:
            continue
        v = np.zeros(d)
        v[i] = 1.0
        for r in rows:
            v = v - (r @ v) * r
        n = np.linalg.norm(v)
        v = v / n
        rows.append(v)
    return np.array(rows[1:])


def affine_chart(h: ProjHyperplane, p: ProjPoint) -> np.ndarray:
    """Coordinates of p in the chart of points off h.

    The lift of p is scaled so its covector component is 1; the returned
    d-1 coefficients are taken against the deterministic orthonormal
    completion of the covector.
    """
    denom = float(h.covector @ p.coords)
    if abs(denom) <= 1e-12:
        raise NotInChart("point incident to the chart hyperplane")
    lift = p.coords / denom
    return chart_basis(h) @ lift


def chart_point(h: ProjHyperplane, coords) -> ProjPoint:
    """Inverse of ``affine_chart``."""
    lift = h.covector + np.asarray(coords, dtype=float) @ chart_basis(h)
    return ProjPoint(lift)


def chart_points_many(h: ProjHyperplane, coords) -> np.ndarray:
    """Vectorized ``chart_point`` for an (n, d-1) array; returns unit rows."""
    lifts = h.covector[None, :] + np.asarray(coords, dtype=float) @ chart_basis(h)
    return lifts / np.linalg.norm(lifts, axis=1, keepdims=True)


def cross_ratio(
    w1: ProjHyperplane, w2: ProjHyperplane, z1: ProjPoint, z2: ProjPoint
) -> float:
    """[w1, w2; z1, z2] = w1(z2) w2(z1) / (w1(z1) w2(z2)), lift-independent."""
    a = float(w1.covector @ z2.coords)
    b = float(w2.covector @ z1.coords)
    c = float(w1.covector @ z1.coords)
    d = float(w2.covector @ z2.coords)
    if abs(c) <= 1e-14 or abs(d) <= 1e-14:
        raise InfiniteCrossRatio("z1 or z2 lies on a reference hyperplane")
    return (a * b) / (c * d)


def line_through(p: ProjPoint, q: ProjPoint) -> ProjectiveLine:
    if fubini_study(p, q) <= 1e-10:
        raise CoincidentPoints("points coincide; no unique line")
    b0 = p.coords
    w = q.coords - (q.coords @ b0) * b0
    b1 = w / np.linalg.norm(w)
    return ProjectiveLine(np.array([b0, b1]))


def intersect(L: ProjectiveLine, h: ProjHyperplane) -> ProjPoint:
    c0 = float(h.covector @ L.basis[0])
    c1 = float(h.covector @ L.basis[1])
    if abs(c0) < 1e-13 and abs(c1) < 1e-13:
        raise LineInHyperplane("hyperplane contains the line")
    return ProjPoint(c1 * L.basis[0] - c0 * L.basis[1])


def fubini_study(p: ProjPoint, q: ProjPoint) -> float:
    """Angle metric on projective space, stable at both small and right angles."""
    c = abs(float(p.coords @ q.coords))
    rej = q.coords - (p.coords @ q.coords) * p.coords
    s = float(np.linalg.norm(rej))
    return math.atan2(s, c)


def fubini_study_many(pts_a, pts_b) -> np.ndarray:
    """Pairwise FS distances between (n, d) and (m, d) unit-row arrays."""
    dots = np.abs(pts_a @ pts_b.T)
    dots = np.clip(dots, 0.0, 1.0)
    sins = np.sqrt(np.clip(1.0 - dots * dots, 0.0, None))
    return np.arctan2(sins, dots)
