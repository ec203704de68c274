"""Exact geometric primitives for box-based set approximations.

Points are plain 1-D numpy arrays. Axis-aligned closed hyperrectangles
(`BoxRegion`) are the atoms that every set approximation and every gap is
built from. Rigid motions (`AffineMap`: a rotation in SO(d) plus a
translation) and convex hulls of the supported families (boxes, possibly
rotated) round out the module.

All operations are pure functions on immutable values.

Tolerances: pure linear-algebra identities are held to ``LINALG_TOL``;
quantities that pass through a square root use ``SQRT_TOL``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DegenerateHull, DegeneratePin, DimensionMismatch

LINALG_TOL = 1e-12
SQRT_TOL = 1e-9

ArrayLike = Union[Sequence[float], np.ndarray, float]


def as_point(x: ArrayLike, dim: Optional[int] = None) -> np.ndarray:
    """Coerce to a finite 1-D float array, optionally checking its length."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D point, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and p.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {p.size}")
    return p


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BoxRegion:
    """Axis-aligned closed box ``[lo_1, hi_1] x ... x [lo_d, hi_d]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lo)
        hi = as_point(self.hi)
        if lo.size != hi.size:
            raise DimensionMismatch("lo and hi have different lengths")
        if np.any(lo > hi):
            raise ValueError(f"box has lo > hi: {lo} / {hi}")
        object.__setattr__(self, "lo", _freeze(lo))
        object.__setattr__(self, "hi", _freeze(hi))

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def side(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.hi <= self.lo))

    def contains(self, points: ArrayLike, tol: float = 0.0, strict: bool = False) -> np.ndarray:
        """Membership of one point (returns 0-d bool) or a stack of points (N, d)."""
        pts = np.asarray(points, dtype=float)
        if strict:
            inside = (pts > self.lo + tol) & (pts < self.hi - tol)
        else:
            inside = (pts >= self.lo - tol) & (pts <= self.hi + tol)
        return np.all(inside, axis=-1)

    def translate(self, vec: ArrayLike) -> "BoxRegion":
        v = as_point(vec, self.dim)
        return BoxRegion(self.lo + v, self.hi + v)

    def intersect(self, other: "BoxRegion") -> Optional["BoxRegion"]:
        """Intersection box of two closed boxes, or None if they are disjoint."""
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            return None
        return BoxRegion(lo, hi)

    def approx_equal(self, other: "BoxRegion", tol: float = LINALG_TOL) -> bool:
        return (
            self.dim == other.dim
            and bool(np.all(np.abs(self.lo - other.lo) <= tol))
            and bool(np.all(np.abs(self.hi - other.hi) <= tol))
        )

    def to_json(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "BoxRegion":
        return cls(np.asarray(obj["lo"], float), np.asarray(obj["hi"], float))

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"BoxRegion(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


def box_distance(a: BoxRegion, b: BoxRegion) -> float:
    """Euclidean distance between two closed boxes; 0 iff they intersect."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"boxes of dimension {a.dim} and {b.dim}")
    gap = np.maximum(0.0, np.maximum(a.lo - b.hi, b.lo - a.hi))
    return float(np.linalg.norm(gap))


def box_diameter(a: BoxRegion) -> float:
    """Euclidean diameter of a closed box, |hi - lo|."""
    return a.diameter


def pairwise_box_distances(
    lo1: np.ndarray, hi1: np.ndarray, lo2: np.ndarray, hi2: np.ndarray
) -> np.ndarray:
    """Distance matrix (N1, N2) between two families of axis-aligned boxes.

    Array-level sibling of :func:`box_distance`; used by the gap-enumeration
    kernels where per-box objects would be too slow.
    """
    gap = np.maximum(lo1[:, None, :] - hi2[None, :, :], lo2[None, :, :] - hi1[:, None, :])
    np.maximum(gap, 0.0, out=gap)
    np.square(gap, out=gap)
    return np.sqrt(gap.sum(axis=-1))


def corner_points(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """All 2^d corners of the box [lo, hi], one per row."""
    lo = as_point(lo)
    hi = as_point(hi, lo.size)
    picks = np.array(list(itertools.product((0, 1), repeat=lo.size)), dtype=float)
    return lo + picks * (hi - lo)


def rotation_to_diagonal(v: ArrayLike, tol: float = LINALG_TOL) -> np.ndarray:
    """Rotation R in SO(d) carrying v onto the positive diagonal ray.

    R @ v == (|v|/sqrt(d)) * (1, ..., 1), built from at most two Householder
    reflections: one swapping v/|v| with the unit diagonal, one fixing the
    diagonal to restore orientation. In 1-D every vector already lies on the
    diagonal, so the identity is returned.
    """
    v = as_point(v)
    d = v.size
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot orient the zero vector")
    if d == 1:
        return np.eye(1)
    u = v / norm
    w = np.full(d, 1.0 / np.sqrt(d))
    n = u - w
    n_norm = np.linalg.norm(n)
    if n_norm <= tol:
        return np.eye(d)
    n /= n_norm
    h1 = np.eye(d) - 2.0 * np.outer(n, n)  # reflects u -> w, det -1
    m = np.zeros(d)
    m[0], m[1] = 1.0, -1.0  # orthogonal to the diagonal for every d >= 2
    m /= np.sqrt(2.0)
    h2 = np.eye(d) - 2.0 * np.outer(m, m)  # fixes w, det -1
    return h2 @ h1


@dataclass(frozen=True, eq=False)
class AffineMap:
    """Orientation-preserving isometry ``x -> rotation @ x + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        t = as_point(self.translation)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise DimensionMismatch(f"rotation must be square, got shape {r.shape}")
        if r.shape[0] != t.size:
            raise DimensionMismatch("rotation and translation dimensions differ")
        if np.max(np.abs(r.T @ r - np.eye(r.shape[0]))) > 1e-10:
            raise ValueError("rotation is not orthogonal")
        if abs(np.linalg.det(r) - 1.0) > 1e-10:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", _freeze(r))
        object.__setattr__(self, "translation", _freeze(t))

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def translation_only(cls, vec: ArrayLike) -> "AffineMap":
        v = as_point(vec)
        return cls(np.eye(v.size), v)

    @property
    def dim(self) -> int:
        return self.translation.size

    @property
    def is_translation(self) -> bool:
        return bool(np.max(np.abs(self.rotation - np.eye(self.dim))) <= LINALG_TOL)

    def apply(self, points: ArrayLike) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "AffineMap":
        rt = self.rotation.T
        return AffineMap(rt, -rt @ self.translation)

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """self after inner: x -> self(inner(x))."""
        return AffineMap(
            self.rotation @ inner.rotation,
            self.rotation @ inner.translation + self.translation,
        )

    def to_json(self) -> dict:
        return {"rotation": self.rotation.tolist(), "translation": self.translation.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "AffineMap":
        return cls(np.asarray(obj["rotation"], float), np.asarray(obj["translation"], float))


def normalize_pair(
    pin: ArrayLike, u1: ArrayLike, u2: ArrayLike
) -> tuple[AffineMap, AffineMap]:
    """Isometries sending each pin block to the origin and u1/u2 to the diagonal.

    The pin lives in R^{2d} and splits into a first-block / second-block pair;
    S1 maps the first block to 0 and u1 onto the positive diagonal, S2 does the
    same for the second block and u2. Both maps preserve every pairwise
    distance, so pinned distance sets are unchanged when both factor sets and
    the pin are pushed through them.
    """
    pin = as_point(pin)
    if pin.size % 2 != 0:
        raise DimensionMismatch("pin must live in R^{2d}")
    d = pin.size // 2
    u1 = as_point(u1, d)
    u2 = as_point(u2, d)
    maps = []
    for block, u in ((pin[:d], u1), (pin[d:], u2)):
        v = u - block
        if np.linalg.norm(v) == 0.0:
            raise DegeneratePin("gap endpoint coincides with the pin block")
        rot = rotation_to_diagonal(v)
        maps.append(AffineMap(rot, -rot @ block))
    return maps[0], maps[1]


@dataclass(frozen=True, eq=False)
class ConvexHullProxy:
    """Convex hull of a supported set family: a box, possibly rotated.

    ``carrier`` always holds an axis-aligned box. For ``kind == "axis-box"``
    the hull is the carrier itself. For ``kind == "rotated-box"`` the hull is
    ``{rotation @ x : x in carrier}``; a translation component is folded into
    the carrier (shift by rotation^T @ t), which loses no generality.
    """

    kind: str
    carrier: BoxRegion
    rotation: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("axis-box", "rotated-box"):
            raise ValueError(f"unknown hull kind {self.kind!r}")
        if self.kind == "rotated-box":
            if self.rotation is None:
                raise ValueError("rotated-box hull needs a rotation")
            object.__setattr__(self, "rotation", _freeze(np.asarray(self.rotation, float)))

    @classmethod
    def from_box(cls, box: BoxRegion) -> "ConvexHullProxy":
        return cls("axis-box", box)

    @classmethod
    def from_affine_image(cls, box: BoxRegion, map_: AffineMap) -> "ConvexHullProxy":
        if map_.is_translation:
            return cls("axis-box", box.translate(map_.translation))
        shifted = box.translate(map_.rotation.T @ map_.translation)
        return cls("rotated-box", shifted, map_.rotation)

    @property
    def dim(self) -> int:
        return self.carrier.dim

    @property
    def has_interior(self) -> bool:
        return not self.carrier.is_degenerate

    def vertices(self) -> np.ndarray:
        corners = corner_points(self.carrier.lo, self.carrier.hi)
        if self.kind == "axis-box":
            return corners
        return corners @ self.rotation.T

    def contains(self, points: ArrayLike, tol: float = 0.0, strict: bool = False) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.kind == "rotated-box":
            pts = pts @ self.rotation  # rotation^T applied row-wise
        return self.carrier.contains(pts, tol=tol, strict=strict)


def _interiors_intersect(h1: ConvexHullProxy, h2: ConvexHullProxy) -> bool:
    if h1.kind == "axis-box" and h2.kind == "axis-box":
        lo = np.maximum(h1.carrier.lo, h2.carrier.lo)
        hi = np.minimum(h1.carrier.hi, h2.carrier.hi)
        return bool(np.all(lo < hi))
    # Rotated case: witness-based sufficient check (vertices and centers).
    for a, b in ((h1, h2), (h2, h1)):
        probes = np.vstack([a.vertices(), a.vertices().mean(axis=0, keepdims=True)])
        if np.any(b.contains(probes, strict=True)):
            return True
    return False


def hulls_linked(h1: ConvexHullProxy, h2: ConvexHullProxy) -> bool:
    """Sufficient witness that two solid hulls are linked.

    True iff the open interiors intersect and each hull has a vertex strictly
    outside the other's closure. Linked hulls certify that neither underlying
    set can be contained in a gap of the other.
    """
    if h1.dim != h2.dim:
        raise DimensionMismatch("hulls of different dimension")
    if not (h1.has_interior and h2.has_interior):
        raise DegenerateHull("linkedness requires solid hulls")
    if not _interiors_intersect(h1, h2):
        return False
    out1 = bool(np.any(~h2.contains(h1.vertices())))
    out2 = bool(np.any(~h1.contains(h2.vertices())))
    return out1 and out2
