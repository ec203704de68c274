"""Finite-depth models of the supported compact set families.

Five declarative set descriptions are supported:

* ``Cantor1D(ratio, depth)`` -- middle-gap Cantor set on [0,1] keeping two
  intervals of relative length ``ratio`` per step, ``ratio`` in (0, 1/2);
* ``CantorGaps(gaps)`` -- an explicit 1-D set given by a finite disjoint list
  of open gap intervals inside (0,1); the set is exact, not a truncation;
* ``CarpetA(n, d, depth)`` -- the carpet obtained by splitting [0,1]^d into
  n^d boxes and removing the middle one (n odd, >= 3);
* ``CarpetB(n, d, depth)`` -- the carpet keeping only the outer shell of
  boxes, removing the middle (n-2)^d block (n odd, >= 5);
* ``AffineImage(base, map)`` -- a rigid image of any of the above.

A construction yields two artifacts. ``build_approx`` returns the depth-k
cylinder cells as a `SetApprox` (the attractor is contained in their union,
and every cell corner provably belongs to the attractor, which gives exact
sample points). ``enumerate_gaps`` returns the bounded complementary gaps
created through depth k as a `GapCatalog`, ordered by non-increasing
diameter with lexicographic centers breaking ties.

Cells of rigid images are stored in the pre-image frame together with the
map; all distances and diameters are isometry-invariant, so downstream
computations on the pre-image data are exact for the image.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import CellCapExceeded, DimensionMismatch, InvalidSpec, SampleCapExceeded
from .geometry import AffineMap, BoxRegion, ConvexHullProxy

DEFAULT_MAX_CELLS = 10_000_000
MAX_CELLS_ENV = "THICKSET_MAX_CELLS"


def resolve_max_cells(max_cells: Optional[int] = None) -> int:
    if max_cells is not None:
        return int(max_cells)
    env = os.environ.get(MAX_CELLS_ENV)
    if env:
        return int(env)
    return DEFAULT_MAX_CELLS


# ---------------------------------------------------------------------------
# Specs


@dataclass(frozen=True)
class Cantor1D:
    ratio: float
    depth: int = 0

    def __post_init__(self):
        if not (0.0 < self.ratio < 0.5):
            raise InvalidSpec(f"Cantor1D ratio must lie in (0, 1/2), got {self.ratio}")
        if self.depth < 0:
            raise InvalidSpec("depth must be >= 0")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class CantorGaps:
    gaps: tuple
    depth: int = 0

    def __post_init__(self):
        gaps = tuple((float(a), float(b)) for a, b in self.gaps)
        prev_end = 0.0
        for a, b in sorted(gaps):
            if not (0.0 <= a < b <= 1.0):
                raise InvalidSpec(f"gap ({a}, {b}) is not an open interval inside [0,1]")
            if a < prev_end:
                raise InvalidSpec(f"gap ({a}, {b}) overlaps an earlier gap")
            prev_end = b
        object.__setattr__(self, "gaps", tuple(sorted(gaps)))

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class CarpetA:
    n: int
    d: int
    depth: int = 0

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise InvalidSpec(f"CarpetA needs odd n >= 3, got {self.n}")
        if self.d < 1:
            raise InvalidSpec("ambient dimension must be >= 1")
        if self.depth < 0:
            raise InvalidSpec("depth must be >= 0")

    @property
    def dim(self) -> int:
        return self.d


@dataclass(frozen=True)
class CarpetB:
    n: int
    d: int
    depth: int = 0

    def __post_init__(self):
        if self.n < 5 or self.n % 2 == 0:
            raise InvalidSpec(f"CarpetB needs odd n >= 5, got {self.n}")
        if self.d < 1:
            raise InvalidSpec("ambient dimension must be >= 1")
        if self.depth < 0:
            raise InvalidSpec("depth must be >= 0")

    @property
    def dim(self) -> int:
        return self.d


@dataclass(frozen=True)
class AffineImage:
    base: "FractalSpec"
    map: AffineMap

    def __post_init__(self):
        if self.base.dim != self.map.dim:
            raise DimensionMismatch("map dimension does not match the base set")

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def depth(self) -> int:
        return self.base.depth


FractalSpec = Union[Cantor1D, CantorGaps, CarpetA, CarpetB, AffineImage]


def with_depth(spec: FractalSpec, depth: int) -> FractalSpec:
    """Copy of the spec at a different truncation depth."""
    if isinstance(spec, AffineImage):
        return AffineImage(with_depth(spec.base, depth), spec.map)
    return replace(spec, depth=depth)


def spec_to_json(spec: FractalSpec) -> dict:
    if isinstance(spec, Cantor1D):
        return {"kind": "cantor1d", "ratio": spec.ratio, "depth": spec.depth}
    if isinstance(spec, CantorGaps):
        return {"kind": "cantorGaps", "gaps": [list(g) for g in spec.gaps], "depth": spec.depth}
    if isinstance(spec, CarpetA):
        return {"kind": "carpetA", "n": spec.n, "d": spec.d, "depth": spec.depth}
    if isinstance(spec, CarpetB):
        return {"kind": "carpetB", "n": spec.n, "d": spec.d, "depth": spec.depth}
    if isinstance(spec, AffineImage):
        return {"kind": "affineImage", "base": spec_to_json(spec.base), "map": spec.map.to_json()}
    raise InvalidSpec(f"unknown spec type {type(spec).__name__}")


def spec_from_json(obj: dict) -> FractalSpec:
    kind = obj.get("kind")
    if kind == "cantor1d":
        return Cantor1D(ratio=float(obj["ratio"]), depth=int(obj.get("depth", 0)))
    if kind == "cantorGaps":
        return CantorGaps(gaps=tuple(tuple(g) for g in obj["gaps"]), depth=int(obj.get("depth", 0)))
    if kind == "carpetA":
        return CarpetA(n=int(obj["n"]), d=int(obj["d"]), depth=int(obj.get("depth", 0)))
    if kind == "carpetB":
        return CarpetB(n=int(obj["n"]), d=int(obj["d"]), depth=int(obj.get("depth", 0)))
    if kind == "affineImage":
        return AffineImage(base=spec_from_json(obj["base"]), map=AffineMap.from_json(obj["map"]))
    raise InvalidSpec(f"unknown spec kind {kind!r}")


def spec_hash(spec: FractalSpec) -> str:
    """Stable hash of the canonical spec JSON, used in reports and subsampling."""
    blob = json.dumps(spec_to_json(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Approximations


@dataclass(eq=False)
class SetApprox:
    """Depth-k cell cover of a compact set plus exact attractor samples.

    ``cell_lo`` / ``cell_hi`` hold the cells in the pre-image frame in
    canonical (cell-address lexicographic) order; ``frame`` is the rigid map
    to the actual set (None for sets defined in place). ``exact_points`` are
    unique cell corners pushed through the frame, so they live on the set
    itself.
    """

    kind: str
    depth: int
    cell_lo: np.ndarray
    cell_hi: np.ndarray
    hull: ConvexHullProxy
    frame: Optional[AffineMap] = None
    spec: Optional[FractalSpec] = None

    def __post_init__(self):
        self.cell_lo = np.asarray(self.cell_lo, dtype=float)
        self.cell_hi = np.asarray(self.cell_hi, dtype=float)
        if self.cell_lo.shape != self.cell_hi.shape or self.cell_lo.ndim != 2:
            raise DimensionMismatch("cell arrays must both have shape (N, d)")
        self._points: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.cell_lo.shape[1]

    @property
    def n_cells(self) -> int:
        return self.cell_lo.shape[0]

    @property
    def boxes(self) -> list:
        """Cells as `BoxRegion` objects (pre-image frame)."""
        return [BoxRegion(lo, hi) for lo, hi in zip(self.cell_lo, self.cell_hi)]

    @property
    def exact_points(self) -> np.ndarray:
        """Unique attractor samples (image frame), lexicographically sorted."""
        if self._points is None:
            picks = np.array(list(itertools.product((0, 1), repeat=self.dim)), dtype=float)
            side = self.cell_hi - self.cell_lo
            corners = (self.cell_lo[:, None, :] + picks[None, :, :] * side[:, None, :]).reshape(
                -1, self.dim
            )
            corners = np.unique(corners, axis=0)
            if self.frame is not None:
                corners = self.frame.apply(corners)
                corners = corners[np.lexsort(corners.T[::-1])]
            self._points = corners
        return self._points

    def axis_cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Cells as axis-aligned boxes in the image frame.

        Only available when the frame is a pure translation (or absent);
        rotated frames have no axis-aligned realization.
        """
        if self.frame is None:
            return self.cell_lo, self.cell_hi
        if self.frame.is_translation:
            t = self.frame.translation
            return self.cell_lo + t, self.cell_hi + t
        from .errors import UnsupportedFrame

        raise UnsupportedFrame("cells of a rotated image are not axis-aligned")

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        """Whether each point (image frame) lies in the union of cells."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.frame is not None:
            pts = self.frame.inverse().apply(pts)
        hit = np.zeros(len(pts), dtype=bool)
        chunk = max(1, int(4_000_000 // max(1, self.n_cells)))
        for a in range(0, len(pts), chunk):
            blk = pts[a : a + chunk]
            ok = (blk[:, None, :] >= self.cell_lo[None] - tol) & (
                blk[:, None, :] <= self.cell_hi[None] + tol
            )
            hit[a : a + chunk] = ok.all(axis=2).any(axis=1)
        return hit

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "depth": self.depth,
            "boxes": [
                {"lo": lo.tolist(), "hi": hi.tolist()}
                for lo, hi in zip(self.cell_lo, self.cell_hi)
            ],
        }
        if self.spec is not None:
            out["spec"] = spec_to_json(self.spec)
            out["spec_sha256"] = spec_hash(self.spec)
        if self.frame is not None:
            out["frame"] = self.frame.to_json()
        return out


@dataclass(eq=False)
class GapCatalog:
    """Bounded gaps of a set, sorted by non-increasing diameter.

    ``unbounded_proxy`` is the convex hull whose complement realizes the
    unbounded gap E exactly for the supported families (in 1-D this makes E
    the union of both rays, and distances use the nearer one).
    ``base_hull`` is the hull carrier in the pre-image frame, matching the
    frame the gap boxes are stored in. ``interior_hint`` records whether the
    set is known to have (True) or to lack (False) interior points when there
    are no bounded gaps; None means the truncation cannot tell.
    """

    gap_lo: np.ndarray
    gap_hi: np.ndarray
    unbounded_proxy: ConvexHullProxy
    base_hull: BoxRegion
    interior_hint: Optional[bool] = None
    frame: Optional[AffineMap] = None
    spec: Optional[FractalSpec] = None
    depth: int = 0

    def __post_init__(self):
        self.gap_lo = np.asarray(self.gap_lo, dtype=float).reshape(-1, self.base_hull.dim)
        self.gap_hi = np.asarray(self.gap_hi, dtype=float).reshape(-1, self.base_hull.dim)
        order = _canonical_gap_order(self.gap_lo, self.gap_hi)
        self.gap_lo = self.gap_lo[order]
        self.gap_hi = self.gap_hi[order]
        self.diam = np.linalg.norm(self.gap_hi - self.gap_lo, axis=1)
        self._profile = None  # filled lazily by the thickness module

    @property
    def dim(self) -> int:
        return self.base_hull.dim

    @property
    def n_gaps(self) -> int:
        return self.gap_lo.shape[0]

    @property
    def gaps(self) -> list:
        return [BoxRegion(lo, hi) for lo, hi in zip(self.gap_lo, self.gap_hi)]

    def to_json(self) -> dict:
        out = {
            "n_gaps": self.n_gaps,
            "gaps": [
                {"lo": lo.tolist(), "hi": hi.tolist(), "diam": float(dm)}
                for lo, hi, dm in zip(self.gap_lo, self.gap_hi, self.diam)
            ],
            "unbounded_gap": "complement of the convex hull",
            "hull": self.base_hull.to_json(),
            "depth": self.depth,
        }
        if self.spec is not None:
            out["spec"] = spec_to_json(self.spec)
            out["spec_sha256"] = spec_hash(self.spec)
        return out


def _canonical_gap_order(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Sort by non-increasing diameter, ties broken by lexicographic center."""
    diam = np.linalg.norm(hi - lo, axis=1)
    centers = 0.5 * (lo + hi)
    keys = tuple(centers[:, j] for j in range(centers.shape[1] - 1, -1, -1)) + (-diam,)
    return np.lexsort(keys)


# ---------------------------------------------------------------------------
# Construction kernels


def _carpet_offsets(spec: Union[CarpetA, CarpetB]) -> np.ndarray:
    """Kept sub-cell indices of one subdivision step, lexicographically sorted."""
    n, d = spec.n, spec.d
    mid = (n - 1) // 2  # 0-based middle index
    if isinstance(spec, CarpetA):
        keep = [idx for idx in itertools.product(range(n), repeat=d) if idx != (mid,) * d]
    else:
        inner = range(1, n - 1)
        keep = [
            idx
            for idx in itertools.product(range(n), repeat=d)
            if not all(i in inner for i in idx)
        ]
    return np.array(keep, dtype=float)


def _expand_cells(
    lo: np.ndarray, offsets: np.ndarray, inv_n: float, level: int
) -> np.ndarray:
    """One subdivision step: parent-major, offset-lex order (= address lex)."""
    side = inv_n ** level
    child = lo[:, None, :] + offsets[None, :, :] * (side * inv_n)
    return child.reshape(-1, lo.shape[1])


def _cantor_cells(ratio: float, depth: int, max_cells: int) -> tuple[np.ndarray, float]:
    if 2**depth > max_cells:
        raise CellCapExceeded(f"2^{depth} cells exceed the cap of {max_cells}")
    lo = np.zeros(1)
    length = 1.0
    for _ in range(depth):
        lo = np.stack([lo, lo + (1.0 - ratio) * length], axis=1).reshape(-1)
        length *= ratio
    return lo, length


def _cantor_gaps_remainder(spec: CantorGaps) -> tuple[np.ndarray, np.ndarray]:
    """Closed remainder intervals of [0,1] after removing the listed gaps."""
    edges = [0.0]
    for a, b in spec.gaps:
        edges.extend((a, b))
    edges.append(1.0)
    lo = np.array(edges[0::2])
    hi = np.array(edges[1::2])
    return lo, hi


def build_approx(spec: FractalSpec, max_cells: Optional[int] = None) -> SetApprox:
    """Depth-k cell cover with exact corner samples for the given spec."""
    cap = resolve_max_cells(max_cells)

    if isinstance(spec, AffineImage):
        base = build_approx(spec.base, max_cells=cap)
        frame = spec.map if base.frame is None else spec.map.compose(base.frame)
        hull = ConvexHullProxy.from_affine_image(base.hull.carrier, frame)
        return SetApprox(
            kind="affineImage",
            depth=base.depth,
            cell_lo=base.cell_lo,
            cell_hi=base.cell_hi,
            hull=hull,
            frame=frame,
            spec=spec,
        )

    if isinstance(spec, Cantor1D):
        lo, length = _cantor_cells(spec.ratio, spec.depth, cap)
        cell_lo = lo.reshape(-1, 1)
        cell_hi = cell_lo + length
        hull = ConvexHullProxy.from_box(BoxRegion([0.0], [1.0]))
        return SetApprox("cantor1d", spec.depth, cell_lo, cell_hi, hull, spec=spec)

    if isinstance(spec, CantorGaps):
        lo, hi = _cantor_gaps_remainder(spec)
        hull = ConvexHullProxy.from_box(BoxRegion([0.0], [1.0]))
        return SetApprox(
            "cantorGaps", spec.depth, lo.reshape(-1, 1), hi.reshape(-1, 1), hull, spec=spec
        )

    if isinstance(spec, (CarpetA, CarpetB)):
        offsets = _carpet_offsets(spec)
        branch = len(offsets)
        if branch**spec.depth > cap:
            raise CellCapExceeded(
                f"{branch}^{spec.depth} cells exceed the cap of {cap}"
            )
        inv_n = 1.0 / spec.n
        lo = np.zeros((1, spec.d))
        for level in range(spec.depth):
            lo = _expand_cells(lo, offsets, inv_n, level)
        side = inv_n**spec.depth
        kind = "carpetA" if isinstance(spec, CarpetA) else "carpetB"
        hull = ConvexHullProxy.from_box(BoxRegion(np.zeros(spec.d), np.ones(spec.d)))
        return SetApprox(kind, spec.depth, lo, lo + side, hull, spec=spec)

    raise InvalidSpec(f"unknown spec type {type(spec).__name__}")


def enumerate_gaps(spec: FractalSpec, max_cells: Optional[int] = None) -> GapCatalog:
    """All bounded gaps created through the spec's depth, canonically sorted."""
    cap = resolve_max_cells(max_cells)

    if isinstance(spec, AffineImage):
        base = enumerate_gaps(spec.base, max_cells=cap)
        frame = spec.map if base.frame is None else spec.map.compose(base.frame)
        proxy = ConvexHullProxy.from_affine_image(base.base_hull, frame)
        return GapCatalog(
            gap_lo=base.gap_lo,
            gap_hi=base.gap_hi,
            unbounded_proxy=proxy,
            base_hull=base.base_hull,
            interior_hint=base.interior_hint,
            frame=frame,
            spec=spec,
            depth=base.depth,
        )

    hull_box = BoxRegion(np.zeros(spec.dim), np.ones(spec.dim))
    proxy = ConvexHullProxy.from_box(hull_box)

    if isinstance(spec, Cantor1D):
        if 2**spec.depth > cap:
            raise CellCapExceeded(f"2^{spec.depth} cells exceed the cap of {cap}")
        lo_list, hi_list = [], []
        parents = np.zeros(1)
        length = 1.0
        for _ in range(spec.depth):
            lo_list.append(parents + spec.ratio * length)
            hi_list.append(parents + (1.0 - spec.ratio) * length)
            parents = np.stack(
                [parents, parents + (1.0 - spec.ratio) * length], axis=1
            ).reshape(-1)
            length *= spec.ratio
        gap_lo = np.concatenate(lo_list) if lo_list else np.empty(0)
        gap_hi = np.concatenate(hi_list) if hi_list else np.empty(0)
        return GapCatalog(
            gap_lo.reshape(-1, 1), gap_hi.reshape(-1, 1), proxy, hull_box,
            interior_hint=None, spec=spec, depth=spec.depth,
        )

    if isinstance(spec, CantorGaps):
        gap_lo = np.array([a for a, _ in spec.gaps]).reshape(-1, 1)
        gap_hi = np.array([b for _, b in spec.gaps]).reshape(-1, 1)
        lo, hi = _cantor_gaps_remainder(spec)
        hint = bool(np.any(hi - lo > 0.0))  # the remainder IS the set, so this is exact
        return GapCatalog(
            gap_lo, gap_hi, proxy, hull_box, interior_hint=hint, spec=spec, depth=spec.depth
        )

    if isinstance(spec, (CarpetA, CarpetB)):
        offsets = _carpet_offsets(spec)
        branch = len(offsets)
        if spec.depth > 0 and branch ** (spec.depth - 1) > cap:
            raise CellCapExceeded(
                f"{branch}^{spec.depth - 1} parent cells exceed the cap of {cap}"
            )
        inv_n = 1.0 / spec.n
        lo_blocks, hi_blocks = [], []
        parents = np.zeros((1, spec.d))
        for level in range(spec.depth):
            side = inv_n**level
            if isinstance(spec, CarpetA):
                glo = parents + (side * (spec.n - 1) / (2.0 * spec.n))
                ghi = glo + side * inv_n
            else:
                glo = parents + side * inv_n
                ghi = parents + side * (1.0 - inv_n)
            lo_blocks.append(glo)
            hi_blocks.append(ghi)
            if level + 1 < spec.depth:
                parents = _expand_cells(parents, offsets, inv_n, level)
        if lo_blocks:
            gap_lo = np.concatenate(lo_blocks)
            gap_hi = np.concatenate(hi_blocks)
        else:
            gap_lo = np.empty((0, spec.d))
            gap_hi = np.empty((0, spec.d))
        return GapCatalog(
            gap_lo, gap_hi, proxy, hull_box, interior_hint=None, spec=spec, depth=spec.depth
        )

    raise InvalidSpec(f"unknown spec type {type(spec).__name__}")


def hausdorff_dimension(spec: FractalSpec) -> float:
    """Closed-form similarity dimension of the self-similar families."""
    if isinstance(spec, Cantor1D):
        return math.log(2.0) / math.log(1.0 / spec.ratio)
    if isinstance(spec, CarpetA):
        return math.log(spec.n**spec.d - 1) / math.log(spec.n)
    if isinstance(spec, CarpetB):
        return math.log(spec.n**spec.d - (spec.n - 2) ** spec.d) / math.log(spec.n)
    if isinstance(spec, AffineImage):
        return hausdorff_dimension(spec.base)
    raise InvalidSpec(f"no closed-form dimension for {type(spec).__name__}")


def product_points(
    a: SetApprox,
    b: SetApprox,
    cap: Optional[int] = None,
    subsample: bool = True,
) -> np.ndarray:
    """Cartesian product of the exact sample points, rows in (a-major) order.

    When the product count exceeds ``cap`` and subsampling is enabled, a
    deterministic stride selection (phase seeded by the spec hashes) returns
    exactly ``cap`` rows; with subsampling disabled the overflow raises.
    """
    if a.dim != b.dim:
        raise DimensionMismatch("product factors live in different dimensions")
    pa, pb = a.exact_points, b.exact_points
    total = len(pa) * len(pb)
    if cap is not None and total > cap:
        if not subsample:
            raise SampleCapExceeded(f"{total} product points exceed the cap of {cap}")
        stride = total // cap
        seed_src = "".join(
            spec_hash(s.spec) if s.spec is not None else str(len(s.exact_points))
            for s in (a, b)
        )
        phase = int(hashlib.sha256(seed_src.encode()).hexdigest(), 16) % stride
        flat = phase + np.arange(cap, dtype=np.int64) * stride
    else:
        flat = np.arange(total, dtype=np.int64)
    ia, ib = np.divmod(flat, len(pb))
    return np.hstack([pa[ia], pb[ib]])
