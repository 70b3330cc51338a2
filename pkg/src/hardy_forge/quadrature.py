"""Dyadic midpoint quadrature on boxes with a tube cut out.

Cells are classified by the exclusion predicate at their corners and center.
Cells entirely in the tube are dropped, cells straddling the tube boundary are
refined down to the maximum depth and then dropped too, so integrals of
nonnegative integrands over the included region are under-estimates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

MAX_DIM = 4
MAX_DEPTH = 12
DEFAULT_CELL_CAP = 2**22

INCLUDED = 0
EXCLUDED = 1


class QuadratureError(RuntimeError):
    pass


class Exclusion(Protocol):
    def inside(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class QuadratureGrid:
    """Leaf cells of a dyadic subdivision of ``box``.

    Attributes
    ----------
    box : (n, 2) array of interval endpoints.
    centers : (N, n) cell centers.
    halfwidths : (N, n) half side lengths.
    weights : (N,) cell volumes.
    status : (N,) ``INCLUDED`` or ``EXCLUDED``.
    depth : maximum refinement level.
    """

    box: np.ndarray
    centers: np.ndarray
    halfwidths: np.ndarray
    weights: np.ndarray
    status: np.ndarray
    depth: int
    exclusion: object = field(default=None, compare=False)

    @property
    def ndim(self) -> int:
        return self.box.shape[0]

    @property
    def included(self) -> np.ndarray:
        return self.status == INCLUDED

    def included_volume(self) -> float:
        return float(self.weights[self.included].sum())

    def box_volume(self) -> float:
        return float(np.prod(self.box[:, 1] - self.box[:, 0]))

    def __len__(self) -> int:
        return len(self.weights)

    def to_csv(self, path) -> None:
        n = self.ndim
        header = ",".join([f"c{i + 1}" for i in range(n)] + [f"h{i + 1}" for i in range(n)] + ["weight", "status"])
        data = np.column_stack([self.centers, self.halfwidths, self.weights, self.status])
        np.savetxt(path, data, delimiter=",", header=header, comments="")


def _corner_offsets(n: int) -> np.ndarray:
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


def _mixed(exclusion, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (all_inside, mixed) for sample points of shape (N, k, n)."""
    inside = np.asarray(exclusion.inside(pts), dtype=bool)
    all_in = inside.all(axis=1)
    mixed = inside.any(axis=1) & ~all_in
    signed = getattr(exclusion, "signed", None)
    if signed is not None:
        s = np.asarray(signed(pts))
        mixed |= ((s > 0).any(axis=1) & (s < 0).any(axis=1)) & ~all_in
    return all_in, mixed


def build_grid(box: Sequence[Sequence[float]], exclusion: Exclusion | None = None, depth: int = 6,
               variation_threshold: float | None = None,
               integrand: Callable[[np.ndarray], np.ndarray] | None = None,
               base_depth: int | None = None, max_cells: int = DEFAULT_CELL_CAP) -> QuadratureGrid:
    """Build an adaptive dyadic grid.

    Parameters
    ----------
    box : per-dimension ``(lo, hi)`` intervals.
    exclusion : object with a vectorized ``inside(x)`` predicate (and optionally
        ``signed(x)`` whose sign change across a cell also marks it mixed).
    depth : maximum dyadic level (at most 12).
    variation_threshold, integrand : cells where the integrand at the center
        differs from the mean over the corners by more than the threshold are
        refined, up to ``depth``.
    base_depth : uniform starting level; defaults to ``depth`` when no integrand
        drives refinement, else to ``max(depth - 3, 0)``.
    max_cells : hard cap on the number of cells alive at once.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    n = box.shape[0]
    if n > MAX_DIM:
        raise QuadratureError(f"dimension {n} exceeds the cap {MAX_DIM}")
    if not 0 <= depth <= MAX_DEPTH:
        raise QuadratureError(f"depth must lie in 0..{MAX_DEPTH}")
    if np.any(box[:, 1] <= box[:, 0]):
        raise QuadratureError("empty box")
    if base_depth is None:
        base_depth = depth if integrand is None or variation_threshold is None else max(depth - 3, 0)
    base_depth = min(base_depth, depth)
    if 2 ** (n * base_depth) > max_cells:
        raise QuadratureError(f"uniform level {base_depth} in {n} dims exceeds the cell cap {max_cells}")

    lo, span = box[:, 0], box[:, 1] - box[:, 0]
    k = 2**base_depth
    idx = np.stack(np.meshgrid(*[np.arange(k)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    h = span / (2 * k)
    centers = lo + (2 * idx + 1) * h
    corners = _corner_offsets(n)

    out_c, out_h, out_s = [], [], []
    level = base_depth
    while len(centers):
        pts = np.concatenate([centers[:, None, :], centers[:, None, :] + corners[None] * h], axis=1)
        refine = np.zeros(len(centers), dtype=bool)
        excluded = np.zeros(len(centers), dtype=bool)
        if exclusion is not None:
            all_in, mixed = _mixed(exclusion, pts)
            excluded = all_in.copy()
            if level < depth:
                refine |= mixed
            else:
                excluded |= mixed
        if integrand is not None and variation_threshold is not None and level < depth:
            vals = np.asarray(integrand(pts), dtype=float)
            # midpoint-rule error indicator: zero on affine pieces, large at kinks and spikes
            spread = np.abs(vals[:, 0] - np.nanmean(vals[:, 1:], axis=1))
            refine |= (spread > variation_threshold) & ~excluded
        refine &= ~excluded
        keep = ~refine
        out_c.append(centers[keep])
        out_h.append(np.broadcast_to(h, (int(keep.sum()), n)))
        out_s.append(np.where(excluded[keep], EXCLUDED, INCLUDED))
        if not refine.any():
            break
        parents = centers[refine]
        h = h / 2
        centers = (parents[:, None, :] + corners[None] * h).reshape(-1, n)
        level += 1
        if len(centers) + sum(len(c) for c in out_c) > max_cells:
            raise QuadratureError(f"cell cap {max_cells} exceeded at level {level}")

    centers = np.concatenate(out_c)
    halfwidths = np.concatenate(out_h)
    weights = np.prod(2 * halfwidths, axis=1)
    status = np.concatenate(out_s).astype(np.int8)
    return QuadratureGrid(box, centers, halfwidths, weights, status, depth, exclusion)


def integrate(grid: QuadratureGrid, f: Callable[[np.ndarray], np.ndarray], include_excluded: bool = False) -> float:
    """Midpoint rule over the included cells (or over all cells)."""
    mask = np.ones(len(grid), dtype=bool) if include_excluded else grid.included
    x = grid.centers[mask]
    if not len(x):
        return 0.0
    vals = np.asarray(f(x), dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise QuadratureError(f"non-finite integrand value at cell center {x[i].tolist()}")
    return float(np.dot(vals, grid.weights[mask]))


def integrate_many(grid: QuadratureGrid, fs: Sequence[Callable[[np.ndarray], np.ndarray]],
                   include_excluded: bool = False) -> list[float]:
    return [integrate(grid, f, include_excluded) for f in fs]


class PredicateExclusion:
    """Wrap a plain boolean function as an exclusion."""

    def __init__(self, inside: Callable[[np.ndarray], np.ndarray], signed: Callable | None = None):
        self._inside = inside
        if signed is not None:
            self.signed = signed

    def inside(self, x):
        return self._inside(x)
