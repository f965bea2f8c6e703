"""Toy shape dataset and DTW comparison of flattened images.

Eighteen binary images: {circle, square, triangle} x {large, small} x
{32, 64, 128}.  Shapes are centred; large ones span 0.8 of the side and
small ones 0.3.  Foreground is 1, background 0, and a pixel is foreground
when its centre falls inside the shape.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba as nb
import numpy as np

from .curves import CurveKind, GrayImage, build_map, flatten
from .errors import DomainError

RESOLUTIONS = (32, 64, 128)
EXTENT = {"L": 0.8, "S": 0.3}

# Table 3 column order
COMPARISONS: tuple[tuple[str, str], ...] = (
    ("L32", "S32"),
    ("L32", "L64"),
    ("L64", "S64"),
    ("L64", "L128"),
    ("L128", "S128"),
    ("L32", "S128"),
)


class Shape(str, enum.Enum):
    CIRCLE = "circle"
    SQUARE = "square"
    TRIANGLE = "triangle"


class Scale(str, enum.Enum):
    LARGE = "L"
    SMALL = "S"


@dataclass(frozen=True, order=True)
class ShapeSpec:
    shape: Shape
    scale: Scale
    resolution: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", Shape(self.shape))
        object.__setattr__(self, "scale", Scale(self.scale))
        if self.resolution not in RESOLUTIONS:
            raise DomainError(f"resolution must be one of {RESOLUTIONS}, got {self.resolution}")

    @property
    def label(self) -> str:
        """Short label such as ``L32``."""
        return f"{self.scale.value}{self.resolution}"

    @property
    def filename(self) -> str:
        return f"{self.shape.value}_{self.label}.pgm"

    @classmethod
    def from_label(cls, shape: Shape | str, label: str) -> "ShapeSpec":
        return cls(Shape(shape), Scale(label[0]), int(label[1:]))


def dataset() -> list[ShapeSpec]:
    """All 18 specs, ordered by shape, scale, resolution."""
    return [ShapeSpec(s, c, r) for s, c, r in itertools.product(Shape, Scale, RESOLUTIONS)]


def generate_shape(spec: ShapeSpec) -> GrayImage:
    res = spec.resolution
    extent = EXTENT[spec.scale.value] * res
    c = res / 2.0
    # pixel centres, y grows downwards (row index)
    yy, xx = np.mgrid[0:res, 0:res] + 0.5
    if spec.shape is Shape.CIRCLE:
        r = extent / 2.0
        mask = (xx - c) ** 2 + (yy - c) ** 2 <= r * r
    elif spec.shape is Shape.SQUARE:
        side = int(round(extent))
        lo = (res - side) // 2
        mask = np.zeros((res, res), dtype=bool)
        mask[lo : lo + side, lo : lo + side] = True
    else:
        half = extent / 2.0
        top, bottom = c - half, c + half
        # apex at (c, top), base corners at (c +- half, bottom)
        inside_rows = (yy >= top) & (yy <= bottom)
        reach = half * (yy - top) / extent
        mask = inside_rows & (np.abs(xx - c) <= reach)
    return GrayImage(mask.astype(np.float64))


# -- DTW ------------------------------------------------------------------


@nb.njit(cache=True, nogil=True)
def _dtw_kernel(a, b):
    m = b.shape[0]
    inf = np.inf
    prev_c = np.full(m, inf)
    prev_l = np.zeros(m, dtype=np.int64)
    cur_c = np.empty(m)
    cur_l = np.empty(m, dtype=np.int64)
    for i in range(a.shape[0]):
        ai = a[i]
        for j in range(m):
            cost = abs(ai - b[j])
            if i == 0 and j == 0:
                cur_c[j] = cost
                cur_l[j] = 1
                continue
            # predecessor preference on ties: diagonal, then shortest path
            bc = inf
            bl = 0
            if i > 0 and j > 0:
                bc = prev_c[j - 1]
                bl = prev_l[j - 1]
            if i > 0:
                c2 = prev_c[j]
                if c2 < bc or (c2 == bc and prev_l[j] < bl):
                    bc = c2
                    bl = prev_l[j]
            if j > 0:
                c3 = cur_c[j - 1]
                if c3 < bc or (c3 == bc and cur_l[j - 1] < bl):
                    bc = c3
                    bl = cur_l[j - 1]
            cur_c[j] = bc + cost
            cur_l[j] = bl + 1
        prev_c, cur_c = cur_c, prev_c
        prev_l, cur_l = cur_l, prev_l
    return prev_c[m - 1], prev_l[m - 1]


def dtw_path(a: Sequence[float], b: Sequence[float]) -> tuple[float, int]:
    """Minimal accumulated cost and the length of the chosen optimal path."""
    x = np.ascontiguousarray(a, dtype=np.float64)
    y = np.ascontiguousarray(b, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise DomainError("dtw expects 1-D sequences")
    if x.size == 0 or y.size == 0:
        raise DomainError("dtw needs two nonempty sequences")
    # run the shorter sequence along the inner loop
    if y.size > x.size:
        x, y = y, x
    cost, length = _dtw_kernel(x, y)
    return float(cost), int(length)


def dtw(a: Sequence[float], b: Sequence[float], normalize: str = "none") -> float:
    """Dynamic time warping distance with ``|a_i - b_j|`` local cost.

    Full window, both ends anchored, steps (1,0), (0,1), (1,1).
    ``normalize="path"`` divides by the length of the optimal path
    (ties between optimal paths resolved towards the shorter one).
    """
    cost, length = dtw_path(a, b)
    if normalize == "none":
        return cost
    if normalize == "path":
        return cost / length
    raise DomainError(f"normalize must be 'none' or 'path', got {normalize!r}")


# -- Table 3 ---------------------------------------------------------------


@dataclass(frozen=True)
class DtwResult:
    pair: tuple[ShapeSpec, ShapeSpec]
    curve: CurveKind
    cost: float


def _threads() -> int:
    raw = os.environ.get("SFC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def flattened(spec: ShapeSpec, curve: CurveKind) -> np.ndarray:
    img = generate_shape(spec)
    return flatten(img, build_map(curve, spec.resolution, spec.resolution))


def dtw_table(
    curves: Iterable[CurveKind | str],
    shapes: Iterable[Shape | str] = tuple(Shape),
    comparisons: Sequence[tuple[str, str]] = COMPARISONS,
    normalize: str = "none",
    threads: int | None = None,
) -> list[DtwResult]:
    """DTW cost for every (shape, comparison, curve) cell.

    Results are ordered shape-major, then comparison, then curve, which is
    the row/column layout of the exported table.  Each cell is independent;
    they are spread over ``threads`` workers (``SFC_THREADS`` by default).
    """
    curves = [CurveKind.parse(c) for c in curves]
    shapes = [Shape(s) for s in shapes]
    if not curves:
        raise DomainError("need at least one curve")
    if not shapes:
        raise DomainError("need at least one shape")

    jobs = []
    cache: dict[tuple[ShapeSpec, CurveKind], np.ndarray] = {}
    for shape in shapes:
        for left, right in comparisons:
            pair = (ShapeSpec.from_label(shape, left), ShapeSpec.from_label(shape, right))
            for curve in curves:
                for spec in pair:
                    if (spec, curve) not in cache:
                        cache[(spec, curve)] = flattened(spec, curve)
                jobs.append((pair, curve))

    def run(job):
        pair, curve = job
        return DtwResult(pair, curve, dtw(cache[(pair[0], curve)], cache[(pair[1], curve)], normalize))

    workers = threads if threads is not None else _threads()
    if workers <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def table_rows(results: Sequence[DtwResult]) -> tuple[list[str], list[list]]:
    """Header and rows of the Table 3 style CSV (rows = shapes)."""
    shapes: list[Shape] = []
    columns: list[tuple[str, str, CurveKind]] = []
    cells: dict[tuple[Shape, str, str, CurveKind], float] = {}
    for r in results:
        a, b = r.pair
        shape = a.shape
        if shape not in shapes:
            shapes.append(shape)
        col = (a.label, b.label, r.curve)
        if col not in columns:
            columns.append(col)
        cells[(shape, a.label, b.label, r.curve)] = r.cost
    header = ["shape"] + [f"{a}v{b}_{k.short.lower()}" for a, b, k in columns]
    rows = [[s.value] + [cells[(s, a, b, k)] for a, b, k in columns] for s in shapes]
    return header, rows


def cell_count(results: Sequence[DtwResult]) -> int:
    return len({(r.pair, r.curve) for r in results})


def expected_pixels_circle(spec: ShapeSpec) -> float:
    return math.pi * (EXTENT[spec.scale.value] * spec.resolution / 2.0) ** 2
