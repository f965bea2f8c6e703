"""Space-filling-curve codecs, flatten/fold and patch ordering on 2-D grids.

Coordinates follow the image convention used everywhere in this package:
``x`` is the column, ``y`` is the row, and sequence index ``d`` runs over
``0 .. W*H - 1``.  Every square curve of order ``n`` lives on a
``2**n x 2**n`` grid.

The Hilbert traversal starts in cell ``(0, 0)`` and ends in ``(2**n - 1, 0)``;
its first four cells at order 1 are ``(0,0), (0,1), (1,1), (1,0)``.
Morton interleaves bits with ``x`` on the even (least significant) lanes.
Zigzag is a plain row-major raster scan.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ConfigurationError, ConsistencyError, DomainError

MAX_ORDER = 31
INDEX_DTYPE = np.int64


class CurveKind(str, enum.Enum):
    HILBERT = "hilbert"
    MORTON = "morton"
    ZIGZAG = "zigzag"
    GENERALIZED_HILBERT = "ghilbert"

    @property
    def short(self) -> str:
        """Two-letter label used in tables (HF, MF, ZF, GHF)."""
        return _SHORT[self]

    @property
    def is_square_only(self) -> bool:
        return self is not CurveKind.GENERALIZED_HILBERT

    @classmethod
    def parse(cls, value: "str | CurveKind") -> "CurveKind":
        if isinstance(value, CurveKind):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.short.lower(), kind.name.lower()):
                return kind
        raise ConfigurationError(f"unknown curve kind {value!r}")


_SHORT = {
    CurveKind.HILBERT: "HF",
    CurveKind.MORTON: "MF",
    CurveKind.ZIGZAG: "ZF",
    CurveKind.GENERALIZED_HILBERT: "GHF",
}


class GridPoint(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class GrayImage:
    """Scalar raster with values in [0, 1]; ``pixels[y, x]``."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise DomainError(f"GrayImage needs a nonempty 2-D array, got shape {px.shape}")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise DomainError("GrayImage pixel values must lie in [0, 1]")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def zeros(cls, width: int, height: int) -> "GrayImage":
        return cls(np.zeros((height, width)))


@dataclass(frozen=True, eq=False)
class CurveMap:
    """Materialized bijection between sequence indices and grid cells.

    ``forward[d] = (x, y)`` and ``inverse[y, x] = d``.  Instances are built
    through :func:`build_map`, which validates both directions.
    """

    kind: CurveKind
    width: int
    height: int
    forward: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.width * self.height

    @property
    def order(self) -> int | None:
        """Side exponent for square power-of-two maps, else ``None``."""
        if self.width == self.height and _is_pow2(self.width) and self.width > 1:
            return self.width.bit_length() - 1
        return None

    def point(self, d: int) -> GridPoint:
        if not 0 <= d < self.size:
            raise DomainError(f"index {d} outside [0, {self.size})")
        x, y = self.forward[d]
        return GridPoint(int(x), int(y))

    def index(self, p: tuple[int, int]) -> int:
        x, y = p
        _check_point(x, y, self.width, self.height)
        return int(self.inverse[y, x])

    def __len__(self) -> int:
        return self.size


def _is_pow2(v: int) -> bool:
    return v >= 1 and (v & (v - 1)) == 0


def _check_order(order: int) -> int:
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise DomainError(f"order must be an integer, got {order!r}")
    order = int(order)
    if order < 1:
        raise DomainError(f"order must be >= 1, got {order}")
    if order > MAX_ORDER:
        raise DomainError(f"order must be <= {MAX_ORDER}, got {order}")
    return order


def _check_index(order: int, d: int) -> int:
    d = int(d)
    if not 0 <= d < 4**order:
        raise DomainError(f"index d={d} outside [0, 4**{order}={4**order})")
    return d


def _check_point(x: int, y: int, width: int, height: int) -> None:
    if not (0 <= x < width and 0 <= y < height):
        raise DomainError(f"point ({x}, {y}) outside the {width}x{height} grid")


def _check_index_array(order: int, d) -> np.ndarray:
    order = _check_order(order)
    d = np.asarray(d, dtype=INDEX_DTYPE)
    if d.size and (d.min() < 0 or d.max() >= 4**order):
        raise DomainError(f"indices must lie in [0, 4**{order})")
    return d


def _check_point_arrays(order: int, x, y) -> tuple[np.ndarray, np.ndarray]:
    order = _check_order(order)
    side = 1 << order
    x = np.asarray(x, dtype=INDEX_DTYPE)
    y = np.asarray(y, dtype=INDEX_DTYPE)
    if x.shape != y.shape:
        raise DomainError("x and y arrays must have the same shape")
    if x.size and (x.min() < 0 or y.min() < 0 or x.max() >= side or y.max() >= side):
        raise DomainError(f"coordinates must lie in [0, {side})")
    return x, y


# -- Hilbert --------------------------------------------------------------


def hilbert_d2xy_array(order: int, d) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Hilbert index -> (x, y)."""
    t = _check_index_array(order, d).copy()
    x = np.zeros_like(t)
    y = np.zeros_like(t)
    s = 1
    side = 1 << int(order)
    while s < side:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x = x + s * rx
        y = y + s * ry
        t >>= 2
        s <<= 1
    return x, y


def hilbert_xy2d_array(order: int, x, y) -> np.ndarray:
    """Vectorized Hilbert (x, y) -> index."""
    x, y = _check_point_arrays(order, x, y)
    x = x.copy()
    y = y.copy()
    side = 1 << int(order)
    d = np.zeros_like(x)
    s = side >> 1
    while s > 0:
        rx = ((x & s) > 0).astype(INDEX_DTYPE)
        ry = ((y & s) > 0).astype(INDEX_DTYPE)
        d += s * s * ((3 * rx) ^ ry)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, side - 1 - x, x)
        y = np.where(flip, side - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        s >>= 1
    return d


def hilbert_d2xy(order: int, d: int) -> GridPoint:
    """Cell visited at step ``d`` of the order-``order`` Hilbert traversal."""
    order = _check_order(order)
    d = _check_index(order, d)
    x, y = hilbert_d2xy_array(order, d)
    return GridPoint(int(x), int(y))


def hilbert_xy2d(order: int, p: tuple[int, int]) -> int:
    order = _check_order(order)
    x, y = p
    _check_point(x, y, 1 << order, 1 << order)
    return int(hilbert_xy2d_array(order, x, y))


# -- Morton ---------------------------------------------------------------


def morton_d2xy_array(order: int, d) -> tuple[np.ndarray, np.ndarray]:
    d = _check_index_array(order, d)
    x = np.zeros_like(d)
    y = np.zeros_like(d)
    for k in range(int(order)):
        x |= ((d >> (2 * k)) & 1) << k
        y |= ((d >> (2 * k + 1)) & 1) << k
    return x, y


def morton_xy2d_array(order: int, x, y) -> np.ndarray:
    x, y = _check_point_arrays(order, x, y)
    d = np.zeros_like(x)
    for k in range(int(order)):
        d |= ((x >> k) & 1) << (2 * k)
        d |= ((y >> k) & 1) << (2 * k + 1)
    return d


def morton_d2xy(order: int, d: int) -> GridPoint:
    """De-interleave ``d``: even bits go to x, odd bits to y."""
    order = _check_order(order)
    d = _check_index(order, d)
    x, y = morton_d2xy_array(order, d)
    return GridPoint(int(x), int(y))


def morton_xy2d(order: int, p: tuple[int, int]) -> int:
    order = _check_order(order)
    x, y = p
    _check_point(x, y, 1 << order, 1 << order)
    return int(morton_xy2d_array(order, x, y))


# -- Zigzag (raster) ------------------------------------------------------


def zigzag_d2xy_array(order: int, d) -> tuple[np.ndarray, np.ndarray]:
    d = _check_index_array(order, d)
    return d & ((1 << int(order)) - 1), d >> int(order)


def zigzag_xy2d_array(order: int, x, y) -> np.ndarray:
    x, y = _check_point_arrays(order, x, y)
    return (y << int(order)) + x


def zigzag_d2xy(order: int, d: int) -> GridPoint:
    order = _check_order(order)
    d = _check_index(order, d)
    side = 1 << order
    return GridPoint(d % side, d // side)


def zigzag_xy2d(order: int, p: tuple[int, int]) -> int:
    order = _check_order(order)
    x, y = p
    _check_point(x, y, 1 << order, 1 << order)
    return (y << order) + x


D2XY = {
    CurveKind.HILBERT: hilbert_d2xy_array,
    CurveKind.MORTON: morton_d2xy_array,
    CurveKind.ZIGZAG: zigzag_d2xy_array,
}
XY2D = {
    CurveKind.HILBERT: hilbert_xy2d_array,
    CurveKind.MORTON: morton_xy2d_array,
    CurveKind.ZIGZAG: zigzag_xy2d_array,
}


def xy2d(kind: CurveKind | str, order: int, x, y) -> np.ndarray:
    """Vectorized inverse map for a square curve kind."""
    kind = CurveKind.parse(kind)
    if kind not in XY2D:
        raise ConfigurationError(f"{kind.value} has no closed-form square codec")
    return XY2D[kind](order, x, y)


def d2xy(kind: CurveKind | str, order: int, d) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized forward map for a square curve kind."""
    kind = CurveKind.parse(kind)
    if kind not in D2XY:
        raise ConfigurationError(f"{kind.value} has no closed-form square codec")
    return D2XY[kind](order, d)


# -- Generalized Hilbert on arbitrary rectangles --------------------------


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def _gilbert(x: int, y: int, ax: int, ay: int, bx: int, by: int) -> Iterator[tuple[int, int]]:
    # (ax, ay) spans the major axis, (bx, by) the minor one.
    w = abs(ax + ay)
    h = abs(bx + by)
    dax, day = _sign(ax), _sign(ay)
    dbx, dby = _sign(bx), _sign(by)

    if h == 1:
        for _ in range(w):
            yield x, y
            x, y = x + dax, y + day
        return
    if w == 1:
        for _ in range(h):
            yield x, y
            x, y = x + dbx, y + dby
        return

    ax2, ay2 = ax // 2, ay // 2
    bx2, by2 = bx // 2, by // 2
    w2 = abs(ax2 + ay2)
    h2 = abs(bx2 + by2)

    if 2 * w > 3 * h:
        # elongated: cut the major axis in two, keep the left half even
        if w2 % 2 and w > 2:
            ax2, ay2 = ax2 + dax, ay2 + day
        yield from _gilbert(x, y, ax2, ay2, bx, by)
        yield from _gilbert(x + ax2, y + ay2, ax - ax2, ay - ay2, bx, by)
        return

    if h2 % 2 and h > 2:
        bx2, by2 = bx2 + dbx, by2 + dby
    # up along the minor axis, across, and back down
    yield from _gilbert(x, y, bx2, by2, ax2, ay2)
    yield from _gilbert(x + bx2, y + by2, ax, ay, bx - bx2, by - by2)
    yield from _gilbert(
        x + (ax - dax) + (bx2 - dbx),
        y + (ay - day) + (by2 - dby),
        -bx2,
        -by2,
        -(ax - ax2),
        -(ay - ay2),
    )


def gilbert_path(width: int, height: int) -> Iterator[tuple[int, int]]:
    """Yield the cells of the generalized Hilbert traversal of a W x H grid.

    The traversal starts at ``(0, 0)`` and runs along the longer side.  When
    exactly one side is odd, a path ending on the far corner of the odd
    side cannot be 4-connected (checkerboard parity), so the major axis is
    moved to the even side instead.
    """
    if width < 1 or height < 1:
        raise DomainError(f"grid dimensions must be >= 1, got {width}x{height}")
    major_x = width >= height
    if (width * height) % 2 == 0:
        if major_x and width % 2:
            major_x = False
        elif not major_x and height % 2:
            major_x = True
    if major_x:
        yield from _gilbert(0, 0, width, 0, 0, height)
    else:
        yield from _gilbert(0, 0, 0, height, width, 0)


def generalized_hilbert(width: int, height: int) -> CurveMap:
    """Hilbert-like 4-connected traversal of an arbitrary rectangle."""
    return build_map(CurveKind.GENERALIZED_HILBERT, width, height)


# -- maps -----------------------------------------------------------------


def _validate(cm: CurveMap) -> None:
    n = cm.size
    fwd, inv = cm.forward, cm.inverse
    if fwd.shape != (n, 2) or inv.shape != (cm.height, cm.width):
        raise ConsistencyError(f"{cm.kind.value}: array shapes do not match {cm.width}x{cm.height}")
    xs, ys = fwd[:, 0], fwd[:, 1]
    if xs.min() < 0 or ys.min() < 0 or xs.max() >= cm.width or ys.max() >= cm.height:
        raise ConsistencyError(f"{cm.kind.value}: forward map leaves the grid")
    if not np.array_equal(inv[ys, xs], np.arange(n, dtype=INDEX_DTYPE)):
        raise ConsistencyError(f"{cm.kind.value}: forward and inverse are not mutually inverse")
    if not np.array_equal(np.sort(inv, axis=None), np.arange(n, dtype=INDEX_DTYPE)):
        raise ConsistencyError(f"{cm.kind.value}: inverse is not a permutation")
    if cm.kind in (CurveKind.HILBERT, CurveKind.GENERALIZED_HILBERT) and n > 1:
        steps = np.abs(np.diff(fwd, axis=0)).sum(axis=1)
        if not np.all(steps == 1):
            bad = int(np.flatnonzero(steps != 1)[0])
            raise ConsistencyError(f"{cm.kind.value}: cells {bad} and {bad + 1} are not 4-adjacent")
    if cm.kind is CurveKind.ZIGZAG:
        d = np.arange(n, dtype=INDEX_DTYPE)
        if not (np.array_equal(xs, d % cm.width) and np.array_equal(ys, d // cm.width)):
            raise ConsistencyError("zigzag: forward map is not row-major")


def build_map(kind: CurveKind | str, width: int, height: int | None = None) -> CurveMap:
    """Materialize and validate the map of ``kind`` on a ``width x height`` grid."""
    kind = CurveKind.parse(kind)
    height = width if height is None else height
    width, height = int(width), int(height)
    if width < 1 or height < 1:
        raise (DomainError if kind is CurveKind.GENERALIZED_HILBERT else ConfigurationError)(
            f"grid dimensions must be >= 1, got {width}x{height}"
        )
    if kind.is_square_only:
        if width != height or not _is_pow2(width) or width < 2:
            raise ConfigurationError(
                f"{kind.value} needs a square grid with power-of-two side >= 2, "
                f"got {width}x{height}; use ghilbert for arbitrary rectangles"
            )
        order = width.bit_length() - 1
        if order > MAX_ORDER:
            raise ConfigurationError(f"order {order} exceeds {MAX_ORDER}")
        x, y = D2XY[kind](order, np.arange(width * height, dtype=INDEX_DTYPE))
        forward = np.stack([x, y], axis=1)
    else:
        forward = np.fromiter(
            (c for xy in gilbert_path(width, height) for c in xy),
            dtype=INDEX_DTYPE,
            count=2 * width * height,
        ).reshape(-1, 2)

    inverse = np.full((height, width), -1, dtype=INDEX_DTYPE)
    inverse[forward[:, 1], forward[:, 0]] = np.arange(width * height, dtype=INDEX_DTYPE)
    forward.setflags(write=False)
    inverse.setflags(write=False)
    cm = CurveMap(kind, width, height, forward, inverse)
    _validate(cm)
    return cm


def square_map(kind: CurveKind | str, order: int) -> CurveMap:
    order = _check_order(order)
    return build_map(kind, 1 << order, 1 << order)


# -- flatten / fold -------------------------------------------------------


def _as_array(image) -> np.ndarray:
    return image.pixels if isinstance(image, GrayImage) else np.asarray(image)


def flatten(image: GrayImage | np.ndarray, cmap: CurveMap) -> np.ndarray:
    """Read the image along the curve: ``out[d] = image[forward(d)]``.

    Arrays with trailing channel axes (``H x W x ...``) are accepted too.
    """
    arr = _as_array(image)
    if arr.ndim < 2 or arr.shape[:2] != (cmap.height, cmap.width):
        raise DomainError(
            f"image shape {arr.shape[:2]} does not match map {cmap.height}x{cmap.width} (rows x cols)"
        )
    return arr[cmap.forward[:, 1], cmap.forward[:, 0]]


def fold_array(sequence, cmap: CurveMap) -> np.ndarray:
    """Inverse of :func:`flatten` for raw arrays (keeps trailing axes)."""
    seq = np.asarray(sequence)
    if seq.ndim < 1 or seq.shape[0] != cmap.size:
        raise DomainError(f"sequence length {seq.shape[0] if seq.ndim else 0} != map size {cmap.size}")
    out = np.empty((cmap.height, cmap.width) + seq.shape[1:], dtype=seq.dtype)
    out[cmap.forward[:, 1], cmap.forward[:, 0]] = seq
    return out


def fold(sequence, cmap: CurveMap) -> GrayImage:
    seq = np.asarray(sequence, dtype=np.float64)
    if seq.ndim != 1:
        raise DomainError("fold expects a 1-D sequence of scalars")
    return GrayImage(fold_array(seq, cmap))


# -- patch ordering -------------------------------------------------------


def patch_order(grid_w: int, grid_h: int) -> np.ndarray:
    """Raster index of the patch placed in each token slot.

    ``tokens = patches_raster[patch_order(w, h)]`` reorders a row-major
    patch sequence along the generalized Hilbert traversal.
    """
    if grid_w < 1 or grid_h < 1:
        raise DomainError(f"patch grid must be at least 1x1, got {grid_w}x{grid_h}")
    cm = build_map(CurveKind.GENERALIZED_HILBERT, grid_w, grid_h)
    return cm.forward[:, 1] * grid_w + cm.forward[:, 0]


def invert_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=INDEX_DTYPE)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size, dtype=INDEX_DTYPE)
    return inv
