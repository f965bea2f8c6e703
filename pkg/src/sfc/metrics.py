"""Locality measures for curve maps.

* DeGrid: mean 2-D distance (cell units) from each sequence position to its
  sequence neighbours at most ``K`` steps away.
* Preservation sweep: share of positions whose DeGrid is within a threshold.
* Dilation: worst ``|p1 - p2|**2 / |t1 - t2|`` over index pairs, with ``p`` the
  unit-square cell centre and ``t = d / 4**n``.
* Scale traces: how the folded distance of a fixed parameter pair behaves as
  the folding order grows.
* Hierarchy check: whether coarse indices nest inside fine ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .curves import CurveKind, CurveMap, d2xy, square_map, xy2d
from .errors import ConfigurationError, DegenerateInputError, DomainError

ALL_PAIRS_MAX_ORDER = 5
DEFAULT_WINDOW = 256
DEFAULT_SWEEP_STEPS = 64


# -- DeGrid ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DeGridField:
    map_kind: CurveKind
    width: int
    height: int
    k: int
    squared: bool
    values: np.ndarray = field(repr=False)
    forward: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.values.size

    def rows(self) -> list[tuple[int, int, int, float]]:
        """``(position, x, y, degrid)`` rows in ascending position."""
        return [
            (i, int(x), int(y), float(v))
            for i, ((x, y), v) in enumerate(zip(self.forward, self.values))
        ]

    def heatmap(self) -> np.ndarray:
        """Grid of 0..255 grey levels, ``round(255 * v / max(v))`` per cell."""
        peak = float(self.values.max())
        levels = np.rint(255.0 * self.values / peak).astype(np.int64)
        grid = np.zeros((self.height, self.width), dtype=np.int64)
        grid[self.forward[:, 1], self.forward[:, 0]] = levels
        return grid


def degrid(cmap: CurveMap, k: int, squared: bool = False) -> DeGridField:
    """DeGrid of every sequence position of ``cmap``.

    Positions near either end of the sequence average over the neighbours
    that exist; there is no padding.  ``squared=True`` sums squared
    distances instead.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"neighbourhood radius K must be an integer >= 1, got {k!r}")
    k = int(k)
    n = cmap.size
    pts = cmap.forward.astype(np.float64)
    sums = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    # offsets visited in the same order as the reference double loop
    for off in range(-k, k + 1):
        if off == 0 or abs(off) >= n:
            continue
        lo, hi = max(0, -off), min(n, n - off)
        diff = pts[lo + off : hi + off] - pts[lo:hi]
        sq = diff[:, 0] ** 2 + diff[:, 1] ** 2
        sums[lo:hi] += sq if squared else np.sqrt(sq)
        counts[lo:hi] += 1
    if n == 1:
        raise DegenerateInputError("a single-cell map has no sequence neighbours")
    values = sums / counts
    values.setflags(write=False)
    return DeGridField(cmap.kind, cmap.width, cmap.height, k, squared, values, cmap.forward)


def default_thresholds(
    fields: Iterable[DeGridField], steps: int = DEFAULT_SWEEP_STEPS
) -> np.ndarray:
    """Log-spaced thresholds bracketing every value of every field."""
    fields = list(fields)
    if not fields:
        raise DomainError("need at least one field to derive thresholds")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    lo = min(float(f.values.min()) for f in fields) * 0.99
    hi = max(float(f.values.max()) for f in fields) * 1.01
    return np.geomspace(lo, hi, steps) if steps > 1 else np.array([hi])


def preservation_sweep(
    fld: DeGridField, thresholds: Sequence[float]
) -> list[tuple[float, float]]:
    """``(epsilon, percent of positions with DeGrid <= epsilon)`` per threshold."""
    eps = np.asarray(thresholds, dtype=np.float64)
    if eps.ndim != 1 or eps.size == 0:
        raise DomainError("thresholds must be a nonempty list")
    if np.any(~np.isfinite(eps)) or np.any(eps <= 0):
        raise DomainError("every threshold must be a positive number")
    ordered = np.sort(fld.values)
    counts = np.searchsorted(ordered, eps, side="right")
    return [(float(e), 100.0 * int(c) / fld.values.size) for e, c in zip(eps, counts)]


def sweep_table(
    fields: Mapping[CurveKind, DeGridField], thresholds: Sequence[float] | None = None
) -> list[tuple[float, ...]]:
    """Rows ``(epsilon, pct_kind1, pct_kind2, ...)`` in the mapping's order."""
    if thresholds is None:
        thresholds = default_thresholds(fields.values())
    columns = [preservation_sweep(f, thresholds) for f in fields.values()]
    return [
        (float(eps),) + tuple(col[i][1] for col in columns)
        for i, eps in enumerate(np.asarray(thresholds, dtype=np.float64))
    ]


def full_preservation_threshold(fld: DeGridField) -> float:
    """Smallest epsilon at which every position is preserved."""
    return float(fld.values.max())


# -- dilation -------------------------------------------------------------

# Table 2 closed forms, side exponent n except Morton's row which counts bits.
_TABLE_ROWS = {
    CurveKind.HILBERT: ("6", "6"),
    CurveKind.ZIGZAG: ("4^n - 2^(n+1) + 2", "inf"),
    CurveKind.MORTON: ("2^n - 2^-n", "inf"),
}


def theoretical_bound(kind: CurveKind | str, order: int) -> float:
    """Worst-case dilation under the side-exponent convention.

    Hilbert's supremum is 6 at every order.  Zigzag's worst pair is a row
    end followed by the next row start.  Morton's worst pair is the jump
    between the two halves of the grid, which has the same geometry.
    """
    kind = CurveKind.parse(kind)
    if kind is CurveKind.HILBERT:
        return 6.0
    if kind in (CurveKind.ZIGZAG, CurveKind.MORTON):
        return float(4**order - 2 ** (order + 1) + 2)
    raise ConfigurationError(f"no dilation bound for {kind.value}")


def _table_metadata(kind: CurveKind, order: int) -> dict:
    expr, limit = _TABLE_ROWS[kind]
    meta = {"table_expression": expr, "table_limit": limit, "table_column": "Dilation Factor Lower Bound"}
    if kind is CurveKind.MORTON:
        bits = 2 * order
        meta["table_n"] = bits
        meta["table_value"] = 2.0**bits - 2.0**-bits
    elif kind is CurveKind.ZIGZAG:
        meta["table_n"] = order
        meta["table_value"] = float(4**order - 2 ** (order + 1) + 2)
    else:
        meta["table_n"] = order
        meta["table_value"] = 6.0
        meta["note"] = "exact supremum, not a lower bound"
    return meta


@dataclass(frozen=True)
class DilationReport:
    kind: CurveKind
    order: int
    mode: str
    empirical_max: float
    argmax_pair: tuple[int, int]
    theoretical_bound: float
    window: int | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def empirical_max_exact(self) -> Fraction:
        d1, d2 = self.argmax_pair
        return Fraction(self.metadata["argmax_sq_cells"], d2 - d1)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "order": self.order,
            "mode": self.mode,
            "empirical_max": self.empirical_max,
            "argmax_pair": list(self.argmax_pair),
            "theoretical_bound": self.theoretical_bound,
            "window": self.window,
            "metadata": dict(self.metadata),
        }


def _normalize_mode(mode: str) -> str:
    m = str(mode).strip().lower().replace("-", "_")
    if m in ("all_pairs", "all"):
        return "all_pairs"
    if m in ("adjacent", "adjacent_only"):
        return "adjacent_only"
    raise ConfigurationError(f"unknown dilation mode {mode!r}; use all_pairs or adjacent_only")


def dilation(cmap: CurveMap, mode: str = "all_pairs", window: int = DEFAULT_WINDOW) -> DilationReport:
    """Empirical square-to-linear dilation of a square curve map.

    ``all_pairs`` scans every index pair (orders <= 5).  ``adjacent_only``
    scans pairs whose index gap is at most ``window``, which is linear in
    the map size.  The ratio is evaluated exactly in integers: with cell
    offsets ``dx, dy`` and index gap ``g`` it equals ``(dx**2 + dy**2) / g``,
    the ``4**n`` scale factors cancelling.  Ties go to the lexicographically
    smallest pair.
    """
    mode = _normalize_mode(mode)
    order = cmap.order
    if order is None or cmap.kind is CurveKind.GENERALIZED_HILBERT:
        raise ConfigurationError("dilation needs a square power-of-two Hilbert/Morton/Zigzag map")
    n = cmap.size
    if mode == "all_pairs":
        if order > ALL_PAIRS_MAX_ORDER:
            raise ConfigurationError(
                f"all_pairs is limited to order <= {ALL_PAIRS_MAX_ORDER}; use adjacent_only for order {order}"
            )
        max_gap = n - 1
        used_window = None
    else:
        if window < 1:
            raise ConfigurationError(f"window must be >= 1, got {window}")
        max_gap = min(int(window), n - 1)
        used_window = int(window)

    xs = cmap.forward[:, 0]
    ys = cmap.forward[:, 1]
    best: Fraction | None = None
    best_pair = (0, 1)
    best_num = 0
    for gap in range(1, max_gap + 1):
        dx = xs[gap:] - xs[:-gap]
        dy = ys[gap:] - ys[:-gap]
        num = dx * dx + dy * dy
        i = int(np.argmax(num))
        cand = Fraction(int(num[i]), gap)
        pair = (i, i + gap)
        if best is None or cand > best or (cand == best and pair < best_pair):
            best, best_pair, best_num = cand, pair, int(num[i])

    meta = _table_metadata(cmap.kind, order)
    meta["argmax_sq_cells"] = best_num
    meta["empirical_max_exact"] = f"{best.numerator}/{best.denominator}"
    return DilationReport(
        kind=cmap.kind,
        order=order,
        mode=mode,
        empirical_max=float(best),
        argmax_pair=best_pair,
        theoretical_bound=theoretical_bound(cmap.kind, order),
        window=used_window,
        metadata=meta,
    )


def dilation_ladder(
    kind: CurveKind | str, orders: Iterable[int], mode: str = "all_pairs", window: int = DEFAULT_WINDOW
) -> list[DilationReport]:
    return [dilation(square_map(kind, n), mode, window) for n in orders]


# -- scale robustness -----------------------------------------------------


def parse_dyadic(value, n_max: int) -> Fraction:
    """Parse ``value`` (Fraction, int, ``"p/q"`` string) as ``k / 4**n_max`` in [0, 1]."""
    try:
        t = Fraction(value) if not isinstance(value, str) else Fraction(value.strip())
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise DomainError(f"cannot parse {value!r} as a rational number") from exc
    if not 0 <= t <= 1:
        raise DomainError(f"parameter {t} outside [0, 1]")
    if (t * 4**n_max).denominator != 1:
        raise DomainError(f"parameter {t} is not a multiple of 4**-{n_max}")
    return t


def cell_center(kind: CurveKind, order: int, t: Fraction) -> tuple[float, float]:
    """Unit-square centre of the order-``order`` cell holding parameter ``t``."""
    side = 1 << order
    d = min(math.floor(t * 4**order), 4**order - 1)
    x, y = d2xy(kind, order, d)
    return ((int(x) + 0.5) / side, (int(y) + 0.5) / side)


@dataclass(frozen=True)
class ScaleTrace:
    kind: CurveKind
    t1: Fraction
    t2: Fraction
    orders: list[int]
    distances: list[float]
    ratios: list[float | None]
    normalized: list[float]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "t1": f"{self.t1.numerator}/{self.t1.denominator}",
            "t2": f"{self.t2.numerator}/{self.t2.denominator}",
            "orders": list(self.orders),
            "distances": list(self.distances),
            "ratios": list(self.ratios),
            "normalized": list(self.normalized),
        }


def scale_trace(kind: CurveKind | str, t1, t2, n_min: int, n_max: int) -> ScaleTrace:
    """Distances between the folded images of ``t1`` and ``t2`` for each order.

    ``ratios[i] = distances[i] / distances[i + 1]`` (``None`` where the finer
    distance is zero); ``normalized[i] = distances[i]**2 / |t1 - t2|``.
    """
    kind = CurveKind.parse(kind)
    if kind is CurveKind.GENERALIZED_HILBERT:
        raise ConfigurationError("scale_trace needs a square curve kind")
    if n_min < 1 or n_max < n_min:
        raise DomainError(f"need 1 <= n_min <= n_max, got {n_min}..{n_max}")
    a = parse_dyadic(t1, n_max)
    b = parse_dyadic(t2, n_max)
    if a == b:
        raise DegenerateInputError("t1 and t2 coincide")
    orders = list(range(n_min, n_max + 1))
    dists = []
    for n in orders:
        (x1, y1), (x2, y2) = cell_center(kind, n, a), cell_center(kind, n, b)
        dists.append(math.hypot(x1 - x2, y1 - y2))
    ratios: list[float | None] = [
        (dists[i] / dists[i + 1]) if dists[i + 1] > 0 else None for i in range(len(dists) - 1)
    ]
    gap = float(abs(a - b))
    return ScaleTrace(kind, a, b, orders, dists, ratios, [d * d / gap for d in dists])


@dataclass(frozen=True)
class PairFamilyTrace:
    """Normalized distance of the order-dependent row-end pair.

    At order ``n`` the pair is ``t1 = (2**n - 1) / 4**n`` and
    ``t2 = 2**n / 4**n``, two consecutive indices one grid row apart in
    raster order.
    """

    kind: CurveKind
    orders: list[int]
    normalized: list[float]
    growth: list[float]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "orders": list(self.orders),
            "normalized": list(self.normalized),
            "growth": list(self.growth),
        }


def pair_family_trace(kind: CurveKind | str, n_min: int, n_max: int) -> PairFamilyTrace:
    kind = CurveKind.parse(kind)
    if n_min < 1 or n_max < n_min:
        raise DomainError(f"need 1 <= n_min <= n_max, got {n_min}..{n_max}")
    orders = list(range(n_min, n_max + 1))
    normalized = []
    for n in orders:
        t1 = Fraction(2**n - 1, 4**n)
        t2 = Fraction(2**n, 4**n)
        (x1, y1), (x2, y2) = cell_center(kind, n, t1), cell_center(kind, n, t2)
        normalized.append(((x1 - x2) ** 2 + (y1 - y2) ** 2) / float(t2 - t1))
    growth = [normalized[i + 1] / normalized[i] for i in range(len(normalized) - 1)]
    return PairFamilyTrace(kind, orders, normalized, growth)


# -- hierarchy ------------------------------------------------------------


def hierarchy_check(kind: CurveKind | str, n: int) -> int:
    """Cells of the order-(n+1) grid whose index does not nest in order n.

    A cell ``(x, y)`` nests when ``xy2d(n+1, x, y) // 4 == xy2d(n, x//2, y//2)``.
    """
    kind = CurveKind.parse(kind)
    if kind is CurveKind.GENERALIZED_HILBERT:
        raise ConfigurationError("hierarchy_check needs a square curve kind")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    n = int(n)
    side = 1 << (n + 1)
    y, x = np.mgrid[0:side, 0:side]
    fine = xy2d(kind, n + 1, x, y) >> 2
    coarse = xy2d(kind, n, x >> 1, y >> 1)
    return int(np.count_nonzero(fine != coarse))
