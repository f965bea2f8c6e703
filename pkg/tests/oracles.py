"""Slow reference constructions, independent of the package's fast paths."""

import math
from fractions import Fraction

# Base transformations of the Hilbert curve on the unit square viewed as
# the complex plane: T_i z = H_i z / 2 + h_i.
_H = {
    0: lambda z: z.conjugate() * 1j,
    1: lambda z: z,
    2: lambda z: z,
    3: lambda z: -z.conjugate() * 1j,
}
_h = {0: 0j, 1: 0.5j, 2: 0.5 + 0.5j, 3: 1 + 0.5j}


def hilbert_forward(n):
    """Cells of the order-n Hilbert curve by composing quadrant transforms."""
    cells = []
    for d in range(4**n):
        digits = [(d >> (2 * (n - 1 - k))) & 3 for k in range(n)]
        z = 0.5 + 0.5j  # centre of the unit square
        for q in reversed(digits):
            z = 0.5 * _H[q](z) + _h[q]
        cells.append((math.floor(z.real * 2**n), math.floor(z.imag * 2**n)))
    return cells


def morton_forward(n):
    cells = []
    for d in range(4**n):
        bits = format(d, f"0{2 * n}b")[::-1]  # least significant first
        x = sum(int(bits[2 * k]) << k for k in range(n))
        y = sum(int(bits[2 * k + 1]) << k for k in range(n))
        cells.append((x, y))
    return cells


def zigzag_forward(n):
    side = 2**n
    return [(x, y) for y in range(side) for x in range(side)]


def degrid_naive(cells, k, squared=False):
    n = len(cells)
    out = []
    for i in range(n):
        total, count = 0.0, 0
        for off in range(-k, k + 1):
            j = i + off
            if off == 0 or not 0 <= j < n:
                continue
            dx = cells[j][0] - cells[i][0]
            dy = cells[j][1] - cells[i][1]
            sq = dx * dx + dy * dy
            total += sq if squared else math.sqrt(sq)
            count += 1
        out.append(total / count)
    return out


def dilation_naive(cells, order):
    """Max of |p1 - p2|^2 / |t1 - t2| over all pairs, exact rationals."""
    side = 2**order
    best, pair = None, None
    for d1 in range(len(cells)):
        for d2 in range(d1 + 1, len(cells)):
            (x1, y1), (x2, y2) = cells[d1], cells[d2]
            p1 = (Fraction(2 * x1 + 1, 2 * side), Fraction(2 * y1 + 1, 2 * side))
            p2 = (Fraction(2 * x2 + 1, 2 * side), Fraction(2 * y2 + 1, 2 * side))
            sq = (p1[0] - p2[0]) ** 2 + (p1[1] - p2[1]) ** 2
            ratio = sq / Fraction(d2 - d1, 4**order)
            if best is None or ratio > best:
                best, pair = ratio, (d1, d2)
    return best, pair


def dtw_exhaustive(a, b):
    """Minimum over every monotone boundary-anchored alignment path."""
    best = math.inf

    def walk(i, j, acc):
        nonlocal best
        acc += abs(a[i] - b[j])
        if i == len(a) - 1 and j == len(b) - 1:
            best = min(best, acc)
            return
        if i + 1 < len(a):
            walk(i + 1, j, acc)
        if j + 1 < len(b):
            walk(i, j + 1, acc)
        if i + 1 < len(a) and j + 1 < len(b):
            walk(i + 1, j + 1, acc)

    walk(0, 0, 0.0)
    return best
