"""File formats: CSV, JSON and PGM (P2/P5), all written atomically."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .curves import CurveMap, GrayImage
from .errors import DomainError


def format_number(v) -> str:
    """Shortest round-trip text for floats, plain digits for integers."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def atomic_write(path: str | os.PathLike, data: bytes) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write(path, csv_text(header, rows).encode("utf-8"))


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, json_text(obj).encode("utf-8"))


def write_curve_map(path, cmap: CurveMap) -> Path:
    rows = ((d, x, y) for d, (x, y) in enumerate(cmap.forward.tolist()))
    return write_csv(path, ("d", "x", "y"), rows)


def write_permutation(path, perm) -> Path:
    return write_csv(path, ("slot", "raster_index"), enumerate(np.asarray(perm).tolist()))


def write_sequence(path, values) -> Path:
    return write_csv(path, ("d", "value"), enumerate(np.asarray(values, dtype=np.float64).tolist()))


def read_sequence(path) -> np.ndarray:
    """Read a ``d,value`` CSV (rows must be in ascending ``d``)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DomainError(f"{path}: empty file")
        if [h.strip() for h in header] != ["d", "value"]:
            raise DomainError(f"{path}: expected header 'd,value', got {','.join(header)!r}")
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                d, v = int(row[0]), float(row[1])
            except (ValueError, IndexError) as exc:
                raise DomainError(f"{path}:{lineno}: malformed row {row!r}") from exc
            if d != len(values):
                raise DomainError(f"{path}:{lineno}: expected d={len(values)}, got {d}")
            values.append(v)
    return np.asarray(values, dtype=np.float64)


# -- PGM ------------------------------------------------------------------


def pgm_bytes(levels: np.ndarray, binary: bool, maxval: int = 255) -> bytes:
    """Encode an integer grid (rows top to bottom) as P5 or P2."""
    levels = np.asarray(levels)
    if levels.ndim != 2:
        raise DomainError("PGM data must be 2-D")
    if levels.min() < 0 or levels.max() > maxval:
        raise DomainError(f"PGM levels must lie in [0, {maxval}]")
    h, w = levels.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{maxval}\n".encode("ascii")
    if binary:
        return header + levels.astype(np.uint8).tobytes()
    lines = "\n".join(" ".join(str(int(v)) for v in row) for row in levels)
    return header + lines.encode("ascii") + b"\n"


def write_pgm(path, levels: np.ndarray, binary: bool, maxval: int = 255) -> Path:
    return atomic_write(path, pgm_bytes(levels, binary, maxval))


def image_levels(image: GrayImage, maxval: int = 255) -> np.ndarray:
    return np.rint(image.pixels * maxval).astype(np.int64)


def _tokens(data: bytes):
    # yields (token, end offset); skips comments
    i, n = 0, len(data)
    while i < n:
        c = data[i : i + 1]
        if c == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path) -> GrayImage:
    """Read a P2 or P5 file (maxval <= 255) into a GrayImage scaled by maxval."""
    data = Path(path).read_bytes()
    toks = _tokens(data)
    try:
        magic, _ = next(toks)
        w = int(next(toks)[0])
        h = int(next(toks)[0])
        maxval_tok, end = next(toks)
        maxval = int(maxval_tok)
    except (StopIteration, ValueError) as exc:
        raise DomainError(f"{path}: malformed PGM header") from exc
    if magic not in (b"P2", b"P5"):
        raise DomainError(f"{path}: unsupported magic {magic!r}")
    if w < 1 or h < 1 or not 0 < maxval <= 255:
        raise DomainError(f"{path}: bad PGM geometry {w}x{h} maxval {maxval}")
    if magic == b"P5":
        raw = data[end + 1 : end + 1 + w * h]
        if len(raw) != w * h:
            raise DomainError(f"{path}: truncated raster")
        levels = np.frombuffer(raw, dtype=np.uint8).reshape(h, w)
    else:
        try:
            vals = [int(next(toks)[0]) for _ in range(w * h)]
        except (StopIteration, ValueError) as exc:
            raise DomainError(f"{path}: truncated or malformed raster") from exc
        levels = np.asarray(vals, dtype=np.int64).reshape(h, w)
    if levels.max() > maxval:
        raise DomainError(f"{path}: sample exceeds maxval")
    return GrayImage(levels.astype(np.float64) / maxval)
