"""Mesh and point-cloud readers, matrix export, and the ECT archive format.

Archive layout (line-oriented text, UTF-8)::

    ECTKIT v1
    kind exact|smooth
    strategy global|per_direction
    shape <l> <k>
    dim <d>
    lambda <float>|none
    directions angles|vectors
    meta <key> <value>          (zero or more, sorted by key)
    [directions]
    <k lines: one angle, or d components>
    [thresholds]
    <l lines: one value (global) or k values (per_direction)>
    [degenerate]                (per_direction only)
    <one line of k 0/1 flags>
    [values]
    <l lines of k entries>
    end

Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
import warnings
from pathlib import Path
from typing import Optional, Union

import numpy as np
import numpy.typing as npt

from .ect_diff import SmoothEctMatrix
from .ect_exact import EctMatrix, ThresholdGrid
from .filtration import DirectionSet

ARCHIVE_MAGIC = "ECTKIT v1"
PGM_MAXVAL = 65535

PathLike = Union[str, os.PathLike]


class FormatError(ValueError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, path: PathLike, line: Optional[int], message: str):
        self.path, self.line = str(path), line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


def atomic_write_text(path: PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _content_lines(path: PathLike) -> list[tuple[int, str]]:
    with open(path, encoding="utf-8") as fh:
        out = []
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                out.append((no, line))
        return out


def _floats(path, no, tokens):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise FormatError(path, no, f"non-numeric token in {' '.join(tokens)!r}") from None


def read_off_mesh(path: PathLike) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int64]]:
    """Parse an OFF file into vertex coordinates and triangles.

    Polygonal faces are fan-triangulated (with a warning). A file with no
    faces yields an empty ``(0, 3)`` triangle array, i.e. a point cloud.
    """
    lines = _content_lines(path)
    if not lines:
        raise FormatError(path, None, "empty file")
    no, first = lines[0]
    tokens = first.split()
    if tokens[0] != "OFF":
        raise FormatError(path, no, f"expected 'OFF' header, found {tokens[0]!r}")
    rest = tokens[1:]
    cursor = 1
    if not rest:
        if len(lines) < 2:
            raise FormatError(path, no, "missing counts line")
        no, counts_line = lines[1]
        rest = counts_line.split()
        cursor = 2
    if len(rest) < 2:
        raise FormatError(path, no, "counts line needs 'nV nF [nE]'")
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except ValueError:
        raise FormatError(path, no, f"counts must be integers, got {' '.join(rest)!r}") from None
    if nv < 0 or nf < 0:
        raise FormatError(path, no, "counts must be nonnegative")

    body = lines[cursor:]
    if len(body) < nv + nf:
        last = body[-1][0] if body else no
        raise FormatError(path, last, f"file ends early: expected {nv} vertices and {nf} faces, found {len(body)} lines")

    coords = np.empty((nv, 3))
    for i in range(nv):
        no, line = body[i]
        vals = _floats(path, no, line.split())
        if len(vals) < 3:
            raise FormatError(path, no, f"vertex line needs 3 coordinates, got {len(vals)}")
        coords[i] = vals[:3]

    triangles: list[tuple[int, int, int]] = []
    fanned = 0
    for j in range(nf):
        no, line = body[nv + j]
        tokens = line.split()
        try:
            m = int(tokens[0])
            idx = [int(t) for t in tokens[1 : 1 + m]]
        except ValueError:
            raise FormatError(path, no, f"face indices must be integers: {line!r}") from None
        if m < 3 or len(idx) != m:
            raise FormatError(path, no, f"face declares {m} vertices but lists {len(idx)}")
        bad = [v for v in idx if v < 0 or v >= nv]
        if bad:
            raise FormatError(path, no, f"vertex index {bad[0]} out of range 0..{nv - 1}")
        if m > 3:
            fanned += 1
        for a in range(1, m - 1):
            triangles.append((idx[0], idx[a], idx[a + 1]))
    if fanned:
        warnings.warn(f"{path}: fan-triangulated {fanned} non-triangular faces", stacklevel=2)
    return coords, np.asarray(triangles, dtype=np.int64).reshape(-1, 3)


def write_off_mesh(path: PathLike, coordinates: npt.ArrayLike, faces) -> None:
    coordinates = np.asarray(coordinates, dtype=np.float64)
    faces = [list(map(int, f)) for f in faces]
    out = ["OFF", f"{len(coordinates)} {len(faces)} 0"]
    out += [" ".join(repr(float(c)) for c in row) for row in coordinates]
    out += [" ".join(map(str, [len(f), *f])) for f in faces]
    atomic_write_text(path, "\n".join(out) + "\n")


def read_point_cloud_text(path: PathLike) -> npt.NDArray[np.float64]:
    """Whitespace-separated coordinates, one point per line; ``#`` starts a comment."""
    rows, width = [], None
    for no, line in _content_lines(path):
        tokens = line.split()
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise FormatError(path, no, f"expected {width} columns, found {len(tokens)}")
        rows.append(_floats(path, no, tokens))
    if not rows:
        raise FormatError(path, None, "no points found")
    return np.asarray(rows, dtype=np.float64)


def write_point_cloud_text(path: PathLike, points: npt.ArrayLike) -> None:
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    atomic_write_text(path, "".join(" ".join(repr(float(v)) for v in row) + "\n" for row in points))


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def matrix_csv_text(matrix: Union[EctMatrix, npt.ArrayLike]) -> str:
    """CSV with direction indices across the header and thresholds down the first column.

    Per-direction grids have no shared threshold per row, so the first
    column then holds the row index instead (header ``row``).
    """
    if isinstance(matrix, EctMatrix):
        values = matrix.values
        first = ("t", matrix.thresholds.values) if matrix.strategy == "global" else ("row", range(matrix.shape[0]))
    else:
        values = np.asarray(matrix)
        first = ("row", range(values.shape[0]))
    if not np.all(np.isfinite(values)):
        raise ValueError("matrix contains non-finite entries")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([first[0], *range(values.shape[1])])
    for label, row in zip(first[1], values):
        writer.writerow([_fmt(label), *(_fmt(v) for v in row)])
    return buf.getvalue()


def write_matrix_csv(matrix: Union[EctMatrix, npt.ArrayLike], path: PathLike) -> None:
    atomic_write_text(path, matrix_csv_text(matrix))


def read_matrix_csv(path: PathLike) -> tuple[npt.NDArray[np.float64], Optional[npt.NDArray[np.float64]]]:
    """Return ``(values, thresholds)``; thresholds is None for row-indexed files."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(path, None, "empty CSV")
    header = rows[0]
    data = []
    for no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise FormatError(path, no, f"expected {len(header)} fields, found {len(row)}")
        data.append(_floats(path, no, row))
    arr = np.asarray(data, dtype=np.float64).reshape(len(data), len(header))
    thresholds = arr[:, 0] if header[0] == "t" else None
    return arr[:, 1:], thresholds


def pgm_scaling(values: npt.ArrayLike) -> tuple[npt.NDArray[np.int64], float, float]:
    """Affine map of ``[min, max]`` onto ``[0, 65535]``; a constant matrix maps to 0."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise ValueError("PGM export needs a non-empty matrix of finite values")
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        pixels = np.rint((v - lo) / (hi - lo) * PGM_MAXVAL).astype(np.int64)
    else:
        pixels = np.zeros(v.shape, dtype=np.int64)
    return pixels, lo, hi


def write_matrix_pgm(matrix: Union[EctMatrix, npt.ArrayLike], path: PathLike) -> Path:
    """Write a 16-bit ASCII PGM (P2), first matrix row at the top.

    Matrix rows run from the lowest threshold upward, so the lowest value
    sits at the top of the image. The scaling constants go to a JSON
    sidecar ``<path>.json``, whose path is returned.
    """
    values = matrix.values if isinstance(matrix, EctMatrix) else np.asarray(matrix)
    values = np.atleast_2d(values)
    pixels, lo, hi = pgm_scaling(values)
    h, w = pixels.shape
    lines = ["P2", f"{w} {h}", str(PGM_MAXVAL)]
    lines += [" ".join(map(str, row)) for row in pixels.tolist()]
    atomic_write_text(path, "\n".join(lines) + "\n")
    sidecar = Path(str(path) + ".json")
    meta = {
        "format": "P2",
        "maxval": PGM_MAXVAL,
        "width": w,
        "height": h,
        "value_min": lo,
        "value_max": hi,
        "mapping": "pixel = round((value - value_min) / (value_max - value_min) * maxval); constant matrix -> 0",
        "row_order": "row 0 (top) is the lowest threshold",
    }
    atomic_write_text(sidecar, json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return sidecar


def read_pgm(path: PathLike) -> npt.NDArray[np.int64]:
    tokens = []
    for no, line in _content_lines(path):
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise FormatError(path, 1, "expected P2 header")
    w, h, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.asarray([int(t) for t in tokens[4:]], dtype=np.int64)
    if data.size != w * h:
        raise FormatError(path, None, f"expected {w * h} pixels, found {data.size}")
    return data.reshape(h, w)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def archive_text(matrix: EctMatrix, meta: Optional[dict] = None) -> str:
    smooth = isinstance(matrix, SmoothEctMatrix)
    l, k = matrix.shape
    W = matrix.directions
    grid = matrix.thresholds
    lines = [
        ARCHIVE_MAGIC,
        f"kind {'smooth' if smooth else 'exact'}",
        f"strategy {grid.strategy}",
        f"shape {l} {k}",
        f"dim {W.d}",
        f"lambda {_fmt(matrix.lam) if smooth else 'none'}",
        f"directions {'angles' if W.angles is not None else 'vectors'}",
    ]
    for key, value in sorted((meta or {}).items()):
        text = str(value)
        if any(c.isspace() for c in key) or "\n" in text:
            raise ValueError(f"metadata {key!r} must be a single token key with a one-line value")
        lines.append(f"meta {key} {text}")
    lines.append("[directions]")
    if W.angles is not None:
        lines += [_fmt(a) for a in W.angles]
    else:
        lines += [" ".join(_fmt(c) for c in row) for row in W.vectors]
    lines.append("[thresholds]")
    if grid.strategy == "global":
        lines += [_fmt(t) for t in grid.values]
    else:
        lines += [" ".join(_fmt(t) for t in row) for row in grid.values]
        lines.append("[degenerate]")
        lines.append(" ".join("1" if f else "0" for f in grid.degenerate))
    lines.append("[values]")
    lines += [" ".join(_fmt(v) for v in row) for row in matrix.values]
    lines.append("end")
    return "\n".join(lines) + "\n"


def write_archive(matrix: EctMatrix, path: PathLike, meta: Optional[dict] = None) -> str:
    """Write the archive atomically and return the SHA-256 of its bytes."""
    text = archive_text(matrix, meta)
    atomic_write_text(path, text)
    return hashlib.sha256(text.encode()).hexdigest()


def read_archive(path: PathLike) -> tuple[EctMatrix, dict]:
    with open(path, encoding="utf-8") as fh:
        raw = [line.rstrip("\n") for line in fh]
    if not raw or raw[0] != ARCHIVE_MAGIC:
        raise FormatError(path, 1, f"expected header {ARCHIVE_MAGIC!r}")
    header: dict[str, str] = {}
    meta: dict[str, str] = {}
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for no, line in enumerate(raw[1:], start=2):
        if line == "end":
            break
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
        elif current is not None:
            sections[current].append((no, line))
        elif line.startswith("meta "):
            parts = line.split(" ", 2)
            meta[parts[1]] = parts[2] if len(parts) > 2 else ""
        else:
            key, _, value = line.partition(" ")
            header[key] = value
    else:
        raise FormatError(path, len(raw), "missing 'end' marker (truncated archive?)")

    try:
        kind = header["kind"]
        strategy = header["strategy"]
        l, k = (int(x) for x in header["shape"].split())
        lam_text = header["lambda"]
        dir_mode = header["directions"]
    except (KeyError, ValueError) as exc:
        raise FormatError(path, None, f"incomplete header: {exc}") from None

    def table(name, width, parse=float):
        rows = sections.get(name)
        if rows is None:
            raise FormatError(path, None, f"missing [{name}] section")
        out = []
        for no, line in rows:
            tokens = line.split()
            if len(tokens) != width:
                raise FormatError(path, no, f"[{name}] row needs {width} entries, found {len(tokens)}")
            try:
                out.append([parse(t) for t in tokens])
            except ValueError:
                raise FormatError(path, no, f"bad number in [{name}]") from None
        return out

    d = int(header.get("dim", "2"))
    if dir_mode == "angles":
        W = DirectionSet.from_angles([r[0] for r in table("directions", 1)])
    else:
        W = DirectionSet(np.asarray(table("directions", d)))
    if strategy == "global":
        grid = ThresholdGrid("global", np.asarray([r[0] for r in table("thresholds", 1)]))
    else:
        flags = table("degenerate", k, int)[0]
        grid = ThresholdGrid("per_direction", np.asarray(table("thresholds", k)), np.asarray(flags, dtype=bool))
    if kind == "exact":
        values = np.asarray(table("values", k, int), dtype=np.int64).reshape(l, k)
        matrix = EctMatrix(values, W, grid)
    else:
        values = np.asarray(table("values", k), dtype=np.float64).reshape(l, k)
        matrix = SmoothEctMatrix(values, W, grid, float(lam_text))
    return matrix, meta
