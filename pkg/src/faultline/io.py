"""CSV artifact formats shared by the CLI stages.

All files are UTF-8 with LF line endings.  Floats are written with
``repr``, the shortest digit string that round-trips to the same
double, so write-then-read is lossless bit for bit.  Error messages
use 1-based file line numbers (the header is line 1) because that is
what editors and ingest logs show.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .geometry import DuplicateSiteError, PointCloud
from .narrower import NarrowedPoints

POINTS_HEADER = ["x", "y", "f"]
NARROWED_HEADER = ["x", "y", "tx", "ty", "source"]
POLYLINES_HEADER = ["fault_id", "seq", "x", "y"]


class IngestError(ValueError):
    """Malformed artifact file; message carries file line numbers."""


def _fmt(value: float) -> str:
    return repr(float(value))


def _read_rows(path: Path | str, header: list[str]) -> list[tuple[int, list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file, expected header {','.join(header)}")
        if first != header:
            raise IngestError(
                f"{path}: bad header {','.join(first)!r}, expected {','.join(header)}"
            )
        return [(line, row) for line, row in enumerate(reader, start=2) if row]


def _parse_floats(
    path: Path | str, rows: list[tuple[int, list[str]]], width: int
) -> np.ndarray:
    out = np.empty((len(rows), width))
    for k, (line, row) in enumerate(rows):
        if len(row) != width:
            raise IngestError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        try:
            out[k] = [float(cell) for cell in row]
        except ValueError:
            raise IngestError(f"{path}: row {line} has a non-numeric field") from None
    return out


def write_points(path: Path | str, cloud: PointCloud) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(POINTS_HEADER) + "\n")
        for (x, y), f in zip(cloud.xy, cloud.values):
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(f)}\n")


def read_points(path: Path | str) -> PointCloud:
    rows = _read_rows(path, POINTS_HEADER)
    if not rows:
        raise IngestError(f"{path}: no data rows")
    data = _parse_floats(path, rows, 3)
    bad = [rows[k][0] for k in np.flatnonzero(~np.isfinite(data).all(axis=1))]
    if bad:
        listed = ", ".join(f"row {line}" for line in bad)
        raise IngestError(f"{path}: non-finite values at {listed}")
    try:
        return PointCloud.from_arrays(data[:, :2], data[:, 2])
    except DuplicateSiteError as err:
        i, j = err.pairs[0]
        raise IngestError(
            f"{path}: duplicate site at row {rows[i][0]} and row {rows[j][0]}"
        ) from None


def write_narrowed(path: Path | str, narrowed: NarrowedPoints) -> None:
    src = narrowed.source_indices
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(NARROWED_HEADER) + "\n")
        for k in range(len(narrowed.xy)):
            x, y = narrowed.xy[k]
            tx, ty = narrowed.tangents[k]
            s = -1 if src is None else int(src[k])
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(tx)},{_fmt(ty)},{s}\n")


def read_narrowed(path: Path | str) -> NarrowedPoints:
    rows = _read_rows(path, NARROWED_HEADER)
    data = _parse_floats(path, rows, 5)
    source = data[:, 4].astype(int)
    return NarrowedPoints(
        xy=data[:, 0:2],
        tangents=data[:, 2:4],
        source_indices=None if np.all(source == -1) else source,
    )


def write_polylines(path: Path | str, curves: list[np.ndarray]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(POLYLINES_HEADER) + "\n")
        for fault_id, pts in enumerate(curves):
            for seq, (x, y) in enumerate(np.asarray(pts)):
                fh.write(f"{fault_id},{seq},{_fmt(x)},{_fmt(y)}\n")


def read_polylines(path: Path | str) -> list[tuple[int, np.ndarray]]:
    """Polylines grouped by fault id, each ordered by its seq column."""
    rows = _read_rows(path, POLYLINES_HEADER)
    data = _parse_floats(path, rows, 4)
    by_fault: dict[int, list[tuple[int, int]]] = {}
    for k, (line, _) in enumerate(rows):
        fid, seq = int(data[k, 0]), int(data[k, 1])
        by_fault.setdefault(fid, []).append((seq, k))
    out = []
    for fid in sorted(by_fault):
        members = sorted(by_fault[fid])
        seqs = [s for s, _ in members]
        if len(set(seqs)) != len(seqs):
            raise IngestError(f"{path}: fault {fid} repeats a seq value")
        out.append((fid, data[[k for _, k in members], 2:4]))
    return out
