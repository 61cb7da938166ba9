"""File formats: dataset CSV, the binary DSET container, plot CSVs and manifests.

All writers go through :func:`atomic_write` (temp file + rename) so a crashed
run never leaves a half-written output behind.
"""

from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from dimscope.data import DataSet
from dimscope.errors import InvalidInputError

DSET_MAGIC = b"DSET"
DSET_VERSION = 1
_DSET_HEADER = struct.Struct("<4sIQQ")


def fmt(value) -> str:
    """Shortest round-trip decimal form; ints and flags pass through."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def atomic_write(path, data: bytes | str) -> None:
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    atomic_write(path, buf.getvalue())


def write_keyvalue(path, items: Mapping[str, object]) -> None:
    lines = [f"{key}={fmt(value)}" for key, value in items.items()]
    atomic_write(path, "\n".join(lines) + "\n")


def read_keyvalue(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def read_csv_dataset(path) -> DataSet:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if not rows and lineno == 1 and not all(_is_number(f) for f in fields):
                continue  # header
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from None
            if len(rows[-1]) != len(rows[0]):
                raise InvalidInputError(
                    f"{path}:{lineno}: expected {len(rows[0])} fields, got {len(rows[-1])}"
                )
    if not rows:
        raise InvalidInputError(f"{path}: no samples")
    return DataSet(np.array(rows, dtype=np.float64))


def write_csv_dataset(path, data: DataSet, header: bool = True) -> None:
    names = [f"x{i}" for i in range(data.ambient_dim)] if header else None
    buf = io.StringIO()
    if names:
        buf.write(",".join(names) + "\n")
    for row in data.points:
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    atomic_write(path, buf.getvalue())


def read_dset(path) -> DataSet:
    raw = Path(path).read_bytes()
    if len(raw) < _DSET_HEADER.size:
        raise InvalidInputError(f"{path}: truncated DSET header")
    magic, version, n, d = _DSET_HEADER.unpack_from(raw)
    if magic != DSET_MAGIC:
        raise InvalidInputError(f"{path}: bad magic {magic!r}")
    if version != DSET_VERSION:
        raise InvalidInputError(f"{path}: unsupported DSET version {version}")
    expected = _DSET_HEADER.size + 8 * n * d
    if len(raw) != expected:
        raise InvalidInputError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<f8", offset=_DSET_HEADER.size, count=n * d)
    return DataSet(values.reshape(n, d))


def write_dset(path, data: DataSet) -> None:
    header = _DSET_HEADER.pack(DSET_MAGIC, DSET_VERSION, data.n_samples, data.ambient_dim)
    atomic_write(path, header + np.ascontiguousarray(data.points, dtype="<f8").tobytes())


def read_dataset(path) -> DataSet:
    """Load a dataset, sniffing the DSET magic before falling back to CSV."""
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"{path}: no such file")
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == DSET_MAGIC:
        return read_dset(path)
    return read_csv_dataset(path)


def write_dataset(path, data: DataSet, fmt_name: str | None = None) -> None:
    if fmt_name is None:
        fmt_name = "dset" if Path(path).suffix.lower() in (".dset", ".bin") else "csv"
    if fmt_name == "dset":
        write_dset(path, data)
    elif fmt_name == "csv":
        write_csv_dataset(path, data)
    else:
        raise ValueError(f"unknown dataset format {fmt_name!r}")
