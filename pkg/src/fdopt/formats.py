"""Binary file formats, CSV report/log schemas, and atomic writes.

Formats (all little-endian):

    features   "FDF1" | u32 n | u32 d | n*d f32, row-major
    stats      "FDS1" | u32 d | f64 weight | d f64 mean | d*d f64 cov, row-major
    checkpoint "FDC1" | u32 L | L x (u32 in, u32 out) | per layer: f64 W
               (out x in, row-major) then f64 b (out)

Feature payloads are 32-bit (bulk dumps); statistics and parameters are
64-bit (numerically sensitive). Loads upcast features to float64. Every
writer goes through a temp file in the destination directory followed by
os.replace, so readers never observe partial files.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import (
    BadMagicError,
    DataError,
    NonFiniteDataError,
    NumericalError,
    TruncatedFileError,
)
from .frechet import GaussianStats

FEATURES_MAGIC = b"FDF1"
STATS_MAGIC = b"FDS1"
CHECKPOINT_MAGIC = b"FDC1"


def atomic_write_bytes(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


class _Reader:
    """Byte cursor with truncation errors that name expected vs actual."""

    def __init__(self, payload: bytes, path: str):
        self.payload = payload
        self.path = path
        self.pos = 0

    def take(self, count: int, what: str) -> bytes:
        end = self.pos + count
        if end > len(self.payload):
            raise TruncatedFileError(
                f"{self.path}: truncated while reading {what}: expected "
                f"{end} bytes, file has {len(self.payload)}"
            )
        chunk = self.payload[self.pos : end]
        self.pos = end
        return chunk

    def expect_magic(self, magic: bytes) -> None:
        got = self.payload[:4]
        if got != magic:
            raise BadMagicError(
                f"{self.path}: expected magic {magic.decode('ascii')}, "
                f"got {got!r}"
            )
        self.pos = 4

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f64(self, what: str) -> float:
        return struct.unpack("<d", self.take(8, what))[0]

    def array(self, count: int, dtype: str, what: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(count * itemsize, what), dtype=dtype).copy()

    def expect_end(self) -> None:
        extra = len(self.payload) - self.pos
        if extra:
            raise DataError(f"{self.path}: {extra} unexpected trailing bytes")


def write_features(path: str, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DataError(f"features must be n x d with n, d >= 1, got {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise NonFiniteDataError("refusing to write non-finite features")
    n, d = matrix.shape
    payload = FEATURES_MAGIC + struct.pack("<II", n, d)
    payload += np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    atomic_write_bytes(path, payload)


def read_features(path: str) -> np.ndarray:
    with open(path, "rb") as handle:
        reader = _Reader(handle.read(), path)
    reader.expect_magic(FEATURES_MAGIC)
    n = reader.u32("row count")
    d = reader.u32("column count")
    if n < 1 or d < 1:
        raise DataError(f"{path}: header declares empty matrix {n} x {d}")
    rows = reader.array(n * d, "<f4", f"{n}x{d} feature payload").reshape(n, d)
    reader.expect_end()
    if not np.isfinite(rows).all():
        bad = int(np.nonzero(~np.isfinite(rows).all(axis=1))[0][0])
        raise NonFiniteDataError(f"{path}: row {bad} contains non-finite entries")
    return rows.astype(np.float64)


def write_stats(path: str, stats: GaussianStats) -> None:
    d = stats.dim
    payload = STATS_MAGIC + struct.pack("<I", d) + struct.pack("<d", stats.weight)
    payload += np.ascontiguousarray(stats.mu, dtype="<f8").tobytes()
    payload += np.ascontiguousarray(stats.sigma, dtype="<f8").tobytes()
    atomic_write_bytes(path, payload)


def read_stats(path: str) -> GaussianStats:
    with open(path, "rb") as handle:
        reader = _Reader(handle.read(), path)
    reader.expect_magic(STATS_MAGIC)
    d = reader.u32("dimension")
    if d < 1:
        raise DataError(f"{path}: header declares dimension 0")
    weight = reader.f64("weight")
    mu = reader.array(d, "<f8", f"{d}-entry mean")
    sigma = reader.array(d * d, "<f8", f"{d}x{d} covariance").reshape(d, d)
    reader.expect_end()
    try:
        return GaussianStats(mu=mu, sigma=sigma, weight=weight)
    except DataError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def write_checkpoint(path: str, weights, biases) -> None:
    if len(weights) != len(biases) or not weights:
        raise DataError("checkpoint needs matching, nonempty weight/bias lists")
    header = CHECKPOINT_MAGIC + struct.pack("<I", len(weights))
    body = b""
    prev_out = None
    for w, b in zip(weights, biases):
        w = np.asarray(w, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise DataError(
                f"layer shapes inconsistent: W {w.shape} vs b {b.shape}"
            )
        out_dim, in_dim = w.shape
        if prev_out is not None and in_dim != prev_out:
            raise DataError(
                f"layer dims do not chain: previous out {prev_out}, next in {in_dim}"
            )
        prev_out = out_dim
        header += struct.pack("<II", in_dim, out_dim)
        body += np.ascontiguousarray(w, dtype="<f8").tobytes()
        body += np.ascontiguousarray(b, dtype="<f8").tobytes()
    atomic_write_bytes(path, header + body)


def read_checkpoint(path: str):
    """Returns (weights, biases) lists; W is out x in, row-major."""
    with open(path, "rb") as handle:
        reader = _Reader(handle.read(), path)
    reader.expect_magic(CHECKPOINT_MAGIC)
    count = reader.u32("layer count")
    if count < 1:
        raise DataError(f"{path}: checkpoint declares zero layers")
    dims = [
        (reader.u32(f"layer {i} in dim"), reader.u32(f"layer {i} out dim"))
        for i in range(count)
    ]
    for i in range(1, count):
        if dims[i][0] != dims[i - 1][1]:
            raise DataError(
                f"{path}: layer dims do not chain: layer {i - 1} out "
                f"{dims[i - 1][1]} vs layer {i} in {dims[i][0]}"
            )
    weights, biases = [], []
    for i, (in_dim, out_dim) in enumerate(dims):
        if in_dim < 1 or out_dim < 1:
            raise DataError(f"{path}: layer {i} has zero dimension")
        w = reader.array(out_dim * in_dim, "<f8", f"layer {i} weights")
        b = reader.array(out_dim, "<f8", f"layer {i} biases")
        weights.append(w.reshape(out_dim, in_dim))
        biases.append(b)
    reader.expect_end()
    for i, (w, b) in enumerate(zip(weights, biases)):
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise NonFiniteDataError(f"{path}: layer {i} has non-finite parameters")
    return weights, biases


def format_sig9(value: float) -> str:
    return "%.9g" % value


def write_report_csv(report, path: str) -> None:
    """rep,fd_gen,fd_val,fdr rows plus a final FDRK aggregate row.

    Values use 9 significant digits and LF line endings. I/O failures are
    reported as numerical-failure-class errors per the CLI exit-code table.
    """
    lines = ["rep,fd_gen,fd_val,fdr"]
    for row in report.rows:
        lines.append(
            f"{row.name},{format_sig9(row.fd_gen)},{format_sig9(row.fd_val)},"
            f"{format_sig9(row.ratio)}"
        )
    lines.append(f"FDRK,,,{format_sig9(report.fdr_k)}")
    try:
        atomic_write_text(path, "\n".join(lines) + "\n")
    except OSError as exc:
        raise NumericalError(f"failed writing report to {path}: {exc}") from exc


def parse_report_csv(text: str):
    """Parse a report CSV back into ([(name, fd_gen, fd_val, ratio)], fdr_k)."""
    lines = text.strip().split("\n")
    if not lines or lines[0] != "rep,fd_gen,fd_val,fdr":
        raise DataError("report CSV missing expected header")
    rows = []
    fdr_k = None
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 4:
            raise DataError(f"malformed report row: {line!r}")
        if cells[0] == "FDRK":
            fdr_k = float(cells[3])
        else:
            rows.append((cells[0], float(cells[1]), float(cells[2]), float(cells[3])))
    if fdr_k is None:
        raise DataError("report CSV missing FDRK row")
    return rows, fdr_k


def metrics_log_text(labels, rows) -> str:
    """CSV text for a training log.

    labels are the per-representation column suffixes; each row is
    (phase, step, lr, loss, fd_0, ..., fd_{K-1}).
    """
    header = "phase,step,lr,loss," + ",".join(f"fd_{label}" for label in labels)
    lines = [header]
    width = 4 + len(labels)
    for row in rows:
        if len(row) != width:
            raise DataError(f"log row has {len(row)} fields, expected {width}")
        phase, step, lr, loss = row[0], row[1], row[2], row[3]
        cells = [phase, str(int(step)), "%.12g" % lr, "%.12g" % loss]
        cells += ["%.12g" % v for v in row[4:]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_metrics_log(path: str, labels, rows) -> None:
    atomic_write_text(path, metrics_log_text(labels, rows))


def read_metrics_log(path: str):
    """Returns (labels, rows) mirroring metrics_log_text input."""
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().strip().split("\n")
    if not lines or not lines[0].startswith("phase,step,lr,loss"):
        raise DataError(f"{path}: missing metrics log header")
    headers = lines[0].split(",")
    labels = [h[len("fd_") :] for h in headers[4:]]
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(headers):
            raise DataError(f"{path}: malformed log row {line!r}")
        rows.append(
            (cells[0], int(cells[1]), float(cells[2]), float(cells[3]))
            + tuple(float(v) for v in cells[4:])
        )
    return labels, rows
