"""Matrix files (CSV or NCRR1 binary) and key=value config files."""

import struct

import numpy as np

from .exceptions import DomainError

MAGIC = b"NCRR1"


def write_matrix_binary(path, a):
    """NCRR1 layout: magic, rows and cols as uint64 LE, row-major float64 LE payload."""
    a = np.atleast_2d(np.asarray(a, dtype="<f8"))
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", *a.shape))
        fh.write(np.ascontiguousarray(a).tobytes())


def write_matrix_csv(path, a, header=None):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in a:
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")


def _read_binary(data, path):
    if len(data) < len(MAGIC) + 16:
        raise DomainError(f"{path}: truncated NCRR1 header")
    rows, cols = struct.unpack_from("<QQ", data, len(MAGIC))
    payload = data[len(MAGIC) + 16 :]
    if len(payload) != rows * cols * 8:
        raise DomainError(f"{path}: payload has {len(payload)} bytes, expected {rows * cols * 8}")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(float)


def read_matrix(path):
    """Read a CSV (optional header row) or NCRR1 binary matrix."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data.startswith(MAGIC):
        return _read_binary(data, path)
    lines = [ln.strip() for ln in data.decode().splitlines() if ln.strip()]
    if not lines:
        raise DomainError(f"{path}: empty matrix file")
    try:
        [float(v) for v in lines[0].split(",")]
    except ValueError:
        lines = lines[1:]
    try:
        rows = [[float(v) for v in ln.split(",")] for ln in lines]
    except ValueError as err:
        raise DomainError(f"{path}: {err}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise DomainError(f"{path}: ragged or empty CSV")
    return np.array(rows, dtype=float)


def read_vector(path):
    """A matrix file holding a single row or column."""
    a = read_matrix(path)
    if min(a.shape) != 1:
        raise DomainError(f"{path}: expected a vector, got shape {a.shape}")
    return a.ravel()


def read_config(path):
    """Parse ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    with open(path) as fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{num}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out
