"""Self-describing binary container for token sequences and fusion params.

Layout, all little-endian: magic b"TOKF", version u32, rows u64, cols u64,
then rows*cols float64 values row-major. Fusion parameters travel in the
same container as the (3*dim, dim) stack W_q over W_k over W_v.
"""

import struct

import numpy as np

from ..fusion import FusionParams

MAGIC = b"TOKF"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


class TokenFileError(Exception):
    """Malformed or truncated token file."""


def write_tokens(tokens, path) -> None:
    arr = np.ascontiguousarray(tokens, dtype="<f8")
    if arr.ndim != 2:
        raise ValueError(f"tokens must be 2-D, got shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes())


def read_tokens(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise TokenFileError(f"{path}: too short for a token file header")
    magic, version, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise TokenFileError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise TokenFileError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + rows * cols * 8
    if len(data) != expected:
        raise TokenFileError(
            f"{path}: has {len(data)} bytes, expected {expected} "
            f"for {rows}x{cols} values"
        )
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    return values.reshape(rows, cols).copy()


def write_params(params: FusionParams, path) -> None:
    write_tokens(np.vstack([params.w_q, params.w_k, params.w_v]), path)


def read_params(path) -> FusionParams:
    stack = read_tokens(path)
    rows, dim = stack.shape
    if rows != 3 * dim:
        raise TokenFileError(
            f"{path}: parameter stack must be (3*dim, dim), got {rows}x{dim}"
        )
    return FusionParams(w_q=stack[:dim], w_k=stack[dim : 2 * dim], w_v=stack[2 * dim :])
