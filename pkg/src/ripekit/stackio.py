"""Binary file formats: stack dumps and estimator-state checkpoints.

Both formats are little-endian regardless of host byte order.

Stack dump (magic ``RKST``, version 1)::

    magic    4 bytes  b"RKST"
    version  u32
    N        u64      acquisitions
    L        u64      looks
    times    N * f64  acquisition times in days
    samples  N * L * (re f64, im f64), row-major by acquisition

Estimator checkpoint (magic ``RKRS``, version 1)::

    magic    4 bytes  b"RKRS"
    version  u32
    digest   32 bytes sha256 of the estimator configuration
    epoch    u64
    L        u64
    z        L * (re f64, im f64)   running reference
    s        L * (re f64, im f64)   stable reference

A checkpoint refuses to load under a configuration whose digest differs from
the one it was written with, so a recursion can never silently resume with
different settings.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .coherence import AcquisitionTimeline
from .errors import StackFormatError, StateFormatError
from .ripe import RipeConfig, RipeState
from .simulate import SLCStack

STACK_MAGIC = b"RKST"
STATE_MAGIC = b"RKRS"
FORMAT_VERSION = 1


def complex_to_bytes(vec: np.ndarray) -> bytes:
    """Interleaved little-endian float64 (re, im) encoding of a complex array."""
    return np.ascontiguousarray(vec, dtype="<c16").tobytes()


def bytes_to_complex(data: bytes) -> np.ndarray:
    if len(data) % 16 != 0:
        raise ValueError("complex payload length must be a multiple of 16 bytes")
    return np.frombuffer(data, dtype="<c16").astype(complex)


class _Reader:
    """Byte cursor that reports the failing offset on truncation."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int, what: str) -> bytes:
        if self.offset + count > len(self.data):
            raise StackFormatError(
                f"truncated while reading {what} ({count} bytes needed, "
                f"{len(self.data) - self.offset} left)",
                offset=self.offset,
            )
        out = self.data[self.offset : self.offset + count]
        self.offset += count
        return out

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]


def write_stack(stack: SLCStack) -> bytes:
    times = stack.timeline.as_array()
    parts = [
        STACK_MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<Q", stack.n_acquisitions),
        struct.pack("<Q", stack.n_looks),
        np.ascontiguousarray(times, dtype="<f8").tobytes(),
        complex_to_bytes(stack.samples),
    ]
    return b"".join(parts)


def read_stack(data: bytes) -> SLCStack:
    r = _Reader(data)
    magic = r.take(4, "magic")
    if magic != STACK_MAGIC:
        raise StackFormatError(f"bad magic {magic!r}, expected {STACK_MAGIC!r}", offset=0)
    version = r.u32("version")
    if version != FORMAT_VERSION:
        raise StackFormatError(f"unsupported stack format version {version}", offset=4)
    n_acq = r.u64("acquisition count")
    n_looks = r.u64("look count")
    if n_acq < 1 or n_looks < 1:
        raise StackFormatError(
            f"invalid dimensions N={n_acq}, L={n_looks}", offset=8
        )
    times = np.frombuffer(r.take(8 * n_acq, "times"), dtype="<f8").astype(float)
    samples = bytes_to_complex(r.take(16 * n_acq * n_looks, "samples"))
    if r.offset != len(data):
        raise StackFormatError(
            f"{len(data) - r.offset} trailing bytes after samples", offset=r.offset
        )
    try:
        timeline = AcquisitionTimeline(tuple(times))
        return SLCStack(samples=samples.reshape(n_acq, n_looks), timeline=timeline)
    except ValueError as exc:
        raise StackFormatError(f"invalid stack contents: {exc}", offset=r.offset) from exc


def save_stack(stack: SLCStack, path) -> None:
    Path(path).write_bytes(write_stack(stack))


def load_stack(path) -> SLCStack:
    return read_stack(Path(path).read_bytes())


def write_state(state: RipeState, config: RipeConfig) -> bytes:
    digest = bytes.fromhex(config.digest())
    parts = [
        STATE_MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        digest,
        struct.pack("<Q", state.epoch),
        struct.pack("<Q", state.z.size),
        complex_to_bytes(state.z),
        complex_to_bytes(state.s),
    ]
    return b"".join(parts)


def read_state(data: bytes, config: RipeConfig) -> RipeState:
    if len(data) < 4 or data[:4] != STATE_MAGIC:
        raise StateFormatError(f"bad magic, expected {STATE_MAGIC!r}")
    if len(data) < 56:
        raise StateFormatError("truncated checkpoint header")
    version = struct.unpack("<I", data[4:8])[0]
    if version != FORMAT_VERSION:
        raise StateFormatError(f"unsupported checkpoint version {version}")
    digest = data[8:40].hex()
    if digest != config.digest():
        raise StateFormatError(
            "checkpoint was written under a different estimator configuration; "
            "refusing to resume"
        )
    epoch = struct.unpack("<Q", data[40:48])[0]
    looks = struct.unpack("<Q", data[48:56])[0]
    expected = 56 + 2 * 16 * looks
    if len(data) != expected:
        raise StateFormatError(
            f"checkpoint payload is {len(data)} bytes, expected {expected}"
        )
    z = bytes_to_complex(data[56 : 56 + 16 * looks])
    s = bytes_to_complex(data[56 + 16 * looks :])
    return RipeState(z=z, s=s, epoch=epoch)


def save_state(state: RipeState, config: RipeConfig, path) -> None:
    Path(path).write_bytes(write_state(state, config))


def load_state(path, config: RipeConfig) -> RipeState:
    return read_state(Path(path).read_bytes(), config)
