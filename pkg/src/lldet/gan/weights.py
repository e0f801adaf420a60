"""Versioned binary weight files with an architecture fingerprint.

Layout (all integers little-endian):

    magic   4 bytes  b"LLWS"
    version u16      currently 1
    fprint  32 bytes SHA-256 of the canonical spec JSON
    spec    u32 length + UTF-8 canonical spec JSON
    count   u32      number of parameter entries
    entry   u16 path length + UTF-8 path
            u8 ndim, then ndim x u32 extents
            float32 little-endian payload, row-major

Entries appear in spec parameter order.  Loading verifies the magic,
version, declared lengths and that the stored fingerprint matches the
embedded spec; any shortfall is a format error and yields no partial
store.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import FormatError, IncompatibleWeightsError, TruncationError
from ..tensor import Tensor
from .network import Network
from .specs import NetworkSpec, spec_fingerprint, spec_from_json, spec_to_json

__all__ = ["WeightStore", "save_weights", "load_weights", "check_compatible"]

MAGIC = b"LLWS"
VERSION = 1


@dataclass
class WeightStore:
    """Float32 parameter snapshot plus the spec that shaped it."""

    version: int
    spec_json: str
    params: dict[str, np.ndarray]  # float32

    @property
    def fingerprint(self) -> bytes:
        return hashlib.sha256(self.spec_json.encode("utf-8")).digest()

    @property
    def spec(self) -> NetworkSpec:
        return spec_from_json(self.spec_json)

    @classmethod
    def from_network(cls, net: Network) -> "WeightStore":
        params = {
            name: np.asarray(p.data, dtype=np.float32)
            for name, p in net.params.items()
        }
        return cls(version=VERSION, spec_json=spec_to_json(net.spec), params=params)

    def to_network(self) -> Network:
        spec = self.spec
        params = {name: Tensor(arr.astype(np.float64)) for name, arr in self.params.items()}
        return Network(spec, params)


def save_weights(store: WeightStore) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", store.version)
    out += store.fingerprint
    spec_bytes = store.spec_json.encode("utf-8")
    out += struct.pack("<I", len(spec_bytes))
    out += spec_bytes
    out += struct.pack("<I", len(store.params))
    for name, arr in store.params.items():
        path = name.encode("utf-8")
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        out += struct.pack("<H", len(path))
        out += path
        out += struct.pack("<B", arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += arr.astype("<f4").tobytes()
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncationError(
                f"weight payload ends at byte {len(self.data)}, needed {self.pos + n}"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_weights(data: bytes) -> WeightStore:
    r = _Reader(bytes(data))
    if r.take(4) != MAGIC:
        raise FormatError("bad magic, not a weight file")
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise FormatError(f"unsupported weight format version {version}")
    fingerprint = r.take(32)
    (spec_len,) = r.unpack("<I")
    try:
        spec_json = r.take(spec_len).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"spec payload is not UTF-8: {exc}") from None
    if hashlib.sha256(spec_json.encode("utf-8")).digest() != fingerprint:
        raise FormatError("fingerprint does not match the embedded spec")
    (count,) = r.unpack("<I")
    params: dict[str, np.ndarray] = {}
    for _ in range(count):
        (path_len,) = r.unpack("<H")
        name = r.take(path_len).decode("utf-8")
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}I")
        n_items = 1
        for extent in shape:
            n_items *= extent
        payload = r.take(4 * n_items)
        params[name] = np.frombuffer(payload, dtype="<f4").reshape(shape).copy()
    if r.pos != len(r.data):
        raise FormatError(f"{len(r.data) - r.pos} trailing bytes after last entry")
    store = WeightStore(version=version, spec_json=spec_json, params=params)
    try:
        store.spec
    except Exception as exc:
        raise FormatError(f"embedded spec does not decode: {exc}") from None
    return store


def check_compatible(store: WeightStore, spec: NetworkSpec):
    """Raise unless the store was produced by exactly this spec."""
    if store.fingerprint != spec_fingerprint(spec):
        raise IncompatibleWeightsError(
            f"weights built for arch {store.spec.arch!r} do not match the requested spec"
        )
