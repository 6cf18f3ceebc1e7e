"""Packed binary activation patterns, the cell identities used during marching."""

from __future__ import annotations

import base64

import numpy as np


class ActivationPattern:
    """Immutable bit vector over hidden neurons, layer-major order.

    Hashable by exact bit equality so it can key visited/working sets.
    """

    __slots__ = ("bits", "key")

    def __init__(self, bits):
        arr = np.array(bits, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise ValueError("activation pattern entries must be 0 or 1")
        arr.setflags(write=False)
        self.bits = arr
        # packed bits alone are ambiguous across lengths; prefix the length
        self.key = arr.size.to_bytes(4, "little") + np.packbits(arr).tobytes()

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, ActivationPattern) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"ActivationPattern({''.join(map(str, self.bits.tolist()))})"

    def to_base64(self) -> str:
        return base64.b64encode(np.packbits(self.bits).tobytes()).decode("ascii")

    @classmethod
    def from_base64(cls, text: str, n_bits: int) -> "ActivationPattern":
        packed = np.frombuffer(base64.b64decode(text), dtype=np.uint8)
        return cls(np.unpackbits(packed)[:n_bits])


def ap_key(ap: ActivationPattern) -> bytes:
    """Opaque exact key: equal keys iff equal patterns."""
    return ap.key
