"""Deterministic seed derivation.

All randomness in the engine flows from 64-bit seeds. Child seeds are derived
by hashing the parent seed with a label path, so independent decisions draw
from independent streams regardless of evaluation order.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *parts: object) -> int:
    """Derive a child seed from ``seed`` and a label path. Stable across runs
    and platforms."""
    material = ":".join([str(seed & MASK64)] + [str(p) for p in parts])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
