"""Small shared helpers: stable seed derivation and JSON output."""

from __future__ import annotations

import hashlib
import json


def derive_seed(*parts) -> int:
    """Deterministic 64-bit seed from arbitrary repr-stable parts.

    Stable across processes and platforms (unlike hash()), so derived
    random streams are reproducible everywhere.
    """
    digest = hashlib.sha256(repr(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def dump_json(obj) -> bytes:
    """Canonical JSON bytes: 2-space indent, trailing newline, UTF-8."""
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")
