"""Stable seed derivation, independent of Python's per-process hash salt."""

import hashlib

__all__ = ["derive_seed"]


def derive_seed(*parts) -> int:
    """63-bit seed from the ``repr`` of ``parts``.

    ``derive_seed(base, "Yacht", 3)`` is identical across processes,
    platforms and Python versions.
    """
    # numpy scalars repr differently from builtins
    parts = tuple(p.item() if hasattr(p, "item") else p for p in parts)
    h = hashlib.blake2b(repr(parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "little") >> 1
