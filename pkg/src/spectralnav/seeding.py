"""Deterministic seed derivation.

All randomness in the package flows from one global seed through
``derive_seed``, so identical invocations reproduce byte-identical output.
Python's builtin ``hash`` is salted per process and must not be used here.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: int | str) -> int:
    """Derive a 64-bit child seed from an ordered sequence of scope labels."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(*parts: int | str) -> np.random.Generator:
    """A numpy generator seeded from the derived seed for the given scope."""
    return np.random.default_rng(derive_seed(*parts))
