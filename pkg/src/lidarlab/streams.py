"""Deterministic splittable random streams.

Every consumer of randomness receives a RandomStream named by a (seed, label)
pair. The underlying generator state is derived by hashing that pair, so a
stream's output depends only on its name, never on how many other streams
exist or in which order they are consumed. That property is what makes
scan blocks and sweep cells safe to execute on any number of workers.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RandomStream:
    """A named, reproducible source of randomness."""

    seed: int
    label: str = ""

    def child(self, label: str) -> "RandomStream":
        """Derive a sub-stream; labels compose with '/'."""
        if not label:
            raise ValueError("child label must be non-empty")
        combined = f"{self.label}/{label}" if self.label else label
        return RandomStream(self.seed, combined)

    def generator(self) -> np.random.Generator:
        """Fresh generator for this stream. Two calls return generators that
        produce identical sequences."""
        digest = hashlib.sha256(
            f"{self.seed}|{self.label}".encode("utf-8")).digest()
        state = int.from_bytes(digest[:16], "little")
        return np.random.Generator(np.random.PCG64(state))
