"""Seeded random-stream tree.

Every child stream is derived from ``(root seed, label, index)`` alone, so
adding replicates or components never perturbs an existing stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

MAX_SEED = 2**64 - 1


def label_key(label: str) -> int:
    # hash() is salted per process; a digest is stable across runs
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:4], "little")


@dataclass(frozen=True)
class RandomStreamTree:
    root_seed: int

    def __post_init__(self):
        if not 0 <= self.root_seed <= MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.root_seed}")

    def seed_sequence(self, label: str, index: int = 0) -> np.random.SeedSequence:
        if index < 0:
            raise ValueError("stream index must be >= 0")
        return np.random.SeedSequence(self.root_seed, spawn_key=(label_key(label), index))

    def stream(self, label: str, index: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(label, index)))


def stream(seed: int, label: str = "default", index: int = 0) -> np.random.Generator:
    return RandomStreamTree(seed).stream(label, index)
