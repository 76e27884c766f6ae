"""Chronological and seeded shuffled train/dev/test splits.

Shuffles use SplitMix64 (Steele, Lea & Flood; constants below) feeding a
Fisher-Yates shuffle with rejection-sampled bounded integers, so a seed
gives the same permutation on every platform and Python version.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
PART_NAMES = ("train", "dev", "test")


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` without modulo bias."""
        if not 0 < bound <= 1 << 64:
            raise ValueError(f"bound {bound} out of range")
        limit = (1 << 64) - (1 << 64) % bound
        while True:
            r = self.next()
            if r < limit:
                return r % bound


def permutation(n: int, seed: int) -> list[int]:
    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order


class SplitSizeError(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    n_train: int
    n_dev: int
    n_test: int
    seed: Optional[int] = None

    @property
    def total(self) -> int:
        return self.n_train + self.n_dev + self.n_test

    @classmethod
    def parse(cls, sizes: str, seed: Optional[int] = None) -> "SplitSpec":
        parts = sizes.split(",")
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated sizes, got {sizes!r}")
        try:
            a, b, c = (int(p) for p in parts)
        except ValueError:
            raise ValueError(f"sizes must be integers: {sizes!r}") from None
        if min(a, b, c) < 0:
            raise ValueError("sizes must be non-negative")
        return cls(a, b, c, seed)


def split(corpus: Sequence[T], spec: SplitSpec) -> tuple[list[T], list[T], list[T]]:
    if spec.total != len(corpus):
        raise SplitSizeError(
            f"sizes {spec.n_train}+{spec.n_dev}+{spec.n_test}={spec.total} "
            f"do not match corpus size {len(corpus)}"
        )
    if spec.seed is None:
        items = list(corpus)
    else:
        items = [corpus[i] for i in permutation(len(corpus), spec.seed)]
    a = spec.n_train
    b = a + spec.n_dev
    return items[:a], items[a:b], items[b:]


def write_manifests(parts, out_dir, key=lambda s: s.sent_id) -> list[str]:
    """One ``<part>.ids`` file per part, one sentence id per line."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, part in zip(PART_NAMES, parts):
        path = os.path.join(out_dir, f"{name}.ids")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.writelines(f"{key(s)}\n" for s in part)
        paths.append(path)
    return paths


def read_manifest(path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip()]
