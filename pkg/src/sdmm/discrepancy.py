"""Discrepancy quanta between synopses and their per-pair sliding windows."""

from __future__ import annotations

import math
from collections import deque

import numpy as np

NORMS = ("L1", "L2")


def discrepancy(s_i, s_j, norm: str = "L1") -> float:
    a = np.asarray(getattr(s_i, "s", s_i), dtype=float)
    b = np.asarray(getattr(s_j, "s", s_j), dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"synopsis dimension mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a - b)
    if norm == "L1":
        return float(diff.sum())
    if norm == "L2":
        return float(math.sqrt((diff * diff).sum()))
    raise ValueError(f"unknown norm {norm!r}, expected one of {NORMS}")


class DiscrepancyWindow:
    """The last ``W`` quanta seen for one (owner, peer) pair, oldest first."""

    def __init__(self, W: int, pair: tuple[int, int] = (0, 0), quanta=()):
        if W < 1:
            raise ValueError("window capacity must be >= 1")
        self.W = W
        self.pair = pair
        self._q: deque[float] = deque(maxlen=W)
        for d in quanta:
            self.push(d)

    def push(self, d: float) -> "DiscrepancyWindow":
        d = float(d)
        if not math.isfinite(d) or d < 0:
            raise ValueError(f"quantum must be finite and >= 0, got {d}")
        self._q.append(d)
        return self

    def __len__(self) -> int:
        return len(self._q)

    def __iter__(self):
        return iter(self._q)

    def __repr__(self) -> str:
        return f"DiscrepancyWindow(W={self.W}, pair={self.pair}, quanta={list(self._q)})"

    @property
    def values(self) -> np.ndarray:
        return np.fromiter(self._q, dtype=float, count=len(self._q))

    @property
    def full(self) -> bool:
        return len(self._q) == self.W

    def is_warm(self, eta: float) -> bool:
        return len(self._q) >= warm_length(self.W, eta)


def warm_length(W: int, eta: float) -> int:
    """Quanta needed before a pair enters the similarity map."""
    return max(4, ceil_frac(eta, W))


def ceil_frac(eta: float, n: int) -> int:
    # guards against 0.7 * 10 -> 7.000000000000001
    return math.ceil(eta * n - 1e-9)


def push_quantum(window: DiscrepancyWindow, d: float) -> DiscrepancyWindow:
    return window.push(d)
