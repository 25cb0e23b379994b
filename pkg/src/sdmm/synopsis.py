"""Per-node micro-clustering and synopsis extraction.

Each node keeps a flat list of leaf cluster features ``<L, LS, SS>`` that are
updated as data arrive. At the end of a synopsis epoch the dominant leaves
(cardinality at least ``median - 3 * MAD``) are collapsed into one vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import ingest

VAR_TOLERANCE = 1e-9
# slack on the absorb test so exact duplicates never spawn a new leaf
_RADIUS_SLACK = 1e-9


class DimensionError(ValueError):
    """Raised when a vector does not match the tree's dimensionality."""


@dataclass
class ClusterFeature:
    """Additive summary of a micro-cluster."""

    L: int
    LS: np.ndarray
    SS: np.ndarray

    @classmethod
    def of(cls, x) -> "ClusterFeature":
        x = np.asarray(x, dtype=float)
        return cls(1, x.copy(), x * x)

    def merge(self, other: "ClusterFeature") -> "ClusterFeature":
        return ClusterFeature(self.L + other.L, self.LS + other.LS, self.SS + other.SS)

    @property
    def centroid(self) -> np.ndarray:
        return self.LS / self.L

    @property
    def variance(self) -> np.ndarray:
        var = self.SS / self.L - self.centroid**2
        if np.any(var < -VAR_TOLERANCE * np.maximum(1.0, self.SS / self.L)):
            raise ArithmeticError("negative variance beyond tolerance")
        return np.maximum(var, 0.0)

    @property
    def radius(self) -> float:
        return float(math.sqrt(self.variance.sum()))


@dataclass(frozen=True)
class Synopsis:
    s: np.ndarray
    epoch: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.s)):
            raise ValueError("synopsis entries must be finite")

    @property
    def dim(self) -> int:
        return len(self.s)


def _check_vector(x, dim: int | None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite entry in data vector {x.tolist()}")
    return x


class CFTree:
    """Flat leaf list with nearest-leaf absorption.

    Leaves are stored column-wise (``L``, ``LS``, ``SS``) next to a running
    centroid and squared radius, so the nearest-centroid search is one
    vectorised pass and the absorb test is scalar arithmetic.
    """

    def __init__(self, dim: int, absorb_threshold: float, branching_factor: int = 50):
        if not absorb_threshold >= 0:
            raise ValueError("absorb_threshold must be >= 0")
        self.dim = dim
        self.absorb_threshold = float(absorb_threshold)
        self.branching_factor = branching_factor
        self._limit = (self.absorb_threshold + _RADIUS_SLACK * (1.0 + self.absorb_threshold)) ** 2
        self._n = 0
        self._L = np.zeros(16, dtype=np.int64)
        self._LS = np.zeros((16, dim))
        self._SS = np.zeros((16, dim))
        self._centroids = np.zeros((16, dim))
        self._R2 = np.zeros(16)
        self.total_points = 0

    def __len__(self) -> int:
        return self._n

    @property
    def entries(self) -> list[ClusterFeature]:
        return [
            ClusterFeature(int(self._L[i]), self._LS[i].copy(), self._SS[i].copy())
            for i in range(self._n)
        ]

    @property
    def sizes(self) -> np.ndarray:
        return self._L[: self._n].copy()

    @property
    def radii(self) -> np.ndarray:
        return np.sqrt(self._R2[: self._n])

    def _reserve(self, extra: int) -> None:
        need = self._n + extra
        if need <= len(self._L):
            return
        cap = max(need, 2 * len(self._L))
        for name in ("_L", "_LS", "_SS", "_centroids", "_R2"):
            old = getattr(self, name)
            new = np.zeros((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self._n] = old[: self._n]
            setattr(self, name, new)

    def insert(self, x) -> "CFTree":
        return self._ingest(_check_vector(x, self.dim)[None, :])

    def extend(self, xs) -> "CFTree":
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise DimensionError(f"expected rows of dimension {self.dim}, got shape {xs.shape}")
        if not np.all(np.isfinite(xs)):
            raise ValueError("non-finite entry in data batch")
        return self._ingest(xs)

    def _ingest(self, xs: np.ndarray) -> "CFTree":
        if len(xs) == 0:
            return self
        self._reserve(len(xs))
        xs = np.ascontiguousarray(xs, dtype=float)
        self._n = int(ingest(xs, self._L, self._LS, self._SS, self._centroids, self._R2, self._n, self._limit))
        self.total_points += len(xs)
        return self

    def totals(self) -> ClusterFeature:
        n = self._n
        return ClusterFeature(int(self._L[:n].sum()), self._LS[:n].sum(axis=0), self._SS[:n].sum(axis=0))


def cf_insert(tree: CFTree, x) -> CFTree:
    return tree.insert(x)


def absorb_threshold_from(batch, factor: float = 0.1) -> float:
    """Default tree granularity: ``factor`` times the spread of a warm-up batch.

    The spread is the root of the summed per-dimension sample variances, i.e.
    the batch radius, so that it is directly comparable to a leaf radius.
    """
    batch = np.asarray(batch, dtype=float)
    if batch.ndim != 2 or len(batch) == 0:
        raise ValueError("warm-up batch must be a non-empty 2-d array")
    if len(batch) < 2:
        return 0.0
    std = batch.std(axis=0, ddof=1)
    return float(factor * math.sqrt((std**2).sum()))


def alpha_threshold(cluster_sizes) -> int:
    """Minimum cardinality of a dominant cluster, ``max(1, I - 3 MAD)``."""
    sizes = np.asarray(cluster_sizes, dtype=float)
    if sizes.size == 0:
        raise ValueError("no clusters")
    return max(1, math.ceil(raw_alpha(sizes)))


def raw_alpha(cluster_sizes) -> float:
    sizes = np.asarray(cluster_sizes, dtype=float)
    if sizes.size == 0:
        raise ValueError("no clusters")
    med = _median(sizes)
    return med - 3.0 * _median(np.abs(sizes - med))


def _median(a: np.ndarray) -> float:
    a = np.sort(a)
    h = len(a) // 2
    return float(a[h]) if len(a) % 2 else 0.5 * float(a[h - 1] + a[h])


def extract_synopsis(tree: CFTree, t: int) -> Synopsis:
    """L-weighted mean of the dominant leaf centroids.

    Falls back to the single largest leaf if the threshold exceeds every
    leaf size (cannot happen with a non-empty tree, kept as a guard).
    """
    n = len(tree)
    if n == 0:
        raise ValueError("cannot extract a synopsis from an empty tree")
    L = tree._L[:n]
    alpha = alpha_threshold(L)
    keep = L >= alpha
    if not keep.any():
        keep = L == L.max()
    # weighted mean taken relative to the first centroid, so identical
    # centroids reproduce that centroid bit for bit
    c = tree._centroids[:n][keep]
    w = L[keep].astype(float)
    s = c[0] + (w[:, None] * (c - c[0])).sum(axis=0) / w.sum()
    return Synopsis(s, t)


@dataclass
class ReservoirSample:
    """Uniform sample of a stream (Algorithm R) for the mean+std synopsis."""

    capacity: int
    rng: np.random.Generator
    items: list = field(default_factory=list)
    seen: int = 0

    def add(self, x) -> None:
        self.seen += 1
        if len(self.items) < self.capacity:
            self.items.append(np.asarray(x, dtype=float))
            return
        j = int(self.rng.integers(0, self.seen))
        if j < self.capacity:
            self.items[j] = np.asarray(x, dtype=float)

    def synopsis(self, t: int) -> Synopsis:
        if not self.items:
            raise ValueError("cannot extract a synopsis from an empty sample")
        arr = np.vstack(self.items)
        std = arr.std(axis=0, ddof=1) if len(arr) > 1 else np.zeros(arr.shape[1])
        return Synopsis(np.concatenate([arr.mean(axis=0), std]), t)
