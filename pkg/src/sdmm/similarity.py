"""Trend-aware similarity of a peer from its window of discrepancy quanta.

Pipeline per (owner, peer) window::

    quanta --1-d clustering--> [c, r, m] --weights m/r--> beta_bar
    beta_bar --sigmoid--> beta
    suffix of quanta --Mann-Kendall--> Z --exp(-zeta_hat Z)--> epsilon
    beta_hat = epsilon * beta

Peers are ranked by ``beta_hat`` (descending). Ties go to the larger
log-score, which still orders peers whose ``beta_hat`` underflowed to 0,
then to the lower peer id.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import mk_score, optimal_partition
from .discrepancy import ceil_frac, warm_length

log = logging.getLogger(__name__)

R_FLOOR = 1e-6
EXP_CLAMP = 700.0
MAX_ITER = 100


@dataclass(frozen=True)
class QuantaCluster:
    c: float
    r: float
    m: int


@dataclass(frozen=True)
class TrendResult:
    S: int
    Z: float
    q: int
    var: float


@dataclass(frozen=True)
class PeerSimilarity:
    peer: int
    beta_bar: float
    beta: float
    Z: float
    epsilon: float
    beta_hat: float
    # log(beta_hat) computed without underflow; breaks ties between zeros
    score: float = field(repr=False)


@dataclass
class SimilarityMap:
    owner: int
    ranked: list[PeerSimilarity]
    t: int

    @property
    def peers(self) -> list[int]:
        return [p.peer for p in self.ranked]

    def top(self, k: int) -> list[int]:
        return self.peers[:k]

    def get(self, peer: int) -> PeerSimilarity | None:
        for p in self.ranked:
            if p.peer == peer:
                return p
        return None


@dataclass(frozen=True)
class ModelParams:
    """Knobs of the per-pair similarity pipeline (defaults from the evaluation grid)."""

    W: int = 100
    eta: float = 1.0
    xi: float = 2.0
    zeta: float = 35.0
    zeta_hat: float = 35.0
    C: int = 3
    mkm_literal: bool = True
    cluster_method: str = "optimal"


def _values(window) -> np.ndarray:
    return np.asarray(getattr(window, "values", window), dtype=float)


CLUSTER_METHODS = ("optimal", "lloyd")


def cluster_quanta(window, C: int, method: str = "optimal") -> list[QuantaCluster]:
    """Group the window's values (time order ignored) into at most ``C`` clusters.

    Returns non-empty clusters sorted by centroid. See :func:`cluster_assignments`.
    """
    return cluster_assignments(window, C, method)[0]


def cluster_assignments(window, C: int, method: str = "optimal") -> tuple[list[QuantaCluster], np.ndarray]:
    """Clusters plus, for every quantum, the index of its cluster in the returned list.

    ``optimal`` minimises the within-cluster sum of squares exactly (equal
    values are never split). ``lloyd`` is k-means from seeds at the
    (i + 1/2)/C quantiles with at most 100 iterations; an empty cluster is
    re-seeded at the point farthest from its current centroid.
    """
    x = _values(window)
    if x.size == 0:
        raise ValueError("cannot cluster an empty window")
    if C < 1:
        raise ValueError("C must be >= 1")
    if method not in CLUSTER_METHODS:
        raise ValueError(f"unknown clustering method {method!r}")
    C = min(C, x.size)
    distinct, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    if distinct.size <= C:
        return _summarise(x, inverse, distinct.size)
    if method == "optimal":
        starts = optimal_partition(distinct, counts.astype(float), C)
        seg = np.searchsorted(starts, np.arange(distinct.size), side="right") - 1
        return _summarise(x, seg[inverse], C)
    return _summarise(x, _lloyd(x, C), C)


def _lloyd(x: np.ndarray, C: int) -> np.ndarray:
    cent = np.quantile(x, (np.arange(C) + 0.5) / C)
    labels = None
    for _ in range(MAX_ITER):
        new = np.argmin(np.abs(x[:, None] - cent[None, :]), axis=1)
        counts = np.bincount(new, minlength=C)
        while (counts == 0).any():
            empty = int(np.flatnonzero(counts == 0)[0])
            far = int(np.argmax(np.abs(x - cent[new])))
            cent[empty] = x[far]
            new = np.argmin(np.abs(x[:, None] - cent[None, :]), axis=1)
            counts = np.bincount(new, minlength=C)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        cent = np.bincount(labels, weights=x, minlength=C) / counts
    return labels


def _summarise(x: np.ndarray, labels: np.ndarray, C: int) -> tuple[list[QuantaCluster], np.ndarray]:
    out = []
    for k in range(C):
        members = x[labels == k]
        if members.size == 0:
            continue
        c = float(members.mean())
        c = min(max(c, float(members.min())), float(members.max()))
        r = float(np.abs(members - c).max())
        out.append((k, QuantaCluster(c, r, int(members.size))))
    out.sort(key=lambda kc: kc[1].c)
    relabel = np.full(C, -1, dtype=np.int64)
    for pos, (k, _) in enumerate(out):
        relabel[k] = pos
    return [cl for _, cl in out], relabel[labels]


def wcss(window, clusters: list[QuantaCluster]) -> float:
    """Within-cluster sum of squares, each value assigned to its nearest centroid."""
    x = _values(window)
    cent = np.array([cl.c for cl in clusters])
    return float((np.min(np.abs(x[:, None] - cent[None, :]), axis=1) ** 2).sum())


def aggregate_discrepancy(clusters: list[QuantaCluster], r_floor: float = R_FLOOR) -> float:
    """Cardinality-over-radius weighted mean of cluster centroids."""
    if not clusters:
        raise ValueError("need at least one cluster")
    c = np.array([cl.c for cl in clusters], dtype=float)
    w = np.array([cl.m / max(cl.r, r_floor) for cl in clusters], dtype=float)
    w = w / w.sum()
    return float(np.clip((c * w).sum(), c.min(), c.max()))


def cluster_weights(clusters: list[QuantaCluster], r_floor: float = R_FLOOR) -> np.ndarray:
    w = np.array([cl.m / max(cl.r, r_floor) for cl in clusters], dtype=float)
    return w / w.sum()


def similarity(beta_bar: float, xi: float = 2.0, zeta: float = 35.0) -> float:
    """Sigmoid map of aggregated discrepancy into [0, 1]; underflows to 0 for huge beta_bar."""
    e = xi * beta_bar - zeta
    if e > EXP_CLAMP:
        # 1/(1+e^x) == e^-x to double precision here, and exp(x) would overflow
        return math.exp(-e)
    return 1.0 / (1.0 + math.exp(e))


def log_similarity(beta_bar: float, xi: float = 2.0, zeta: float = 35.0) -> float:
    """log of :func:`similarity`, finite for any finite beta_bar."""
    return -float(np.logaddexp(0.0, xi * beta_bar - zeta))


def mann_kendall(window, eta: float = 1.0, literal: bool = False) -> TrendResult:
    """Mann-Kendall S and Z over the most recent ``ceil(eta * n)`` quanta.

    ``literal=True`` divides by var(S) instead of its square root.
    """
    if not 0 < eta <= 1:
        raise ValueError("eta must be in (0, 1]")
    x = _values(window)
    q = ceil_frac(eta, x.size)
    if q < 3:
        raise ValueError("insufficient trend data")
    d = x[-q:]
    S = int(mk_score(np.ascontiguousarray(d)))
    _, ties = np.unique(d, return_counts=True)
    ties = ties[ties > 1].astype(float)
    var = (q * (q - 1) * (2 * q + 5) - (ties * (ties - 1) * (2 * ties + 5)).sum()) / 18.0
    if S == 0:
        return TrendResult(0, 0.0, q, var)
    assert var > 0, "S != 0 requires at least two distinct values"
    denom = var if literal else math.sqrt(var)
    Z = (S - 1) / denom if S > 0 else (S + 1) / denom
    return TrendResult(S, Z, q, var)


def trend_factor(Z: float, zeta_hat: float = 35.0) -> float:
    """``exp(-zeta_hat * Z)``: above 1 for a falling trend, below 1 for a rising one."""
    e = min(max(-zeta_hat * Z, -EXP_CLAMP), EXP_CLAMP)
    return math.exp(e)


def trend_aware_similarity(beta: float, epsilon: float) -> float:
    return epsilon * beta


def peer_similarity(peer: int, window, params: ModelParams) -> PeerSimilarity:
    clusters = cluster_quanta(window, params.C, params.cluster_method)
    beta_bar = aggregate_discrepancy(clusters)
    beta = similarity(beta_bar, params.xi, params.zeta)
    trend = mann_kendall(window, params.eta, params.mkm_literal)
    eps = trend_factor(trend.Z, params.zeta_hat)
    log_eps = min(max(-params.zeta_hat * trend.Z, -EXP_CLAMP), EXP_CLAMP)
    score = log_similarity(beta_bar, params.xi, params.zeta) + log_eps
    return PeerSimilarity(peer, beta_bar, beta, trend.Z, eps, trend_aware_similarity(beta, eps), score)


def build_similarity_map(owner: int, windows, params: ModelParams, t: int = 0, cache: dict | None = None) -> SimilarityMap:
    """Rank every warm peer by trend-aware similarity.

    ``windows`` maps peer id to a window (or a plain sequence of quanta).
    Cold peers are left out; a peer whose pipeline fails is logged and left out.
    ``cache`` may be shared between owners to reuse results for identical windows.
    """
    need = warm_length(params.W, params.eta)
    ranked = []
    for peer, win in windows.items():
        x = _values(win)
        if x.size < need:
            continue
        key = x.tobytes()
        try:
            if cache is not None and key in cache:
                base = cache[key]
            else:
                base = peer_similarity(peer, x, params)
                if cache is not None:
                    cache[key] = base
        except (ValueError, AssertionError) as exc:
            log.warning("owner %s: peer %s dropped from map: %s", owner, peer, exc)
            continue
        ranked.append(base if base.peer == peer else _relabel(base, peer))
    ranked.sort(key=lambda p: (-p.beta_hat, -p.score, p.peer))
    return SimilarityMap(owner, ranked, t)


def _relabel(p: PeerSimilarity, peer: int) -> PeerSimilarity:
    return PeerSimilarity(peer, p.beta_bar, p.beta, p.Z, p.epsilon, p.beta_hat, p.score)
