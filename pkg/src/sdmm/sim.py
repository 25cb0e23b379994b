"""Synchronous epoch simulation of N edge nodes exchanging synopses.

Every epoch each node ingests ``epoch_points`` vectors into its own tree,
publishes a synopsis, and every other node turns it into a discrepancy
quantum for that pair. Exchange is in-process and lossless unless
``drop_prob > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, SimConfig
from .discrepancy import DiscrepancyWindow, discrepancy
from .similarity import SimilarityMap, build_similarity_map
from .synopsis import CFTree, ReservoirSample, Synopsis, absorb_threshold_from, extract_synopsis
from .traces import Trace, TraceError


@dataclass
class NodeState:
    id: int
    tree: CFTree
    windows: dict[int, DiscrepancyWindow]
    sample: ReservoirSample | None = None
    map: SimilarityMap | None = None
    synopsis: Synopsis | None = None
    cursor: int = 0


@dataclass
class EpochLog:
    """Everything a run produced, indexed by epoch ``t = 1..T``.

    ``quanta[t-1, i-1, j-1]`` is the quantum owner ``i`` pushed for peer ``j``
    at epoch ``t`` (NaN on the diagonal and for dropped messages).
    """

    config: SimConfig
    quanta: np.ndarray
    synopses: np.ndarray
    absorbed: np.ndarray
    leaves: np.ndarray
    maps: dict[int, list[SimilarityMap]] = field(default_factory=dict)

    @property
    def epochs(self) -> int:
        return self.quanta.shape[0]

    @property
    def N(self) -> int:
        return self.quanta.shape[1]

    def __len__(self) -> int:
        return self.epochs

    def window(self, t: int, owner: int, peer: int) -> np.ndarray:
        """The owner's window for ``peer`` right after epoch ``t``."""
        col = self.quanta[:t, owner - 1, peer - 1]
        col = col[~np.isnan(col)]
        return col[-self.config.W :]

    def windows(self, t: int, owner: int) -> dict[int, np.ndarray]:
        return {j: self.window(t, owner, j) for j in range(1, self.N + 1) if j != owner}

    def map_at(self, t: int, owner: int) -> SimilarityMap:
        try:
            return self.maps[t][owner - 1]
        except KeyError:
            raise KeyError(f"no similarity maps recorded at epoch {t}") from None


def init_states(cfg: SimConfig, trace: Trace) -> list[NodeState]:
    states = []
    for i in range(1, cfg.N + 1):
        warm = trace.data[i - 1][: cfg.warmup_points]
        thr = absorb_threshold_from(warm, cfg.absorb_factor) if len(warm) else 0.0
        windows = {j: DiscrepancyWindow(cfg.W, (i, j)) for j in range(1, cfg.N + 1) if j != i}
        sample = None
        if cfg.synopsis == "sample_stats":
            sample = ReservoirSample(cfg.sample_size, np.random.default_rng([cfg.seed, 2, i]))
        states.append(NodeState(i, CFTree(cfg.M, thr, cfg.branching_factor), windows, sample))
    return states


def _check_trace(cfg: SimConfig, trace: Trace) -> None:
    if trace is None or trace.N == 0 or len(trace) == 0:
        raise TraceError("empty trace")
    if trace.M != cfg.M:
        raise ConfigError(f"trace dimension {trace.M} does not match M={cfg.M}")
    if trace.N != cfg.N:
        raise ConfigError(f"trace has {trace.N} nodes, config N={cfg.N}")
    need = cfg.n_epochs * cfg.epoch_points
    if len(trace) < need:
        raise TraceError(f"trace holds {len(trace)} vectors per node, {cfg.n_epochs} epochs need {need}")


def run_epoch(
    states: list[NodeState],
    trace: Trace,
    t: int,
    cfg: SimConfig,
    rng=None,
    build_maps: bool = True,
    quanta_out: np.ndarray | None = None,
) -> list[NodeState]:
    """Advance every node by one epoch (ingest, publish, exchange, rank).

    If given, ``quanta_out[i-1, j-1]`` receives the quantum owner ``i`` pushed for ``j``.
    """
    E = cfg.epoch_points
    for st in states:
        batch = trace.data[st.id - 1][st.cursor : st.cursor + E]
        if batch.shape[1] != cfg.M:
            raise ConfigError(f"trace dimension {batch.shape[1]} does not match M={cfg.M}")
        st.tree.extend(batch)
        if st.sample is not None:
            for x in batch:
                st.sample.add(x)
        st.cursor += len(batch)
        if len(st.tree) == 0:
            raise TraceError(f"node {st.id} has no data by epoch {t}")
        st.synopsis = st.sample.synopsis(t) if st.sample is not None else extract_synopsis(st.tree, t)

    drop = cfg.drop_prob > 0 and rng is not None
    for owner in states:
        for peer in states:
            if peer.id == owner.id or (drop and rng.random() < cfg.drop_prob):
                continue
            d = discrepancy(owner.synopsis, peer.synopsis, cfg.norm)
            owner.windows[peer.id].push(d)
            if quanta_out is not None:
                quanta_out[owner.id - 1, peer.id - 1] = d

    if build_maps:
        params = cfg.model_params()
        cache: dict = {}
        for st in states:
            st.map = build_similarity_map(st.id, st.windows, params, t, cache)
    return states


def is_map_epoch(t: int, T: int, interval: int) -> bool:
    return t == T or (interval > 0 and t % interval == 0)


def run_simulation(cfg: SimConfig, trace: Trace) -> EpochLog:
    """Run ``cfg.n_epochs`` epochs; deterministic for a given (cfg, trace)."""
    _check_trace(cfg, trace)
    T, N = cfg.n_epochs, cfg.N
    log = EpochLog(
        cfg,
        quanta=np.full((T, N, N), np.nan),
        synopses=np.zeros((T, N, cfg.synopsis_dim)),
        absorbed=np.zeros((T, N), dtype=np.int64),
        leaves=np.zeros((T, N), dtype=np.int64),
    )
    states = init_states(cfg, trace)
    rng = np.random.default_rng([cfg.seed, 1])
    for t in range(1, T + 1):
        maps_now = is_map_epoch(t, T, cfg.map_interval)
        run_epoch(states, trace, t, cfg, rng, build_maps=maps_now, quanta_out=log.quanta[t - 1])
        for st in states:
            log.synopses[t - 1, st.id - 1] = st.synopsis.s
            log.absorbed[t - 1, st.id - 1] = st.tree.total_points
            log.leaves[t - 1, st.id - 1] = len(st.tree)
        if maps_now:
            log.maps[t] = [st.map for st in states]
    return log
