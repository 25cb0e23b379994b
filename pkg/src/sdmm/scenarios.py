"""Controlled node layouts used by the acceptance checks and experiment scripts.

All layouts put the observing node (the owner) at id 1 with mean 0.
"""

from __future__ import annotations

import numpy as np

from .config import SimConfig
from .traces import Trace, synth_trace


def converge_diverge(cfg: SimConfig, seed: int, level: float = 1.0, swing: float = 0.5,
                     others: float | None = None) -> tuple[Trace, int, int]:
    """One peer drifting towards the owner and one drifting away.

    Both peers' means cross ``level * sigma`` (per dimension) half-way through
    the run, so their means averaged over the window are identical; one moves
    from ``level + swing`` to ``level - swing`` sigmas, the other the reverse.
    The two roles land on random peer ids. Returns ``(trace, converging, diverging)``.
    """
    rng = np.random.default_rng([seed, 7])
    s = cfg.synth_sigma
    spread = cfg.synth_spread if others is None else others
    start = rng.uniform(0.0, spread, (cfg.N, cfg.M))
    start[0] = 0.0
    end = start.copy()
    conv, div = (rng.permutation(cfg.N - 1)[:2] + 2).tolist()
    start[conv - 1], end[conv - 1] = (level + swing) * s, (level - swing) * s
    start[div - 1], end[div - 1] = (level - swing) * s, (level + swing) * s
    return synth_trace("drift", cfg, seed, means=start, end_means=end), conv, div


def nearest_peer(cfg: SimConfig, seed: int, near: float = 1.0, gap: float = 5.0,
                 extra: float = 10.0) -> tuple[Trace, int]:
    """Stationary layout with one clearly nearest peer.

    The nearest peer sits ``near`` sigmas (Euclidean) from the owner; every
    other peer is at least ``near + gap`` sigmas away, uniformly up to
    ``near + gap + extra``. Returns ``(trace, nearest_id)``.
    """
    rng = np.random.default_rng([seed, 8])
    s = cfg.synth_sigma
    means = np.zeros((cfg.N, cfg.M))
    nearest = int(rng.integers(2, cfg.N + 1))
    means[nearest - 1] = _direction(rng, cfg.M) * near * s
    for i in range(2, cfg.N + 1):
        if i != nearest:
            means[i - 1] = _direction(rng, cfg.M) * rng.uniform(near + gap, near + gap + extra) * s
    return synth_trace("stationary", cfg, seed, means=means), nearest


def _direction(rng: np.random.Generator, M: int) -> np.ndarray:
    v = rng.standard_normal(M)
    return v / np.linalg.norm(v)


def d2_surrogate(rows: int, seed: int = 0, nodes: int = 4) -> Trace:
    """Stand-in for the two-sensor (humidity, temperature) USV readings, one row per 10 s.

    Each node gets its own base level, a slow daily cycle and AR(1) noise.
    Only meant to exercise the replay path; it makes no claim to match the
    real data beyond its shape.
    """
    rng = np.random.default_rng([seed, 9])
    ts = np.arange(rows) * 10.0
    day = 2 * np.pi * ts / 86400.0
    data = []
    for _ in range(nodes):
        base = np.array([rng.uniform(40, 60), rng.uniform(20, 28)])
        amp = np.array([rng.uniform(3, 8), rng.uniform(1, 3)])
        phase = rng.uniform(0, 2 * np.pi)
        noise = np.zeros((rows, 2))
        e = rng.normal(0, [1.5, 0.4], (rows, 2))
        for t in range(1, rows):
            noise[t] = 0.9 * noise[t - 1] + e[t]
        data.append(base + amp * np.sin(day + phase)[:, None] * np.array([-1, 1]) + noise)
    return Trace(data, [ts.copy() for _ in range(nodes)], [f"usv{i + 1}" for i in range(nodes)])
