"""Evaluation metrics, comparison rankers and multi-seed experiment sweeps.

Metrics are taken at a decision epoch ``t`` (by default the last one, which
is ``t = W`` for the standard run length):

gamma
    discrepancy of the model's first-ranked peer over the minimum discrepancy
    among all peers.
delta
    overlap of the model's top-k with the k smallest discrepancies at ``t``.
omega / epsilon_count
    how many top-k members have a falling (omega) or rising (epsilon_count)
    Mann-Kendall trend in their window; zero trend counts in neither.

Both the trend-aware model ("sdmm") and the moving-average ranker ("ma") are
scored with the same functions.
"""

from __future__ import annotations

import concurrent.futures as cf
import math
import os
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .similarity import mann_kendall
from .sim import EpochLog, run_simulation
from .traces import Trace, synth_trace

MODELS = ("sdmm", "ma")
CSV_HEADER = "config_id,W,eta,model,gamma_mean,gamma_se,delta_mean,delta_se,omega,epsilon_count,inf_gamma_count"


class ExperimentError(RuntimeError):
    pass


def _by_value(scores: dict[int, float]) -> list[int]:
    return [p for p, _ in sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))]


def quanta_at(log: EpochLog, t: int, owner: int) -> dict[int, float]:
    row = log.quanta[t - 1, owner - 1]
    return {j + 1: float(row[j]) for j in range(log.N) if j + 1 != owner and not math.isnan(row[j])}


def baseline_rank(log: EpochLog, t: int, owner: int) -> list[int]:
    """Greedy minimum-at-t ranking: smallest current quantum first, ties by id."""
    return _by_value(quanta_at(log, t, owner))


def ma_scores(windows: dict[int, np.ndarray], ma_window: int = 4) -> dict[int, float]:
    """Mean of each peer's last ``ma_window`` quanta; shorter windows are left out."""
    scores = {}
    for peer, w in windows.items():
        w = np.asarray(getattr(w, "values", w), dtype=float)
        if len(w) >= ma_window:
            scores[peer] = float(w[-ma_window:].mean())
    return scores


def ma_rank(windows: dict[int, np.ndarray], ma_window: int = 4) -> list[int]:
    """Moving-average ranker: lowest recent mean first, ties by id."""
    return _by_value(ma_scores(windows, ma_window))


def model_rank(log: EpochLog, t: int, owner: int, model: str = "sdmm") -> list[int]:
    if model == "sdmm":
        return log.map_at(t, owner).peers
    if model == "ma":
        return ma_rank(log.windows(t, owner), log.config.ma_window)
    raise ValueError(f"unknown model {model!r}")


def _t(log: EpochLog, t: int | None) -> int:
    return log.epochs if t is None else t


def gamma_metric(log: EpochLog, t: int | None = None, owner: int = 1, model: str = "sdmm") -> float:
    """Ratio of the first-ranked peer's quantum to the minimum quantum at ``t``.

    Returns 1.0 for 0/0 and ``inf`` when only the minimum is zero.
    """
    t = _t(log, t)
    ranked = model_rank(log, t, owner, model)
    if not ranked:
        raise ExperimentError(f"owner {owner} has no warm peers at epoch {t}")
    d = quanta_at(log, t, owner)
    chosen, best = d[ranked[0]], min(d.values())
    if best == 0:
        return 1.0 if chosen == 0 else math.inf
    return chosen / best


def delta_metric(log: EpochLog, t: int | None = None, k: int | None = None, owner: int = 1, model: str = "sdmm") -> float:
    t = _t(log, t)
    k = log.config.k if k is None else k
    ranked = model_rank(log, t, owner, model)
    if not ranked:
        raise ExperimentError(f"owner {owner} has no warm peers at epoch {t}")
    if k > len(ranked):
        raise ExperimentError(f"k={k} exceeds the {len(ranked)} warm peers of owner {owner}")
    base = baseline_rank(log, t, owner)[:k]
    return len(set(ranked[:k]) & set(base)) / k


def trend_selection_metrics(log: EpochLog, t: int | None = None, k: int | None = None, owner: int = 1, model: str = "sdmm") -> tuple[int, int]:
    """(omega, epsilon_count) over the owner's top-k under ``model``."""
    t = _t(log, t)
    k = log.config.k if k is None else k
    ranked = model_rank(log, t, owner, model)
    if not ranked:
        raise ExperimentError(f"owner {owner} has no warm peers at epoch {t}")
    cfg = log.config
    omega = eps = 0
    for peer in ranked[:k]:
        Z = mann_kendall(log.window(t, owner, peer), cfg.eta, cfg.mkm_literal).Z
        omega += Z < 0
        eps += Z > 0
    return omega, eps


@dataclass(frozen=True)
class RunMetrics:
    """One run, one model; gamma and delta averaged over the evaluated owners."""

    model: str
    gamma: float
    delta: float
    omega: int
    epsilon_count: int
    inf_gamma_count: int


def run_metrics(log: EpochLog, model: str = "sdmm", t: int | None = None, owners=None) -> RunMetrics:
    owners = range(1, log.N + 1) if owners is None else owners
    gammas, deltas = [], []
    omega = eps = inf = 0
    for o in owners:
        g = gamma_metric(log, t, o, model)
        if math.isinf(g):
            inf += 1
        else:
            gammas.append(g)
        deltas.append(delta_metric(log, t, None, o, model))
        a, b = trend_selection_metrics(log, t, None, o, model)
        omega += a
        eps += b
    gamma = float(np.mean(gammas)) if gammas else math.nan
    return RunMetrics(model, gamma, float(np.mean(deltas)), omega, eps, inf)


@dataclass(frozen=True)
class MetricReport:
    config_id: int
    W: int
    eta: float
    model: str
    gamma_mean: float
    gamma_se: float
    delta_mean: float
    delta_se: float
    omega: int
    epsilon_count: int
    inf_gamma_count: int
    runs: int

    def csv_row(self) -> str:
        vals = (self.config_id, self.W, self.eta, self.model, self.gamma_mean, self.gamma_se,
                self.delta_mean, self.delta_se, self.omega, self.epsilon_count, self.inf_gamma_count)
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in vals)


def _se(xs) -> float:
    xs = np.asarray([x for x in xs if not math.isnan(x)], dtype=float)
    if len(xs) < 2:
        return math.nan
    return float(xs.std(ddof=1) / math.sqrt(len(xs)))


def aggregate(config_id: int, cfg: SimConfig, per_run: list[RunMetrics]) -> MetricReport:
    gam = [r.gamma for r in per_run]
    finite = [g for g in gam if not math.isnan(g)]
    return MetricReport(
        config_id, cfg.W, cfg.eta, per_run[0].model,
        float(np.mean(finite)) if finite else math.nan, _se(gam),
        float(np.mean([r.delta for r in per_run])), _se([r.delta for r in per_run]),
        sum(r.omega for r in per_run), sum(r.epsilon_count for r in per_run),
        sum(r.inf_gamma_count for r in per_run), len(per_run),
    )


def run_trace(cfg: SimConfig, trace: Trace | None) -> Trace:
    """The trace for one run: fresh synthetic data, or a seeded start offset into a replay."""
    if trace is None:
        return synth_trace(cfg.trace, cfg, cfg.seed)
    slack = len(trace) - cfg.n_epochs * cfg.epoch_points
    start = int(np.random.default_rng([cfg.seed, 3]).integers(0, slack + 1)) if slack > 0 else 0
    return trace.offset(start)


def single_run(cfg: SimConfig, run: int, trace: Trace | None = None, owners=None) -> dict[str, RunMetrics]:
    """Run ``run`` of a grid point uses seed ``cfg.seed + run``; maps are built at the final epoch only."""
    run_cfg = cfg.replace(seed=cfg.seed + run, map_interval=0)
    log = run_simulation(run_cfg, run_trace(run_cfg, trace))
    return {m: run_metrics(log, m, owners=owners) for m in MODELS}


def _job(args):
    cid, cfg, run, trace = args
    try:
        return cid, run, single_run(cfg, run, trace)
    except Exception as exc:  # noqa: BLE001 - re-raised with the run id attached
        raise ExperimentError(f"config {cid} run {run} (seed {cfg.seed + run}) failed: {exc}") from exc


def worker_count() -> int:
    raw = os.environ.get("SDMM_THREADS")
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def run_experiment(grid: list[SimConfig], runs: int, trace: Trace | None = None, workers: int | None = None) -> list[MetricReport]:
    """``runs`` seeded simulations per grid point; one report row per (grid point, model)."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    jobs = [(cid, cfg, r, trace) for cid, cfg in enumerate(grid) for r in range(runs)]
    workers = worker_count() if workers is None else workers
    results: dict[tuple[int, int], dict[str, RunMetrics]] = {}
    if workers > 1 and len(jobs) > 1:
        with cf.ProcessPoolExecutor(max_workers=workers) as pool:
            for cid, r, res in pool.map(_job, jobs):
                results[cid, r] = res
    else:
        for job in jobs:
            cid, r, res = _job(job)
            results[cid, r] = res
    reports = []
    for cid, cfg in enumerate(grid):
        for m in MODELS:
            reports.append(aggregate(cid, cfg, [results[cid, r][m] for r in range(runs)]))
    return reports


def write_reports(reports: list[MetricReport], fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for rep in reports:
        fh.write(rep.csv_row() + "\n")
