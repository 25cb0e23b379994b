"""Per-node data traces: synthetic generators and the CSV interchange format.

CSV layout: header ``timestamp,node_id,v1,...,vM``, UTF-8, one row per data
vector, rows sorted by timestamp within each node. Node labels are mapped to
ids ``1..N`` in sorted label order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

KINDS = ("stationary", "drift", "regime-shift")
SAMPLE_PERIOD = 10.0


class TraceError(ValueError):
    """Malformed or inconsistent trace data."""


@dataclass
class Trace:
    data: list[np.ndarray]
    timestamps: list[np.ndarray]
    labels: list[str]

    def __post_init__(self):
        if not self.data:
            raise TraceError("empty trace")
        dims = {d.shape[1] for d in self.data}
        if len(dims) != 1:
            raise TraceError(f"nodes disagree on dimension: {sorted(dims)}")
        for i, (d, ts) in enumerate(zip(self.data, self.timestamps)):
            if len(d) != len(ts):
                raise TraceError(f"node {i + 1}: {len(d)} vectors but {len(ts)} timestamps")
            if not np.all(np.isfinite(d)):
                raise TraceError(f"node {i + 1}: non-finite values")
            if len(ts) > 1 and np.any(np.diff(ts) < 0):
                raise TraceError(f"node {i + 1}: timestamps decrease")

    @property
    def N(self) -> int:
        return len(self.data)

    @property
    def M(self) -> int:
        return self.data[0].shape[1]

    def __len__(self) -> int:
        return min(len(d) for d in self.data)

    def offset(self, start: int) -> "Trace":
        return Trace([d[start:] for d in self.data], [t[start:] for t in self.timestamps], list(self.labels))


def trace_from_means(mean_paths, sigma: float, epoch_points: int, rng: np.random.Generator) -> Trace:
    """Gaussian trace whose mean is held constant within each epoch.

    ``mean_paths`` has shape (N, epochs, M).
    """
    mean_paths = np.asarray(mean_paths, dtype=float)
    N, E, M = mean_paths.shape
    n = E * epoch_points
    ts = np.arange(n) * SAMPLE_PERIOD
    data = []
    for i in range(N):
        mu = np.repeat(mean_paths[i], epoch_points, axis=0)
        data.append(mu + sigma * rng.standard_normal((n, M)))
    return Trace(data, [ts.copy() for _ in range(N)], [str(i + 1) for i in range(N)])


def linear_paths(start, end, epochs: int) -> np.ndarray:
    """Per-epoch means moving linearly from ``start`` to ``end`` (shapes (N, M))."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    frac = (np.arange(epochs) + 0.5) / epochs
    return start[:, None, :] + (end - start)[:, None, :] * frac[None, :, None]


def synth_trace(kind: str, cfg, seed: int | None = None, means=None, end_means=None) -> Trace:
    """Deterministic synthetic trace for ``cfg.N`` nodes over ``cfg.n_epochs`` epochs.

    stationary
        each node is Gaussian around its own mean (``means`` or uniform in
        ``[0, synth_spread]^M``).
    drift
        node means move linearly; even-indexed nodes by ``+synth_slope`` per
        epoch on every dimension, odd-indexed by ``-synth_slope``. Explicit
        ``means``/``end_means`` override both ends.
    regime-shift
        stationary, then odd-indexed nodes jump by ``synth_shift`` at
        ``synth_shift_epoch`` (default: half-way).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown trace kind {kind!r}, expected one of {KINDS}")
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    N, M, E = cfg.N, cfg.M, cfg.n_epochs
    start = np.asarray(means, dtype=float) if means is not None else rng.uniform(0.0, cfg.synth_spread, (N, M))
    if start.shape != (N, M):
        raise ValueError(f"means must have shape {(N, M)}, got {start.shape}")
    if kind == "stationary":
        paths = np.repeat(start[:, None, :], E, axis=1)
    elif kind == "drift":
        if end_means is None:
            signs = np.where(np.arange(N) % 2 == 0, 1.0, -1.0)
            end = start + (signs * cfg.synth_slope * E)[:, None]
        else:
            end = np.asarray(end_means, dtype=float)
        paths = linear_paths(start, end, E)
    else:
        paths = np.repeat(start[:, None, :], E, axis=1)
        at = cfg.synth_shift_epoch or E // 2
        paths[1::2, at:, :] += cfg.synth_shift
    return trace_from_means(paths, cfg.synth_sigma, cfg.epoch_points, rng)


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(float(v))


def write_csv(trace: Trace, fh) -> None:
    fh.write("timestamp,node_id," + ",".join(f"v{m + 1}" for m in range(trace.M)) + "\n")
    for label, d, ts in zip(trace.labels, trace.data, trace.timestamps):
        for t, row in zip(ts, d):
            fh.write(_num(t) + "," + label + "," + ",".join(repr(float(v)) for v in row) + "\n")


def save_csv(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_csv(trace, fh)


def to_csv_text(trace: Trace) -> str:
    buf = io.StringIO()
    write_csv(trace, buf)
    return buf.getvalue()


def read_csv(fh, M: int | None = None) -> Trace:
    """Parse a trace; raises :class:`TraceError` with the offending line number."""
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise TraceError("line 1: empty file") from None
    header = [h.strip() for h in header]
    if len(header) < 3 or header[:2] != ["timestamp", "node_id"]:
        raise TraceError("line 1: header must start with 'timestamp,node_id,v1'")
    width = len(header) - 2
    if M is not None and width != M:
        raise TraceError(f"line 1: trace has {width} value columns, config expects M={M}")
    rows: dict[str, list] = {}
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width + 2:
            raise TraceError(f"line {lineno}: expected {width + 2} fields, got {len(row)}")
        label = row[1].strip()
        if not label:
            raise TraceError(f"line {lineno}: missing node_id")
        try:
            vals = [float(c) for c in (row[0], *row[2:])]
        except ValueError:
            raise TraceError(f"line {lineno}: missing or non-numeric value") from None
        if not all(math.isfinite(v) for v in vals):
            raise TraceError(f"line {lineno}: missing or non-finite value")
        bucket = rows.setdefault(label, [])
        if bucket and vals[0] < bucket[-1][0]:
            raise TraceError(f"line {lineno}: timestamp decreases within node {label}")
        bucket.append(vals)
    if not rows:
        raise TraceError("trace has no data rows")
    labels = sorted(rows, key=_label_key)
    arrs = [np.array(rows[lb], dtype=float) for lb in labels]
    return Trace([a[:, 1:] for a in arrs], [a[:, 0] for a in arrs], labels)


def _label_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def load_csv(path, M: int | None = None) -> Trace:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return read_csv(fh, M)
    except OSError as exc:
        raise TraceError(f"cannot read trace {path}: {exc}") from None
