"""Command-line driver.

    sdmm simulate --config run.cfg [--trace data.csv] [--out DIR]
    sdmm sweep    --config grid.cfg --runs R [--trace data.csv] [--out DIR]
    sdmm synth    --kind drift [--seed 7] [--out trace.csv]
    sdmm inspect  --log DIR --node i --epoch t

``--set key=value`` (repeatable) overrides config file entries.
Exit codes: 0 ok, 1 config or usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import config as cfgmod
from .config import ConfigError
from .evaluation import ExperimentError, run_experiment, worker_count, write_reports
from .sim import EpochLog, run_simulation
from .similarity import build_similarity_map
from .synopsis import DimensionError
from .traces import KINDS, Trace, TraceError, load_csv, synth_trace, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2

CONFIG_ECHO = "config_echo.txt"
SUMMARY = "summary.csv"
QUANTA = "quanta.csv"
MAPS = "maps.csv"
METRICS = "metrics.csv"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; 2 is reserved for data errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _f(v: float) -> str:
    return repr(float(v))


def _open(path):
    return open(path, "w", encoding="utf-8", newline="\n")


def _out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _load_trace(path: str | None) -> Trace | None:
    return None if path is None else load_csv(path)


def _resolve(args, trace: Trace | None) -> dict[str, list]:
    values = cfgmod.load(args.config, args.set)
    if trace is not None:
        values["N"] = [trace.N]
        values["M"] = [trace.M]
    return values


def write_log(log: EpochLog, trace: Trace, out: str) -> None:
    cfg = log.config
    with _open(os.path.join(out, CONFIG_ECHO)) as fh:
        fh.write(cfg.to_text())
    with _open(os.path.join(out, SUMMARY)) as fh:
        dims = ",".join(f"s{m + 1}" for m in range(log.synopses.shape[2]))
        fh.write(f"epoch,node_id,label,absorbed,leaves,{dims}\n")
        for t in range(log.epochs):
            for i in range(log.N):
                s = ",".join(_f(v) for v in log.synopses[t, i])
                fh.write(f"{t + 1},{i + 1},{trace.labels[i]},{log.absorbed[t, i]},{log.leaves[t, i]},{s}\n")
    with _open(os.path.join(out, QUANTA)) as fh:
        fh.write("epoch,owner,peer,d\n")
        for t in range(log.epochs):
            for i in range(log.N):
                for j in range(log.N):
                    d = log.quanta[t, i, j]
                    if not math.isnan(d):
                        fh.write(f"{t + 1},{i + 1},{j + 1},{_f(d)}\n")
    with _open(os.path.join(out, MAPS)) as fh:
        fh.write("epoch,owner,rank,peer,beta_bar,beta,Z,epsilon,beta_hat\n")
        for t in sorted(log.maps):
            for m in log.maps[t]:
                for r, p in enumerate(m.ranked, 1):
                    fh.write(f"{t},{m.owner},{r},{p.peer},{_f(p.beta_bar)},{_f(p.beta)},"
                             f"{_f(p.Z)},{_f(p.epsilon)},{_f(p.beta_hat)}\n")


def cmd_simulate(args) -> int:
    trace = _load_trace(args.trace)
    cfg = cfgmod.single(_resolve(args, trace))
    if trace is None:
        trace = synth_trace(cfg.trace, cfg, cfg.seed)
    log = run_simulation(cfg, trace)
    write_log(log, trace, _out_dir(args.out))
    print(f"{log.epochs} epochs, {log.N} nodes -> {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    trace = _load_trace(args.trace)
    configs = cfgmod.grid(_resolve(args, trace))
    if not configs:
        raise ConfigError("empty grid")
    if args.runs < 1:
        raise ConfigError("--runs must be >= 1")
    reports = run_experiment(configs, args.runs, trace, worker_count())
    out = _out_dir(args.out)
    with _open(os.path.join(out, METRICS)) as fh:
        write_reports(reports, fh)
    with _open(os.path.join(out, "grid.txt")) as fh:
        for cid, cfg in enumerate(configs):
            fh.write(f"[{cid}]\n{cfg.to_text()}")
    print(f"{len(configs)} configs x {args.runs} runs -> {os.path.join(out, METRICS)}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.kind not in KINDS:
        raise ConfigError(f"unknown kind {args.kind!r}, expected one of {', '.join(KINDS)}")
    values = cfgmod.load(args.config, args.set)
    if args.seed is not None:
        values["seed"] = [args.seed]
    cfg = cfgmod.single(values)
    trace = synth_trace(args.kind, cfg, cfg.seed)
    if args.out is None:
        write_csv(trace, sys.stdout)
    else:
        parent = os.path.dirname(args.out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with _open(args.out) as fh:
            write_csv(trace, fh)
    return EXIT_OK


def read_log_quanta(path: str, N: int, T: int) -> np.ndarray:
    quanta = np.full((T, N, N), np.nan)
    with open(path, encoding="utf-8") as fh:
        next(fh, None)
        for lineno, line in enumerate(fh, 2):
            parts = line.strip().split(",")
            try:
                t, i, j = (int(p) for p in parts[:3])
                quanta[t - 1, i - 1, j - 1] = float(parts[3])
            except (ValueError, IndexError):
                raise TraceError(f"{path}: line {lineno}: malformed quantum record") from None
    return quanta


def cmd_inspect(args) -> int:
    echo = os.path.join(args.log, CONFIG_ECHO)
    cfg = cfgmod.single(cfgmod.load(echo))
    T = cfg.n_epochs
    if not 1 <= args.epoch <= T:
        raise ConfigError(f"--epoch must be in [1, {T}]")
    if not 1 <= args.node <= cfg.N:
        raise ConfigError(f"--node must be in [1, {cfg.N}]")
    quanta = read_log_quanta(os.path.join(args.log, QUANTA), cfg.N, T)
    log = EpochLog(cfg, quanta, np.zeros((T, cfg.N, 0)), np.zeros((T, cfg.N)), np.zeros((T, cfg.N)))
    smap = build_similarity_map(args.node, log.windows(args.epoch, args.node), cfg.model_params(), args.epoch)
    print(f"node {args.node} epoch {args.epoch}")
    print(f"{'rank':>4} {'peer':>4} {'beta_bar':>12} {'beta':>12} {'Z':>10} {'epsilon':>12} {'beta_hat':>12}")
    for r, p in enumerate(smap.ranked, 1):
        print(f"{r:>4} {p.peer:>4} {p.beta_bar:>12.6g} {p.beta:>12.6g} {p.Z:>10.4g} {p.epsilon:>12.6g} {p.beta_hat:>12.6g}")
    if not smap.ranked:
        print("(no warm peers)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdmm", description="Trend-aware peer similarity simulation")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_default):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
        sp.add_argument("--out", default=out_default, help="output location")

    sp = sub.add_parser("simulate", help="run one simulation")
    common(sp, "out")
    sp.add_argument("--trace", help="replay a CSV trace (sets N and M)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="run the experiment grid")
    common(sp, "out")
    sp.add_argument("--runs", type=int, default=10)
    sp.add_argument("--trace", help="replay a CSV trace (sets N and M)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("synth", help="emit a synthetic trace")
    common(sp, None)
    sp.add_argument("--kind", required=True)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("inspect", help="print one node's ranked map")
    sp.add_argument("--log", required=True, help="directory written by simulate")
    sp.add_argument("--node", type=int, required=True)
    sp.add_argument("--epoch", type=int, required=True)
    sp.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except (TraceError, DimensionError, ExperimentError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
