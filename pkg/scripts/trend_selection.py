"""How often the converging peer outranks the diverging one, SDMM vs. greedy minimum.

    python scripts/trend_selection.py --seeds 200 --W 100
"""

import argparse

from sdmm.config import SimConfig
from sdmm.evaluation import baseline_rank
from sdmm.scenarios import converge_diverge
from sdmm.sim import run_simulation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--W", type=int, default=100)
    ap.add_argument("--swing", type=float, default=0.5, help="half the drift, in sigmas")
    ap.add_argument("--standard-mk", action="store_true", help="divide S by sqrt(var) instead of var")
    args = ap.parse_args()

    cfg = SimConfig(W=args.W, map_interval=0, mkm_literal=not args.standard_mk)
    sdmm = base = 0
    for seed in range(args.seeds):
        run_cfg = cfg.replace(seed=seed)
        trace, conv, div = converge_diverge(run_cfg, seed, swing=args.swing)
        log = run_simulation(run_cfg, trace)
        ranked = log.map_at(log.epochs, 1).peers
        greedy = baseline_rank(log, log.epochs, 1)
        sdmm += ranked.index(conv) < ranked.index(div)
        base += greedy.index(conv) < greedy.index(div)
    print(f"W={args.W} seeds={args.seeds} swing={args.swing}")
    print(f"  sdmm     converging first: {sdmm / args.seeds:.3f}")
    print(f"  baseline converging first: {base / args.seeds:.3f}")


if __name__ == "__main__":
    main()
