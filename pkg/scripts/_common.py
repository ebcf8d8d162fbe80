"""Shared helpers for the experiment scripts."""

import argparse
import os
import time

from stsfusion.experiments import run_experiment


def parser(description, trials=10_000):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    return p


def run(cfg, workers):
    start = time.perf_counter()
    res = run_experiment(cfg, workers=workers, progress=lambda msg: print(f"  running {msg}", flush=True))
    print(f"done in {time.perf_counter() - start:.1f} s")
    return res


def sweep_table(res, cfg, series):
    """Print P_D0 at the target false-alarm rate, one row per rule."""
    values = cfg.sweep_values
    print(f"\nP_D0 at P_F0 = {cfg.target_pf0}, {series}, over {cfg.sweep_var}")
    print(f"{'rule':8s}" + "".join(f"{v!s:>9}" for v in values))
    for rule in cfg.rules:
        row = [res.detection[("sts", series, v)][rule][cfg.target_pf0] for v in values]
        print(f"{rule:8s}" + "".join(f"{p:9.3f}" for p in row))
