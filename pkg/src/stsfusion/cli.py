"""Command-line entry point: ``stsfusion --preset fig3 --trials 2000 --output out/``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import channel as ch
from .config import PRESETS, from_mapping, load_config
from .errors import ConfigError, STSFusionError, ValidationError
from .experiments import run_experiment
from .fusion import RULE_NAMES
from .model import format_matrices

log = logging.getLogger("stsfusion")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stsfusion", description="STS-aided decision fusion Monte-Carlo simulator")
    p.add_argument("--config", type=Path, help="YAML file of flat configuration keys")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named experiment (config keys override it)")
    p.add_argument("--rules", help=f"comma-separated subset of {','.join(RULE_NAMES)}")
    p.add_argument("--trials", type=int, help="trials per hypothesis and sweep point")
    p.add_argument("--seed", type=int, help="master seed (fallback: $STSFUSION_SEED, then config)")
    p.add_argument("--output", type=Path, default=Path("stsfusion-out"), help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--dump-channel", action="store_true", help="write one channel realization to channel.txt")
    p.add_argument("--fixed-deployment", action="store_true", help="condition on a single sensor deployment")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args):
    data = {}
    if args.config is not None:
        # validate the file as written, then keep only its explicit keys so
        # presets and defaults are expanded once, below
        explicit = _explicit_keys(args.config)
        data = {k: v for k, v in load_config(args.config).to_dict().items() if k in explicit}
    if args.preset is not None:
        data["preset"] = args.preset
    if args.rules is not None:
        data["rules"] = [r.strip() for r in args.rules.split(",") if r.strip()]
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["seed"] = args.seed
    elif "seed" not in data and "STSFUSION_SEED" in os.environ:
        try:
            data["seed"] = int(os.environ["STSFUSION_SEED"])
        except ValueError as exc:
            raise ValidationError("seed", "STSFUSION_SEED is not an integer") from exc
    if args.fixed_deployment:
        data["fixed_deployment"] = True
    return from_mapping(data)


def _explicit_keys(path):
    import yaml

    return set(yaml.safe_load(Path(path).read_text()) or {})


def dump_channel(cfg, path: Path) -> None:
    scenario = cfg.scenario()
    sys_, chp = scenario.system, scenario.channel
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(13,)))
    geom = ch.deploy_sensors(sys_.M, chp.phi_min, chp.phi_max, rng)
    fading = ch.large_scale_fading(geom, chp, rng)
    real = ch.realize_channel(sys_.N, fading, sys_.sigma_w2, sys_.sigma_e2, rng)
    path.write_text(format_matrices({"distance": geom.positions[None, :], "lambda": fading.lam[None, :],
                                     "H": real.H, "G": real.G, "G_hat": real.G_hat}))


def execute(cfg, args) -> list:
    out = args.output
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        start = time.perf_counter()
        result = run_experiment(cfg, workers=args.workers, progress=lambda msg: log.info("running %s", msg))
        results_path = out / f"results.{args.format}"
        results_path.write_text(result.to_csv() if args.format == "csv" else result.to_json())
        written.append(results_path)
        disp_files = {}
        for label, dset in result.dispersion.items():
            p = out / f"dispersion_{label}.txt"
            dset.save(p)
            written.append(p)
            disp_files[label] = {"path": p.name, "sha256": dset.content_hash(),
                                 **result.selection_scores[label]}
        if args.dump_channel:
            p = out / "channel.txt"
            dump_channel(cfg, p)
            written.append(p)
        manifest = {
            "tool": "stsfusion",
            "version": __version__,
            "config": cfg.to_dict(),
            "seed": cfg.seed,
            "outputs": {"results": results_path.name, "format": args.format, "dispersion": disp_files,
                        "channel": "channel.txt" if args.dump_channel else None},
            "gain_ratios": result.gains,
            "duration_s": time.perf_counter() - start,
        }
        p = out / "manifest.json"
        p.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")
        written.append(p)
        return written
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.config is None and args.preset is None:
        parser.print_usage(sys.stderr)
        print("stsfusion: error: one of --config or --preset is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"stsfusion: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        execute(cfg, args)
    except (STSFusionError, ValueError, ArithmeticError, OSError) as exc:
        print(f"stsfusion: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
