"""ROC of every rule on the (8, 8, 8, 8) system at 15 dB, with and without STS.

    python3 scripts/run_fig3.py [--preset fig4] [--trials 10000] [--out roc.csv]
"""

from _common import parser, run

from stsfusion.config import preset_config
from stsfusion.experiments import GAIN_PF0

p = parser(__doc__.splitlines()[0])
p.add_argument("--preset", default="fig3", choices=["fig3", "fig4"])
p.add_argument("--out", help="write the ROC rows here as CSV")
args = p.parse_args()

cfg = preset_config(args.preset, trials=args.trials, seed=args.seed)
res = run(cfg, args.workers)
(label,) = res.gains
print(f"\nP_D0 with STS / without STS, M={cfg.M}, N={cfg.N}")
print(f"{'rule':8s}" + "".join(f"{'P_F0=' + str(pf):>22}" for pf in GAIN_PF0))
for rule in cfg.rules:
    cells = []
    for pf in GAIN_PF0:
        sts = res.detection[("sts", f"M={cfg.M}", None)][rule].get(pf)
        base = res.detection[("baseline", f"M={cfg.M}", None)][rule].get(pf)
        ratio = res.gains[label].get(str(pf), {}).get(rule)
        cells.append("n/a" if sts is None else f"{sts:.3f}/{base:.3f} x{ratio or float('nan'):.2f}")
    print(f"{rule:8s}" + "".join(f"{c:>22}" for c in cells))
if args.out:
    with open(args.out, "w") as fh:
        fh.write(res.to_csv())
