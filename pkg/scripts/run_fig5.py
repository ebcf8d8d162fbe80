"""P_D0 at P_F0 = 0.01 against the number of DFC antennas, M in {4, 8}.

    python3 scripts/run_fig5.py [--series 8] [--trials 10000]
"""

from _common import parser, run, sweep_table

from stsfusion.config import preset_config

p = parser(__doc__.splitlines()[0])
p.add_argument("--series", type=int, nargs="+", default=[4, 8], help="sensor counts M")
args = p.parse_args()

cfg = preset_config("fig5", series_M=args.series, trials=args.trials, seed=args.seed)
res = run(cfg, args.workers)
for M in args.series:
    sweep_table(res, cfg, f"M={M}")
