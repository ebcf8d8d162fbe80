"""P_D0 at P_F0 = 0.01 against SNR on the (8, 32, 8, 8) system with CSI error.

    python3 scripts/run_fig6.py [--csi-error 1.0] [--trials 10000]
"""

from _common import parser, run, sweep_table

from stsfusion.config import preset_config

p = parser(__doc__.splitlines()[0])
p.add_argument("--csi-error", type=float, default=1.0, help="sigma_e^2 as a multiple of sigma_w^2")
p.add_argument("--eta", type=float, default=5.0)
args = p.parse_args()

cfg = preset_config("fig6", sigma_e2_rel=args.csi_error, eta=args.eta, trials=args.trials, seed=args.seed)
sweep_table(run(cfg, args.workers), cfg, "M=8")
