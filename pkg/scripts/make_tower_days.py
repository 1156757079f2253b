"""Write synthetic two-sensor tower days as CSV files, one per day.

    python scripts/make_tower_days.py out/days --days 28 --step 1
"""

import argparse
from pathlib import Path

from windtsd.fixtures import tower_days
from windtsd.ingest import write_tower_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("outdir")
    ap.add_argument("--days", type=int, default=28)
    ap.add_argument("--step", type=float, default=1.0, help="sampling step in seconds")
    ap.add_argument("--corr-time", type=float, default=1200.0)
    ap.add_argument("--local-sigma", type=float, default=0.25)
    ap.add_argument("--gusts", choices=["ou", "von_karman"], default="ou")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    days = tower_days(args.days, args.step, corr_time=args.corr_time, local_sigma=args.local_sigma,
                      gusts=args.gusts, seed=args.seed)
    for k, s in enumerate(days):
        write_tower_csv(out / f"day{k:02d}.csv", s.timestamps, s.speeds, s.sensor_heights)
    print(f"wrote {len(days)} days to {out}")


if __name__ == "__main__":
    main()
