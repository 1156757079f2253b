"""KLE term count for 94% energy as the number of spatial points grows.

Two fixture families, both 20 levels x nx points per snapshot:

* ``powerlaw``: windows of one self-similar field with a ``k^-slope``
  along-x spectrum (``--slope``, default Kolmogorov 5/3);
* ``tower``: tower days through the full pipeline with snapshot lengths
  60..1200 s at 1 Hz; counts are for the leading temporal mode.

    python scripts/truncation_scaling.py --fixture powerlaw --slope 1.6667 2 3
"""

import argparse

import numpy as np

from windtsd import kle
from windtsd.bd import bd_decompose
from windtsd.fixtures import power_law_fields, tower_days
from windtsd.ingest import ensemble_from_series

NX = (60, 300, 600, 900, 1200)


def powerlaw_counts(slope, threshold, n_real, seed):
    out = []
    for nx in NX:
        f = power_law_fields(n_real, 20, nx, slope=slope, seed=seed)
        out.append(kle.kle_decompose(f, np.ones(20 * nx), threshold=threshold).N)
    return out


def tower_counts(threshold, n_real, gusts, seed):
    days = tower_days(n_real, 1.0, gusts=gusts, seed=seed)
    out = []
    for nx in NX:
        ens = ensemble_from_series(days, float(nx))
        _, _, bd = bd_decompose(ens, 0, n_modes=1)
        out.append(kle.kle_decompose(bd.a[0], ens.grid.weights(), threshold=threshold).N)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--fixture", choices=["powerlaw", "tower"], default="powerlaw")
    ap.add_argument("--slope", type=float, nargs="+", default=[5 / 3])
    ap.add_argument("--gusts", choices=["ou", "von_karman"], default="ou")
    ap.add_argument("--threshold", type=float, default=0.94)
    ap.add_argument("--realizations", type=int, default=28)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    points = [20 * nx for nx in NX]
    print("points:", points)
    if args.fixture == "powerlaw":
        for s in args.slope:
            c = powerlaw_counts(s, args.threshold, args.realizations, args.seed)
            print(f"slope {s:.3f}: N = {c}  growth {c[-1] / c[0]:.2f}x")
    else:
        c = tower_counts(args.threshold, args.realizations, args.gusts, args.seed)
        print(f"tower ({args.gusts}): N = {c}  growth {c[-1] / c[0]:.2f}x")


if __name__ == "__main__":
    main()
