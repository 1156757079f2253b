"""Model-file size against the raw ensemble it summarises, at full scale.

Fits a model on a 28-day, 144-interval, 20 x 600 ensemble and prints the
file size, then tabulates the size of M=5 models for a range of N.

    python scripts/storage.py
"""

import argparse
import tempfile
from pathlib import Path

from windtsd.config import PipelineConfig
from windtsd.fixtures import tower_days
from windtsd.ingest import ensemble_from_series
from windtsd.modelfile import write_model
from windtsd.pipeline import fit_model


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--days", type=int, default=28)
    ap.add_argument("--bd-modes", type=int, default=5)
    ap.add_argument("--kle-terms", type=int, nargs="+", default=[3, 5, 7])
    args = ap.parse_args()

    ens = ensemble_from_series(tower_days(args.days, 1.0, gusts="von_karman", seed=0), 600)
    raw = ens.data.nbytes
    print(f"raw ensemble {ens.data.shape}: {raw / 1e6:.1f} MB")
    with tempfile.TemporaryDirectory() as tmp:
        for N in args.kle_terms:
            cfg = PipelineConfig(bd_modes=args.bd_modes, kle_terms=N)
            model, _ = fit_model(ens, cfg)
            size = write_model(Path(tmp) / "m.wtsd", model)
            print(f"M={model.M} N={model.n_terms}: {size / 1e6:.2f} MB, raw/model = {raw / size:.0f}x")


if __name__ == "__main__":
    main()
