"""Command line entry point: ``windtsd {decompose,synthesize,diagnose,info}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .config import PipelineConfig, _parse
from .errors import WindTsdError
from .ingest import write_tower_csv
from .modelfile import read_ensemble, read_model, write_ensemble, write_model
from .pipeline import expand_inputs, files_hash, fit_model, load_days
from .synth import generate_ensemble, training_ensemble

log = logging.getLogger("windtsd")

_CONFIG_FLAGS = [f for f in fields(PipelineConfig) if f.name not in ("input_paths", "output_path")]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    for f in _CONFIG_FLAGS:
        flag = "--" + f.name.replace("_", "-")
        p.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())
    p.add_argument("--interval", dest="interval_s", default=None, help="alias of --interval-s")


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    kinds = {f.name: f.type for f in _CONFIG_FLAGS}
    for name, kind in kinds.items():
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, _parse(kind, val))
    cfg.validate()
    return cfg


def cmd_decompose(args) -> int:
    cfg = _config(args)
    paths = expand_inputs(args.inputs)
    if not paths:
        raise FileNotFoundError(f"no input CSV files under {args.inputs}")
    try:
        ens = load_days(paths, cfg)
    except WindTsdError as exc:
        raise WindTsdError(f"step 1 (data preparation): {exc}") from exc
    model, info = fit_model(ens, cfg, files_hash(paths))
    size = write_model(args.output, model)
    frac = np.cumsum(info.mu) / info.mu.sum() if info.mu.sum() > 0 else np.zeros(1)
    print(f"realizations={ens.n_realizations} intervals={ens.n_intervals} grid={ens.grid.nz}x{ens.grid.nx}")
    print("temporal energy (cumulative): " + " ".join(f"{v:.4f}" for v in frac[: max(info.M, 10)]))
    print(f"M={info.M} N={info.n_terms}")
    print(f"wrote {args.output} ({size} bytes)")
    return 0


def cmd_synthesize(args) -> int:
    model = read_model(args.model)
    if args.training_xi:
        ens = training_ensemble(model)
    else:
        ens = generate_ensemble(model, args.n, args.seed)
    text = f"model_source_sha256 = {model.source_hash}\nseed = {args.seed}\nn = {ens.n_realizations}\n"
    size = write_ensemble(args.output, ens, text)
    if args.csv_dir:
        out = Path(args.csv_dir)
        out.mkdir(parents=True, exist_ok=True)
        step = ens.grid.interval_s / ens.grid.nx
        n = ens.n_intervals * ens.grid.nx
        t = np.arange(n) * step
        for k in range(ens.n_realizations):
            speeds = np.stack([ens.level_series(k, iz) for iz in range(ens.grid.nz)], axis=1)
            write_tower_csv(out / f"synthetic_{k:03d}.csv", t, np.maximum(speeds, 0.0), ens.grid.z_levels)
    print(f"wrote {ens.n_realizations} realizations to {args.output} ({size} bytes)")
    return 0


def _load_any(path: str, cfg: PipelineConfig):
    p = Path(path)
    if p.is_dir() or p.suffix == ".csv":
        return load_days(expand_inputs([p]), cfg)
    return read_ensemble(p)


def cmd_diagnose(args) -> int:
    cfg = _config(args)
    source = _load_any(args.source, cfg)
    synth = _load_any(args.synth, cfg)
    pair = (args.level_a, args.level_b)
    rep = dg.compare(source, synth, args.level_b, pair, cfg.inner_product, cfg.welch)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    dg.write_columns(out / "psd.csv", {
        "frequency_hz": rep.psd_source.frequencies,
        "source": rep.psd_source.psd,
        "synthetic": rep.psd_synth.psd,
    })
    dg.write_columns(out / "coherence.csv", {
        "frequency_hz": rep.coherence_source.frequencies,
        "source": rep.coherence_source.coherence,
        "synthetic": rep.coherence_synth.coherence,
    })
    dg.write_columns(out / "covariance_error.csv", {"epsilon": [rep.epsilon]})
    energy = {}
    for name, ens in (("source", source), ("synthetic", synth)):
        C = dg.ensemble_covariance(ens, cfg.inner_product)
        ev = np.clip(np.linalg.eigvalsh(C * ens.dt)[::-1], 0.0, None)
        energy[name] = np.cumsum(ev) / ev.sum() if ev.sum() > 0 else np.zeros_like(ev)
    dg.write_columns(out / "energy.csv", {"mode": np.arange(1, len(energy["source"]) + 1), **energy})
    print(f"epsilon={rep.epsilon:.6g}")
    print(f"reports written to {out}")
    return 0


def cmd_info(args) -> int:
    path = Path(args.model)
    model = read_model(path)
    frac = model.energy_fractions()
    nz, nx = model.grid.shape
    print(f"file: {path} ({path.stat().st_size} bytes)")
    print(f"grid: {nz} x {nx}, dx={model.grid.dx:.4g} m, interval={model.grid.interval_s:g} s")
    print(f"intervals: {model.n_intervals}, inner product type {model.inner_product}")
    print(f"M: {model.M} (energy {frac[:model.M].sum():.4f})")
    print(f"N per mode: {model.n_terms}")
    print("energy fractions: " + " ".join(f"{v:.4f}" for v in frac[: max(model.M, 5)]))
    raw = 8 * nz * nx * model.n_intervals * max((m.xi_observations.shape[0] for m in model.modes), default=0)
    print(f"raw ensemble size: {raw} bytes")
    print(f"source sha256: {model.source_hash}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="windtsd", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="fit a reduced model from tower CSV days")
    p.add_argument("inputs", nargs="+", help="CSV files or directories of CSV files, one per day")
    p.add_argument("-o", "--output", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("synthesize", help="generate synthetic days from a model")
    p.add_argument("model")
    p.add_argument("-n", type=int, default=28)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--training-xi", action="store_true",
                   help="rebuild the training days from their projected xi instead of sampling")
    p.add_argument("--csv-dir", help="also write each realization as a tower CSV")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("diagnose", help="compare source and synthetic ensembles")
    p.add_argument("source", help="ensemble file, CSV file or directory of CSV days")
    p.add_argument("synth", help="ensemble file, CSV file or directory of CSV days")
    p.add_argument("-o", "--output", required=True, help="report directory")
    p.add_argument("--level-a", type=int, default=0)
    p.add_argument("--level-b", type=int, default=-1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("info", help="summarize a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_info)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (WindTsdError, ValueError, OSError) as exc:
        print(f"windtsd {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
