"""End-to-end orchestration: data preparation, BD, KLE, KDE, model assembly."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bd import bd_decompose
from .config import PipelineConfig
from .density import fit_kde
from .ingest import VelocityEnsemble, ensemble_from_series, load_tower_csv
from .kle import kle_all
from .synth import ReducedModel, build_model

logger = logging.getLogger(__name__)


@dataclass
class FitInfo:
    mu: np.ndarray
    M: int
    n_terms: list[int]
    kle_fractions: list[float]
    temporal_covariance: np.ndarray


def ensemble_hash(ens: VelocityEnsemble) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ens.data, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(ens.grid.z_levels, dtype="<f8").tobytes())
    h.update(np.array([ens.grid.nx, ens.grid.dx, ens.grid.interval_s], dtype="<f8").tobytes())
    return h.hexdigest()


def files_hash(paths: Sequence[str | Path]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def fit_model(ensemble: VelocityEnsemble, config: PipelineConfig, source_hash: str | None = None
              ) -> tuple[ReducedModel, FitInfo]:
    """BD, per-mode KLE and KDE fits packaged as a :class:`ReducedModel`."""
    fluct, cov, bd = bd_decompose(
        ensemble, config.inner_product, config.bd_energy_threshold, config.bd_modes
    )
    del fluct
    weights = ensemble.grid.weights()
    kle = kle_all(bd.a, weights, config.kle_energy_threshold, config.kle_terms,
                  config.kle_method, config.covariance_ddof)
    kdes = [[fit_kde(m.xi[:, j], config.bandwidth_rule) for j in range(m.N)] for m in kle.modes]
    model = build_model(
        bd, kle, kdes, ensemble.grid, ensemble.data.mean(axis=(0, 1)),
        config=_echo(config),
        source_hash=source_hash or ensemble_hash(ensemble),
        temporal_covariance=cov.C if config.store_covariance else None,
    )
    info = FitInfo(bd.mu, bd.M, kle.n_terms, [m.energy_fraction for m in kle.modes], cov.C)
    logger.info("retained M=%d temporal modes, KLE terms %s", bd.M, kle.n_terms)
    return model, info


def _echo(config: PipelineConfig) -> dict[str, str]:
    out = {}
    for line in config.to_text().splitlines():
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_days(paths: Sequence[str | Path], config: PipelineConfig) -> VelocityEnsemble:
    series = []
    for p in paths:
        if not Path(p).exists():
            raise FileNotFoundError(f"input file not found: {p}")
        series.append(load_tower_csv(p))
    return ensemble_from_series(series, config.interval_s, config.n_interior, config.dx_mode)


def expand_inputs(paths: Sequence[str | Path]) -> list[Path]:
    """Directories expand to their sorted ``*.csv`` files."""
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.csv")))
        else:
            out.append(p)
    return out
