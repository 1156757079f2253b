"""Spectral and covariance comparisons between source and synthetic ensembles."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import signal

from .bd import inner_product_gram, remove_mean
from .errors import LengthMismatch, SeriesTooShort, ShapeMismatch, ZeroSourceNorm
from .ingest import VelocityEnsemble


@dataclass(frozen=True)
class WelchConfig:
    nperseg: int = 256
    overlap: float = 0.5
    window: str = "hann"

    @property
    def noverlap(self) -> int:
        return int(self.nperseg * self.overlap)

    def n_segments(self, n: int) -> int:
        return (n - self.noverlap) // (self.nperseg - self.noverlap)

    def params(self) -> dict:
        return {"nperseg": self.nperseg, "noverlap": self.noverlap, "window": self.window}


@dataclass
class SpectrumReport:
    frequencies: np.ndarray
    psd: np.ndarray
    params: dict = field(default_factory=dict)


@dataclass
class CoherenceReport:
    frequencies: np.ndarray
    coherence: np.ndarray
    params: dict = field(default_factory=dict)


def _check_length(n: int, cfg: WelchConfig) -> None:
    if n < 2 * cfg.nperseg:
        raise SeriesTooShort(f"series of {n} samples is shorter than two {cfg.nperseg}-sample segments")


def psd(series, sample_rate: float, config: WelchConfig = WelchConfig()) -> SpectrumReport:
    """One-sided Welch PSD in (m/s)^2/Hz."""
    x = np.asarray(series, dtype=float)
    _check_length(x.size, config)
    f, p = signal.welch(x, fs=sample_rate, **config.params())
    params = config.params() | {"n_segments": config.n_segments(x.size)}
    return SpectrumReport(f, np.maximum(p, 0.0), params)


def coherence(a, b, sample_rate: float, config: WelchConfig = WelchConfig()) -> CoherenceReport:
    """Magnitude-squared coherence ``|S_ab|^2 / (S_aa S_bb)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"series lengths differ: {a.size} vs {b.size}")
    _check_length(a.size, config)
    return _coherence_from_spectra([a], [b], sample_rate, config)


def _coherence_from_spectra(As, Bs, fs, cfg) -> CoherenceReport:
    saa = sbb = sab = 0.0
    for a, b in zip(As, Bs):
        f, paa = signal.welch(a, fs=fs, **cfg.params())
        _, pbb = signal.welch(b, fs=fs, **cfg.params())
        _, pab = signal.csd(a, b, fs=fs, **cfg.params())
        saa, sbb, sab = saa + paa, sbb + pbb, sab + pab
    den = saa * sbb
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.where(den > 0, np.abs(sab) ** 2 / den, 0.0)
    params = cfg.params() | {"n_segments": cfg.n_segments(len(As[0])) * len(As)}
    return CoherenceReport(f, np.clip(g, 0.0, 1.0), params)


def sample_rate(ensemble: VelocityEnsemble) -> float:
    return ensemble.grid.nx / ensemble.grid.interval_s


def ensemble_psd(ensemble: VelocityEnsemble, level: int, config: WelchConfig = WelchConfig()) -> SpectrumReport:
    """PSD at one height averaged over realizations."""
    fs = sample_rate(ensemble)
    reps = [psd(ensemble.level_series(k, level), fs, config) for k in range(ensemble.n_realizations)]
    params = reps[0].params | {"n_realizations": len(reps)}
    return SpectrumReport(reps[0].frequencies, np.mean([r.psd for r in reps], axis=0), params)


def ensemble_coherence(
    ensemble: VelocityEnsemble, level_a: int = 0, level_b: int = -1, config: WelchConfig = WelchConfig()
) -> CoherenceReport:
    """Coherence between two heights with cross-spectra pooled over realizations."""
    n = ensemble.n_realizations
    As = [ensemble.level_series(k, level_a) for k in range(n)]
    Bs = [ensemble.level_series(k, level_b) for k in range(n)]
    _check_length(As[0].size, config)
    return _coherence_from_spectra(As, Bs, sample_rate(ensemble), config)


def covariance_error(C_source, C_synth) -> float:
    """Relative entrywise L2 distance ``||C - C_hat|| / ||C||``."""
    C = np.asarray(C_source, dtype=float)
    Ch = np.asarray(C_synth, dtype=float)
    if C.shape != Ch.shape:
        raise ShapeMismatch(f"covariance shapes differ: {C.shape} vs {Ch.shape}")
    den = np.sum(C * C)
    if den == 0:
        raise ZeroSourceNorm("source covariance is identically zero")
    return float(np.sqrt(np.sum((C - Ch) ** 2) / den))


def ensemble_covariance(ensemble: VelocityEnsemble, inner_product: int = 0) -> np.ndarray:
    """Temporal covariance of an ensemble after removing its own mean field."""
    fl = remove_mean(ensemble)
    return inner_product_gram(fl.u, ensemble.grid.weights(), inner_product)


@dataclass
class ComparisonReport:
    psd_source: SpectrumReport
    psd_synth: SpectrumReport
    coherence_source: CoherenceReport
    coherence_synth: CoherenceReport
    epsilon: float


def compare(
    source: VelocityEnsemble,
    synth: VelocityEnsemble,
    level: int = -1,
    pair: tuple[int, int] = (0, -1),
    inner_product: int = 0,
    config: WelchConfig = WelchConfig(),
) -> ComparisonReport:
    if source.data.shape[1:] != synth.data.shape[1:] or not source.grid.conforms(synth.grid):
        raise ShapeMismatch(
            f"source {source.data.shape[1:]} and synthetic {synth.data.shape[1:]} ensembles do not conform"
        )
    eps = covariance_error(ensemble_covariance(source, inner_product), ensemble_covariance(synth, inner_product))
    return ComparisonReport(
        ensemble_psd(source, level, config),
        ensemble_psd(synth, level, config),
        ensemble_coherence(source, *pair, config),
        ensemble_coherence(synth, *pair, config),
        eps,
    )


@dataclass
class IntervalReport:
    interval_s: float
    comparison: ComparisonReport
    M: int
    n_terms: list[int]


def interval_study(days, intervals: Sequence[float], model_config=None, n_synth: int | None = None,
                   seed: int | None = None) -> list[IntervalReport]:
    """Rebuild snapshots, fit and synthesize once per interval length.

    ``days`` is a list of :class:`~windtsd.ingest.TowerSeries`; every other
    setting comes from ``model_config`` (a :class:`~windtsd.config.PipelineConfig`).
    """
    from .config import PipelineConfig
    from .ingest import ensemble_from_series
    from .pipeline import fit_model
    from .synth import generate_ensemble

    cfg = model_config or PipelineConfig()
    out = []
    for interval in intervals:
        source = ensemble_from_series(days, interval, cfg.n_interior, cfg.dx_mode)
        model, _ = fit_model(source, cfg)
        synth = generate_ensemble(model, n_synth or source.n_realizations,
                                  cfg.synth_seed if seed is None else seed)
        cmp = compare(source, synth, -1, (0, -1), cfg.inner_product, cfg.welch)
        out.append(IntervalReport(float(interval), cmp, model.M, model.n_terms))
    return out


def write_columns(path: str | Path, columns: Mapping[str, Sequence[float]]) -> None:
    """CSV with one named column per entry; all columns must share a length."""
    names = list(columns)
    cols = [np.asarray(columns[n]).reshape(-1) for n in names]
    if len({c.size for c in cols}) > 1:
        raise LengthMismatch("report columns differ in length")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])
