"""Synthetic inputs with known structure, for tests and experiment scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .ingest import DAY_SECONDS, SnapshotGrid, TowerSeries, VelocityEnsemble


def orthonormal_columns(rng, n: int, k: int, weights=None, zero_mean: bool = False) -> np.ndarray:
    """``k`` random columns of length ``n``, orthonormal under ``sum(w * a * b)``."""
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    G = rng.standard_normal((n, k + zero_mean))
    if zero_mean:
        G[:, 0] = 1.0
    sw = np.sqrt(w)
    Q, _ = np.linalg.qr(sw[:, None] * G)
    Q = Q[:, 1:] if zero_mean else Q
    return Q / sw[:, None]


def smooth_temporal_modes(n_int: int, k: int, dt: float) -> np.ndarray:
    """Zero-mean, dt-orthonormal diurnal harmonics, shape ``(k, n_int)``."""
    t = (np.arange(n_int) + 0.5) / n_int
    rows = []
    for i in range(k):
        h = i // 2 + 1
        f = np.cos if i % 2 == 0 else np.sin
        rows.append(f(2 * np.pi * h * t))
    B = np.array(rows).T
    B -= B.mean(axis=0)
    Q, _ = np.linalg.qr(B)
    return Q.T / np.sqrt(dt)


@dataclass
class SeparableFixture:
    ensemble: VelocityEnsemble
    vbar: np.ndarray
    T: np.ndarray  # (k, n_int)
    a: np.ndarray  # (k, n, nz, nx)
    mean_modes: np.ndarray  # (k, nz, nx)
    mean_energy: np.ndarray  # ||mean_modes_i||^2 in the weighted norm, i.e. type-0 eigenvalues


def separable_ensemble(
    n_real: int = 6,
    n_int: int = 12,
    nz: int = 4,
    nx: int = 8,
    energies=(4.0, 1.0, 0.25),
    fluct_scale: float = 0.3,
    fluct_terms: int = 2,
    noise: float = 0.0,
    interval_s: float = 600.0,
    dx: float = 5.0,
    seed: int = 0,
    smooth_time: bool = False,
) -> SeparableFixture:
    """Ensemble ``vbar + sum_i a_i(k, x) T_i(t)`` with controlled structure.

    The ensemble means of ``a_i`` are mutually orthogonal with weighted
    energies ``energies``; each ``a_i`` also carries ``fluct_terms`` Gaussian
    fluctuation directions, orthogonal to all means, with exactly centred
    coefficients. ``T_i`` are zero-mean and dt-orthonormal, so the type-0
    eigenvalues are exactly ``energies``.
    """
    rng = np.random.default_rng(seed)
    k = len(energies)
    z = np.linspace(4.5, 10.0, nz)
    grid = SnapshotGrid(z, nx, dx, interval_s)
    w = grid.weights().reshape(-1)
    P = nz * nx
    dirs = orthonormal_columns(rng, P, k * (1 + fluct_terms), w)
    means = dirs[:, :k].T * np.sqrt(np.asarray(energies, dtype=float))[:, None]
    a = np.empty((k, n_real, P))
    for i in range(k):
        a[i] = means[i]
        if fluct_terms and n_real > 1:
            Y = dirs[:, k + i * fluct_terms : k + (i + 1) * fluct_terms]
            g = rng.standard_normal((n_real, fluct_terms))
            g -= g.mean(axis=0)
            a[i] += fluct_scale * np.sqrt(energies[i]) * g @ Y.T
    if smooth_time:
        T = smooth_temporal_modes(n_int, k, interval_s)
    else:
        T = orthonormal_columns(rng, n_int, k, np.full(n_int, interval_s), zero_mean=True).T
    vbar = 5.0 + 0.3 * np.log(z / 4.5)[:, None] * np.ones((1, nx))
    a = a.reshape(k, n_real, nz, nx)
    v = vbar + np.einsum("ikzx,it->ktzx", a, T)
    if noise:
        v = v + noise * rng.standard_normal(v.shape)
    return SeparableFixture(VelocityEnsemble(v, grid), vbar, T, a, means.reshape(k, nz, nx), np.asarray(energies, float))


def ou_process(rng, n: int, step: float, corr_time: float, sigma: float = 1.0, n_series: int = 1) -> np.ndarray:
    """Stationary AR(1) sampling of an Ornstein-Uhlenbeck process, shape ``(n_series, n)``."""
    phi = np.exp(-step / corr_time)
    e = rng.standard_normal((n_series, n)) * sigma * np.sqrt(1 - phi**2)
    zi = rng.standard_normal((n_series, 1)) * sigma * phi
    y, _ = signal.lfilter([1.0], [1.0, -phi], e, axis=-1, zi=zi)
    return y


def von_karman_process(rng, n: int, step: float, outer_time: float, sigma: float = 1.0, n_series: int = 1) -> np.ndarray:
    """Gaussian series with spectrum ``(1 + (f T)^2)^(-5/6)``: flat below ``1/T``, ``f^(-5/3)`` above.

    Synthesised by spectral shaping of white noise and scaled to sample
    standard deviation ``sigma``; shape ``(n_series, n)``.
    """
    f = np.fft.rfftfreq(n, step)
    amp = (1.0 + (f * outer_time) ** 2) ** (-5.0 / 12.0)
    amp[0] = 0.0
    w = np.fft.rfft(rng.standard_normal((n_series, n)), axis=-1) * amp
    y = np.fft.irfft(w, n=n, axis=-1)
    return sigma * y / y.std(axis=-1, keepdims=True)


def tower_days(
    n_days: int = 28,
    step: float = 1.0,
    heights=(4.5, 10.0),
    corr_time: float = 1200.0,
    common_sigma: float = 0.8,
    local_sigma: float = 0.25,
    diurnal_sigma: float = 0.3,
    gusts: str = "ou",
    seed: int = 0,
) -> list[TowerSeries]:
    """Two-sensor days with a diurnal cycle and a shared OU gust component.

    The shared component has correlation time ``corr_time``, so the two
    sensors stay coherent over periods of that order; each sensor adds its
    own smaller OU noise with a tenth of the correlation time. The diurnal
    amplitude and phase vary from day to day with spread ``diurnal_sigma``.
    ``gusts="von_karman"`` swaps both OU components for von Karman
    processes with outer time scale ``corr_time`` (shared) and ``corr_time / 10``
    (local).
    """
    if gusts not in ("ou", "von_karman"):
        raise ValueError(f"unknown gust model {gusts!r}")
    gust = ou_process if gusts == "ou" else von_karman_process
    rng = np.random.default_rng(seed)
    n = int(round(DAY_SECONDS / step))
    t = np.arange(n) * step
    h = np.asarray(heights, dtype=float)
    shear = np.log(h / 0.05) / np.log(h[0] / 0.05)
    days = []
    for _ in range(n_days):
        amp = 1.0 + diurnal_sigma * rng.standard_normal()
        phase = diurnal_sigma * rng.standard_normal()
        diurnal = 3.0 + amp * (1.0 + np.sin(2 * np.pi * t / DAY_SECONDS - np.pi / 2 + phase))
        common = gust(rng, n, step, corr_time, common_sigma)[0]
        local = gust(rng, n, step, corr_time / 10, local_sigma, h.size)
        speeds = (diurnal + common)[:, None] * shear[None, :] + local.T
        days.append(TowerSeries(t, np.maximum(speeds, 0.0), h))
    return days


def circulant_alpha(nz: int = 3, nx: int = 16, seed: int = 0) -> np.ndarray:
    """Every circular shift along x of one zero-mean field: a sample covariance that is exactly circulant."""
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((nz, nx))
    f -= f.mean(axis=1, keepdims=True)
    return np.stack([np.roll(f, s, axis=1) for s in range(nx)])


def power_law_fields(
    n_real: int, nz: int, nx: int, slope: float = 5.0 / 3.0, outer: int = 1200, n_profiles: int = 3, seed: int = 0
) -> np.ndarray:
    """Realizations with a ``k^-slope`` along-x spectrum and a few vertical profiles.

    Each field is a sum of ``n_profiles`` smooth vertical shapes times
    independent along-x processes. The processes are generated on ``outer``
    samples and the leading ``nx`` kept, so fields at different ``nx`` are
    windows of one self-similar process.
    """
    rng = np.random.default_rng(seed)
    L = max(outer, nx)
    k = np.fft.rfftfreq(2 * L)
    amp = np.zeros_like(k)
    amp[1:] = k[1:] ** (-slope / 2)
    z = np.linspace(0.0, 1.0, nz)
    out = np.zeros((n_real, nz, nx))
    for p in range(n_profiles):
        prof = np.cos(np.pi * p * z) / (p + 1)
        c = (rng.standard_normal((n_real, k.size)) + 1j * rng.standard_normal((n_real, k.size))) * amp
        x = np.fft.irfft(c, n=2 * L, axis=-1)[:, :nx]
        out += prof[None, :, None] * x[:, None, :]
    return out
