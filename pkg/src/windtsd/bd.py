"""Bi-orthogonal decomposition into temporal and spatial-stochastic modes.

The fluctuation field ``u(k, t, x)`` (realization, interval, grid point) is
written as ``sum_i a_i(k, x) T_i(t)``. The temporal modes ``T_i`` are
eigenfunctions of the temporal covariance ``C(t, t')`` built under one of
three space/ensemble inner products:

* type 0: spatial integral of the product of ensemble means,
* type 1: ensemble mean of the spatial integral of the product,
* type 2: type 1 minus type 0.

Quadrature is Riemann throughout: ``dt = interval_s`` in time and
``dz * dx`` per grid point in space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndefiniteBeyondTolerance, NotSymmetric, ShapeMismatch, ZeroEigenvalue
from .ingest import SnapshotGrid, VelocityEnsemble

SYM_TOL = 1e-10
PSD_TOL = 1e-10
ZERO_TOL = 1e-12


@dataclass
class FluctuationEnsemble:
    u: np.ndarray  # (n_realizations, n_intervals, nz, nx)
    mean: np.ndarray  # (nz, nx)
    grid: SnapshotGrid

    @property
    def dt(self) -> float:
        return self.grid.interval_s


@dataclass(frozen=True)
class TemporalCovariance:
    C: np.ndarray
    inner_product: int
    dt: float
    weights: np.ndarray  # spatial quadrature weights, (nz, nx)

    @property
    def dx_weight(self) -> float:
        return float(self.weights.flat[0])


@dataclass
class BdModel:
    mu: np.ndarray  # full spectrum, descending
    T: np.ndarray  # (n_intervals, n_intervals); row i is T_i
    a: np.ndarray  # (M, n_realizations, nz, nx)
    M: int
    inner_product: int = 0

    @property
    def K(self) -> np.ndarray:
        return np.sqrt(self.mu[: self.M])

    @property
    def energy_fractions(self) -> np.ndarray:
        total = self.mu.sum()
        return self.mu / total if total > 0 else np.zeros_like(self.mu)


def remove_mean(ensemble: VelocityEnsemble) -> FluctuationEnsemble:
    """Subtract the realization-then-time average from every snapshot."""
    v = ensemble.data
    vbar = v.mean(axis=0).mean(axis=0)
    return FluctuationEnsemble(v - vbar, vbar, ensemble.grid)


def inner_product_gram(u: np.ndarray, weights: np.ndarray, kind: int = 0) -> np.ndarray:
    """Gram matrix over the leading 'time' axis of ``u[k, t, ...]``.

    ``G[t, t'] = <u(., t, .), u(., t', .)>_kind`` with spatial weights broadcast
    over the trailing axes.
    """
    if kind not in (0, 1, 2):
        raise ValueError(f"inner product type must be 0, 1 or 2, got {kind!r}")
    n, nt = u.shape[:2]
    flat = u.reshape(n, nt, -1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != flat.shape[2]:
        raise ShapeMismatch(f"{w.size} weights for {flat.shape[2]} grid points")
    G0 = G1 = None
    if kind in (0, 2):
        ub = flat.mean(axis=0)
        G0 = (ub * w) @ ub.T
    if kind in (1, 2):
        G1 = np.zeros((nt, nt))
        for k in range(n):
            G1 += (flat[k] * w) @ flat[k].T
        G1 /= n
    G = G0 if kind == 0 else G1 if kind == 1 else G1 - G0
    return 0.5 * (G + G.T)


def temporal_covariance(fluct: FluctuationEnsemble, inner_product: int = 0) -> TemporalCovariance:
    w = fluct.grid.weights()
    C = inner_product_gram(fluct.u, w, inner_product)
    return TemporalCovariance(C, inner_product, fluct.dt, w)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    s = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    s[s == 0] = 1.0
    return vecs * s


def symmetric_eigh(A: np.ndarray, what: str = "matrix") -> tuple[np.ndarray, np.ndarray]:
    """Descending eigenpairs of a symmetric PSD matrix with tolerance checks.

    Slightly negative eigenvalues are clamped to zero and anything below
    ``ZERO_TOL`` times the largest is set to exactly zero.
    """
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale > 0 and np.max(np.abs(A - A.T)) > SYM_TOL * scale:
        raise NotSymmetric(f"{what} is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (A + A.T))
    vals, vecs = vals[::-1], vecs[:, ::-1]
    top = vals[0] if vals.size else 0.0
    if vals.size and vals[-1] < 0 and (top <= 0 or vals[-1] < -PSD_TOL * top):
        raise IndefiniteBeyondTolerance(
            f"{what} has eigenvalue {vals[-1]:.3e} against largest {top:.3e}"
        )
    vals = np.where(vals < ZERO_TOL * max(top, 0.0), 0.0, vals)
    if top <= 0:
        vals = np.zeros_like(vals)
    return vals, _fix_signs(vecs)


def eigendecompose_temporal(cov: TemporalCovariance) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``mu T(t) = sum_t' C(t, t') T(t') dt``.

    Returns ``(mu, T)`` with ``T[i]`` normalised so that ``dt * sum(T_i**2) = 1``.
    """
    mu, vecs = symmetric_eigh(cov.C * cov.dt, "temporal covariance")
    return mu, vecs.T / np.sqrt(cov.dt)


def energy_truncation(mu, threshold: float) -> int:
    """Smallest count whose cumulative eigenvalue share reaches ``threshold``."""
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    mu = np.asarray(mu, dtype=float)
    total = mu.sum()
    if total <= 0:
        return 0
    nonzero = int(np.count_nonzero(mu > 0))
    frac = np.cumsum(mu) / total
    M = int(np.searchsorted(frac, threshold - 1e-12 * threshold) + 1)
    return min(M, nonzero)


def spatial_stochastic_modes(fluct: FluctuationEnsemble, mu, T, M: int) -> np.ndarray:
    """Project every realization onto the first ``M`` temporal modes.

    ``a_i = <u, T_i>_T = sqrt(mu_i) * Phi_i``; shape ``(M, n, nz, nx)``.
    """
    mu = np.asarray(mu, dtype=float)
    n, nt = fluct.u.shape[:2]
    if M == 0:
        return np.zeros((0, n) + fluct.u.shape[2:])
    if M > mu.size:
        raise ValueError(f"requested {M} modes, only {mu.size} available")
    small = np.flatnonzero(mu[:M] <= ZERO_TOL * max(mu[0], 0.0))
    if small.size or mu[0] <= 0:
        i = small[0] if small.size else 0
        raise ZeroEigenvalue(f"temporal mode {i + 1} has a zero eigenvalue")
    return fluct.dt * np.einsum("ktzx,it->ikzx", fluct.u, np.asarray(T)[:M], optimize=True)


def weak_orthogonality(a: np.ndarray, mu, weights) -> np.ndarray:
    """Type-0 Gram matrix of ``Phi_i = a_i / sqrt(mu_i)``; identity when the decomposition holds."""
    M = a.shape[0]
    phi_bar = a.mean(axis=1).reshape(M, -1) / np.sqrt(np.asarray(mu)[:M])[:, None]
    return (phi_bar * np.asarray(weights).reshape(-1)) @ phi_bar.T


def reconstruct(a: np.ndarray, T: np.ndarray, M: int | None = None) -> np.ndarray:
    """``sum_{i<M} a_i(k, x) T_i(t)`` with shape ``(n, nt, nz, nx)``."""
    M = a.shape[0] if M is None else M
    return np.einsum("ikzx,it->ktzx", a[:M], np.asarray(T)[:M], optimize=True)


def relative_error(u: np.ndarray, approx: np.ndarray, weights, dt: float, inner_product: int = 0) -> float:
    """Relative squared error of ``approx`` in the chosen norm integrated over time."""
    num = np.trace(inner_product_gram(u - approx, weights, inner_product)) * dt
    den = np.trace(inner_product_gram(u, weights, inner_product)) * dt
    return float(num / den) if den > 0 else 0.0


def bd_decompose(
    ensemble: VelocityEnsemble,
    inner_product: int = 0,
    threshold: float = 0.9,
    n_modes: int | None = None,
) -> tuple[FluctuationEnsemble, TemporalCovariance, BdModel]:
    """Mean removal, covariance, eigen-solve and projection in one call."""
    fluct = remove_mean(ensemble)
    cov = temporal_covariance(fluct, inner_product)
    mu, T = eigendecompose_temporal(cov)
    M = energy_truncation(mu, threshold) if n_modes is None else int(n_modes)
    a = spatial_stochastic_modes(fluct, mu, T, M)
    return fluct, cov, BdModel(mu, T, a, M, inner_product)
