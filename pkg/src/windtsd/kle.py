"""Karhunen-Loeve expansion of the spatial-stochastic modes.

Each mode ``a_i(k, x)`` is centred over realizations and the fluctuation
``alpha`` is expanded as ``sum_j sqrt(lambda_j) xi_j(k) X_j(x)``, with
``X_j`` orthonormal under the quadrature-weighted spatial inner product and
``xi_j`` zero-mean, unit-variance, uncorrelated observations.

The integral eigenproblem ``int R(x1, x2) X(x2) dx2 = lambda X(x1)`` is solved
in Galerkin form ``A D = B D Lambda`` with ``A = H' W R W H`` and
``B = H' W H``. For the default pixel basis ``H = I`` and ``B = W`` is
diagonal, so the problem reduces to the symmetric standard problem for
``W^1/2 R W^1/2``. Three routes compute the pixel-basis solution:

``dense``
    form ``R`` explicitly (reference path, fine up to a few thousand points);
``snapshot``
    eigen-solve the ``n x n`` realization Gram matrix and lift back, exact
    and cheap when realizations are few;
``iterative``
    matrix-free Lanczos (ARPACK) for the leading ``k`` pairs, with ``k``
    grown until the requested energy share is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, eigsh

from .bd import ZERO_TOL, _fix_signs, energy_truncation, symmetric_eigh
from .errors import (
    NotCentered,
    ShapeMismatch,
    SingularWeightMatrix,
    TooFewRealizations,
    ZeroEigenvalue,
)

DENSE_LIMIT = 2000
CENTER_TOL = 1e-8
GRAM_RCOND = 1e-12


@dataclass(frozen=True)
class SpatialCovariance:
    R: np.ndarray  # (P, P)
    weights: np.ndarray  # (P,)


@dataclass
class KleMode:
    """Expansion of one spatial-stochastic mode."""

    abar: np.ndarray  # (nz, nx)
    lam: np.ndarray  # retained eigenvalues, (N,)
    X: np.ndarray  # (N, nz, nx)
    xi: np.ndarray  # (n_realizations, N)
    spectrum: np.ndarray  # every eigenvalue the solver produced
    total_energy: float  # trace identity, sum of all eigenvalues

    @property
    def N(self) -> int:
        return self.lam.size

    @property
    def energy_fraction(self) -> float:
        return float(self.lam.sum() / self.total_energy) if self.total_energy > 0 else 1.0


@dataclass
class KleModel:
    modes: list[KleMode]

    @property
    def n_terms(self) -> list[int]:
        return [m.N for m in self.modes]


def center_mode(a_i: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a mode into its realization mean and the centred fluctuation."""
    a_i = np.asarray(a_i, dtype=float)
    if a_i.shape[0] < 2:
        raise TooFewRealizations(f"need >= 2 realizations, got {a_i.shape[0]}")
    abar = a_i.mean(axis=0)
    return abar, a_i - abar


def _flat(alpha: np.ndarray) -> np.ndarray:
    return np.asarray(alpha, dtype=float).reshape(alpha.shape[0], -1)


def _check_weights(weights, P: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != P:
        raise ShapeMismatch(f"{w.size} weights for {P} grid points")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise SingularWeightMatrix("quadrature weights must be finite and positive")
    return w


def _check_centered(A: np.ndarray) -> None:
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale > 0 and np.max(np.abs(A.mean(axis=0))) > CENTER_TOL * scale:
        raise NotCentered("realization mean of alpha is not zero; call center_mode first")


def spatial_covariance(alpha: np.ndarray, weights, method: str = "direct", ddof: int = 0) -> SpatialCovariance:
    """Sample covariance of the centred field over realizations.

    ``direct`` accumulates ``sum_k alpha_k alpha_k' / (n - ddof)``. ``fft``
    treats the last axis as circularly stationary and builds the covariance
    from cross-correlations ``F^-1(conj(F(alpha_a)) F(alpha_b))`` averaged
    over realizations and positions; it agrees with ``direct`` only when the
    sample covariance really is circulant along that axis.
    """
    alpha = np.asarray(alpha, dtype=float)
    A = _flat(alpha)
    n, P = A.shape
    w = _check_weights(weights, P)
    _check_centered(A)
    d = n - ddof
    if method == "direct":
        R = A.T @ A / d
    elif method == "fft":
        R = _fft_covariance(alpha.reshape(n, -1, alpha.shape[-1]), d)
    else:
        raise ValueError(f"unknown covariance method {method!r}")
    return SpatialCovariance(0.5 * (R + R.T), w)


def _fft_covariance(alpha: np.ndarray, d: int) -> np.ndarray:
    n, nz, nx = alpha.shape
    F = np.fft.fft(alpha, axis=-1)
    # cross-spectra between every pair of rows, summed over realizations
    S = np.einsum("kaf,kbf->abf", F.conj(), F)
    r = np.fft.ifft(S, axis=-1).real / (d * nx)  # r[a, b, lag]
    lag = (np.arange(nx)[None, :] - np.arange(nx)[:, None]) % nx  # x2 - x1
    R = r[:, :, lag]  # (nz, nz, nx, nx)
    return R.transpose(0, 2, 1, 3).reshape(nz * nx, nz * nx)


def solve_spatial_eigen(
    cov: SpatialCovariance, basis: np.ndarray | None = None, k: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the weighted covariance operator.

    Returns ``(lam, X)`` with ``X[j]`` the j-th spatial function sampled at
    the grid points, ``sum(w * X_j * X_l) = delta_jl``. ``basis`` is a
    ``(P, m)`` matrix of basis functions at the grid points; ``None`` means
    the pixel basis. ``k`` restricts the pixel solve to the leading pairs
    via Lanczos.
    """
    R, w = cov.R, cov.weights
    if basis is None:
        sw = np.sqrt(w)
        S = sw[:, None] * R * sw[None, :]
        if k is not None and k < S.shape[0] - 1:
            lam, y = _lanczos(lambda v: S @ v, S.shape[0], k)
        else:
            lam, y = symmetric_eigh(S, "spatial covariance")
        return lam, _fix_signs(y / sw[:, None]).T
    H = np.asarray(basis, dtype=float)
    if H.shape[0] != w.size:
        raise ShapeMismatch(f"basis has {H.shape[0]} rows for {w.size} grid points")
    B = H.T @ (w[:, None] * H)
    A = H.T @ (w[:, None] * R * w[None, :]) @ H
    b = np.linalg.eigvalsh(B)
    if b.size == 0 or b[0] <= GRAM_RCOND * max(b[-1], 0.0):
        raise SingularWeightMatrix("basis Gram matrix B is singular or not positive definite")
    lam, D = scipy.linalg.eigh(0.5 * (A + A.T), B)
    lam, D = lam[::-1], D[:, ::-1]
    top = max(lam[0], 0.0)
    lam = np.where(lam < ZERO_TOL * top, 0.0, lam)
    return lam, _fix_signs(H @ D).T


def _lanczos(matvec, P: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    op = LinearOperator((P, P), matvec=matvec, dtype=float)
    vals, vecs = eigsh(op, k=k, which="LA", v0=np.ones(P) / np.sqrt(P), tol=0)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    top = max(vals[0], 0.0)
    vals = np.where(vals < ZERO_TOL * top, 0.0, vals)
    return vals, _fix_signs(vecs)


def snapshot_eigen(alpha: np.ndarray, weights, ddof: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Pixel-basis eigenpairs through the ``n x n`` realization Gram matrix."""
    A = _flat(alpha)
    n, P = A.shape
    w = _check_weights(weights, P)
    _check_centered(A)
    At = A * np.sqrt(w)
    G = At @ At.T / (n - ddof)
    sig, V = symmetric_eigh(G, "realization Gram matrix")
    keep = sig > 0
    sig, V = sig[keep], V[:, keep]
    Y = At.T @ V / np.sqrt((n - ddof) * sig)
    X = _fix_signs(Y / np.sqrt(w)[:, None]).T
    return sig, X


def iterative_eigen(
    alpha: np.ndarray, weights, threshold: float, ddof: int = 0, k0: int = 8
) -> tuple[np.ndarray, np.ndarray]:
    """Leading pixel-basis eigenpairs, ``k`` grown until ``threshold`` energy is covered."""
    A = _flat(alpha)
    n, P = A.shape
    w = _check_weights(weights, P)
    _check_centered(A)
    At = A * np.sqrt(w)
    d = n - ddof
    total = float(np.sum(At * At)) / d
    kmax = min(n, P - 1)
    k = min(k0, kmax)
    while True:
        lam, y = _lanczos(lambda v: At.T @ (At @ v) / d, P, k)
        if k >= kmax or total <= 0 or lam.sum() >= threshold * total:
            break
        k = min(2 * k, kmax)
    keep = lam > 0
    return lam[keep], _fix_signs(y[:, keep] / np.sqrt(w)[:, None]).T


def project_xi(alpha: np.ndarray, lam, X: np.ndarray, weights) -> np.ndarray:
    """``xi[k, j] = <alpha_k, X_j> / sqrt(lam_j)``, shape ``(n, N)``."""
    lam = np.asarray(lam, dtype=float)
    A = _flat(alpha)
    Xf = np.asarray(X, dtype=float).reshape(lam.size, -1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if lam.size and np.any(lam <= 0):
        raise ZeroEigenvalue(f"eigenvalue {int(np.argmax(lam <= 0)) + 1} is zero; cannot invert")
    return (A * w) @ Xf.T / np.sqrt(lam)


def kle_truncation(lam, threshold: float) -> int:
    return energy_truncation(lam, threshold)


def kle_decompose(
    a_i: np.ndarray,
    weights,
    threshold: float = 0.9,
    n_terms: int | None = None,
    method: str = "auto",
    ddof: int = 0,
) -> KleMode:
    """Centre, solve and project one spatial-stochastic mode ``a_i[k, z, x]``."""
    abar, alpha = center_mode(a_i)
    n = alpha.shape[0]
    P = abar.size
    w = np.asarray(weights, dtype=float).reshape(-1)
    total = float(np.sum(_flat(alpha) ** 2 * w)) / (n - ddof)
    if method == "auto":
        method = "dense" if P <= DENSE_LIMIT else "snapshot"
    if method == "dense":
        lam, X = solve_spatial_eigen(spatial_covariance(alpha, w, ddof=ddof))
    elif method == "snapshot":
        lam, X = snapshot_eigen(alpha, w, ddof)
    elif method == "iterative":
        target = 1.0 if n_terms is not None else threshold
        lam, X = iterative_eigen(alpha, w, target, ddof)
    else:
        raise ValueError(f"unknown KLE method {method!r}")
    spectrum = lam[lam > 0]
    if total > 0 and spectrum.size:
        # fractions are taken against the trace so partial spectra are not overstated
        padded = np.append(spectrum, max(total - spectrum.sum(), 0.0))
        N = energy_truncation(padded, threshold) if n_terms is None else int(n_terms)
        N = min(N, spectrum.size)
    else:
        N = 0
    lam_N = spectrum[:N]
    X_N = X[:N]
    xi = project_xi(alpha, lam_N, X_N, w)
    return KleMode(abar, lam_N, X_N.reshape((N,) + abar.shape), xi, spectrum, total)


def kle_all(a: np.ndarray, weights, threshold: float = 0.9, n_terms: int | None = None,
            method: str = "auto", ddof: int = 0) -> KleModel:
    return KleModel([kle_decompose(a_i, weights, threshold, n_terms, method, ddof) for a_i in a])


def reconstruct_alpha(lam, xi, X) -> np.ndarray:
    """``sum_j sqrt(lam_j) xi[:, j] X_j`` for every realization."""
    lam = np.asarray(lam, dtype=float)
    return np.einsum("j,kj,j...->k...", np.sqrt(lam), np.asarray(xi), np.asarray(X))
