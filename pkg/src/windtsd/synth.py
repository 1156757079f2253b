"""Reduced model assembly and synthetic wind generation.

A synthetic day is

    v(t, x) = vbar(x) + sum_i a_i(x) T_i(t),
    a_i(x)  = abar_i(x) + sum_j sqrt(lam_ij) xi_ij X_ij(x),

with every ``xi_ij`` drawn independently from its KDE.

Seeding: realization ``r`` of an ensemble with master seed ``s`` uses seed
``derive_seed(s, r)``; inside a realization the draw for term ``(i, j)``
comes from ``numpy.random.SeedSequence(seed, spawn_key=(i, j))``. Both are
NumPy's SeedSequence hash mixing, so streams are reproducible and
independent across terms and realizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bd import BdModel
from .density import KdeModel, sample
from .errors import ShapeMismatch
from .ingest import SnapshotGrid, VelocityEnsemble
from .kle import KleModel


@dataclass
class ModeTerms:
    abar: np.ndarray  # (nz, nx)
    lam: np.ndarray  # (N,)
    X: np.ndarray  # (N, nz, nx)
    kdes: list[KdeModel]
    total_energy: float = 0.0

    @property
    def N(self) -> int:
        return self.lam.size

    @property
    def xi_observations(self) -> np.ndarray:
        if not self.kdes:
            return np.zeros((0, 0))
        return np.stack([k.observations for k in self.kdes], axis=1)


@dataclass
class ReducedModel:
    grid: SnapshotGrid
    vbar: np.ndarray
    mu: np.ndarray  # full temporal spectrum
    T: np.ndarray  # (M, n_intervals)
    modes: list[ModeTerms]
    inner_product: int = 0
    config: dict[str, str] = field(default_factory=dict)
    source_hash: str = ""
    temporal_covariance: np.ndarray | None = None

    @property
    def M(self) -> int:
        return self.T.shape[0]

    @property
    def n_intervals(self) -> int:
        return self.T.shape[1]

    @property
    def n_terms(self) -> list[int]:
        return [m.N for m in self.modes]

    @property
    def n_stochastic_terms(self) -> int:
        return sum(self.n_terms)

    def energy_fractions(self) -> np.ndarray:
        total = self.mu.sum()
        return self.mu / total if total > 0 else np.zeros_like(self.mu)


def build_model(
    bd: BdModel,
    kle: KleModel,
    kdes: Sequence[Sequence[KdeModel]],
    grid: SnapshotGrid,
    vbar: np.ndarray,
    **meta,
) -> ReducedModel:
    vbar = np.asarray(vbar, dtype=float)
    if vbar.shape != grid.shape:
        raise ShapeMismatch(f"mean field {vbar.shape} does not match grid {grid.shape}")
    if len(kle.modes) != bd.M or len(kdes) != bd.M:
        raise ShapeMismatch(f"{bd.M} temporal modes but {len(kle.modes)} KLE bundles, {len(kdes)} KDE sets")
    modes = []
    for i, (km, kd) in enumerate(zip(kle.modes, kdes)):
        if km.abar.shape != grid.shape or km.X.shape[1:] != grid.shape:
            raise ShapeMismatch(f"mode {i + 1}: spatial functions do not match grid {grid.shape}")
        if len(kd) != km.N:
            raise ShapeMismatch(f"mode {i + 1}: {km.N} KLE terms but {len(kd)} densities")
        modes.append(ModeTerms(km.abar, km.lam, km.X, list(kd), km.total_energy))
    T = np.asarray(bd.T)[: bd.M]
    return ReducedModel(grid, vbar, np.asarray(bd.mu), T, modes, bd.inner_product, **meta)


def derive_seed(master: int, index: int) -> int:
    """Seed of realization ``index`` under master seed ``master``."""
    ss = np.random.SeedSequence(master, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def draw_xi(model: ReducedModel, seed: int) -> list[np.ndarray]:
    out = []
    for i, mode in enumerate(model.modes):
        xi = np.empty(mode.N)
        for j, kde in enumerate(mode.kdes):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, j)))
            xi[j] = sample(kde, rng, 1)[0]
        out.append(xi)
    return out


def spatial_modes(model: ReducedModel, xi: Sequence[np.ndarray]) -> np.ndarray:
    """``a_i(x) = abar_i + sum_j sqrt(lam_ij) xi_ij X_ij``, shape ``(M, nz, nx)``."""
    a = np.empty((model.M,) + model.grid.shape)
    for i, (mode, x) in enumerate(zip(model.modes, xi)):
        x = np.asarray(x, dtype=float)
        if x.shape != (mode.N,):
            raise ShapeMismatch(f"mode {i + 1}: expected {mode.N} xi values, got {x.shape}")
        a[i] = mode.abar + np.tensordot(np.sqrt(mode.lam) * x, mode.X, axes=1)
    return a


def realization_from_xi(model: ReducedModel, xi: Sequence[np.ndarray]) -> np.ndarray:
    """Deterministic day ``(n_intervals, nz, nx)`` for given ``xi`` values."""
    a = spatial_modes(model, xi)
    return model.vbar + np.tensordot(model.T.T, a, axes=1)


def generate_realization(model: ReducedModel, seed: int) -> np.ndarray:
    return realization_from_xi(model, draw_xi(model, seed))


def generate_ensemble(model: ReducedModel, n: int, seed: int) -> VelocityEnsemble:
    data = np.empty((n, model.n_intervals) + model.grid.shape)
    for r in range(n):
        data[r] = generate_realization(model, derive_seed(seed, r))
    return VelocityEnsemble(data, model.grid)


def training_ensemble(model: ReducedModel) -> VelocityEnsemble:
    """Rebuild every training day from its projected xi observations."""
    obs = [m.xi_observations for m in model.modes]
    n = next((o.shape[0] for o in obs if o.size), 0)
    if n == 0:
        raise ShapeMismatch("model stores no xi observations")
    data = np.empty((n, model.n_intervals) + model.grid.shape)
    for r in range(n):
        data[r] = realization_from_xi(model, [o[r] if o.size else np.zeros(0) for o in obs])
    return VelocityEnsemble(data, model.grid)
