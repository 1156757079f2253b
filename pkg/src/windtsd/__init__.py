"""Low-dimensional stochastic wind models from snapshot ensembles.

Two-stage decomposition (bi-orthogonal decomposition in time, then a
Karhunen-Loeve expansion in space per temporal mode), Gaussian KDE for the
resulting random variables, and synthesis plus spectral diagnostics.
"""

from .bd import (
    BdModel,
    FluctuationEnsemble,
    TemporalCovariance,
    bd_decompose,
    eigendecompose_temporal,
    energy_truncation,
    remove_mean,
    spatial_stochastic_modes,
    temporal_covariance,
)
from .config import PipelineConfig
from .density import KdeModel, fit_kde, pdf, sample, silverman_bandwidth
from .diagnostics import coherence, covariance_error, interval_study, psd
from .ingest import (
    SnapshotGrid,
    TowerSeries,
    VelocityEnsemble,
    assemble_ensemble,
    build_snapshots,
    interpolate_vertical,
    load_tower_csv,
)
from .kle import (
    KleModel,
    SpatialCovariance,
    center_mode,
    kle_decompose,
    kle_truncation,
    project_xi,
    solve_spatial_eigen,
    spatial_covariance,
)
from .modelfile import read_ensemble, read_model, write_ensemble, write_model
from .pipeline import fit_model
from .synth import ReducedModel, build_model, generate_ensemble, generate_realization

__version__ = "0.1.0"
