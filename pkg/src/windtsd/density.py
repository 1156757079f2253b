"""Gaussian-kernel density estimates for the scalar KLE variables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateModel, TooFewObservations

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class KdeModel:
    observations: np.ndarray
    h: float
    sigma_hat: float

    @property
    def degenerate(self) -> bool:
        """Zero spread: the variable is a point mass at ``location``."""
        return self.sigma_hat == 0.0

    @property
    def location(self) -> float:
        return float(self.observations.mean())

    @property
    def mean(self) -> float:
        return float(self.observations.mean())

    @property
    def variance(self) -> float:
        """Variance of the smoothed distribution: spread of the data plus the kernel's."""
        return float(self.observations.var() + self.h**2)


def silverman_bandwidth(observations, rule: str = "approx") -> float:
    """Silverman's rule of thumb with ``sigma_hat`` the ``N-1`` sample std.

    ``approx`` is ``1.06 sigma N^(-1/5)``; ``exact`` is ``(4 sigma^5 / 3N)^(1/5)``.
    """
    x = np.asarray(observations, dtype=float).reshape(-1)
    if x.size < 2:
        raise TooFewObservations(f"need >= 2 observations, got {x.size}")
    sigma = float(np.std(x, ddof=1))
    if rule == "approx":
        return 1.06 * sigma * x.size ** (-0.2)
    if rule == "exact":
        return (4.0 * sigma**5 / (3.0 * x.size)) ** 0.2
    raise ValueError(f"unknown bandwidth rule {rule!r}")


def fit_kde(observations, rule: str = "approx", h: float | None = None) -> KdeModel:
    x = np.array(observations, dtype=float).reshape(-1)
    if x.size < 2:
        raise TooFewObservations(f"need >= 2 observations, got {x.size}")
    sigma = float(np.std(x, ddof=1))
    if np.all(x == x[0]):
        sigma = 0.0
    if h is None:
        h = silverman_bandwidth(x, rule) if sigma > 0 else 0.0
    x.setflags(write=False)
    return KdeModel(x, float(h), sigma)


def pdf(model: KdeModel, xi) -> np.ndarray:
    """``p(xi) = 1/(N h) sum_i phi((xi - xi_i) / h)``."""
    if model.degenerate or model.h <= 0:
        raise DegenerateModel(f"point mass at {model.location:g}; density undefined")
    q = np.asarray(xi, dtype=float)
    z = (q[..., None] - model.observations) / model.h
    return np.exp(-0.5 * z * z).sum(axis=-1) * _INV_SQRT_2PI / (model.observations.size * model.h)


def cdf(model: KdeModel, xi) -> np.ndarray:
    """Distribution function of the Gaussian mixture (step function when degenerate)."""
    q = np.asarray(xi, dtype=float)
    if model.degenerate or model.h <= 0:
        return (q >= model.location).astype(float)
    return ndtr((q[..., None] - model.observations) / model.h).mean(axis=-1)


def sample(model: KdeModel, seed, count: int) -> np.ndarray:
    """Smoothed bootstrap: a uniformly chosen observation plus ``h`` times a standard normal."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if model.degenerate:
        return np.full(count, model.location)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = rng.integers(model.observations.size, size=count)
    return model.observations[idx] + model.h * rng.standard_normal(count)
