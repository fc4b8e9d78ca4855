"""Scalar local level (random walk plus noise) model.

Timing convention, used consistently by the simulator, the Kalman
recursions, and the particle filters: x_1 ~ Normal(init_mean, init_var),
x_t = x_{t-1} + eta_t with eta_t ~ Normal(0, state_var) for t >= 2, and
y_t = x_t + eps_t with eps_t ~ Normal(0, obs_var).  The first innovation
is applied between t=1 and t=2.

Variances may be declared "unknown" by attaching an inverse-gamma prior;
every operation in this package that needs concrete variances (simulation,
Kalman recursions, the bootstrap filter) validates and refuses such specs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .dataset import Dataset
from .errors import ValidationError

__all__ = ["VariancePrior", "LocalLevelSpec", "simulate_local_level_data"]


@dataclass(frozen=True)
class VariancePrior:
    """Inverse-gamma prior (shape, scale) for a variance left unknown."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (np.isfinite(self.shape) and self.shape > 0):
            raise ValidationError(f"inverse-gamma shape must be positive, got {self.shape}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValidationError(f"inverse-gamma scale must be positive, got {self.scale}")


@dataclass(frozen=True)
class LocalLevelSpec:
    obs_var: Union[float, VariancePrior]
    state_var: Union[float, VariancePrior]
    init_mean: float = 0.0
    init_var: float = 1.0

    def __post_init__(self):
        for name in ("obs_var", "state_var"):
            value = getattr(self, name)
            if isinstance(value, VariancePrior):
                continue
            if not (np.isfinite(value) and value >= 0):
                raise ValidationError(f"{name} must be a nonnegative real, got {value}")
            if name == "obs_var" and value <= 0:
                raise ValidationError(f"obs_var must be strictly positive, got {value}")
        if not np.isfinite(self.init_mean):
            raise ValidationError(f"init_mean must be finite, got {self.init_mean}")
        if not (np.isfinite(self.init_var) and self.init_var > 0):
            raise ValidationError(f"init_var must be strictly positive, got {self.init_var}")

    @property
    def has_fixed_variances(self) -> bool:
        return not (
            isinstance(self.obs_var, VariancePrior)
            or isinstance(self.state_var, VariancePrior)
        )

    def require_fixed_variances(self, operation: str) -> tuple[float, float]:
        if not self.has_fixed_variances:
            raise ValidationError(
                f"{operation} requires fixed variances; got an unknown-variance spec"
            )
        return float(self.obs_var), float(self.state_var)


def simulate_local_level_data(spec: LocalLevelSpec, T: int, seed: int) -> Dataset:
    """Simulate a latent path and observations; deterministic given the seed."""
    if T < 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    obs_var, state_var = spec.require_fixed_variances("simulate_local_level_data")
    rng = np.random.default_rng(seed)
    x = np.empty(T)
    x[0] = rng.normal(spec.init_mean, np.sqrt(spec.init_var))
    if T > 1:
        x[1:] = np.sqrt(state_var) * rng.standard_normal(T - 1)
        np.cumsum(x, out=x)
    y = x + np.sqrt(obs_var) * rng.standard_normal(T)
    return Dataset(observations=y, true_params=spec, true_path=x)
