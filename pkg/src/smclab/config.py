"""Experiment configuration: a single JSON document, validated up front.

The schema (documented in the README):

.. code-block:: json

    {
      "model":     {"kind": "mixture", "K": 2, "dirichlet_weight": 1.0,
                    "m0": 0.0, "kappa0": 1.0, "a0": 2.0, "b0": 2.0}
                   or
                   {"kind": "local_level", "obs_var": 1.0, "state_var": 0.5,
                    "init_mean": 0.0, "init_var": 1.0},
      "dataset":   {"values": [..]} | {"path": "data.csv"}
                   | {"simulate": {"T": 100, "seed": 7, "params": {...}}},
      "algorithm": "bootstrap" | "particle_learning" | "storvik",
      "N": 100, "R": 50, "master_seed": 1,
      "resample":  {"scheme": "systematic",
                    "trigger": "always" | {"ess_fraction": 0.5}},
      "path_functional": "sum_x",
      "baselines": true,
      "output_dir": "out"
    }

Exactly one dataset source must be given.  ``resample`` defaults to the
algorithm's standard trigger (every step for particle learning, ESS < N/2
otherwise) with systematic resampling.  An unknown variance is written as
``{"ig_shape": a, "ig_scale": b}`` in place of the number.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .errors import ValidationError
from .filters import FilterKind, ResamplePolicy
from .local_level import LocalLevelSpec, VariancePrior
from .mixture import MixtureModelSpec, MixtureParams
from .resampling import ResampleScheme

__all__ = ["ExperimentConfig", "load_config", "parse_config"]


@dataclass(frozen=True)
class DatasetSource:
    """Exactly one of inline values, a CSV path, or simulate instructions."""

    values: Optional[tuple] = None
    path: Optional[str] = None
    simulate_T: Optional[int] = None
    simulate_seed: Optional[int] = None
    simulate_params: Optional[MixtureParams] = None


@dataclass(frozen=True)
class ExperimentConfig:
    model: Union[MixtureModelSpec, LocalLevelSpec]
    dataset: DatasetSource
    algorithm: FilterKind
    N: int
    R: int
    master_seed: int
    policy: ResamplePolicy
    path_functional: str = "sum_x"
    baselines: bool = True
    output_dir: Optional[str] = None

    @property
    def is_mixture(self) -> bool:
        return isinstance(self.model, MixtureModelSpec)

    def digest(self) -> str:
        """SHA-256 of the canonical (fully resolved) JSON form."""
        blob = json.dumps(self.to_canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_canonical(self) -> dict:
        if self.is_mixture:
            m = self.model
            model = {
                "kind": "mixture",
                "K": m.K,
                "dirichlet_weight": m.dirichlet_weight,
                "m0": m.nig_m0,
                "kappa0": m.nig_kappa0,
                "a0": m.nig_a0,
                "b0": m.nig_b0,
            }
        else:
            m = self.model

            def var_field(v):
                if isinstance(v, VariancePrior):
                    return {"ig_shape": v.shape, "ig_scale": v.scale}
                return v

            model = {
                "kind": "local_level",
                "obs_var": var_field(m.obs_var),
                "state_var": var_field(m.state_var),
                "init_mean": m.init_mean,
                "init_var": m.init_var,
            }
        ds = self.dataset
        if ds.values is not None:
            dataset = {"values": list(ds.values)}
        elif ds.path is not None:
            dataset = {"path": ds.path}
        else:
            sim = {"T": ds.simulate_T, "seed": ds.simulate_seed}
            if ds.simulate_params is not None:
                sim["params"] = {
                    "weights": ds.simulate_params.weights.tolist(),
                    "means": ds.simulate_params.means.tolist(),
                    "variances": ds.simulate_params.variances.tolist(),
                }
            dataset = {"simulate": sim}
        trigger = (
            "always"
            if self.policy.trigger == "always"
            else {"ess_fraction": self.policy.ess_fraction}
        )
        return {
            "model": model,
            "dataset": dataset,
            "algorithm": self.algorithm.value,
            "N": self.N,
            "R": self.R,
            "master_seed": self.master_seed,
            "resample": {"scheme": self.policy.scheme.value, "trigger": trigger},
            "path_functional": self.path_functional,
            "baselines": self.baselines,
        }


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ValidationError(f"{context}: missing required key {key!r}")
    return mapping[key]


def _parse_model(raw: dict):
    kind = _require(raw, "kind", "model")
    if kind == "mixture":
        return MixtureModelSpec(
            K=int(_require(raw, "K", "model")),
            dirichlet_weight=float(raw.get("dirichlet_weight", 1.0)),
            nig_m0=float(raw.get("m0", 0.0)),
            nig_kappa0=float(raw.get("kappa0", 1.0)),
            nig_a0=float(raw.get("a0", 2.0)),
            nig_b0=float(raw.get("b0", 2.0)),
        )
    if kind == "local_level":

        def var_field(value, name):
            if isinstance(value, dict):
                return VariancePrior(
                    shape=float(_require(value, "ig_shape", name)),
                    scale=float(_require(value, "ig_scale", name)),
                )
            return float(value)

        return LocalLevelSpec(
            obs_var=var_field(_require(raw, "obs_var", "model"), "obs_var"),
            state_var=var_field(_require(raw, "state_var", "model"), "state_var"),
            init_mean=float(raw.get("init_mean", 0.0)),
            init_var=float(raw.get("init_var", 1.0)),
        )
    raise ValidationError(f"model.kind must be 'mixture' or 'local_level', got {kind!r}")


def _parse_dataset(raw: dict, model) -> DatasetSource:
    sources = [k for k in ("values", "path", "simulate") if k in raw]
    if len(sources) != 1:
        raise ValidationError(
            f"dataset must have exactly one of 'values', 'path', 'simulate'; got {sources}"
        )
    if "values" in raw:
        values = tuple(float(v) for v in raw["values"])
        if not values:
            raise ValidationError("dataset.values must be nonempty")
        return DatasetSource(values=values)
    if "path" in raw:
        return DatasetSource(path=str(raw["path"]))
    sim = raw["simulate"]
    T = int(_require(sim, "T", "dataset.simulate"))
    if T < 1:
        raise ValidationError(f"dataset.simulate.T must be >= 1, got {T}")
    seed = int(_require(sim, "seed", "dataset.simulate"))
    params = None
    if isinstance(model, MixtureModelSpec):
        p = _require(sim, "params", "dataset.simulate")
        params = MixtureParams(
            weights=p["weights"], means=p["means"], variances=p["variances"]
        )
        if params.K != model.K:
            raise ValidationError("dataset.simulate.params must match model K")
    return DatasetSource(simulate_T=T, simulate_seed=seed, simulate_params=params)


def _parse_policy(raw: Optional[dict], algorithm: FilterKind) -> ResamplePolicy:
    default_trigger = "always" if algorithm is FilterKind.PARTICLE_LEARNING else "ess"
    if raw is None:
        return ResamplePolicy(trigger=default_trigger)
    scheme = ResampleScheme(raw.get("scheme", "systematic"))
    trigger = raw.get("trigger", default_trigger)
    if isinstance(trigger, dict):
        return ResamplePolicy(
            scheme=scheme, trigger="ess", ess_fraction=float(trigger["ess_fraction"])
        )
    return ResamplePolicy(scheme=scheme, trigger=str(trigger))


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a parsed JSON document into an :class:`ExperimentConfig`."""
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    model = _parse_model(_require(raw, "model", "config"))
    try:
        algorithm = FilterKind(_require(raw, "algorithm", "config"))
    except ValueError as err:
        raise ValidationError(f"unknown algorithm: {raw.get('algorithm')!r}") from err
    if isinstance(model, MixtureModelSpec) and algorithm is FilterKind.BOOTSTRAP:
        raise ValidationError("bootstrap algorithm runs on the local level model")
    if isinstance(model, LocalLevelSpec) and algorithm is not FilterKind.BOOTSTRAP:
        raise ValidationError(f"{algorithm.value} runs on the mixture model")
    dataset = _parse_dataset(_require(raw, "dataset", "config"), model)
    N = int(_require(raw, "N", "config"))
    R = int(_require(raw, "R", "config"))
    master_seed = int(_require(raw, "master_seed", "config"))
    if N < 2:
        raise ValidationError(f"N must be >= 2, got {N}")
    if R < 1:
        raise ValidationError(f"R must be >= 1, got {R}")
    policy = _parse_policy(raw.get("resample"), algorithm)
    path_functional = str(raw.get("path_functional", "sum_x"))
    if path_functional not in ("sum_x", "sum_x2"):
        raise ValidationError(
            f"path_functional must be 'sum_x' or 'sum_x2', got {path_functional!r}"
        )
    return ExperimentConfig(
        model=model,
        dataset=dataset,
        algorithm=algorithm,
        N=N,
        R=R,
        master_seed=master_seed,
        policy=policy,
        path_functional=path_functional,
        baselines=bool(raw.get("baselines", True)),
        output_dir=raw.get("output_dir"),
    )


def load_config(path) -> ExperimentConfig:
    """Read and validate a config JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: invalid JSON ({err})") from err
    return parse_config(raw)
