"""Shared experiment panels, computed once per session.

The expensive acceptance-scale panels double as inputs to unit-level
oracle checks, so they live here with the wall time of each computation
recorded for the runtime criteria.
"""

import time

import numpy as np
import pytest

from smclab import (
    LocalLevelSpec,
    MixtureModelSpec,
    MixtureParams,
    ResamplePolicy,
    enumerate_mixture_log_evidence,
    kalman_log_evidence,
    run_bootstrap_locallevel,
    run_pl_mixture,
    simulate_local_level_data,
    simulate_mixture_data,
)

MIXTURE_SPEC = MixtureModelSpec(K=2, dirichlet_weight=1.0, nig_m0=0.0,
                                nig_kappa0=1.0, nig_a0=2.0, nig_b0=2.0)
LOCALLEVEL_SPEC = LocalLevelSpec(obs_var=1.0, state_var=0.5, init_mean=0.0, init_var=1.0)


@pytest.fixture(scope="session")
def mixture_toy():
    """T=5 toy dataset (separation 3) with its exact enumeration evidence."""
    params = MixtureParams([0.5, 0.5], [0.0, 3.0], [1.0, 1.0])
    data = simulate_mixture_data(MIXTURE_SPEC, params, 5, 20100603)
    return {
        "spec": MIXTURE_SPEC,
        "data": data,
        "enum": enumerate_mixture_log_evidence(MIXTURE_SPEC, data),
    }


@pytest.fixture(scope="session")
def pl_panel_100k(mixture_toy):
    """50-seed panel of the sufficient-statistic filter at N=1e5 on the toy data."""
    start = time.perf_counter()
    runs = [
        run_pl_mixture(mixture_toy["spec"], mixture_toy["data"], 10**5, 2000 + i)
        for i in range(50)
    ]
    elapsed = time.perf_counter() - start
    return {
        "runs": runs,
        "evidences": np.array([r.log_evidence for r in runs]),
        "seconds": elapsed,
        **mixture_toy,
    }


@pytest.fixture(scope="session")
def bootstrap_panel_t100():
    """50-seed bootstrap panel, T=100, N=1e4, with the Kalman oracle."""
    data = simulate_local_level_data(LOCALLEVEL_SPEC, 100, 314159)
    start = time.perf_counter()
    runs = [run_bootstrap_locallevel(LOCALLEVEL_SPEC, data, 10**4, 1000 + i) for i in range(50)]
    elapsed = time.perf_counter() - start
    return {
        "spec": LOCALLEVEL_SPEC,
        "data": data,
        "runs": runs,
        "evidences": np.array([r.log_evidence for r in runs]),
        "kalman": kalman_log_evidence(LOCALLEVEL_SPEC, data),
        "seconds": elapsed,
    }


@pytest.fixture(scope="session")
def locallevel_degeneracy_panel():
    """50-seed bootstrap panel, T=1000, N=100, every-step systematic resampling."""
    data = simulate_local_level_data(LOCALLEVEL_SPEC, 1000, 271828)
    policy = ResamplePolicy(scheme="systematic", trigger="always")
    start = time.perf_counter()
    runs = [
        run_bootstrap_locallevel(LOCALLEVEL_SPEC, data, 100, 5000 + i, policy=policy)
        for i in range(50)
    ]
    elapsed = time.perf_counter() - start
    return {"spec": LOCALLEVEL_SPEC, "data": data, "runs": runs, "seconds": elapsed}
