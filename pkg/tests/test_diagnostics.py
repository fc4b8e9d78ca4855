"""Coalescence counting, path functionals, replication reports."""

import numpy as np
import pytest

from smclab import (
    Genealogy,
    LocalLevelSpec,
    ParticleSet,
    ValidationError,
    distinct_ancestors,
    path_functional_estimate,
    replication_report,
    run_bootstrap_locallevel,
    simulate_local_level_data,
)
from smclab.diagnostics import DiagnosticTrace
from smclab.filters import LocalLevelPayload

from conftest import LOCALLEVEL_SPEC


def _particles(payload, log_weights, n):
    return ParticleSet(
        n_particles=n,
        payload=payload,
        log_weights=np.asarray(log_weights, dtype=float),
        genealogy=Genealogy(n_particles=n),
        t=1,
    )


# ---------------------------------------------------------------------------
# distinct_ancestors
# ---------------------------------------------------------------------------

def test_identity_composition_counts_everyone():
    genealogy = Genealogy(n_particles=6)
    genealogy.append(3, np.array([0, 0, 0, 0, 0, 0]))
    genealogy.horizon = 5
    assert distinct_ancestors(genealogy, 3, 3) == 6
    # no events inside (3, 5]
    assert distinct_ancestors(genealogy, 5, 3) == 6


def test_single_event_full_coalescence():
    genealogy = Genealogy(n_particles=4)
    genealogy.append(2, np.array([0, 0, 0, 0]))
    assert distinct_ancestors(genealogy, 2, 1) == 1


def test_hand_composed_two_event_genealogy():
    genealogy = Genealogy(n_particles=4)
    genealogy.append(2, np.array([0, 1, 1, 3]))
    genealogy.append(3, np.array([0, 1, 1, 2]))
    # compose: roots = first[second] = (0,1,1,3)[(0,1,1,2)] = (0,1,1,1)
    assert distinct_ancestors(genealogy, 3, 1) == 2
    assert distinct_ancestors(genealogy, 3, 2) == 3  # only the later event


def test_out_of_range_times_raise():
    genealogy = Genealogy(n_particles=4)
    genealogy.append(2, np.array([0, 1, 2, 3]))
    with pytest.raises(IndexError):
        distinct_ancestors(genealogy, 1, 2)
    with pytest.raises(IndexError):
        distinct_ancestors(genealogy, 7, 1)
    with pytest.raises(IndexError):
        distinct_ancestors(genealogy, 2, -1)


def test_offline_composition_matches_inloop_trace():
    data = simulate_local_level_data(LOCALLEVEL_SPEC, 150, 321)
    result = run_bootstrap_locallevel(LOCALLEVEL_SPEC, data, 80, 7)
    genealogy = result.final_particles.genealogy
    offline = np.array([distinct_ancestors(genealogy, t, 1) for t in range(1, 151)])
    assert np.array_equal(offline, result.trace.distinct_ancestors_from_1)


# ---------------------------------------------------------------------------
# path_functional_estimate
# ---------------------------------------------------------------------------

def test_equal_weights_constant_value():
    payload = LocalLevelPayload(states=np.zeros(5), path_functional=np.full(5, 7.0))
    particles = _particles(payload, np.full(5, -np.log(5.0)), 5)
    assert path_functional_estimate(particles) == pytest.approx(7.0, abs=1e-12)


def test_point_mass_weights_pick_that_particle():
    payload = LocalLevelPayload(states=np.zeros(2), path_functional=np.array([3.0, 100.0]))
    particles = _particles(payload, np.array([0.0, -np.inf]), 2)
    assert path_functional_estimate(particles) == pytest.approx(3.0, abs=1e-12)


def test_missing_functional_is_a_contract_error():
    particles = _particles(object(), np.zeros(1), 1)
    with pytest.raises(ValidationError):
        path_functional_estimate(particles)


def test_near_noiseless_observations_pin_the_running_sum():
    # tight state noise so the prior proposals can land within the
    # essentially-deterministic observation's tolerance at this N
    spec = LocalLevelSpec(obs_var=1e-12, state_var=0.01, init_mean=0.0, init_var=0.01)
    data = simulate_local_level_data(spec, 40, 99)
    result = run_bootstrap_locallevel(spec, data, 4000, 5)
    estimate = path_functional_estimate(result.final_particles)
    assert estimate == pytest.approx(data.observations.sum(), abs=1e-3)
    assert result.trace.path_functional[-1] == pytest.approx(
        data.observations.sum(), abs=1e-3
    )


# ---------------------------------------------------------------------------
# replication_report
# ---------------------------------------------------------------------------

def _fake_result(log_evidence, T=4, N=8, path=False, seed=0):
    from smclab.filters import RunResult

    trace = DiagnosticTrace(
        ess=np.full(T, float(N)),
        log_evidence_increments=np.full(T, log_evidence / T),
        distinct_ancestors_from_1=np.full(T, N, dtype=np.int64),
        path_functional=np.linspace(0, 1, T) if path else None,
    )
    particles = ParticleSet(
        n_particles=N,
        payload=None,
        log_weights=np.full(N, -np.log(float(N))),
        genealogy=Genealogy(n_particles=N, horizon=T),
        t=T,
    )
    return RunResult(
        trace=trace, final_particles=particles, log_evidence=log_evidence,
        seed=seed, wall_time=0.0,
    )


def test_two_point_statistics():
    report = replication_report([_fake_result(-10.0), _fake_result(-12.0)])
    assert report.log_evidence_mean == pytest.approx(-11.0, abs=1e-12)
    assert report.log_evidence_sd == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert report.log_evidence_se == pytest.approx(1.0, abs=1e-12)
    assert report.log_evidence_se == pytest.approx(
        report.log_evidence_sd / np.sqrt(2), abs=1e-12
    )


def test_identical_results_have_zero_spread():
    report = replication_report([_fake_result(-5.0)] * 4)
    assert report.log_evidence_sd == 0.0
    assert report.log_evidence_se == 0.0


def test_mixed_panels_rejected():
    with pytest.raises(ValidationError):
        replication_report([_fake_result(-1.0, T=4), _fake_result(-1.0, T=5)])
    with pytest.raises(ValidationError):
        replication_report([_fake_result(-1.0, N=8), _fake_result(-1.0, N=9)])
    with pytest.raises(ValidationError):
        replication_report([_fake_result(-1.0, path=True), _fake_result(-1.0, path=False)])
    with pytest.raises(ValidationError):
        replication_report([_fake_result(-1.0)])


def test_kalman_oracle_coverage_on_panel(bootstrap_panel_t100):
    report = replication_report(bootstrap_panel_t100["runs"])
    kalman = bootstrap_panel_t100["kalman"]
    assert (
        report.log_evidence_mean - 3 * report.log_evidence_se
        <= kalman
        <= report.log_evidence_mean + 3 * report.log_evidence_se
    )


# ---------------------------------------------------------------------------
# trace validation
# ---------------------------------------------------------------------------

def test_trace_validation_catches_bad_fields():
    good = DiagnosticTrace(
        ess=np.array([4.0, 3.0]),
        log_evidence_increments=np.zeros(2),
        distinct_ancestors_from_1=np.array([4, 2]),
    )
    good.validate(4)
    bad_ess = DiagnosticTrace(
        ess=np.array([5.0, 3.0]),
        log_evidence_increments=np.zeros(2),
        distinct_ancestors_from_1=np.array([4, 2]),
    )
    with pytest.raises(ValidationError):
        bad_ess.validate(4)
    increasing = DiagnosticTrace(
        ess=np.array([4.0, 3.0]),
        log_evidence_increments=np.zeros(2),
        distinct_ancestors_from_1=np.array([2, 4]),
    )
    with pytest.raises(ValidationError):
        increasing.validate(4)
