import random
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from settomo.linalg import DensityMatrix, project_to_physical
from settomo.measurement import MeasurementRecord, ProtocolConfig, noiseless_records, simulate_qst, simulate_set
from settomo.metrics import fidelity, purity
from settomo.states import MixedStateSpec, SourceConfig, hyper_state_kappa, mixed_state, path_state, pol_state
from settomo.tomography import (
    N_PARAMS, _collect, _objective, linear_inversion, log_likelihood, mle_reconstruct,
    params_from_rho, params_to_rho, resample_uncertainty,
)
from conftest import random_density


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()


def check_physical(rho):
    m = rho.matrix
    assert np.allclose(m, m.conj().T, atol=1e-12)
    assert abs(np.trace(m).real - 1) < 1e-10
    assert np.linalg.eigvalsh(m).min() > -1e-9


def test_linear_inversion_of_white_noise():
    rho = DensityMatrix(np.eye(4) / 4, (2, 2))
    assert np.allclose(linear_inversion(noiseless_records(rho, "path", 1e4)), np.eye(4) / 4, atol=1e-10)


def test_linear_inversion_of_bell_state():
    psi = pol_state(0)
    got = linear_inversion(noiseless_records(psi.density_matrix(), "polarization", 1e6))
    assert np.allclose(got, psi.density_matrix().matrix, atol=1e-9)


@given(seed=st.integers(0, 2**32 - 1))
def test_linear_inversion_exact_on_noiseless_data(seed):
    rho = random_density(np.random.default_rng(seed))
    got = linear_inversion(noiseless_records(DensityMatrix(rho, (2, 2)), "polarization", 1000.0))
    assert np.allclose(got, rho, atol=1e-10)


def test_linear_inversion_goes_unphysical_at_low_counts():
    # About 50 counts per setting at 1 s integration for a Bell state.
    bell = pol_state(0).density_matrix()
    cfg = ProtocolConfig(qst_duration_per_setting=1.0)
    mins = [np.linalg.eigvalsh(linear_inversion(simulate_qst(bell, replace(cfg, rng_seed=s), "polarization"))).min()
            for s in range(100)]
    assert min(mins) < 0


def test_incomplete_or_empty_records_rejected():
    recs = noiseless_records(pol_state(0).density_matrix(), "polarization", 100.0)
    with pytest.raises(ValueError, match="missing"):
        linear_inversion(recs[:-1])
    zeros = [replace(r, value=0) for r in recs]
    with pytest.raises(ValueError):
        mle_reconstruct(zeros)
    with pytest.raises(ValueError):
        mle_reconstruct([])


def test_cholesky_parametrization_is_physical():
    rng = np.random.default_rng(3)
    for _ in range(50):
        rho = params_to_rho(rng.normal(size=N_PARAMS))
        check_physical(DensityMatrix(rho, (2, 2)))
    target = random_density(rng)
    assert np.allclose(params_to_rho(params_from_rho(target, floor=0.0)), target, atol=1e-12)


def test_analytic_gradient():
    from scipy.optimize import approx_fprime
    rho = mixed_state(MixedStateSpec(0.8))
    data = _collect(simulate_qst(rho, ProtocolConfig(rng_seed=2), "path"))
    t = np.random.default_rng(0).normal(size=N_PARAMS)
    f, g = _objective(t, data, 1e4)
    num = approx_fprime(t, lambda x: _objective(x, data, 1e4)[0], 1e-7)
    assert np.allclose(g, num, rtol=1e-4, atol=1e-5)


@pytest.mark.parametrize("psi", [pol_state(0), path_state(0)])
def test_mle_recovers_pure_state(psi):
    res = mle_reconstruct(noiseless_records(psi.density_matrix(), "path", 1e6))
    assert res.converged and res.method == "mle"
    assert fidelity(res.rho, psi) >= 0.9999
    check_physical(res.rho)


def test_mle_recovers_mixed_state_purity():
    rho = mixed_state(MixedStateSpec(0.9))
    recs = simulate_qst(rho, ProtocolConfig(qst_duration_per_setting=1000.0, rng_seed=4), "path")
    assert abs(purity(mle_reconstruct(recs).rho) - 0.905) < 0.005


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1))
def test_mle_matches_linear_inversion_on_noiseless_full_rank(seed):
    rho = random_density(np.random.default_rng(seed))
    recs = noiseless_records(DensityMatrix(rho, (2, 2)), "polarization", 1e5)
    res = mle_reconstruct(recs)
    assert trace_distance(res.rho.matrix, linear_inversion(recs)) < 1e-6


@settings(max_examples=15)
@given(seed=st.integers(0, 2**32 - 1), dur=st.sampled_from([1.0, 5.0, 60.0]))
def test_mle_beats_clamped_linear_inversion(seed, dur):
    rho = DensityMatrix(random_density(np.random.default_rng(seed), rank=2), (2, 2))
    recs = simulate_qst(rho, ProtocolConfig(qst_duration_per_setting=dur, rng_seed=seed), "polarization")
    res = mle_reconstruct(recs)
    check_physical(res.rho)
    clamped = project_to_physical(linear_inversion(recs))
    assert res.log_likelihood >= log_likelihood(recs, clamped) - 1e-9


def test_mle_is_permutation_invariant():
    recs = simulate_qst(mixed_state(MixedStateSpec(0.7)), ProtocolConfig(rng_seed=9), "path")
    shuffled = list(recs)
    random.Random(0).shuffle(shuffled)
    a, b = mle_reconstruct(recs).rho.matrix, mle_reconstruct(shuffled).rho.matrix
    assert np.allclose(a, b, atol=1e-9)


def test_mle_independent_of_starting_point():
    recs = simulate_qst(pol_state(0).density_matrix(), ProtocolConfig(rng_seed=1), "polarization")
    default = mle_reconstruct(recs)
    from_li = mle_reconstruct(recs, init=params_from_rho(linear_inversion(recs)))
    from_white = mle_reconstruct(recs, init=params_from_rho(np.eye(4) / 4))
    for other in (from_li, from_white):
        assert abs(fidelity(default.rho, pol_state(0)) - fidelity(other.rho, pol_state(0))) < 1e-6
    with pytest.raises(ValueError):
        mle_reconstruct(recs, init=np.zeros(3))


def test_mle_reports_nonconvergence():
    recs = simulate_qst(pol_state(0).density_matrix(), ProtocolConfig(rng_seed=1), "polarization")
    res = mle_reconstruct(recs, max_iter=2)
    assert not res.converged
    check_physical(res.rho)


def test_mle_on_set_records():
    full = hyper_state_kappa(SourceConfig(kappa_bins=5, kappa_phase_gradient=3.0))
    res = mle_reconstruct(simulate_set(full, ProtocolConfig(rng_seed=3), "polarization"))
    assert res.converged
    assert fidelity(res.rho, pol_state(0)) > 0.99


def test_resampling_std_shrinks_with_counts():
    bell = pol_state(0).density_matrix()
    stds = [resample_uncertainty(simulate_qst(bell, ProtocolConfig(qst_duration_per_setting=d, rng_seed=3),
                                              "polarization"), 60, seed=1)[1]
            for d in (1.0, 100.0)]
    ratio = stds[1] / stds[0]
    assert 0.05 < ratio < 0.2


def test_resampling_is_deterministic_and_parallel_safe():
    recs = simulate_qst(mixed_state(MixedStateSpec(0.9)), ProtocolConfig(rng_seed=2), "path")
    a = resample_uncertainty(recs, 2, seed=7)
    assert a == resample_uncertainty(recs, 2, seed=7)
    assert a == resample_uncertainty(recs, 2, seed=7, n_jobs=2)
    assert a != resample_uncertainty(recs, 2, seed=8)
    with pytest.raises(ValueError):
        resample_uncertainty(recs, 1)


def test_resampling_vector_metric():
    recs = simulate_qst(mixed_state(MixedStateSpec(0.9)), ProtocolConfig(rng_seed=2), "path")
    mean, std = resample_uncertainty(recs, 4, metric_fn=lambda r: np.diag(r.matrix).real, seed=0)
    assert mean.shape == std.shape == (4,)


@pytest.mark.slow
def test_default_rates_give_three_permille_purity_error():
    # Path state of purity 0.909 measured at the default QST settings.
    v = np.sqrt(2 * 0.909 - 1)
    recs = simulate_qst(mixed_state(MixedStateSpec(v)), ProtocolConfig(rng_seed=0), "path")
    _, std = resample_uncertainty(recs, 200, seed=0)
    assert 0.002 < std < 0.004
