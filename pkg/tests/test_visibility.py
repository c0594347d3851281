import numpy as np
import pytest
from hypothesis import given, strategies as st

from settomo.visibility import (
    MEASURED_BS_INTENSITIES, BeamSplitter, bs_table, check_purity_consistency, purity_bound,
    sweep_visibility_1q, sweep_visibility_2q, table_bounds, visibility_1q, visibility_2q,
)

splitters = st.floats(0.0, np.pi / 2).map(lambda a: BeamSplitter(abs(np.sin(a)), abs(np.cos(a))))


def test_lossless_condition():
    with pytest.raises(ValueError):
        BeamSplitter(0.5, 0.5)
    with pytest.raises(ValueError):
        BeamSplitter(-0.6, 0.8)
    assert np.allclose(BeamSplitter(0.6, 0.8).unitary() @ BeamSplitter(0.6, 0.8).unitary().conj().T, np.eye(2))


def test_balanced_gives_full_visibility():
    b = BeamSplitter.balanced()
    assert np.isclose(visibility_1q(b), 1.0) and np.isclose(visibility_2q(b, b), 1.0)
    assert visibility_1q(BeamSplitter(0.0, 1.0)) == 0.0


def test_single_splitter_example():
    bs = BeamSplitter.from_intensities(0.42, 0.58)
    assert abs(visibility_1q(bs) - 2 * np.sqrt(0.42 * 0.58)) < 1e-15
    assert abs(visibility_1q(bs) - 0.98712) < 1e-5
    assert abs(sweep_visibility_1q(bs) - visibility_1q(bs)) < 1e-10


@pytest.mark.parametrize("pol,v,bound", [("H", 0.966701, 0.96725), ("V", 0.914690, 0.91833)])
def test_table_visibilities_and_bounds(pol, v, bound):
    t = bs_table()
    b1, b2 = t[("lambda1", pol)], t[("lambda2", pol)]
    assert abs(visibility_2q(b1, b2) - v) < 1e-6
    assert abs(sweep_visibility_2q(b1, b2) - visibility_2q(b1, b2)) < 1e-10
    assert abs(purity_bound(visibility_2q(b1, b2)) - bound) < 5e-5
    assert abs(table_bounds()[pol]["purity_bound"] - bound) < 5e-5


@given(bs=splitters)
def test_one_qubit_formula_matches_sweep(bs):
    assert abs(sweep_visibility_1q(bs, samples=512) - visibility_1q(bs)) < 1e-10


@given(b1=splitters, b2=splitters)
def test_two_qubit_formula_matches_sweep(b1, b2):
    if b1.t * b2.t + b1.r * b2.r < 1e-3:
        return  # no light reaches the port; visibility is 0/0
    assert abs(sweep_visibility_2q(b1, b2, samples=512) - visibility_2q(b1, b2)) < 1e-10


@given(bs=splitters)
def test_identical_splitters_reduce(bs):
    t, r = bs.t, bs.r
    assert abs(visibility_2q(bs, bs) - (1 - (t**2 - r**2) ** 2 / (t**4 + r**4))) < 1e-12
    assert 0 <= visibility_2q(bs, bs) <= 1 + 1e-15


def test_purity_bound_domain():
    assert purity_bound(1.0) == 1.0 and purity_bound(0.0) == 0.5
    with pytest.raises(ValueError):
        purity_bound(1.01)


@pytest.mark.parametrize("measured,sigma,bound,ok", [
    (0.909, 0.003, 0.96725, True),
    (0.886, 0.001, 0.91833, True),
    (0.99, 0.001, 0.918, False),
])
def test_consistency_check(measured, sigma, bound, ok):
    rep = check_purity_consistency(measured, bound, sigma)
    assert rep["compatible"] is ok
    assert np.isclose(rep["margin"], bound - (measured - 2 * sigma))


def test_table_keys():
    assert set(bs_table()) == set(MEASURED_BS_INTENSITIES)
    with pytest.raises(ValueError):
        bs_table({("lambda1", "H"): (0.5, 0.6)})
