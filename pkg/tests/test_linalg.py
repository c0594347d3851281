import numpy as np
import pytest
from hypothesis import given, strategies as st

from settomo.linalg import (
    DensityMatrix, PureStateVector, eig_hermitian, ket, partial_trace,
    project_subsystems, project_to_physical, sqrt_psd, tensor,
)
from conftest import random_density


def brute_partial_trace(rho, dims, keep):
    # Explicit index loops; independent of the reshape/einsum implementation.
    n = len(dims)
    keep = sorted(keep)
    traced = [i for i in range(n) if i not in keep]
    kd = [dims[i] for i in keep]
    td = [dims[i] for i in traced]
    out = np.zeros((int(np.prod(kd)), int(np.prod(kd))), dtype=complex)
    for a in np.ndindex(*kd):
        for b in np.ndindex(*kd):
            s = 0
            for t in np.ndindex(*td) if td else [()]:
                ia, ib = [0] * n, [0] * n
                for k, i in enumerate(keep):
                    ia[i], ib[i] = a[k], b[k]
                for k, i in enumerate(traced):
                    ia[i] = ib[i] = t[k]
                s += rho[np.ravel_multi_index(ia, dims), np.ravel_multi_index(ib, dims)]
            out[np.ravel_multi_index(a, kd), np.ravel_multi_index(b, kd)] = s
    return out


def test_tensor_of_basis_kets():
    s = tensor(ket(0, dims=(2,)), ket(1, dims=(2,)))
    assert s.dims == (2, 2)
    assert np.allclose(s.amplitudes, [0, 1, 0, 0])


def test_tensor_of_density_matrices_concatenates_dims():
    a = DensityMatrix(np.eye(2) / 2, (2,))
    b = DensityMatrix(np.diag([1.0, 0, 0]), (3,))
    c = tensor(a, b)
    assert c.dims == (2, 3)
    assert np.allclose(c.matrix, np.kron(a.matrix, b.matrix))


def test_tensor_rejects_mixed_kinds():
    with pytest.raises(TypeError):
        tensor(ket(0, dims=(2,)), DensityMatrix(np.eye(2) / 2, (2,)))


def test_pure_state_norm_checked():
    with pytest.raises(ValueError):
        PureStateVector([1.0, 1.0], (2,))
    assert np.isclose(np.linalg.norm(PureStateVector.normalized([1.0, 1.0], (2,)).amplitudes), 1)


@pytest.mark.parametrize("bad", [
    np.array([[0.5, 0.1], [0.2, 0.5]]),   # not Hermitian
    np.diag([0.6, 0.6]),                   # trace != 1
    np.diag([1.2, -0.2]),                  # negative eigenvalue
])
def test_density_matrix_validation(bad):
    with pytest.raises(ValueError):
        DensityMatrix(bad, (2,))


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(0)
    a, b = random_density(rng, 2), random_density(rng, 3)
    rho = DensityMatrix(np.kron(a, b), (2, 3))
    assert np.allclose(partial_trace(rho, [0]).matrix, a, atol=1e-12)
    assert np.allclose(partial_trace(rho, [1]).matrix, b, atol=1e-12)


def test_bell_state_reduces_to_maximally_mixed():
    bell = PureStateVector(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))
    assert np.allclose(partial_trace(bell, [0]).matrix, np.eye(2) / 2)


@given(seed=st.integers(0, 2**32 - 1),
       keep=st.sets(st.integers(0, 2), min_size=1, max_size=2))
def test_partial_trace_matches_brute_force(seed, keep):
    rng = np.random.default_rng(seed)
    dims = (2, 3, 2)
    rho = random_density(rng, 12)
    got = partial_trace(DensityMatrix(rho, dims), keep).matrix
    assert np.allclose(got, brute_partial_trace(rho, dims, keep), atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_ket_and_matrix_paths_agree(seed):
    rng = np.random.default_rng(seed)
    dims = (2, 2, 3)
    v = rng.normal(size=12) + 1j * rng.normal(size=12)
    psi = PureStateVector.normalized(v, dims)
    for keep in ([0], [1, 2], [0, 2]):
        a = partial_trace(psi, keep).matrix
        b = partial_trace(psi.density_matrix(), keep).matrix
        assert np.allclose(a, b, atol=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_partial_trace_preserves_trace_and_positivity(seed):
    rng = np.random.default_rng(seed)
    red = partial_trace(DensityMatrix(random_density(rng, 8), (2, 2, 2)), [1])
    assert np.isclose(np.trace(red.matrix).real, 1.0)
    assert np.linalg.eigvalsh(red.matrix).min() > -1e-12


def test_partial_trace_bad_keep():
    rho = DensityMatrix(np.eye(4) / 4, (2, 2))
    with pytest.raises(ValueError):
        partial_trace(rho, [2])
    with pytest.raises(ValueError):
        partial_trace(rho, [])


def test_project_subsystems():
    psi = tensor(ket(1, dims=(2,)), PureStateVector(np.array([1, 1j]) / np.sqrt(2), (2,)))
    out = project_subsystems(psi, {0: 1})
    assert out.dims == (2,)
    assert np.allclose(out.amplitudes, np.array([1, 1j]) / np.sqrt(2))
    with pytest.raises(ValueError):
        project_subsystems(psi, {0: 0})


@given(seed=st.integers(0, 2**32 - 1))
def test_eig_hermitian_reconstructs(seed):
    rng = np.random.default_rng(seed)
    m = random_density(rng, 4) - 0.1 * np.eye(4)
    w, v = eig_hermitian(m)
    assert np.all(np.diff(w) <= 1e-14)
    assert np.allclose((v * w) @ v.conj().T, m, atol=1e-12)


def test_eig_hermitian_rejects_nonhermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


@given(seed=st.integers(0, 2**32 - 1))
def test_sqrt_psd_squares_back(seed):
    m = random_density(np.random.default_rng(seed), 4, rank=2)
    s = sqrt_psd(m)
    assert np.allclose(s @ s, m, atol=1e-10)


def test_sqrt_psd_rejects_negative():
    with pytest.raises(ValueError):
        sqrt_psd(np.diag([1.0, -0.1]))


def test_project_to_physical_clips():
    m = np.diag([0.7, 0.4, -0.1, 0.0])
    out = project_to_physical(m)
    assert np.isclose(np.trace(out).real, 1.0)
    assert np.linalg.eigvalsh(out).min() >= 0
