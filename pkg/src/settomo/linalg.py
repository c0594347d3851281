"""Small dense complex linear algebra.

States carry their subsystem dimensions so that tensor products, partial
traces and projections can check compatibility. Subsystem order used across
the package is ``[pol1, pol2, path1, path2, kappa1, kappa2]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_CLAMP = 1e-9
PSD_ERROR = 1e-6

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class PureStateVector:
    """Normalized ket over a tensor-product basis."""

    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be positive, got {dims}")
        if amps.size != int(np.prod(dims)):
            raise ValueError(f"{amps.size} amplitudes do not match dims {dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "PureStateVector":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize a zero vector")
        return cls(amps / norm, dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        d = int(np.prod(dims))
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lmin = np.linalg.eigvalsh(m)[0]
        if lmin < -PSD_CLAMP:
            raise ValueError(f"density matrix has negative eigenvalue {lmin!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def ket(*indices: int, dims) -> PureStateVector:
    """Computational basis ket ``|i0 i1 ...>`` for the given dims."""
    dims = tuple(dims)
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    amps[np.ravel_multi_index(indices, dims)] = 1.0
    return PureStateVector(amps, dims)


def tensor(*items):
    """Kronecker product of kets, density matrices or plain arrays.

    Dims are concatenated for the typed objects. All arguments must be the
    same kind.
    """
    if not items:
        raise ValueError("tensor needs at least one argument")
    kinds = {type(x) for x in items}
    if len(kinds) > 1 and not kinds <= {np.ndarray}:
        raise TypeError(f"cannot mix argument kinds {sorted(k.__name__ for k in kinds)}")
    first = items[0]
    if isinstance(first, PureStateVector):
        amps = reduce(np.kron, (x.amplitudes for x in items))
        dims = sum((x.dims for x in items), ())
        return PureStateVector.normalized(amps, dims)
    if isinstance(first, DensityMatrix):
        mat = reduce(np.kron, (x.matrix for x in items))
        dims = sum((x.dims for x in items), ())
        return DensityMatrix(mat, dims)
    return reduce(np.kron, (np.asarray(x) for x in items))


def _check_keep(keep, n):
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    for k in keep:
        if not 0 <= k < n:
            raise ValueError(f"subsystem index {k} out of range for {n} subsystems")
    return keep


def partial_trace(state, keep) -> DensityMatrix:
    """Reduced density matrix on the subsystems in ``keep``.

    ``state`` may be a :class:`DensityMatrix` or a :class:`PureStateVector`;
    for kets the reduction is done on the amplitude tensor, so the full
    density matrix is never formed. Kept subsystems stay in original order.
    """
    n = len(state.dims)
    keep = _check_keep(keep, n)
    traced = [i for i in range(n) if i not in keep]
    kept_dims = tuple(state.dims[i] for i in keep)
    dk = int(np.prod(kept_dims))

    if isinstance(state, PureStateVector):
        psi = state.amplitudes.reshape(state.dims)
        psi = np.transpose(psi, keep + traced).reshape(dk, -1)
        rho = psi @ psi.conj().T
    else:
        t = state.matrix.reshape(state.dims + state.dims)
        perm = keep + traced + [n + i for i in keep] + [n + i for i in traced]
        dt = int(np.prod([state.dims[i] for i in traced])) if traced else 1
        t = np.transpose(t, perm).reshape(dk, dt, dk, dt)
        rho = np.einsum("ajbj->ab", t)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real, kept_dims)


def project_subsystems(state: PureStateVector, fixed: dict[int, int]) -> PureStateVector:
    """Project subsystems onto basis states and renormalize.

    ``fixed`` maps subsystem index to the basis index it is projected onto;
    those subsystems are removed from the result.
    """
    n = len(state.dims)
    if any(not 0 <= i < n for i in fixed):
        raise ValueError("projected subsystem index out of range")
    psi = state.amplitudes.reshape(state.dims)
    index = []
    for i in range(n):
        if i in fixed:
            b = int(fixed[i])
            if not 0 <= b < state.dims[i]:
                raise ValueError(f"basis index {b} out of range for subsystem {i}")
            index.append(b)
        else:
            index.append(slice(None))
    sub = psi[tuple(index)]
    dims = tuple(d for i, d in enumerate(state.dims) if i not in fixed)
    norm = np.linalg.norm(sub)
    if norm < 1e-14:
        raise ValueError("projection has zero norm")
    return PureStateVector(sub.ravel() / norm, dims)


def is_hermitian(m, tol=1e-12) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= tol)


def eig_hermitian(m):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or not is_hermitian(m, tol=HERMITIAN_TOL):
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w[::-1], v[:, ::-1]


def sqrt_psd(m):
    """Principal square root of a positive semidefinite matrix."""
    w, v = eig_hermitian(m)
    if w.min() < -PSD_ERROR:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min()!r})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def project_to_physical(m) -> np.ndarray:
    """Clip negative eigenvalues of a Hermitian matrix and renormalize the trace."""
    w, v = eig_hermitian(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ValueError("matrix has no positive spectral weight")
    w = w / w.sum()
    return (v * w) @ v.conj().T
