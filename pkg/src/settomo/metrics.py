"""Fidelity, purity, concurrence and tangle of reconstructed states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SIGMA_Y, DensityMatrix, PureStateVector, sqrt_psd

METRIC_ROWS = ("F", "Tr(rho^2)", "tau", "C")
_YY = np.kron(SIGMA_Y, SIGMA_Y)


def _matrix(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def fidelity(rho, target: PureStateVector) -> float:
    """``<psi| rho |psi>`` for a pure target."""
    m = _matrix(rho)
    if isinstance(rho, DensityMatrix) and rho.dims != target.dims:
        raise ValueError(f"dims mismatch: {rho.dims} vs {target.dims}")
    if m.shape[0] != target.dim:
        raise ValueError(f"dims mismatch: {m.shape[0]} vs {target.dim}")
    psi = target.amplitudes
    return float(np.clip((psi.conj() @ m @ psi).real, 0.0, 1.0))


def uhlmann_fidelity(rho, sigma) -> float:
    """``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`` for two mixed states."""
    s = sqrt_psd(_matrix(rho))
    inner = s @ _matrix(sigma) @ s
    return float(np.clip(np.trace(sqrt_psd(0.5 * (inner + inner.conj().T))).real ** 2, 0.0, 1.0))


def purity(rho) -> float:
    m = _matrix(rho)
    return float(np.real(np.sum(m * m.T)))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    if isinstance(rho, DensityMatrix) and rho.dims != (2, 2):
        raise ValueError(f"concurrence needs a two-qubit state, got dims {rho.dims}")
    m = _matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 matrix, got {m.shape}")
    r = m @ _YY @ m.conj() @ _YY
    ev = np.sort(np.linalg.eigvals(r).real)[::-1]
    ev = np.where(ev > -1e-10, np.clip(ev, 0.0, None), ev)
    if ev.min() < 0:
        raise ValueError(f"R matrix has negative eigenvalue {ev.min()!r}")
    lam = np.sqrt(ev)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def tangle(rho) -> float:
    return concurrence(rho) ** 2


@dataclass(frozen=True)
class StateMetrics:
    """Point values with optional standard deviations (``None`` if not estimated)."""

    fidelity: float
    purity: float
    tangle: float
    concurrence: float
    fidelity_std: float | None = None
    purity_std: float | None = None
    tangle_std: float | None = None
    concurrence_std: float | None = None

    def rows(self):
        """``(label, value, std)`` in table order."""
        return [
            ("F", self.fidelity, self.fidelity_std),
            ("Tr(rho^2)", self.purity, self.purity_std),
            ("tau", self.tangle, self.tangle_std),
            ("C", self.concurrence, self.concurrence_std),
        ]


def metric_vector(rho, target: PureStateVector) -> np.ndarray:
    return np.array([fidelity(rho, target), purity(rho), tangle(rho), concurrence(rho)])


class _MetricVector:
    # Picklable callable for parallel resampling.
    def __init__(self, target):
        self.target = target

    def __call__(self, rho):
        return metric_vector(rho, self.target)


def state_metrics(rho, target: PureStateVector, std=None) -> StateMetrics:
    f, p, t, c = metric_vector(rho, target)
    if std is None:
        return StateMetrics(f, p, t, c)
    sf, sp, st, sc = (float(x) for x in std)
    return StateMetrics(f, p, t, c, sf, sp, st, sc)


def tangle_matches_concurrence(tau, tau_std, conc, conc_std, n_sigma: float = 1.0) -> bool:
    """Whether ``tau = C^2`` holds within the combined quoted uncertainty."""
    sigma = np.hypot(tau_std, 2 * conc * conc_std)
    return bool(abs(tau - conc**2) <= n_sigma * sigma)
