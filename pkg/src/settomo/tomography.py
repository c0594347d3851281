"""Two-qubit density-matrix reconstruction from 36-setting records.

Linear inversion builds the Pauli-moment estimate and is used as a
diagnostic. The production estimator maximizes the Poisson log-likelihood
over a Cholesky parametrization ``rho = T T^dagger / Tr(T T^dagger)`` with
``T`` lower triangular, which keeps every iterate physical.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import check_grad, minimize

from .linalg import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, project_to_physical
from .measurement import MeasurementRecord, tomography_settings

log = logging.getLogger(__name__)

_PAULIS = (IDENTITY_2, SIGMA_Z, SIGMA_X, SIGMA_Y)
_DIM = 4
_TRIL = np.tril_indices(_DIM, -1)
N_PARAMS = _DIM * _DIM

GTOL = 1e-8
MAX_ITER = 10_000


@dataclass(frozen=True)
class ReconstructionResult:
    rho: DensityMatrix
    log_likelihood: float
    iterations: int
    converged: bool
    method: str
    seed: int | None = None


@dataclass(frozen=True)
class _Data:
    projectors: np.ndarray   # (36, 4, 4)
    flat: np.ndarray         # (36, 16) projectors transposed and flattened, for Tr(P rho)
    counts: np.ndarray       # (36,)
    background: np.ndarray   # (36,) expected non-signal contribution
    basis: np.ndarray        # (36,) basis-pair id 0..8
    signs: np.ndarray        # (36, 2)
    norm: np.ndarray         # (36,) signal total of the setting's basis
    dof: str


def _collect(records) -> _Data:
    """Aggregate records per setting and check coverage of the 36 settings."""
    records = list(records)
    if not records:
        raise ValueError("no records given")
    dofs = {r.dof for r in records}
    if len(dofs) != 1:
        raise ValueError(f"records mix degrees of freedom {sorted(dofs)}")
    dof = dofs.pop()
    settings = tomography_settings(dof)
    pos = {s: i for i, s in enumerate(settings)}
    counts = np.zeros(len(settings))
    background = np.zeros(len(settings))
    seen = np.zeros(len(settings), dtype=bool)
    for r in records:
        i = pos[r.setting]
        counts[i] += r.value
        background[i] += r.background
        seen[i] = True
    if not seen.all():
        missing = [f"({s.s1},{s.s2})" for s, ok in zip(settings, seen) if not ok]
        raise ValueError(f"records do not cover all 36 settings; missing {', '.join(missing)}")
    if counts.sum() <= 0:
        raise ValueError("all counts are zero")

    basis = np.array([3 * s.basis[0] + s.basis[1] for s in settings])
    norm = np.zeros(len(settings))
    for b in range(9):
        sel = basis == b
        total = counts[sel].sum() - background[sel].sum()
        if counts[sel].sum() <= 0:
            raise ValueError(f"basis {b} has zero total counts")
        norm[sel] = max(total, 1e-300)
    projectors = np.array([s.projector() for s in settings])
    return _Data(
        projectors=projectors,
        flat=np.ascontiguousarray(projectors.transpose(0, 2, 1).reshape(len(settings), -1)),
        counts=counts,
        background=background,
        basis=basis,
        signs=np.array([s.signs for s in settings]),
        norm=norm,
        dof=dof,
    )


def linear_inversion(records) -> np.ndarray:
    """Pauli-moment estimate ``1/4 sum_ij <s_i s_j> s_i (x) s_j``.

    Hermitian with unit trace but not necessarily positive.
    """
    data = _collect(records)
    probs = (data.counts - data.background) / data.norm
    moments = np.zeros((4, 4))
    moments[0, 0] = 1.0
    for b in range(9):
        sel = data.basis == b
        i, j = divmod(b, 3)
        s1, s2 = data.signs[sel, 0], data.signs[sel, 1]
        p = probs[sel]
        moments[i + 1, j + 1] = np.sum(s1 * s2 * p)
        # Single-qubit moments averaged over the partner's three bases.
        moments[i + 1, 0] += np.sum(s1 * p) / 3
        moments[0, j + 1] += np.sum(s2 * p) / 3
    rho = sum(moments[a, b] * np.kron(_PAULIS[a], _PAULIS[b]) for a in range(4) for b in range(4)) / 4
    return 0.5 * (rho + rho.conj().T)


def params_to_tmatrix(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    T = np.diag(t[:_DIM]).astype(complex)
    off = t[_DIM:]
    T[_TRIL] = off[0::2] + 1j * off[1::2]
    return T


def tmatrix_to_params(T: np.ndarray) -> np.ndarray:
    low = T[_TRIL]
    off = np.empty(2 * low.size)
    off[0::2], off[1::2] = low.real, low.imag
    return np.concatenate([np.diag(T).real, off])


def params_to_rho(t: np.ndarray) -> np.ndarray:
    T = params_to_tmatrix(t)
    A = T @ T.conj().T
    return A / np.trace(A).real


def params_from_rho(rho: np.ndarray, floor: float = 1e-3) -> np.ndarray:
    """Cholesky parameters of ``rho`` mixed with a little white noise."""
    rho = (1 - floor) * project_to_physical(rho) + floor * np.eye(_DIM) / _DIM
    return tmatrix_to_params(np.linalg.cholesky(rho))


def _mu(data: _Data, rho: np.ndarray) -> np.ndarray:
    p = (data.flat @ rho.ravel()).real
    return data.norm * p + data.background


def log_likelihood(records_or_data, rho) -> float:
    """Poisson log-likelihood ``sum n log mu - mu`` (constant terms dropped)."""
    data = records_or_data if isinstance(records_or_data, _Data) else _collect(records_or_data)
    rho = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    mu = np.maximum(_mu(data, rho), 1e-300)
    return float(np.sum(data.counts * np.log(mu) - mu))


def _objective(t, data: _Data, scale: float):
    """Scaled Poisson deviance and its gradient in the 16 parameters.

    The deviance ``sum n log(n/mu) - (n - mu)`` differs from the negative
    log-likelihood by a data-only constant and is close to zero at the
    optimum, which keeps line searches out of cancellation trouble. A
    quadratic penalty pins ``Tr(T T^dagger)`` to one; it removes the scale
    redundancy without changing ``rho``.
    """
    T = params_to_tmatrix(t)
    A = T @ T.conj().T
    tr = np.trace(A).real
    rho = A / tr
    mu = np.maximum(_mu(data, rho), 1e-300)
    n = data.counts
    pos = n > 0
    nll = (np.sum(n[pos] * np.log(n[pos] / mu[pos])) - np.sum(n - mu)) / scale
    pen = (tr - 1.0) ** 2
    # d(-L)/d rho as a Hermitian matrix, then chain rule through rho = A / tr.
    w = -(n / mu - 1.0) * data.norm / scale
    G = (w @ data.flat).reshape(_DIM, _DIM).T
    H = G / tr
    H[np.diag_indices(_DIM)] += 2.0 * (tr - 1.0) - np.sum(G * rho.T).real / tr
    M = T.conj().T @ H  # dF = 2 Re sum_ij M_ji dT_ij
    grad_T = 2.0 * M.T
    grad = np.concatenate([np.diag(grad_T).real, np.empty(2 * len(_TRIL[0]))])
    low = grad_T[_TRIL]
    grad[_DIM::2] = low.real
    grad[_DIM + 1::2] = -low.imag
    return nll + pen, grad


def mle_reconstruct(records, init=None, max_iter: int = MAX_ITER, seed: int | None = None) -> ReconstructionResult:
    """Maximum-likelihood two-qubit state.

    Parameters
    ----------
    records : sequence of MeasurementRecord
        Must cover all 36 settings of one degree of freedom.
    init : array_like, optional
        Starting Cholesky parameters (length 16). Defaults to the linear
        inversion estimate with negative eigenvalues clipped.

    Returns
    -------
    ReconstructionResult
        ``converged`` is False when the gradient tolerance was not reached
        within ``max_iter`` iterations; no exception is raised in that case.
    """
    data = _collect(records)
    scale = max(data.counts.sum(), 1.0)
    t0 = params_from_rho(linear_inversion(records)) if init is None else np.asarray(init, dtype=float)
    if t0.shape != (N_PARAMS,):
        raise ValueError(f"init must have {N_PARAMS} parameters")

    fun = lambda t: _objective(t, data, scale)[0]  # noqa: E731
    jac = lambda t: _objective(t, data, scale)[1]  # noqa: E731
    gerr = check_grad(fun, jac, t0, epsilon=1e-7)
    if gerr > 1e-4 * max(1.0, np.linalg.norm(jac(t0))):
        log.warning("analytic gradient check failed (error %.3g); using Nelder-Mead", gerr)
        res = minimize(fun, t0, method="Nelder-Mead",
                       options={"maxiter": max_iter, "xatol": 1e-10, "fatol": 1e-14})
        converged = bool(res.success)
    else:
        res = minimize(_objective, t0, args=(data, scale), jac=True, method="BFGS",
                       options={"gtol": GTOL, "maxiter": max_iter})
        nit = res.nit
        # BFGS can stop on precision loss just short of the tolerance; a
        # restart with a fresh Hessian estimate usually finishes the job.
        for _ in range(3):
            if np.max(np.abs(res.jac)) < GTOL or nit >= max_iter:
                break
            res = minimize(_objective, res.x, args=(data, scale), jac=True, method="BFGS",
                           options={"gtol": GTOL, "maxiter": max_iter - nit})
            nit += res.nit
        res.nit = nit
        converged = bool(np.max(np.abs(res.jac)) < GTOL)

    rho = params_to_rho(res.x)
    rho = DensityMatrix(0.5 * (rho + rho.conj().T), (2, 2))
    return ReconstructionResult(
        rho=rho,
        log_likelihood=log_likelihood(data, rho),
        iterations=int(res.nit),
        converged=converged,
        method="mle",
        seed=seed,
    )


def resample_records(records, rng: np.random.Generator) -> list[MeasurementRecord]:
    """Synthetic record set drawn around the observed values.

    QST counts are redrawn as Poisson(observed); SET intensities as
    Normal(observed, noise * observed), clipped at zero.
    """
    out = []
    for r in records:
        if r.protocol == "QST":
            v = int(rng.poisson(r.value))
        else:
            sigma = r.noise_meta.get("relative_intensity_noise", 0.0) * r.value
            v = max(float(rng.normal(r.value, sigma)), 0.0) if sigma > 0 else float(r.value)
        out.append(replace(r, value=v))
    return out


def _one_resample(args):
    records, seed_seq, metric_fn = args
    rng = np.random.default_rng(seed_seq)
    result = mle_reconstruct(resample_records(records, rng))
    return np.atleast_1d(np.asarray(metric_fn(result.rho), dtype=float))


def resample_uncertainty(records, n_resamples: int = 200, metric_fn=None, seed: int = 0, n_jobs: int = 1):
    """Monte-Carlo mean and standard deviation of ``metric_fn`` over resampled data.

    ``metric_fn`` maps a DensityMatrix to a float or an array of floats; it
    defaults to purity. Results do not depend on ``n_jobs``.
    """
    if n_resamples < 2:
        raise ValueError("n_resamples must be at least 2")
    if metric_fn is None:
        from .metrics import purity as metric_fn
    records = list(records)
    seeds = np.random.SeedSequence(seed).spawn(n_resamples)
    tasks = [(records, s, metric_fn) for s in seeds]
    if n_jobs == 1:
        values = [_one_resample(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(_one_resample, tasks))
    values = np.array(values)
    mean, std = values.mean(axis=0), values.std(axis=0, ddof=1)
    if mean.size == 1:
        return float(mean[0]), float(std[0])
    return mean, std
