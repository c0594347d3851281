"""States of the path/polarization hyperentangled source.

Basis conventions: polarization ``H=0, V=1``; path ``A=0, B=1``. The kappa
subsystems discretize the transverse momentum inside a mask hole into K bins
with centres in ``[-1/2, 1/2]`` (aperture units).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .linalg import DensityMatrix, PureStateVector, tensor

POL, PATH, KAPPA = (0, 1), (2, 3), (4, 5)
_S2 = 1 / np.sqrt(2)


@dataclass(frozen=True)
class SourceConfig:
    """Physical parameters of the source.

    ``kappa_phase_gradient`` is the phase (radians per aperture unit) that the
    VV amplitude picks up across the hole; it is the only coupling between
    polarization and kappa.
    """

    phi: float = 0.0
    theta: float = 0.0
    kappa_bins: int = 21
    kappa_phase_gradient: float = 0.0
    kappa_profile: str = "uniform"
    kappa_sigma: float | None = None

    def __post_init__(self):
        if int(self.kappa_bins) != self.kappa_bins or self.kappa_bins < 1:
            raise ValueError(f"kappa_bins must be a positive integer, got {self.kappa_bins!r}")
        if self.kappa_profile not in ("uniform", "gaussian"):
            raise ValueError(f"unknown kappa profile {self.kappa_profile!r}")
        if self.kappa_profile == "gaussian" and not (self.kappa_sigma and self.kappa_sigma > 0):
            raise ValueError("gaussian kappa profile needs a positive kappa_sigma")


@dataclass(frozen=True)
class MixedStateSpec:
    visibility: float
    phi: float = 0.0
    kind: str = "two_qubit_psi"

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility!r}")
        if self.kind not in ("one_qubit", "two_qubit_psi"):
            raise ValueError(f"unknown mixed-state kind {self.kind!r}")


def pol_state(phi: float) -> PureStateVector:
    """``(|HH> + e^{i phi}|VV>)/sqrt(2)``."""
    return PureStateVector([_S2, 0, 0, _S2 * np.exp(1j * phi)], (2, 2))


def path_state(theta: float) -> PureStateVector:
    """``(|AB> + e^{i theta}|BA>)/sqrt(2)``, photon 1 first."""
    return PureStateVector([0, _S2, _S2 * np.exp(1j * theta), 0], (2, 2))


def hyper_state(cfg: SourceConfig) -> PureStateVector:
    """Pol x path product state, dims ``(2, 2, 2, 2)``."""
    if cfg.kappa_bins != 1:
        raise ValueError("hyper_state is the kappa-free model; use hyper_state_kappa for kappa_bins > 1")
    return tensor(pol_state(cfg.phi), path_state(cfg.theta))


def kappa_grid(bins: int) -> np.ndarray:
    """Bin centres across the aperture."""
    return -0.5 + (np.arange(bins) + 0.5) / bins


def kappa_weights(cfg: SourceConfig) -> np.ndarray:
    """Probability weight per kappa bin, summing to one."""
    k = kappa_grid(cfg.kappa_bins)
    if cfg.kappa_profile == "uniform":
        p = np.ones_like(k)
    else:
        p = np.exp(-0.5 * (k / cfg.kappa_sigma) ** 2)
    return p / p.sum()


def pol_kappa_amplitudes(cfg: SourceConfig) -> np.ndarray:
    """Joint pol-kappa amplitude tensor indexed ``[l1, l2, k1, k2]``."""
    k = kappa_grid(cfg.kappa_bins)
    w = np.sqrt(kappa_weights(cfg))
    ww = np.outer(w, w)
    phase = np.exp(1j * (cfg.phi + cfg.kappa_phase_gradient * (k[:, None] + k[None, :])))
    f = np.zeros((2, 2, cfg.kappa_bins, cfg.kappa_bins), dtype=complex)
    f[0, 0] = _S2 * ww
    f[1, 1] = _S2 * ww * phase
    return f


def hyper_state_kappa(cfg: SourceConfig) -> PureStateVector:
    """Hyperentangled state with kappa, dims ``(2, 2, 2, 2, K, K)``.

    The path factor stays separable; only polarization is correlated with
    kappa.
    """
    f = pol_kappa_amplitudes(cfg)
    path = path_state(cfg.theta).amplitudes.reshape(2, 2)
    psi = np.einsum("abkl,cd->abcdkl", f, path)
    K = cfg.kappa_bins
    return PureStateVector.normalized(psi.ravel(), (2, 2, 2, 2, K, K))


def kappa_coherence(cfg: SourceConfig) -> complex:
    """Mean of ``exp(i alpha (k1 + k2))`` over the kappa weights.

    The HH-VV coherence of the kappa-traced polarization state is this factor
    times ``e^{-i phi}/2``.
    """
    k = kappa_grid(cfg.kappa_bins)
    chi = np.sum(kappa_weights(cfg) * np.exp(1j * cfg.kappa_phase_gradient * k))
    return complex(chi * chi)


def traced_pol_purity(cfg: SourceConfig) -> float:
    """Purity of the kappa-traced polarization state, closed form."""
    return 0.5 + 0.5 * abs(kappa_coherence(cfg)) ** 2


def calibrate_phase_gradient(target_purity: float, cfg: SourceConfig | None = None) -> float:
    """Smallest non-negative phase gradient giving the target polarization purity.

    Other fields of ``cfg`` (bins, profile) are kept. Targets must lie in
    ``(min reachable, 1]``; the search stops at the first crossing.
    """
    cfg = cfg or SourceConfig()
    if not 0.5 <= target_purity <= 1.0:
        raise ValueError(f"target purity must lie in [0.5, 1], got {target_purity!r}")
    if target_purity == 1.0:
        return 0.0

    def excess(alpha):
        return traced_pol_purity(replace(cfg, kappa_phase_gradient=alpha)) - target_purity

    alphas = np.linspace(0.0, 2 * np.pi * cfg.kappa_bins, 64 * cfg.kappa_bins + 1)
    prev = alphas[0]
    for a in alphas[1:]:
        if excess(a) <= 0:
            return float(brentq(excess, prev, a, xtol=1e-14, rtol=1e-14))
        prev = a
    raise ValueError(f"polarization purity {target_purity} is not reachable with this kappa profile")


def mixed_state(spec: MixedStateSpec) -> DensityMatrix:
    """Mixture of a balanced superposition with white noise restricted to its support.

    ``one_qubit``: ``[[1/2, e^{-i phi} V/2], [e^{i phi} V/2, 1/2]]``.
    ``two_qubit_psi``: the same block on ``|01>, |10>`` inside a 4x4 matrix.
    """
    v, phi = spec.visibility, spec.phi
    block = np.array([[0.5, np.exp(-1j * phi) * v / 2], [np.exp(1j * phi) * v / 2, 0.5]])
    if spec.kind == "one_qubit":
        return DensityMatrix(block, (2,))
    rho = np.zeros((4, 4), dtype=complex)
    rho[1:3, 1:3] = block
    return DensityMatrix(rho, (2, 2))
