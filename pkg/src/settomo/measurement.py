"""Synthetic QST and SET measurement records.

Each degree of freedom is measured with the overcomplete 6 x 6 set of
product projectors built from the eigenstates of the three Pauli operators.
QST records carry Poisson coincidence counts with a uniform accidental
floor. SET records carry stimulated intensities computed from the state
projected onto the central kappa bin, with Gaussian relative noise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import DensityMatrix, PureStateVector, partial_trace, project_subsystems
from .states import KAPPA, PATH, POL

DOFS = ("polarization", "path")
PROTOCOLS = ("QST", "SET")

_S2 = 1 / np.sqrt(2)
# Order within each alphabet: sigma_z pair, sigma_x pair, sigma_y pair; the
# first member of each pair is the +1 eigenstate.
_KETS = [
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([_S2, _S2], dtype=complex),
    np.array([_S2, -_S2], dtype=complex),
    np.array([_S2, 1j * _S2], dtype=complex),
    np.array([_S2, -1j * _S2], dtype=complex),
]
ALPHABETS = {
    "polarization": ("H", "V", "D", "A", "L", "R"),
    "path": ("A", "B", "A+B", "A-B", "A+iB", "A-iB"),
}
# Pauli operator measured by each alphabet pair, and outcome sign per label.
PAULI_OF_PAIR = ("z", "x", "y")


class DegenerateConfigError(ValueError):
    """The requested configuration leaves nothing to measure."""


def single_projector(dof: str, label: str) -> np.ndarray:
    k = _KETS[label_index(dof, label)]
    return np.outer(k, k.conj())


def label_index(dof: str, label: str) -> int:
    try:
        return ALPHABETS[dof].index(label)
    except (KeyError, ValueError):
        raise ValueError(f"unknown label {label!r} for degree of freedom {dof!r}") from None


@dataclass(frozen=True)
class ProjectorSetting:
    dof: str
    s1: str
    s2: str

    def __post_init__(self):
        label_index(self.dof, self.s1)
        label_index(self.dof, self.s2)

    @property
    def indices(self) -> tuple[int, int]:
        return label_index(self.dof, self.s1), label_index(self.dof, self.s2)

    @property
    def basis(self) -> tuple[int, int]:
        """Pair of Pauli-basis indices (0=z, 1=x, 2=y) for the two photons."""
        i, j = self.indices
        return i // 2, j // 2

    @property
    def signs(self) -> tuple[int, int]:
        i, j = self.indices
        return 1 - 2 * (i % 2), 1 - 2 * (j % 2)

    def projector(self) -> np.ndarray:
        return np.kron(single_projector(self.dof, self.s1), single_projector(self.dof, self.s2))


@dataclass(frozen=True)
class MeasurementRecord:
    """One setting's outcome.

    ``value`` is a coincidence count for QST and an intensity (arbitrary
    units) for SET. ``noise_meta`` holds ``singles_rate_hz``,
    ``accidental_rate_hz``, ``gate_window_s`` for QST and
    ``relative_intensity_noise``, ``background`` for SET.
    """

    setting: ProjectorSetting
    protocol: str
    value: float
    duration: float
    noise_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.value < 0:
            raise ValueError("counts/intensity must be non-negative")

    @property
    def dof(self) -> str:
        return self.setting.dof

    @property
    def background(self) -> float:
        """Expected non-signal contribution to ``value``."""
        if self.protocol == "QST":
            return self.noise_meta.get("accidental_rate_hz", 0.0) * self.duration
        return self.noise_meta.get("background", 0.0)


@dataclass(frozen=True)
class ProtocolConfig:
    qst_rate_scale: float = 100.0
    qst_duration_per_setting: float = 60.0
    car: float = 100.0
    gate_window: float = 9e-9
    set_gain: float = 1e4
    set_noise_fraction: float = 0.01
    set_background_fraction: float = 0.0
    set_duration_per_setting: float = 2.0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("qst_rate_scale", "qst_duration_per_setting", "car", "gate_window",
                     "set_gain", "set_duration_per_setting"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.set_noise_fraction < 0 or self.set_background_fraction < 0:
            raise ValueError("SET noise parameters must be non-negative")


def tomography_settings(dof: str) -> list[ProjectorSetting]:
    """All 36 ordered label pairs, first photon slowest."""
    if dof not in ALPHABETS:
        raise ValueError(f"unknown degree of freedom {dof!r}")
    labels = ALPHABETS[dof]
    return [ProjectorSetting(dof, a, b) for a, b in itertools.product(labels, labels)]


def born_probability(state: DensityMatrix, setting: ProjectorSetting) -> float:
    if state.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {state.dims}")
    p = np.trace(state.matrix @ setting.projector())
    if abs(p.imag) > 1e-12:
        raise ValueError("Born probability has an imaginary part; state is not Hermitian")
    return float(min(max(p.real, 0.0), 1.0))


def _rng(seed: int, protocol: str, dof: str, index: int) -> np.random.Generator:
    # Independent stream per (seed, protocol, dof, setting).
    return np.random.default_rng([int(seed) & (2**64 - 1), PROTOCOLS.index(protocol), DOFS.index(dof), index])


def expected_qst_counts(state: DensityMatrix, cfg: ProtocolConfig, dof: str) -> np.ndarray:
    """Mean coincidence counts per setting, in ``tomography_settings`` order."""
    probs = np.array([born_probability(state, s) for s in tomography_settings(dof)])
    rate = cfg.qst_rate_scale * probs / probs.max() + cfg.qst_rate_scale / cfg.car
    return rate * cfg.qst_duration_per_setting


def _qst_meta(cfg: ProtocolConfig) -> dict:
    accidental = cfg.qst_rate_scale / cfg.car
    return {
        # Equal singles on both arms reproduce the accidental rate S^2 * window.
        "singles_rate_hz": float(np.sqrt(accidental / cfg.gate_window)),
        "accidental_rate_hz": float(accidental),
        "gate_window_s": float(cfg.gate_window),
    }


def simulate_qst(state: DensityMatrix, cfg: ProtocolConfig, dof: str) -> list[MeasurementRecord]:
    mu = expected_qst_counts(state, cfg, dof)
    meta = _qst_meta(cfg)
    records = []
    for i, (s, m) in enumerate(zip(tomography_settings(dof), mu)):
        n = int(_rng(cfg.rng_seed, "QST", dof, i).poisson(m))
        records.append(MeasurementRecord(s, "QST", n, cfg.qst_duration_per_setting, dict(meta)))
    return records


def noiseless_records(state: DensityMatrix, dof: str, counts_per_basis: float,
                      protocol: str = "QST") -> list[MeasurementRecord]:
    """Records whose values equal ``counts_per_basis`` times the Born probabilities."""
    return [
        MeasurementRecord(s, protocol, counts_per_basis * born_probability(state, s), 1.0, {})
        for s in tomography_settings(dof)
    ]


def _dof_keep(dof: str) -> tuple[int, int]:
    if dof not in DOFS:
        raise ValueError(f"unknown degree of freedom {dof!r}")
    return POL if dof == "polarization" else PATH


def qst_state(full_state: PureStateVector, dof: str) -> DensityMatrix:
    """Two-qubit state seen by coincidence counting: every other DOF traced out."""
    return partial_trace(full_state, _dof_keep(dof))


def set_slice_state(full_state: PureStateVector, dof: str) -> DensityMatrix:
    """Two-qubit state seen by a narrowband seed.

    Both kappa subsystems are projected onto the central bin, the other DOF
    is traced out.
    """
    if len(full_state.dims) != 6:
        raise ValueError(f"expected dims (2, 2, 2, 2, K, K), got {full_state.dims}")
    k = full_state.dims[KAPPA[0]]
    if k % 2 == 0:
        raise ValueError(f"kappa_bins={k} is even; there is no central bin")
    c = k // 2
    try:
        sliced = project_subsystems(full_state, {KAPPA[0]: c, KAPPA[1]: c})
    except ValueError as exc:
        raise DegenerateConfigError("state has no weight in the central kappa bin") from exc
    return partial_trace(sliced, _dof_keep(dof))


def simulate_set(full_state: PureStateVector, cfg: ProtocolConfig, dof: str,
                 source_cfg=None) -> list[MeasurementRecord]:
    if source_cfg is not None and len(full_state.dims) == 6 \
            and full_state.dims[KAPPA[0]] != source_cfg.kappa_bins:
        raise ValueError("state kappa dimension does not match source configuration")
    rho = set_slice_state(full_state, dof)
    background = cfg.set_background_fraction * cfg.set_gain
    meta = {"relative_intensity_noise": float(cfg.set_noise_fraction), "background": float(background)}
    records = []
    for i, s in enumerate(tomography_settings(dof)):
        eps = _rng(cfg.rng_seed, "SET", dof, i).normal(0.0, cfg.set_noise_fraction) \
            if cfg.set_noise_fraction > 0 else 0.0
        value = cfg.set_gain * born_probability(rho, s) * (1.0 + eps) + background
        records.append(MeasurementRecord(s, "SET", max(float(value), 0.0),
                                         cfg.set_duration_per_setting, dict(meta)))
    return records
